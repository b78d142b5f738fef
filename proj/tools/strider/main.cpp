#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "strider_cli/commands.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Activation buffers are large and short-lived; keep them off mmap.
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
    std::vector<std::string> args(argv + 1, argv + argc);
    return strider::cli::run(args, std::cout, std::cerr);
}
