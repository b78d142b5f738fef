#pragma once

#include <cstdint>
#include <random>

namespace strider {

/// Seeded pseudo-random source with platform-independent draws.
///
/// std::mt19937_64 has a standardized output sequence, but the standard
/// distributions do not, so integer and real draws are derived here directly
/// from the raw 64-bit output.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent stream keyed by a base seed and up to three stream ids
    /// (e.g. mesh id, walk index, epoch).
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Uniform double in [0, 1).
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (deterministic, one draw per call).
    double normal();

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a; used for content hashes of checkpoints and meshes.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace strider
