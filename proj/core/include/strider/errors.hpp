#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strider {

/// Malformed or inconsistent input data (mesh files, labels, manifests).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mesh file syntax error; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// NaN/Inf produced during a forward or backward pass, or a non-finite loss.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape disagreement between tensors passed to a layer.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace strider
