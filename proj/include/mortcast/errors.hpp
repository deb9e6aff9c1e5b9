#pragma once

#include <stdexcept>
#include <string>

namespace mortcast {

// Failure to read or write a file / stream.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data or arguments violate a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A quantity needed by the operation is numerically degenerate
// (zero variance, vanishing normalizer, ...).
class DegeneracyError : public std::domain_error {
public:
    explicit DegeneracyError(const std::string& msg) : std::domain_error(msg) {}
};

} // namespace mortcast
