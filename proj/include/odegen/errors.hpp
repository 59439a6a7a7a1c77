#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odegen {

// Iterative routine ran out of iterations; carries the last estimate it had.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& msg, double last_estimate)
        : std::runtime_error(msg), last_estimate_(last_estimate) {}
    double last_estimate() const noexcept { return last_estimate_; }

private:
    double last_estimate_;
};

// Numerical breakdown (e.g. a Gram matrix that stays indefinite after jitter escalation).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An enumeration would exceed its configured guard.
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// State blew up (non-finite or past the magnitude guard); carries the step/layer index.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& msg, std::size_t index)
        : std::runtime_error(msg), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Malformed input file; carries the byte offset at which parsing stopped.
class format_error : public std::runtime_error {
public:
    format_error(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

}  // namespace odegen
