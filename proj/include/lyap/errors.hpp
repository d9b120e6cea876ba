#pragma once

#include <stdexcept>
#include <string>

namespace lyap {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent shapes, invalid values, broken type invariants.
struct ValidationError : Error {
    using Error::Error;
};

// A configured resource cap (cell count, iteration budget) was exceeded.
struct ResourceError : Error {
    using Error::Error;
};

// The countable-family truncation could not bring the tail below the
// requested budget: the integrable sup-envelope hypothesis behind the
// truncation cannot be met within the allowed index range.
struct EnvelopeHypothesisError : Error {
    using Error::Error;
};

// File or stream level failure while reading or writing artifacts.
struct IoError : Error {
    using Error::Error;
};

}  // namespace lyap
