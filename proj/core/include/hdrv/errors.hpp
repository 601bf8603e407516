#pragma once

#include <stdexcept>
#include <string>

namespace hdrv {

/// File could not be parsed (bad magic, truncated payload, ...).
struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

/// Decoded data violates a value-domain contract (NaN in HDR, LDR out of [0,1], ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative numeric procedure produced a non-finite value.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hdrv
