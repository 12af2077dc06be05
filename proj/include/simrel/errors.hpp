#pragma once

#include <stdexcept>
#include <string>

namespace simrel {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inconsistent matrix/vector dimensions; message names the offending operand.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Malformed or unparsable input file; message carries the location.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// A pipeline stage was invoked before its prerequisites exist.
struct PrerequisiteError : Error {
    explicit PrerequisiteError(const std::string& msg) : Error(msg) {}
};

/// A configured resource cap (memory, size) would be exceeded.
struct ResourceError : Error {
    explicit ResourceError(const std::string& msg) : Error(msg) {}
};

}  // namespace simrel
