#pragma once

#include <stdexcept>
#include <string>

namespace ctsev {

/// Raised for malformed or unusable input data (bad files, geometry
/// mismatches, empty scans). Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an internal invariant is violated. Maps to exit code 3.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace ctsev
