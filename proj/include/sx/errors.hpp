#pragma once

#include <stdexcept>
#include <string>

namespace sx {

// Base class for every recoverable failure raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; message carries the offending location.
struct ParseError : Error {
    ParseError(const std::string& path, long location, const std::string& what)
        : Error(path + ":" + std::to_string(location) + ": " + what),
          path(path),
          location(location) {}
    std::string path;
    long location;  // 1-based line for text formats, byte offset for binary
};

// Meshes that were required to share topology do not.
struct TopologyError : Error {
    using Error::Error;
};

// Rank-deficient or otherwise degenerate geometry fed to a solver.
struct DegenerateError : Error {
    using Error::Error;
};

}  // namespace sx
