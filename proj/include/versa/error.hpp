/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace versa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid layout, window or image placement.
struct ConfigError : Error {
    using Error::Error;
};

// Payload or binary does not fit.
struct SizeError : Error {
    using Error::Error;
};

// Malformed wire data or file contents.
struct FormatError : Error {
    using Error::Error;
};

// Exploration or enumeration budget exhausted.
struct ResourceError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t offset, std::size_t line, std::size_t column)
        : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
          offset(offset), line(line), column(column) {}
    std::size_t offset;
    std::size_t line;
    std::size_t column;
};

}  // namespace versa
