// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <stdexcept>
#include <string>

namespace celltrack {

enum class ErrorKind {
    InvalidArgument,
    Io,
    Parse,
    Validation,
    Dimension,
    Undefined,
};

// All recoverable failures inside the library are reported through this type.
// The C API maps `kind()` onto its status codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace celltrack
