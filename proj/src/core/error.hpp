// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include <stdexcept>
#include <string>

namespace msfa {

/// Failure categories. The C API maps each one onto a stable error code and
/// the CLI maps them onto process exit codes.
enum class ErrorKind {
    InvalidArgument,
    ShapeMismatch,
    InvalidGeometry,
    Io,
    BadMagic,
    Truncated,
    DimensionOverflow,
    UnsupportedFormat,
    Domain,
    Profile,
    Numeric,
    State,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition)
        throw Error(kind, what);
}

} // namespace msfa
