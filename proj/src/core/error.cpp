// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "core/error.hpp"

namespace msfa {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::InvalidGeometry: return "invalid geometry";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::BadMagic: return "bad magic";
    case ErrorKind::Truncated: return "truncated payload";
    case ErrorKind::DimensionOverflow: return "dimension overflow";
    case ErrorKind::UnsupportedFormat: return "unsupported format";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Profile: return "profile error";
    case ErrorKind::Numeric: return "numeric failure";
    case ErrorKind::State: return "invalid state";
    }
    return "unknown";
}

} // namespace msfa
