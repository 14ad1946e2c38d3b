// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ghs {

/// Non-finite or out-of-range numeric input.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Degenerate splat frame or invalid camera.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scene, camera or image file could not be parsed. The message carries the
/// offending line or field.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ghs
