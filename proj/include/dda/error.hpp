// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dda {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Raised when two images (or an image and a grid) disagree on dimensions.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace dda
