/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ACVC_ERRORS_HPP_
#define ACVC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace acvc {

// Root of every error the library throws. The CLI maps subclasses to exit
// codes, so new error kinds should derive from one of the families below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched or invalid dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside its allowed domain (severity level, temperature, k, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A Fourier kind was handed to the photometric dispatcher, or vice versa.
class RoutingError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unsupported raster; message always names the path.
class DecodeError : public IoError {
 public:
  using IoError::IoError;
};

// Bad configuration key or value; message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace acvc

#endif  // ACVC_ERRORS_HPP_
