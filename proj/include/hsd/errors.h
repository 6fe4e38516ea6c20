// Copyright 2026 The HSD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSD_ERRORS_H_
#define HSD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace hsd {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed or inconsistent user input (files, flags, configs).
// The CLI maps it to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// Raised when numeric preconditions are violated (shape mismatch,
// non-finite gradients, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsd

#endif  // HSD_ERRORS_H_
