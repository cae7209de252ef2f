// Copyright 2026 The qvgc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Exception hierarchy shared by every qvgc module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace qvgc {

/// Base class of all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested qubit count exceeds the simulator cap.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Qubit index out of range or duplicated.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Argument count or vector length does not match what the callee expects.
class ArityError : public Error {
  public:
    using Error::Error;
};

/// API used in a way its contract forbids (unbound circuit, wrong regime, ...).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Input that cannot be processed, e.g. an all-zero vector to normalise.
class DegenerateInputError : public Error {
  public:
    using Error::Error;
};

/// Structurally valid request that this implementation does not support.
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

/// A NaN or infinity showed up where a finite number is required.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Malformed or unreadable file.
class FormatError : public Error {
  public:
    using Error::Error;
};

namespace detail {
[[noreturn]] inline void fail_arity(const std::string &what, std::size_t expected,
                                    std::size_t got) {
    throw ArityError(what + ": expected " + std::to_string(expected) +
                     ", got " + std::to_string(got));
}
} // namespace detail

} // namespace qvgc
