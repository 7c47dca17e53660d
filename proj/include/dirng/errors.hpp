// Copyright 2026 The dirng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dirng {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Qubit count of zero or above the simulator cap.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Out-of-range or duplicate qubit index.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Contradictory or incomplete experiment configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Input does not parse against the expected schema.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Input parses but its internal totals disagree.
class IntegrityError : public Error {
  public:
    using Error::Error;
};

/// A replayed source ran out of recorded outcomes.
class DepletedSourceError : public Error {
  public:
    using Error::Error;
};

/// Bit stream too short for a statistical test.
class LengthError : public Error {
  public:
    using Error::Error;
};

/// Requested extractor output exceeds the min-entropy budget.
class BudgetError : public Error {
  public:
    using Error::Error;
};

/// Target win probability cannot be produced by the noise model.
class UnfittableError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace dirng
