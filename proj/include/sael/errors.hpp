// Copyright 2026 The sael Authors
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

#ifndef SAEL_ERRORS_HPP
#define SAEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sael {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: parameters, shapes, files. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParameterError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A series whose sum of squares (or relevant order statistic) is zero.
class DegenerateSeriesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Parameter outside the declared domain of a score (e.g. an unstable VAR matrix).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure on valid input. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, double last_residual)
        : NumericalError(what + " (last residual " + std::to_string(last_residual) + ")"),
          residual_(last_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace sael

#endif // SAEL_ERRORS_HPP
