// Copyright 2026 The bregdecomp Authors.
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

#ifndef BREGDECOMP_ERRORS_HPP
#define BREGDECOMP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace bregdecomp {

/// Input outside an operation's contract (domain violation, bad shape, bad parameter).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver ran out of iterations. Carries the last iterate and its residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  [[nodiscard]] const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

/// The constraint intersection is empty, so the interaction term is undefined.
class AssumptionViolation : public std::runtime_error {
 public:
  explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

/// A diagnostic has no meaning at the given input (e.g. no active constraints).
class UndefinedDiagnostic : public std::runtime_error {
 public:
  explicit UndefinedDiagnostic(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bregdecomp

#endif  // BREGDECOMP_ERRORS_HPP
