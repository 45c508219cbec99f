// SPDX-License-Identifier: Apache-2.0
//
// mmimo-iot: Monte-Carlo simulation of massive MIMO links for URLLC and mMTC
// Copyright (C) 2026 mmimo-iot contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmimo {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Raised when a configuration or argument violates a documented precondition.
class ConfigError : public std::invalid_argument
{
  public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

// Raised when a numerical input is degenerate (zero vector, empty subspace).
class DegenerateInput : public std::runtime_error
{
  public:
    explicit DegenerateInput(const std::string &what) : std::runtime_error(what) {}
};

// Raised by zero-forcing when the estimated channels are (nearly) collinear.
class IllConditioned : public std::runtime_error
{
  public:
    IllConditioned(const std::string &what, double condition_number)
        : std::runtime_error(what + " (condition number " + std::to_string(condition_number) + ")"),
          condition_number_(condition_number)
    {
    }
    double condition_number() const noexcept { return condition_number_; }

  private:
    double condition_number_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace mmimo
