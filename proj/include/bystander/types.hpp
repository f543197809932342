// Copyright 2026 The Bystander Authors
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

#pragma once

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bystander {

inline constexpr double kTolStruct = 1e-10;
inline constexpr double kTolNum = 1e-8;

using Index = Eigen::Index;
using Dims = std::vector<Index>;

template <typename Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Matrix = CMat<double>;
using Vector = CVec<double>;
using RealVector = RVec<double>;
using RealMatrix = Eigen::MatrixXd;

/// Shape or index mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input violates a mathematical precondition (hermiticity, positivity, trace).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Index product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<Index>());
}

/// Dense operator with declared subsystem dimensions. The first entry of
/// dims is the slowest tensor index.
template <typename Real>
struct BasicOperator {
  CMat<Real> data;
  Dims dims;

  BasicOperator() = default;
  explicit BasicOperator(CMat<Real> m) : data(std::move(m)), dims{data.rows()} { check(); }
  BasicOperator(CMat<Real> m, Dims d) : data(std::move(m)), dims(std::move(d)) { check(); }

  Index dim() const { return data.rows(); }

 private:
  void check() const {
    if (data.rows() != data.cols()) {
      throw DimensionError("operator must be square");
    }
    if (product(dims) != data.rows()) {
      throw DimensionError("operator dims do not multiply to matrix size");
    }
  }
};

/// Linear map on operators, acting on column-stacked vectorizations.
template <typename Real>
struct BasicSuperOperator {
  CMat<Real> matrix;
  Dims dims;
  bool trace_preserving = false;

  BasicSuperOperator() = default;
  BasicSuperOperator(CMat<Real> m, Dims d, bool tp = false)
      : matrix(std::move(m)), dims(std::move(d)), trace_preserving(tp) {
    const Index d2 = product(dims) * product(dims);
    if (matrix.rows() != d2 || matrix.cols() != d2) {
      throw DimensionError("superoperator matrix must be d^2 x d^2");
    }
  }

  Index dim() const { return product(dims); }
};

using Operator = BasicOperator<double>;
using SuperOperator = BasicSuperOperator<double>;

}  // namespace bystander
