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

// Matrix exponential by scaling and squaring with diagonal Pade
// approximants of degree 3, 5, 7, 9 or 13 (Higham, SIAM J. Matrix Anal.
// Appl. 26, 2005).

#pragma once

#include <array>
#include <cmath>

#include <Eigen/LU>

#include "bystander/tensor.hpp"

namespace bystander {

namespace detail {

template <typename Real>
Real one_norm(const CMat<Real>& a) {
  if (a.size() == 0) return Real(0);
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Real, std::size_t N>
void pade_low(const CMat<Real>& a, const std::array<long double, N>& b, CMat<Real>& u, CMat<Real>& v) {
  const Index n = a.rows();
  const CMat<Real> eye = CMat<Real>::Identity(n, n);
  const CMat<Real> a2 = a * a;
  CMat<Real> power = eye;
  CMat<Real> uu = CMat<Real>::Zero(n, n);
  CMat<Real> vv = CMat<Real>::Zero(n, n);
  for (std::size_t k = 0; k + 1 < N; k += 2) {
    vv += Real(b[k]) * power;
    uu += Real(b[k + 1]) * power;
    power = power * a2;
  }
  u.noalias() = a * uu;
  v = vv;
}

template <typename Real>
void pade13(const CMat<Real>& a, CMat<Real>& u, CMat<Real>& v) {
  static constexpr std::array<long double, 14> b = {
      64764752532480000.L, 32382376266240000.L, 7771770303897600.L, 1187353796428800.L, 129060195264000.L,
      10559470521600.L,    670442572800.L,      33522128640.L,      1323241920.L,       40840800.L,
      960960.L,            16380.L,             182.L,              1.L};
  const Index n = a.rows();
  const CMat<Real> eye = CMat<Real>::Identity(n, n);
  const CMat<Real> a2 = a * a;
  const CMat<Real> a4 = a2 * a2;
  const CMat<Real> a6 = a4 * a2;
  CMat<Real> tmp = Real(b[13]) * a6 + Real(b[11]) * a4 + Real(b[9]) * a2;
  CMat<Real> uu = a6 * tmp;
  uu += Real(b[7]) * a6 + Real(b[5]) * a4 + Real(b[3]) * a2 + Real(b[1]) * eye;
  u.noalias() = a * uu;
  tmp = Real(b[12]) * a6 + Real(b[10]) * a4 + Real(b[8]) * a2;
  v.noalias() = a6 * tmp;
  v += Real(b[6]) * a6 + Real(b[4]) * a4 + Real(b[2]) * a2 + Real(b[0]) * eye;
}

}  // namespace detail

template <typename Derived>
CMat<typename Derived::RealScalar> expm(const Eigen::MatrixBase<Derived>& input) {
  using Real = typename Derived::RealScalar;
  if (input.rows() != input.cols()) throw DimensionError("expm: matrix not square");
  CMat<Real> a = input;
  const Index n = a.rows();
  if (n == 0) return a;
  if (!a.allFinite()) throw NumericalError("expm: non-finite input");

  static constexpr std::array<long double, 4> b3 = {120.L, 60.L, 12.L, 1.L};
  static constexpr std::array<long double, 6> b5 = {30240.L, 15120.L, 3360.L, 420.L, 30.L, 1.L};
  static constexpr std::array<long double, 8> b7 = {17297280.L, 8648640.L, 1995840.L, 277200.L,
                                                    25200.L,    1512.L,    56.L,      1.L};
  static constexpr std::array<long double, 10> b9 = {17643225600.L, 8821612800.L, 2075673600.L, 302702400.L, 30270240.L,
                                                     2162160.L,     110880.L,     3960.L,       90.L,        1.L};

  const Real norm = detail::one_norm(a);
  CMat<Real> u(n, n), v(n, n);
  int squarings = 0;
  if (norm <= Real(1.495585217958292e-2)) {
    detail::pade_low(a, b3, u, v);
  } else if (norm <= Real(2.539398330063230e-1)) {
    detail::pade_low(a, b5, u, v);
  } else if (norm <= Real(9.504178996162932e-1)) {
    detail::pade_low(a, b7, u, v);
  } else if (norm <= Real(2.097847961257068e0)) {
    detail::pade_low(a, b9, u, v);
  } else {
    const Real theta13 = Real(5.371920351148152e0);
    if (norm > theta13) {
      squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
      a /= std::ldexp(Real(1), squarings);
    }
    detail::pade13(a, u, v);
  }
  CMat<Real> result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = (result * result).eval();
  if (!result.allFinite()) throw NumericalError("expm: overflow");
  return result;
}

/// exp(t L)[X] for a superoperator L.
template <typename Real>
BasicOperator<Real> expm_apply(const BasicSuperOperator<Real>& l, const BasicOperator<Real>& x, Real t) {
  if (t < Real(0)) throw DomainError("expm_apply: negative time");
  if (l.dim() != x.dim()) throw DimensionError("expm_apply: dimension mismatch");
  if (t == Real(0)) return x;
  return BasicOperator<Real>(unvec(expm((t * l.matrix).eval()) * vec(x.data), x.dim()), x.dims);
}

}  // namespace bystander
