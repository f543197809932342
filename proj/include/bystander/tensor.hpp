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

// Dense tensor algebra on small multipartite Hilbert spaces.
//
// Vectorization is column stacking throughout: vec(A X B) = (B^T kron A) vec(X).

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "bystander/types.hpp"

namespace bystander {

template <typename Real = double>
CMat<Real> identity(Index d) {
  return CMat<Real>::Identity(d, d);
}

template <typename DerivedA, typename DerivedB>
CMat<typename DerivedA::RealScalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  using Real = typename DerivedA::RealScalar;
  CMat<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = std::complex<Real>(a(i, j)) * b.template cast<std::complex<Real>>();
    }
  }
  return out;
}

template <typename Real>
BasicOperator<Real> kron(const BasicOperator<Real>& a, const BasicOperator<Real>& b) {
  Dims dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return BasicOperator<Real>(kron(a.data, b.data), std::move(dims));
}

template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Marginal on subsystem `keep` of an operator with the given subsystem dims.
template <typename Derived>
CMat<typename Derived::RealScalar> partial_trace(const Eigen::MatrixBase<Derived>& x, const Dims& dims,
                                                 std::size_t keep) {
  if (keep >= dims.size()) {
    throw DimensionError("partial_trace: subsystem index " + std::to_string(keep) + " out of range");
  }
  if (product(dims) != x.rows() || x.rows() != x.cols()) {
    throw DimensionError("partial_trace: dims do not match operator");
  }
  Index left = 1;
  Index right = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k < keep) left *= dims[k];
    if (k > keep) right *= dims[k];
  }
  const Index dk = dims[keep];
  CMat<typename Derived::RealScalar> out = CMat<typename Derived::RealScalar>::Zero(dk, dk);
  for (Index i = 0; i < dk; ++i) {
    for (Index j = 0; j < dk; ++j) {
      for (Index l = 0; l < left; ++l) {
        for (Index r = 0; r < right; ++r) {
          out(i, j) += x((l * dk + i) * right + r, (l * dk + j) * right + r);
        }
      }
    }
  }
  return out;
}

template <typename Real>
BasicOperator<Real> partial_trace(const BasicOperator<Real>& x, std::size_t keep) {
  if (x.dims.size() < 2) {
    throw DimensionError("partial_trace: operator has fewer than two subsystems");
  }
  return BasicOperator<Real>(partial_trace(x.data, x.dims, keep), Dims{x.dims.at(keep)});
}

/// Tr_e of a bipartite (system, environment) operator.
template <typename Derived>
CMat<typename Derived::RealScalar> trace_env(const Eigen::MatrixBase<Derived>& x, Index ds, Index de) {
  return partial_trace(x, Dims{ds, de}, 0);
}

/// Tr_s of a bipartite (system, environment) operator.
template <typename Derived>
CMat<typename Derived::RealScalar> trace_system(const Eigen::MatrixBase<Derived>& x, Index ds, Index de) {
  return partial_trace(x, Dims{ds, de}, 1);
}

template <typename Real>
struct HermEig {
  RVec<Real> values;
  CMat<Real> vectors;
};

/// Eigenvalues ascending, orthonormal eigenvectors as columns.
template <typename Derived>
HermEig<typename Derived::RealScalar> herm_eig(const Eigen::MatrixBase<Derived>& h,
                                               typename Derived::RealScalar tol = kTolStruct) {
  using Real = typename Derived::RealScalar;
  const Real scale = std::max<Real>(Real(1), h.cwiseAbs().maxCoeff());
  if (h.rows() != h.cols()) throw DimensionError("herm_eig: matrix not square");
  if (hermiticity_defect(h) > tol * scale) throw DomainError("herm_eig: matrix is not Hermitian");
  CMat<Real> sym = (h + h.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<CMat<Real>> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Real>
HermEig<Real> herm_eig(const BasicOperator<Real>& h, Real tol = kTolStruct) {
  return herm_eig(h.data, tol);
}

/// Validated density matrix. Subnormalized states are admitted by
/// passing the expected trace.
template <typename Real>
class BasicDensityMatrix {
 public:
  BasicDensityMatrix() = default;
  explicit BasicDensityMatrix(BasicOperator<Real> op, Real tol = kTolStruct, Real expected_trace = Real(1))
      : op_(std::move(op)) {
    const CMat<Real>& m = op_.data;
    const Real scale = std::max<Real>(Real(1), m.cwiseAbs().maxCoeff());
    if (hermiticity_defect(m) > tol * scale) throw DomainError("density matrix is not Hermitian");
    if (std::abs(m.trace() - std::complex<Real>(expected_trace)) > tol) {
      throw DomainError("density matrix trace differs from expected value");
    }
    if (herm_eig(m, tol).values.minCoeff() < -tol) throw DomainError("density matrix has a negative eigenvalue");
  }
  explicit BasicDensityMatrix(CMat<Real> m, Real tol = kTolStruct)
      : BasicDensityMatrix(BasicOperator<Real>(std::move(m)), tol) {}

  const BasicOperator<Real>& op() const { return op_; }
  const CMat<Real>& matrix() const { return op_.data; }
  const Dims& dims() const { return op_.dims; }
  Index dim() const { return op_.dim(); }

 private:
  BasicOperator<Real> op_;
};

using DensityMatrix = BasicDensityMatrix<double>;

template <typename Derived>
CVec<typename Derived::RealScalar> vec(const Eigen::MatrixBase<Derived>& x) {
  CMat<typename Derived::RealScalar> m = x;
  return Eigen::Map<const CVec<typename Derived::RealScalar>>(m.data(), m.size());
}

template <typename Derived>
CMat<typename Derived::RealScalar> unvec(const Eigen::MatrixBase<Derived>& v, Index d) {
  if (v.size() != d * d) throw DimensionError("unvec: vector length is not d^2");
  CVec<typename Derived::RealScalar> c = v;
  return Eigen::Map<const CMat<typename Derived::RealScalar>>(c.data(), d, d);
}

/// X -> A X.
template <typename Derived>
CMat<typename Derived::RealScalar> spre(const Eigen::MatrixBase<Derived>& a) {
  return kron(CMat<typename Derived::RealScalar>::Identity(a.rows(), a.rows()), a);
}

/// X -> X B.
template <typename Derived>
CMat<typename Derived::RealScalar> spost(const Eigen::MatrixBase<Derived>& b) {
  return kron(b.transpose(), CMat<typename Derived::RealScalar>::Identity(b.rows(), b.rows()));
}

/// X -> A X B.
template <typename DerivedA, typename DerivedB>
CMat<typename DerivedA::RealScalar> sandwich(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return kron(b.transpose(), a);
}

/// X -> -i[H, X].
template <typename Derived>
CMat<typename Derived::RealScalar> commutator_generator(const Eigen::MatrixBase<Derived>& h) {
  using Real = typename Derived::RealScalar;
  return std::complex<Real>(0, -1) * (spre(h) - spost(h));
}

/// X -> T X C^dag - (1/2){C^dag T, X}.
template <typename DerivedT, typename DerivedC>
CMat<typename DerivedT::RealScalar> dissipator(const Eigen::MatrixBase<DerivedT>& t, const Eigen::MatrixBase<DerivedC>& c) {
  using Real = typename DerivedT::RealScalar;
  const CMat<Real> ct = c.adjoint() * t;
  return sandwich(t, c.adjoint()) - Real(0.5) * (spre(ct) + spost(ct));
}

template <typename Derived>
CMat<typename Derived::RealScalar> dissipator(const Eigen::MatrixBase<Derived>& t) {
  return dissipator(t, t);
}

/// Superoperator of X -> sum_k V_k X V_k^dag.
template <typename Real>
CMat<Real> kraus_superop(const std::vector<CMat<Real>>& kraus, Index d) {
  CMat<Real> out = CMat<Real>::Zero(d * d, d * d);
  for (const auto& v : kraus) out += sandwich(v, v.adjoint());
  return out;
}

template <typename Real>
BasicOperator<Real> apply_map(const BasicSuperOperator<Real>& l, const BasicOperator<Real>& x) {
  if (l.dim() != x.dim()) throw DimensionError("apply: superoperator and operator dims differ");
  return BasicOperator<Real>(unvec(l.matrix * vec(x.data), x.dim()), x.dims);
}

template <typename DerivedL, typename DerivedX>
CMat<typename DerivedX::RealScalar> apply_map(const Eigen::MatrixBase<DerivedL>& l, const Eigen::MatrixBase<DerivedX>& x) {
  if (l.cols() != x.size()) throw DimensionError("apply: superoperator and operator dims differ");
  return unvec(l * vec(x), x.rows());
}

/// Row vector r with r . vec(X) = Tr(X).
template <typename Real = double>
Eigen::Matrix<std::complex<Real>, 1, Eigen::Dynamic> trace_row(Index d) {
  return vec(CMat<Real>::Identity(d, d)).transpose();
}

template <typename Derived>
typename Derived::RealScalar trace_preservation_defect(const Eigen::MatrixBase<Derived>& l, Index d) {
  using Real = typename Derived::RealScalar;
  return (trace_row<Real>(d) * l).cwiseAbs().maxCoeff();
}

/// Matrix of the map (M1 tensor M2) on operators of the composite space,
/// given M1 on d1 x d1 operators and M2 on d2 x d2 operators.
template <typename DerivedA, typename DerivedB>
CMat<typename DerivedA::RealScalar> superop_tensor(const Eigen::MatrixBase<DerivedA>& m1, Index d1,
                                                   const Eigen::MatrixBase<DerivedB>& m2, Index d2) {
  using Real = typename DerivedA::RealScalar;
  if (m1.rows() != d1 * d1 || m2.rows() != d2 * d2) throw DimensionError("superop_tensor: shape mismatch");
  const Index d = d1 * d2;
  CMat<Real> out = CMat<Real>::Zero(d * d, d * d);
  auto idx = [&](Index i1, Index i2, Index j1, Index j2) { return (j1 * d2 + j2) * d + (i1 * d2 + i2); };
  for (Index a = 0; a < d1 * d1; ++a) {
    const Index i1 = a % d1, j1 = a / d1;
    for (Index b = 0; b < d1 * d1; ++b) {
      const std::complex<Real> x = m1(a, b);
      if (x == std::complex<Real>(0)) continue;
      const Index k1 = b % d1, l1 = b / d1;
      for (Index p = 0; p < d2 * d2; ++p) {
        const Index i2 = p % d2, j2 = p / d2;
        for (Index q = 0; q < d2 * d2; ++q) {
          const Index k2 = q % d2, l2 = q / d2;
          out(idx(i1, i2, j1, j2), idx(k1, k2, l1, l2)) = x * m2(p, q);
        }
      }
    }
  }
  return out;
}

/// Reshuffles a composite superoperator so that M = sum_a A_a (x) B_a
/// becomes R = sum_a vec(A_a) vec(B_a)^T, with vec the column stacking of
/// the d1^2 x d1^2 and d2^2 x d2^2 superoperator matrices.
template <typename Derived>
CMat<typename Derived::RealScalar> realign(const Eigen::MatrixBase<Derived>& m, Index d1, Index d2) {
  using Real = typename Derived::RealScalar;
  const Index d = d1 * d2;
  if (m.rows() != d * d || m.cols() != d * d) throw DimensionError("realign: shape mismatch");
  const Index n1 = d1 * d1, n2 = d2 * d2;
  CMat<Real> r(n1 * n1, n2 * n2);
  auto idx = [&](Index i1, Index i2, Index j1, Index j2) { return (j1 * d2 + j2) * d + (i1 * d2 + i2); };
  for (Index a = 0; a < n1; ++a) {
    for (Index b = 0; b < n1; ++b) {
      for (Index p = 0; p < n2; ++p) {
        for (Index q = 0; q < n2; ++q) {
          r(b * n1 + a, q * n2 + p) = m(idx(a % d1, p % d2, a / d1, p / d2), idx(b % d1, q % d2, b / d1, q / d2));
        }
      }
    }
  }
  return r;
}

/// Hilbert-Schmidt adjoint of a superoperator: Tr(Y^dag M[X]) = Tr((M^#[Y])^dag X).
template <typename Derived>
CMat<typename Derived::RealScalar> dual_map(const Eigen::MatrixBase<Derived>& m) {
  return m.adjoint();
}

/// The conjugated map X -> (M[X^dag])^dag.
template <typename Derived>
CMat<typename Derived::RealScalar> hermitian_conjugate_map(const Eigen::MatrixBase<Derived>& m, Index d) {
  using Real = typename Derived::RealScalar;
  const Index n = d * d;
  CMat<Real> out(n, n);
  auto t = [d](Index k) { return (k % d) * d + k / d; };
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) out(a, b) = std::conj(m(t(a), t(b)));
  }
  return out;
}

/// Orthonormal Hermitian basis of d x d matrices under Tr(A^dag B):
/// I/sqrt(d) first, then generalized Gell-Mann matrices scaled by 1/sqrt(2).
template <typename Real = double>
std::vector<CMat<Real>> hermitian_basis(Index d) {
  using C = std::complex<Real>;
  std::vector<CMat<Real>> out;
  out.push_back(CMat<Real>::Identity(d, d) / std::sqrt(Real(d)));
  const Real r2 = std::sqrt(Real(2));
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      CMat<Real> s = CMat<Real>::Zero(d, d);
      s(j, k) = s(k, j) = C(1) / r2;
      out.push_back(s);
      CMat<Real> a = CMat<Real>::Zero(d, d);
      a(j, k) = C(0, -1) / r2;
      a(k, j) = C(0, 1) / r2;
      out.push_back(a);
    }
  }
  for (Index l = 1; l < d; ++l) {
    CMat<Real> z = CMat<Real>::Zero(d, d);
    const Real norm = std::sqrt(Real(l * (l + 1)));
    for (Index m = 0; m < l; ++m) z(m, m) = C(1) / norm;
    z(l, l) = C(-Real(l)) / norm;
    out.push_back(z);
  }
  return out;
}

/// Half the trace norm of (a - b) for Hermitian operands.
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar trace_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Real = typename DerivedA::RealScalar;
  if (a.rows() != b.rows()) throw DimensionError("trace_distance: dims differ");
  CMat<Real> diff = a - b;
  diff = (diff + diff.adjoint()).eval() / Real(2);
  Eigen::SelfAdjointEigenSolver<CMat<Real>> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum() / Real(2);
}

template <typename Real>
Real trace_distance(const BasicDensityMatrix<Real>& a, const BasicDensityMatrix<Real>& b) {
  if (a.dims() != b.dims()) throw DimensionError("trace_distance: dims differ");
  return trace_distance(a.matrix(), b.matrix());
}

}  // namespace bystander
