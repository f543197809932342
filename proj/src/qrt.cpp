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

#include "bystander/qrt.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace bystander {

namespace {

void require_bipartite(const SuperOperator& l) {
  if (l.dims.size() != 2) throw DimensionError("correlation: generator must be bipartite");
}

Matrix evolve(const SuperOperator& l, const Matrix& x, double t) {
  if (t < 0.0) throw DomainError("correlation: negative time");
  if (x.rows() != l.dim()) throw DimensionError("correlation: operator dims differ from generator");
  if (t == 0.0) return x;
  return apply_map(expm((t * l.matrix).eval()), x);
}

Matrix lift(const Matrix& a, Index de) { return kron(a, Matrix::Identity(de, de)); }

void check_ops(const std::vector<Matrix>& ops, Index ds) {
  for (const auto& a : ops) {
    if (a.rows() != ds || a.cols() != ds) throw DimensionError("correlation: system operator dims differ");
  }
}

}  // namespace

Vector expectation(const SuperOperator& l_total, const Matrix& rho0_se, const std::vector<Matrix>& ops, double tau) {
  require_bipartite(l_total);
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  check_ops(ops, ds);
  const Matrix rho = evolve(l_total, rho0_se, tau);
  Vector out(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) out(i) = (lift(ops[i], de) * rho).trace();
  return out;
}

Vector exact_correlation(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se) {
  require_bipartite(l_total);
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  check_ops(req.right, ds);
  check_ops({req.left}, ds);
  const Matrix rho_t = evolve(l_total, rho0_se, req.t);
  const Matrix x = evolve(l_total, (rho_t * lift(req.left, de)).eval(), req.tau);
  Vector out(req.right.size());
  for (std::size_t i = 0; i < req.right.size(); ++i) out(i) = (lift(req.right[i], de) * x).trace();
  return out;
}

Vector qrt_prediction(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se,
                      const Matrix& rho0_e) {
  require_bipartite(l_total);
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  check_ops(req.right, ds);
  check_ops({req.left}, ds);
  if (rho0_e.rows() != de) throw DimensionError("qrt_prediction: environment state dims differ");
  const Matrix rho_s = trace_env(evolve(l_total, rho0_se, req.t), ds, de);
  const Matrix g = req.tau == 0.0 ? Matrix::Identity(l_total.matrix.rows(), l_total.matrix.cols())
                                  : expm((req.tau * l_total.matrix).eval());
  const Matrix gs = reduced_system_map(g, rho0_e, ds, de);
  const Matrix x = apply_map(gs, (rho_s * req.left).eval());
  Vector out(req.right.size());
  for (std::size_t i = 0; i < req.right.size(); ++i) out(i) = (req.right[i] * x).trace();
  return out;
}

double qrt_deviation(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se,
                     const Matrix& rho0_e) {
  const Vector diff = exact_correlation(l_total, req, rho0_se) - qrt_prediction(l_total, req, rho0_se, rho0_e);
  return diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff();
}

Matrix stationary_state(const SuperOperator& l, double gap_tol) {
  const Index d = l.dim();
  Eigen::ComplexEigenSolver<Matrix> solver(l.matrix);
  if (solver.info() != Eigen::Success) throw NumericalError("stationary_state: eigensolver failed");
  const Vector& ev = solver.eigenvalues();
  std::vector<Index> order(ev.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(ev(a)) < std::abs(ev(b)); });
  if (ev.size() > 1 && std::abs(ev(order[1])) <= gap_tol) {
    throw NumericalError("stationary_state: kernel is degenerate (no spectral gap)");
  }
  Matrix rho = unvec(solver.eigenvectors().col(order[0]), d);
  const Complex tr = rho.trace();
  if (std::abs(tr) < kTolNum) throw NumericalError("stationary_state: kernel vector is traceless");
  rho /= tr;
  return (rho + rho.adjoint()) / 2.0;
}

}  // namespace bystander
