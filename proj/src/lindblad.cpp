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

#include "bystander/lindblad.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace bystander {

void check_rate_matrix(const Matrix& rates, double tol) {
  if (rates.rows() != rates.cols()) throw DimensionError("rate matrix must be square");
  if (rates.size() == 0) return;
  const double scale = std::max(1.0, rates.cwiseAbs().maxCoeff());
  if (hermiticity_defect(rates) > tol * scale) throw DomainError("rate matrix is not Hermitian");
  if (herm_eig(rates, tol * scale).values.minCoeff() < -tol * scale) {
    throw DomainError("rate matrix is not positive semidefinite");
  }
}

SuperOperator assemble_lindbladian(const LindbladSpec& spec) {
  const Index d = spec.hamiltonian.rows();
  if (spec.hamiltonian.cols() != d) throw DimensionError("Hamiltonian must be square");
  const std::size_t n = spec.jump_ops.size();
  if (static_cast<std::size_t>(spec.rates.rows()) != n) throw DimensionError("rate matrix size differs from jump count");
  check_rate_matrix(spec.rates);
  for (const auto& t : spec.jump_ops) {
    if (t.rows() != d || t.cols() != d) throw DimensionError("jump operator dims differ from Hamiltonian");
  }
  Matrix l = commutator_generator(spec.hamiltonian);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex g = spec.rates(i, j);
      if (g == Complex(0)) continue;
      l += g * dissipator(spec.jump_ops[i], spec.jump_ops[j]);
    }
  }
  Dims dims = spec.dims.empty() ? Dims{d} : spec.dims;
  return SuperOperator(std::move(l), std::move(dims), true);
}

LindbladSpec diagonalize_rate_matrix(const LindbladSpec& spec, double tol) {
  check_rate_matrix(spec.rates, tol);
  const auto eig = herm_eig(spec.rates, tol * std::max(1.0, spec.rates.cwiseAbs().maxCoeff()));
  LindbladSpec out;
  out.hamiltonian = spec.hamiltonian;
  out.dims = spec.dims;
  std::vector<double> kept;
  for (Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) <= tol) continue;
    Matrix op = Matrix::Zero(spec.hamiltonian.rows(), spec.hamiltonian.cols());
    for (std::size_t i = 0; i < spec.jump_ops.size(); ++i) op += eig.vectors(i, k) * spec.jump_ops[i];
    out.jump_ops.push_back(op);
    kept.push_back(eig.values(k));
  }
  out.rates = Matrix::Zero(kept.size(), kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) out.rates(k, k) = kept[k];
  return out;
}

void check_time_grid(const std::vector<double>& times) {
  if (times.empty()) throw DomainError("time grid is empty");
  if (times.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DomainError("time grid must be strictly increasing");
  }
}

namespace {

// Step exponentials reused across equal steps; uniform grids cost one expm.
class StepCache {
 public:
  explicit StepCache(const Matrix& l) : l_(l) {}

  const Matrix& step(double h) {
    for (const auto& [key, value] : cache_) {
      if (std::abs(key - h) <= 1e-14 * std::max(1.0, std::abs(h))) return value;
    }
    cache_.emplace_back(h, expm((h * l_).eval()));
    return cache_.back().second;
  }

 private:
  const Matrix& l_;
  std::vector<std::pair<double, Matrix>> cache_;
};

}  // namespace

PropagatorFamily propagator_family(const SuperOperator& l, const std::vector<double>& times) {
  check_time_grid(times);
  PropagatorFamily fam;
  fam.times = times;
  fam.dims = l.dims;
  StepCache cache(l.matrix);
  fam.maps.reserve(times.size());
  fam.maps.push_back(Matrix::Identity(l.matrix.rows(), l.matrix.cols()));
  for (std::size_t k = 1; k < times.size(); ++k) {
    fam.maps.push_back(cache.step(times[k] - times[k - 1]) * fam.maps.back());
  }
  return fam;
}

Propagation propagate(const SuperOperator& l, const DensityMatrix& rho0, const std::vector<double>& times) {
  if (rho0.dim() != l.dim()) throw DimensionError("propagate: state and generator dims differ");
  Propagation out;
  out.family = propagator_family(l, times);
  const Vector v0 = vec(rho0.matrix());
  out.states.reserve(times.size());
  for (const auto& g : out.family.maps) out.states.push_back(unvec(g * v0, rho0.dim()));
  return out;
}

std::vector<Matrix> propagate_states(const SuperOperator& l, const Matrix& rho0, const std::vector<double>& times) {
  check_time_grid(times);
  if (rho0.rows() != l.dim()) throw DimensionError("propagate_states: state and generator dims differ");
  StepCache cache(l.matrix);
  std::vector<Matrix> states;
  states.reserve(times.size());
  Vector v = vec(rho0);
  states.push_back(rho0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    v = cache.step(times[k] - times[k - 1]) * v;
    states.push_back(unvec(v, rho0.rows()));
  }
  return states;
}

Matrix reduced_system_map(const Matrix& g, const Matrix& rho_e, Index ds, Index de) {
  if (g.rows() != ds * de * ds * de) throw DimensionError("reduced_system_map: map dims differ");
  if (rho_e.rows() != de) throw DimensionError("reduced_system_map: env state dims differ");
  Matrix out(ds * ds, ds * ds);
  for (Index b = 0; b < ds * ds; ++b) {
    Matrix e = Matrix::Zero(ds, ds);
    e(b % ds, b / ds) = 1.0;
    out.col(b) = vec(trace_env(apply_map(g, kron(e, rho_e)), ds, de));
  }
  return out;
}

PropagatorFamily reduced_system_family(const PropagatorFamily& bipartite, const Matrix& rho_e, Index ds, Index de) {
  PropagatorFamily out;
  out.times = bipartite.times;
  out.dims = Dims{ds};
  for (const auto& g : bipartite.maps) out.maps.push_back(reduced_system_map(g, rho_e, ds, de));
  return out;
}

namespace {

Matrix derivative(const PropagatorFamily& fam, std::size_t k) {
  const auto& t = fam.times;
  const auto& g = fam.maps;
  const std::size_t n = t.size();
  if (n == 2) return (g[1] - g[0]) / (t[1] - t[0]);
  if (k == 0) {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    return -(2 * h1 + h2) / (h1 * (h1 + h2)) * g[0] + (h1 + h2) / (h1 * h2) * g[1] - h1 / (h2 * (h1 + h2)) * g[2];
  }
  if (k == n - 1) {
    const double a = t[n - 2] - t[n - 3], b = t[n - 1] - t[n - 2];
    return b / (a * (a + b)) * g[n - 3] - (a + b) / (a * b) * g[n - 2] + (2 * b + a) / (b * (a + b)) * g[n - 1];
  }
  const double h1 = t[k] - t[k - 1], h2 = t[k + 1] - t[k];
  return -h2 / (h1 * (h1 + h2)) * g[k - 1] + (h2 - h1) / (h1 * h2) * g[k] + h1 / (h2 * (h1 + h2)) * g[k + 1];
}

double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

TimeLocalGenerator time_local_generator(const PropagatorFamily& family) {
  const std::size_t n = family.times.size();
  if (n < 2 || family.maps.size() != n) throw DimensionError("time_local_generator: need at least two grid points");
  TimeLocalGenerator out;
  out.times = family.times;
  out.generators.resize(n);

  std::vector<bool> marked(n, false);
  std::vector<Eigen::FullPivLU<Matrix>> lus;
  lus.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    lus.emplace_back(family.maps[k]);
    if (!lus[k].isInvertible() || inf_norm(lus[k].inverse()) > kDivergenceInverseNorm) marked[k] = true;
  }
  // A zero of an eigenvalue of G between grid points shows up as a
  // transfer map G_{k+1} G_k^-1 with a non-positive real eigenvalue part.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (marked[k] || marked[k + 1]) continue;
    const Matrix transfer = family.maps[k + 1] * lus[k].inverse();
    Eigen::ComplexEigenSolver<Matrix> solver(transfer, false);
    if ((solver.eigenvalues().real().array() <= 0.0).any()) {
      marked[k] = true;
      marked[k + 1] = true;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (marked[k]) continue;
    Matrix l = derivative(family, k) * lus[k].inverse();
    double h = 0.0;
    if (k > 0) h = std::max(h, family.times[k] - family.times[k - 1]);
    if (k + 1 < n) h = std::max(h, family.times[k + 1] - family.times[k]);
    out.step_norm = std::max(out.step_norm, h * inf_norm(l));
    out.generators[k] = std::move(l);
  }
  out.step_warning = out.step_norm > 0.1;
  return out;
}

WitnessSeries blp_trace_distance_witness(const SuperOperator& l, const Matrix& rho_a, const Matrix& rho_b,
                                         const std::vector<double>& times, std::optional<std::size_t> keep,
                                         double tol) {
  if (rho_a.rows() != rho_b.rows()) throw DimensionError("witness: state dims differ");
  const auto sa = propagate_states(l, rho_a, times);
  const auto sb = propagate_states(l, rho_b, times);
  WitnessSeries out;
  out.times = times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (keep) {
      out.distances.push_back(trace_distance(partial_trace(sa[k], l.dims, *keep), partial_trace(sb[k], l.dims, *keep)));
    } else {
      out.distances.push_back(trace_distance(sa[k], sb[k]));
    }
    if (k > 0) out.max_increase = std::max(out.max_increase, out.distances[k] - out.distances[k - 1]);
  }
  out.non_markovian = out.max_increase > tol;
  return out;
}

}  // namespace bystander
