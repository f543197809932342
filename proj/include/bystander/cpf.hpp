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

// Conditional past-future correlations. Three projective measurements at
// times 0, t and t + tau; the correlation between the first and last
// outcomes conditioned on the middle outcome y.

#pragma once

#include <optional>
#include <vector>

#include "bystander/structure.hpp"

namespace bystander {

struct Outcome {
  double value = 0.0;
  Matrix projector;
};

using Measurement = std::vector<Outcome>;

/// Projector-valued measurement grouped by eigenvalue (degenerate
/// eigenvalues within tol share one outcome). Values ascending.
Measurement spectral_measurement(const Matrix& observable, double tol = kTolNum);

/// Rank-one measurement in an eigenbasis of the observable.
Measurement eigenbasis_measurement(const Matrix& observable);

struct ClosureReport {
  bool closed = false;
  double max_defect = 0.0;
  /// product[a][b] = index of S_a S_b in the set, or -1.
  std::vector<std::vector<int>> product;
};

ClosureReport check_closure(const std::vector<Matrix>& maps, double tol = kTolStruct);

/// Identity followed by the distinct diagonal maps S_aa of channels with
/// nonzero rate, closed under composition by breadth-first products.
std::vector<Matrix> map_group(const BystanderCoupling& c, std::size_t max_size = 64, double tol = kTolStruct);

struct PropagatorDecomposition {
  double t = 0.0;
  std::vector<Matrix> sys_maps;
  std::vector<Matrix> env_maps;
  /// Max-norm of exp(tL) - sum_a S_a (x) F_a(t).
  double residual = 0.0;
};

/// Least-squares split of exp(t L) into sum_a S_a (x) F_a(t). Throws
/// DomainError when the maps are not composition-closed and NumericalError
/// when they are linearly dependent.
PropagatorDecomposition extract_decomposition(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps,
                                              double t);

enum class Scheme { kDeterministic, kRandom };

struct CpfObservables {
  Measurement x;
  Measurement y;
  Measurement z;
};

struct CpfResult {
  Scheme scheme = Scheme::kDeterministic;
  double t = 0.0;
  double tau = 0.0;
  std::size_t y_check = 0;
  std::size_t nz = 0, ny = 0, nx = 0;
  /// P(z, y, x) at index (z * ny + y) * nx + x.
  std::vector<double> joint;
  double p_y = 0.0;
  double value = 0.0;

  double at(std::size_t z, std::size_t y, std::size_t x) const { return joint[(z * ny + y) * nx + x]; }
};

/// Correlation of x and z conditioned on y_check, from a filled joint table.
double cpf_from_joint(const CpfResult& r, const CpfObservables& obs);

/// Formula route for the deterministic scheme. The value uses the
/// Theta/Lambda factorization when the y outcome is rank one and the joint
/// table otherwise.
CpfResult cpf_deterministic(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps,
                            const CpfObservables& obs, double t, double tau, std::size_t y_check,
                            const Matrix& rho0_s, const Matrix& rho0_e);

/// Formula route for the random scheme; choice(y, x) is the probability of
/// preparing outcome y's state after observing x.
CpfResult cpf_random(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps, const CpfObservables& obs,
                     const RealMatrix& choice, double t, double tau, std::size_t y_check, const Matrix& rho0_s,
                     const Matrix& rho0_e);

/// Direct simulation of the three measurements on the bipartite state.
CpfResult cpf_measurement_oracle(const SuperOperator& l_total, const CpfObservables& obs, double t, double tau,
                                 std::size_t y_check, Scheme scheme, const Matrix& rho0_s, const Matrix& rho0_e,
                                 const std::optional<RealMatrix>& choice = std::nullopt);

/// Throws DomainError unless choice has non-negative entries and unit column sums.
void check_stochastic(const RealMatrix& choice, std::size_t ny, std::size_t nx);

}  // namespace bystander
