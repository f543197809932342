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

#include <optional>
#include <vector>

#include "bystander/expm.hpp"
#include "bystander/tensor.hpp"

namespace bystander {

/// GKSL data: L[r] = -i[H, r] + sum_ij rates(i,j) (T_i r T_j^dag - {T_j^dag T_i, r}/2).
struct LindbladSpec {
  Matrix hamiltonian;
  std::vector<Matrix> jump_ops;
  Matrix rates;
  Dims dims;
};

/// Throws DomainError unless `rates` is Hermitian and positive semidefinite.
void check_rate_matrix(const Matrix& rates, double tol = kTolStruct);

SuperOperator assemble_lindbladian(const LindbladSpec& spec);

/// Equivalent spec with diagonal non-negative rates. Channels whose rate
/// is below tolerance are dropped.
LindbladSpec diagonalize_rate_matrix(const LindbladSpec& spec, double tol = kTolStruct);

/// Throws DomainError unless times start at 0 and strictly increase.
void check_time_grid(const std::vector<double>& times);

struct PropagatorFamily {
  std::vector<double> times;
  std::vector<Matrix> maps;
  Dims dims;
};

struct Propagation {
  PropagatorFamily family;
  std::vector<Matrix> states;
};

PropagatorFamily propagator_family(const SuperOperator& l, const std::vector<double>& times);

Propagation propagate(const SuperOperator& l, const DensityMatrix& rho0, const std::vector<double>& times);

/// States only, without storing the maps.
std::vector<Matrix> propagate_states(const SuperOperator& l, const Matrix& rho0, const std::vector<double>& times);

/// X -> Tr_e(G[X (x) rho_e]) for a bipartite map G.
Matrix reduced_system_map(const Matrix& g, const Matrix& rho_e, Index ds, Index de);

PropagatorFamily reduced_system_family(const PropagatorFamily& bipartite, const Matrix& rho_e, Index ds, Index de);

struct TimeLocalGenerator {
  std::vector<double> times;
  /// Empty where the point carries a divergence marker.
  std::vector<std::optional<Matrix>> generators;
  /// max_k h_k * ||L(t_k)||; the finite-difference step is trusted when <= 0.1.
  double step_norm = 0.0;
  bool step_warning = false;

  bool divergent(std::size_t k) const { return !generators[k].has_value(); }
};

inline constexpr double kDivergenceInverseNorm = 1e12;

/// L(t) = (dG/dt) G^-1 by second-order finite differences.
TimeLocalGenerator time_local_generator(const PropagatorFamily& family);

struct WitnessSeries {
  std::vector<double> times;
  std::vector<double> distances;
  double max_increase = 0.0;
  bool non_markovian = false;
};

/// Trace distance between exp(tL)[rho_a] and exp(tL)[rho_b], optionally on
/// one subsystem of L.dims. Non-Markovian when D increases by more than tol.
WitnessSeries blp_trace_distance_witness(const SuperOperator& l, const Matrix& rho_a, const Matrix& rho_b,
                                         const std::vector<double>& times, std::optional<std::size_t> keep = {},
                                         double tol = kTolNum);

}  // namespace bystander
