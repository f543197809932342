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

// Casual-bystander couplings: the environment evolves autonomously while
// each environment transition B_alpha applies a trace-preserving map to
// the system.

#pragma once

#include <optional>
#include <vector>

#include "bystander/lindblad.hpp"

namespace bystander {

using KrausOps = std::vector<Matrix>;

struct BystanderCoupling {
  /// Hermitian positive semidefinite rate matrix Gamma_{ab}.
  Matrix gamma;
  /// Environment operators B_a.
  std::vector<Matrix> env_ops;
  /// sys_maps[a][b] holds Kraus operators of S_{ab}. An entry may be empty
  /// only when gamma(a, b) vanishes.
  std::vector<std::vector<KrausOps>> sys_maps;

  Index system_dim() const;
  Index env_dim() const;
  std::size_t channels() const { return env_ops.size(); }
};

/// Diagonal coupling: rates[a] with env_ops[a] and maps[a].
BystanderCoupling diagonal_coupling(const std::vector<double>& rates, const std::vector<Matrix>& env_ops,
                                    const std::vector<KrausOps>& maps);

/// Throws DomainError naming the first violated coupling invariant.
void validate_coupling(const BystanderCoupling& c, double tol = kTolStruct);

/// Superoperator of S_{ab} on the system.
Matrix sys_map(const BystanderCoupling& c, std::size_t a, std::size_t b);

/// Interaction part sum_ab Gamma_ab [B_a S_ab[.] B_b^dag - {B_b^dag B_a, .}/2]
/// on system (x) environment. Does not validate the coupling.
Matrix coupling_generator(const BystanderCoupling& c);

/// L_s (x) id + id (x) L_e + interaction. Validates the coupling.
SuperOperator build_generalSU(const SuperOperator& l_s, const SuperOperator& l_e, const BystanderCoupling& c);

struct BystanderCheck {
  bool holds = false;
  double violation = 0.0;
  /// Tr_s L[(I/d_s) (x) .] as an environment superoperator; set when holds.
  std::optional<SuperOperator> env_generator;
};

/// Tests Tr_s(L[X (x) Y]) = Tr(X) A[Y] over Hermitian operator bases.
BystanderCheck verify_bystander_condition(const SuperOperator& l_se, double tol = kTolStruct);

struct UnitaryNoGo {
  bool is_bystander = false;
  double defect = 0.0;
  /// Environment block Q_e, and any local system Hamiltonian H_s with
  /// H = H_s (x) I + I (x) Q_e. Set when is_bystander.
  std::optional<Matrix> q_env;
  std::optional<Matrix> h_system;
};

UnitaryNoGo unitary_no_go_check(const Operator& h_se, double tol = 1e-12);

/// Jumps T_{k,a} = V_k (x) B_a stored at index k * env_ops.size() + a.
struct FactorizedLindblad {
  std::vector<Matrix> sys_ops;
  std::vector<Matrix> env_ops;
  Matrix rates;
};

struct DConstraint {
  bool holds = false;
  double defect = 0.0;
  Matrix gamma;
};

DConstraint check_D_constraint(const FactorizedLindblad& raw, double tol = kTolStruct);

/// Environment-only generator L_e + sum_ab Gamma_ab (B_a . B_b^dag - {B_b^dag B_a, .}/2).
SuperOperator env_marginal_generator(const BystanderCoupling& c, const SuperOperator& l_e);

struct SeparableDecomposition {
  RealVector weights;
  Matrix env_basis;
  std::vector<Matrix> cond_states;
  double residual = 0.0;
};

/// Blocks of rho_se in the eigenbasis of Tr_s rho_se.
SeparableDecomposition separability_decompose(const Matrix& rho_se, Index ds, Index de);
SeparableDecomposition separability_decompose(const DensityMatrix& rho_se);

struct ConditionalRates {
  /// phi(c, ct) = <c|L_e[|ct><ct|]|c>.
  RealMatrix phi;
  /// transition(from, to) = sum_ab Gamma_ab <to|B_a|from><from|B_b^dag|to>.
  RealMatrix transition;
  /// Weighted map applied on the transition from -> to; empty when its rate vanishes.
  std::vector<std::optional<Matrix>> maps;

  const std::optional<Matrix>& map(Index from, Index to) const { return maps[from * phi.rows() + to]; }
};

ConditionalRates conditional_rates(const BystanderCoupling& c, const SuperOperator& l_e, const Matrix& env_basis,
                                   double tol = kTolStruct);

struct EvolutionResidual {
  double max_residual = 0.0;
  std::size_t evaluated = 0;
  std::size_t unreliable = 0;
  bool tracking_failed = false;
};

/// Finite-difference check of the population balance for p_c(t) along a
/// propagated trajectory of rho_se.
EvolutionResidual pc_evolution_residual(const std::vector<Matrix>& states, const std::vector<double>& times,
                                        const BystanderCoupling& c, const SuperOperator& l_e);

/// Same for the conditional system states rho_c(t), which also needs L_s.
EvolutionResidual rho_c_evolution_residual(const std::vector<Matrix>& states, const std::vector<double>& times,
                                           const BystanderCoupling& c, const SuperOperator& l_s,
                                           const SuperOperator& l_e);

/// Complete scenario: dims, generators, coupling, initial product state, grid.
struct ModelSpec {
  Index ds = 0;
  Index de = 0;
  SuperOperator l_s;
  SuperOperator l_e;
  BystanderCoupling coupling;
  Matrix rho0_s;
  Matrix rho0_e;
  std::vector<double> times;

  /// Bipartite generator L_T.
  SuperOperator total_generator() const { return build_generalSU(l_s, l_e, coupling); }
  /// Environment marginal generator.
  SuperOperator env_generator() const { return env_marginal_generator(coupling, l_e); }
  Matrix initial_state() const { return kron(rho0_s, rho0_e); }
};

}  // namespace bystander
