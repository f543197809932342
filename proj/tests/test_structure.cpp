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

#include <gtest/gtest.h>

#include "bystander/models.hpp"
#include "bystander/pauli.hpp"
#include "bystander/structure.hpp"
#include "test_support.hpp"

namespace bystander {
namespace {

using testing::Rng;
using testing::linspace;

struct RandomModel {
  SuperOperator l_s, l_e;
  BystanderCoupling c;
};

RandomModel random_model(Index ds, Index de, std::size_t channels, Rng& rng) {
  return {testing::random_lindbladian(ds, 1, rng), testing::random_lindbladian(de, 1, rng),
          testing::random_coupling(ds, de, channels, rng)};
}

TEST(Structure, CouplingGeneratorMatchesOperatorForm) {
  Rng rng(21);
  const auto m = random_model(2, 3, 2, rng);
  const Matrix x = testing::random_density(6, rng);
  Matrix expect = Matrix::Zero(6, 6);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const Matrix anti = kron(Matrix(Matrix::Identity(2, 2)), Matrix(m.c.env_ops[b].adjoint() * m.c.env_ops[a]));
      for (const auto& v : m.c.sys_maps[a][b]) {
        expect += m.c.gamma(a, b) * kron(v, m.c.env_ops[a]) * x * kron(v, m.c.env_ops[b]).adjoint();
      }
      expect -= 0.5 * m.c.gamma(a, b) * (anti * x + x * anti);
    }
  }
  EXPECT_LT((apply_map(coupling_generator(m.c), x) - expect).norm(), 1e-11);
}

TEST(Structure, ValidCouplingsSatisfyCondition) {
  Rng rng(22);
  for (Index ds : {2, 3}) {
    for (Index de : {2, 3}) {
      const auto m = random_model(ds, de, 2, rng);
      const SuperOperator l = build_generalSU(m.l_s, m.l_e, m.c);
      const auto check = verify_bystander_condition(l);
      EXPECT_TRUE(check.holds) << check.violation;
      ASSERT_TRUE(check.env_generator.has_value());
      EXPECT_LT((check.env_generator->matrix - env_marginal_generator(m.c, m.l_e).matrix).norm(), 1e-10);
    }
  }
}

TEST(Structure, IsingTermBreaksCondition) {
  Rng rng(23);
  const auto m = random_model(2, 2, 1, rng);
  SuperOperator l = build_generalSU(m.l_s, m.l_e, m.c);
  l.matrix += commutator_generator(kron(pauli_z(), pauli_x()));
  const auto check = verify_bystander_condition(l);
  EXPECT_FALSE(check.holds);
  EXPECT_GT(check.violation, 1e-3);
  EXPECT_FALSE(check.env_generator.has_value());
}

TEST(Structure, ValidationRejectsBrokenCouplings) {
  Rng rng(24);
  auto c = testing::random_coupling(2, 2, 2, rng);
  auto broken = c;
  broken.sys_maps[0][0][0] *= 1.2;
  EXPECT_THROW(validate_coupling(broken), DomainError);
  broken = c;
  broken.gamma(0, 0) = -1.0;
  EXPECT_THROW(validate_coupling(broken), DomainError);
  broken = c;
  broken.sys_maps[0][1].clear();
  EXPECT_THROW(validate_coupling(broken), DomainError);
  broken = c;
  broken.env_ops.pop_back();
  EXPECT_THROW(validate_coupling(broken), DimensionError);
  EXPECT_NO_THROW(validate_coupling(c));
}

TEST(Structure, UnitaryNoGoFactorsLocalHamiltonians) {
  Rng rng(25);
  const Matrix hs = testing::random_hermitian(3, rng);
  const Matrix q = testing::random_hermitian(2, rng);
  const Matrix h = kron(hs, Matrix(Matrix::Identity(2, 2))) + kron(Matrix(Matrix::Identity(3, 3)), q);
  const auto r = unitary_no_go_check(Operator(h, Dims{3, 2}));
  ASSERT_TRUE(r.is_bystander);
  const Matrix rebuilt = kron(*r.h_system, Matrix(Matrix::Identity(2, 2))) + kron(Matrix(Matrix::Identity(3, 3)), *r.q_env);
  EXPECT_LT((rebuilt - h).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(verify_bystander_condition(SuperOperator(commutator_generator(h), Dims{3, 2}, true)).holds);

  const Matrix generic = testing::random_hermitian(6, rng);
  EXPECT_FALSE(unitary_no_go_check(Operator(generic, Dims{3, 2})).is_bystander);
  EXPECT_FALSE(verify_bystander_condition(SuperOperator(commutator_generator(generic), Dims{3, 2}, true)).holds);
}

TEST(Structure, DConstraint) {
  // V_k (x) B_a with unitary V_k: sum_k V_k^dag V_k proportional to I.
  FactorizedLindblad raw;
  raw.sys_ops = {pauli_x(), pauli_z()};
  raw.env_ops = {lowering()};
  raw.rates = Matrix::Identity(2, 2) * 0.5;
  auto r = check_D_constraint(raw);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.gamma(0, 0).real(), 1.0, 1e-14);
  raw.sys_ops = {lowering(), pauli_z()};
  r = check_D_constraint(raw);
  EXPECT_FALSE(r.holds);
  EXPECT_GT(r.defect, 0.1);
}

TEST(Structure, EnvMarginalMatchesPartialTraceOfEvolution) {
  Rng rng(26);
  const auto m = random_model(2, 3, 2, rng);
  const SuperOperator l = build_generalSU(m.l_s, m.l_e, m.c);
  const Matrix rs = testing::random_density(2, rng), re = testing::random_density(3, rng);
  const auto times = linspace(0.0, 3.0, 7);
  const auto joint = propagate_states(l, kron(rs, re), times);
  const auto env = propagate_states(env_marginal_generator(m.c, m.l_e), re, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_LT((trace_system(joint[k], 2, 3) - env[k]).norm(), 1e-10);
  }
}

TEST(Structure, SeparabilityOfClassicallyCorrelatedState) {
  Rng rng(27);
  const Matrix r0 = testing::random_density(2, rng), r1 = testing::random_density(2, rng);
  const Matrix u = testing::random_unitary(2, rng);
  const Vector c0 = u.col(0), c1 = u.col(1);
  const Matrix rho = 0.3 * kron(r0, Matrix(c0 * c0.adjoint())) + 0.7 * kron(r1, Matrix(c1 * c1.adjoint()));
  const auto d = separability_decompose(rho, 2, 2);
  EXPECT_LT(d.residual, 1e-12);
  EXPECT_NEAR(d.weights(0), 0.3, 1e-12);
  EXPECT_LT((d.cond_states[0] / d.weights(0) - r0).norm(), 1e-10);
  EXPECT_LT((d.cond_states[1] / d.weights(1) - r1).norm(), 1e-10);
}

TEST(Structure, SeparabilityFlagsCoherentCorrelations) {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const auto d = separability_decompose(Matrix(psi * psi.adjoint()), 2, 2);
  EXPECT_GT(d.residual, 0.4);
}

// Classical two-state environment: L_e and B are incoherent transitions in
// a fixed basis, so rho_se stays block diagonal and p_c obeys a rate law.
ModelSpec classical_env_model() {
  ModelSpec m;
  m.ds = 2;
  m.de = 2;
  m.l_s = SuperOperator(commutator_generator(Matrix(0.3 * pauli_x())), Dims{2}, true);
  LindbladSpec e;
  e.hamiltonian = Matrix::Zero(2, 2);
  e.jump_ops = {raising()};
  e.rates = Matrix::Identity(1, 1) * 0.4;
  m.l_e = assemble_lindbladian(e);
  m.coupling = diagonal_coupling({0.9}, {lowering()}, {KrausOps{pauli_z()}});
  m.rho0_s = Matrix::Constant(2, 2, 0.5);
  m.rho0_e = Matrix::Identity(2, 2) * 0.5;
  m.rho0_e(0, 0) = 0.8;
  m.rho0_e(1, 1) = 0.2;
  return m;
}

TEST(Structure, ConditionalRatesOfClassicalEnvironment) {
  const ModelSpec m = classical_env_model();
  const auto r = conditional_rates(m.coupling, m.l_e, Matrix::Identity(2, 2));
  // Down -> up at 0.4 through L_e, up -> down at 0.9 through B.
  EXPECT_NEAR(r.phi(0, 1), 0.4, 1e-14);
  EXPECT_NEAR(r.transition(0, 1), 0.9, 1e-14);
  EXPECT_NEAR(r.transition(1, 0), 0.0, 1e-14);
  ASSERT_TRUE(r.map(0, 1).has_value());
  EXPECT_LT((*r.map(0, 1) - sandwich(pauli_z(), pauli_z())).norm(), 1e-14);
  EXPECT_FALSE(r.map(1, 0).has_value());
}

TEST(Structure, PopulationAndConditionalStateBalance) {
  const ModelSpec m = classical_env_model();
  const auto times = linspace(0.0, 4.0, 801);
  const auto states = propagate_states(m.total_generator(), m.initial_state(), times);
  for (const auto& s : states) EXPECT_LT(separability_decompose(s, 2, 2).residual, 1e-12);
  const auto pc = pc_evolution_residual(states, times, m.coupling, m.l_e);
  EXPECT_FALSE(pc.tracking_failed);
  EXPECT_GT(pc.evaluated, 700u);
  EXPECT_LT(pc.max_residual, 1e-4);
  const auto rc = rho_c_evolution_residual(states, times, m.coupling, m.l_s, m.l_e);
  EXPECT_GT(rc.evaluated, 700u);
  EXPECT_LT(rc.max_residual, 1e-4);
}

TEST(Structure, FluorModelIsBystander) {
  const ModelSpec m = fluor_model({1.0, 0.7, Matrix()});
  const auto check = verify_bystander_condition(m.total_generator());
  EXPECT_TRUE(check.holds);
  EXPECT_LT((check.env_generator->matrix - fluor_env_generator(1.0, 0.7).matrix).norm(), 1e-12);
}

}  // namespace
}  // namespace bystander
