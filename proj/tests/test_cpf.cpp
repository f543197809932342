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

#include "bystander/cpf.hpp"
#include "bystander/models.hpp"
#include "bystander/pauli.hpp"
#include "test_support.hpp"

namespace bystander {
namespace {

using testing::Rng;

CpfObservables same(const Measurement& m) { return {m, m, m}; }

TEST(Measurements, SpectralGroupsDegenerateEigenvalues) {
  const Matrix zz = pauli_string("ZZ");
  const auto m = spectral_measurement(zz);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0].value, -1.0, 1e-14);
  EXPECT_NEAR(m[0].projector.trace().real(), 2.0, 1e-14);
  const auto e = eigenbasis_measurement(zz);
  ASSERT_EQ(e.size(), 4u);
  Matrix sum = Matrix::Zero(4, 4);
  for (const auto& o : e) sum += o.projector;
  EXPECT_LT((sum - Matrix::Identity(4, 4)).norm(), 1e-13);
}

TEST(Closure, DetectsOpenSets) {
  const Matrix sz = sandwich(pauli_z(), pauli_z());
  const Matrix sx = sandwich(pauli_x(), pauli_x());
  const Matrix id = Matrix::Identity(4, 4);
  EXPECT_TRUE(check_closure({id, sz}).closed);
  EXPECT_FALSE(check_closure({id, sz, sx}).closed);
  EXPECT_TRUE(check_closure({id, sz, sx, Matrix(sx * sz)}).closed);
}

TEST(Closure, MapGroupOfMultipartiteCoupling) {
  MultipartiteParams p;
  p.n_qubits = 2;
  p.string_a = "ZY";
  p.string_b = "XX";
  p.omega = 0.3;
  const ModelSpec m = multipartite_model(p);
  const auto group = map_group(m.coupling);
  EXPECT_EQ(group.size(), 4u);
  EXPECT_TRUE(check_closure(group).closed);
}

TEST(Decomposition, RecoversKnownFactors) {
  // exp(tL) for L = S_z (x) A + id (x) B with commuting pieces.
  const Matrix sz = sandwich(pauli_z(), pauli_z());
  const Matrix id = Matrix::Identity(4, 4);
  const FluorDephasingParams p{1.0, 0.6, Matrix()};
  const ModelSpec m = fluor_model(p);
  const auto dec = extract_decomposition(m.total_generator(), {id, sz}, 0.9);
  EXPECT_LT(dec.residual, 1e-12);
  // F_0 + F_1 is the environment propagator and F_0 - F_1 is exp(t G^-).
  const Matrix env = expm((0.9 * fluor_env_generator(1.0, 0.6).matrix).eval());
  const Matrix minus = expm((0.9 * fluor_gpm_generator(1.0, 0.6, -1)).eval());
  EXPECT_LT((dec.env_maps[0] + dec.env_maps[1] - env).norm(), 1e-11);
  EXPECT_LT((dec.env_maps[0] - dec.env_maps[1] - minus).norm(), 1e-11);
  EXPECT_THROW(extract_decomposition(m.total_generator(), {id, sz, sz}, 0.9), NumericalError);
  EXPECT_THROW(extract_decomposition(m.total_generator(), {id, sz, sandwich(pauli_x(), pauli_x())}, 0.9), DomainError);
}

TEST(Decomposition, ResidualExposesMissingMaps) {
  const ModelSpec m = fluor_model({1.0, 0.6, Matrix()});
  const auto dec = extract_decomposition(m.total_generator(), {Matrix::Identity(4, 4)}, 0.9);
  EXPECT_GT(dec.residual, 1e-3);
}

// Random three-level environment driving a closed set of Pauli
// conjugations on the system.
ModelSpec random_pauli_model(const std::string& sa, const std::string& sb, Rng& rng) {
  const Matrix a = pauli_string(sa);
  const Index ds = a.rows();
  ModelSpec m;
  m.ds = ds;
  m.de = 3;
  m.l_s = SuperOperator(Matrix::Zero(ds * ds, ds * ds), Dims{ds}, true);
  m.l_e = testing::random_lindbladian(3, 1, rng);
  m.coupling = diagonal_coupling({0.8, 0.5}, {testing::random_complex(3, 3, rng), testing::random_complex(3, 3, rng)},
                                 {KrausOps{a}, KrausOps{pauli_string(sb)}});
  m.rho0_s = testing::random_density(ds, rng);
  m.rho0_e = testing::random_density(3, rng);
  return m;
}

TEST(Cpf, RandomEnvironmentsBothRoutesAgree) {
  Rng rng(43);
  for (int rep = 0; rep < 4; ++rep) {
    const ModelSpec m = random_pauli_model("Z", "X", rng);
    const auto maps = map_group(m.coupling);
    ASSERT_EQ(maps.size(), 4u);
    const SuperOperator l = m.total_generator();
    CpfObservables obs{spectral_measurement(testing::random_hermitian(2, rng)),
                       spectral_measurement(testing::random_hermitian(2, rng)),
                       spectral_measurement(testing::random_hermitian(2, rng))};
    const auto f = cpf_deterministic(l, maps, obs, 0.6, 1.3, rep % 2, m.rho0_s, m.rho0_e);
    const auto o = cpf_measurement_oracle(l, obs, 0.6, 1.3, rep % 2, Scheme::kDeterministic, m.rho0_s, m.rho0_e);
    EXPECT_NEAR(f.value, o.value, 1e-10);
    for (std::size_t k = 0; k < f.joint.size(); ++k) EXPECT_NEAR(f.joint[k], o.joint[k], 1e-10);
  }
}

TEST(Cpf, DegenerateMiddleOutcomeUsesJointTable) {
  Rng rng(45);
  const ModelSpec m = random_pauli_model("ZY", "XZ", rng);
  const auto maps = map_group(m.coupling);
  const SuperOperator l = m.total_generator();
  CpfObservables obs{spectral_measurement(pauli_string("XI")), spectral_measurement(pauli_string("ZI")),
                     spectral_measurement(testing::random_hermitian(4, rng))};
  ASSERT_EQ(obs.y.size(), 2u);
  const auto f = cpf_deterministic(l, maps, obs, 0.5, 0.9, 1, m.rho0_s, m.rho0_e);
  const auto o = cpf_measurement_oracle(l, obs, 0.5, 0.9, 1, Scheme::kDeterministic, m.rho0_s, m.rho0_e);
  EXPECT_NEAR(f.value, o.value, 1e-10);
  EXPECT_NEAR(f.p_y, o.p_y, 1e-10);
}

TEST(Cpf, RandomSchemeVanishes) {
  const FluorDephasingParams p{1.0, 1.0, Matrix()};
  Rng rng(44);
  const ModelSpec m = fluor_model(p, testing::random_density(2, rng));
  const auto maps = map_group(m.coupling);
  CpfObservables obs{spectral_measurement(pauli_x()), spectral_measurement(pauli_y()), spectral_measurement(pauli_x())};
  RealMatrix choice(2, 2);
  choice << 0.7, 0.2, 0.3, 0.8;
  for (double t : {0.4, 2.0}) {
    const auto f = cpf_random(m.total_generator(), maps, obs, choice, t, 1.1, 1, m.rho0_s, m.rho0_e);
    const auto o = cpf_measurement_oracle(m.total_generator(), obs, t, 1.1, 1, Scheme::kRandom, m.rho0_s, m.rho0_e, choice);
    EXPECT_LT(std::abs(f.value), 1e-12);
    EXPECT_LT(std::abs(o.value), 1e-12);
    for (std::size_t k = 0; k < f.joint.size(); ++k) EXPECT_NEAR(f.joint[k], o.joint[k], 1e-10);
  }
}

TEST(Cpf, InputValidation) {
  const ModelSpec m = fluor_model({1.0, 1.0, Matrix()});
  const auto maps = map_group(m.coupling);
  auto obs = same(spectral_measurement(pauli_x()));
  RealMatrix bad(2, 2);
  bad << 0.5, 0.5, 0.6, 0.5;
  EXPECT_THROW(cpf_random(m.total_generator(), maps, obs, bad, 1.0, 1.0, 0, m.rho0_s, m.rho0_e), DomainError);
  EXPECT_THROW(check_stochastic(RealMatrix::Constant(3, 2, 0.5), 2, 2), DimensionError);
  EXPECT_THROW(cpf_deterministic(m.total_generator(), maps, obs, -1.0, 1.0, 0, m.rho0_s, m.rho0_e), DomainError);
  EXPECT_THROW(cpf_deterministic(m.total_generator(), maps, obs, 1.0, 1.0, 5, m.rho0_s, m.rho0_e), DimensionError);
  obs.y.pop_back();
  EXPECT_THROW(cpf_deterministic(m.total_generator(), maps, obs, 1.0, 1.0, 0, m.rho0_s, m.rho0_e), DomainError);
  EXPECT_THROW(cpf_measurement_oracle(m.total_generator(), same(spectral_measurement(pauli_x())), 1.0, 1.0, 0,
                                      Scheme::kRandom, m.rho0_s, m.rho0_e),
               DomainError);
}

TEST(Cpf, VanishingConditionIsReported) {
  Matrix up = Matrix::Zero(2, 2);
  up(0, 0) = 1.0;
  const ModelSpec m = fluor_model({1.0, 1.0, Matrix()}, up);
  const auto obs = same(spectral_measurement(pauli_z()));
  EXPECT_THROW(cpf_deterministic(m.total_generator(), map_group(m.coupling), obs, 0.0, 1.0, 0, m.rho0_s, m.rho0_e),
               NumericalError);
}

}  // namespace
}  // namespace bystander
