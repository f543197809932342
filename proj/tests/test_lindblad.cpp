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

#include <unsupported/Eigen/MatrixFunctions>

#include "bystander/lindblad.hpp"
#include "bystander/models.hpp"
#include "bystander/pauli.hpp"
#include "test_support.hpp"

namespace bystander {
namespace {

using testing::Rng;
using testing::linspace;

// Direct operator form of the GKSL right-hand side.
Matrix gksl_rhs(const LindbladSpec& s, const Matrix& rho) {
  Matrix out = Complex(0, -1) * (s.hamiltonian * rho - rho * s.hamiltonian);
  for (std::size_t i = 0; i < s.jump_ops.size(); ++i) {
    for (std::size_t j = 0; j < s.jump_ops.size(); ++j) {
      const Matrix& ti = s.jump_ops[i];
      const Matrix& tj = s.jump_ops[j];
      const Matrix tt = tj.adjoint() * ti;
      out += s.rates(i, j) * (ti * rho * tj.adjoint() - 0.5 * (tt * rho + rho * tt));
    }
  }
  return out;
}

LindbladSpec random_spec(Index d, Index n, Rng& rng) {
  LindbladSpec s;
  s.hamiltonian = testing::random_hermitian(d, rng);
  for (Index k = 0; k < n; ++k) s.jump_ops.push_back(testing::random_complex(d, d, rng));
  s.rates = testing::random_psd(n, rng);
  return s;
}

TEST(Lindblad, AssembleMatchesOperatorForm) {
  Rng rng(11);
  const LindbladSpec s = random_spec(3, 3, rng);
  const SuperOperator l = assemble_lindbladian(s);
  const Matrix rho = testing::random_density(3, rng);
  EXPECT_LT((apply_map(l.matrix, rho) - gksl_rhs(s, rho)).norm(), 1e-11);
  EXPECT_LT(trace_preservation_defect(l.matrix, 3), 1e-11);
}

TEST(Lindblad, RejectsNonPsdRates) {
  Rng rng(12);
  LindbladSpec s = random_spec(2, 2, rng);
  s.rates = Matrix::Identity(2, 2);
  s.rates(1, 1) = -0.3;
  EXPECT_THROW(assemble_lindbladian(s), DomainError);
  s.rates = Matrix::Identity(2, 2);
  s.rates(0, 1) = 0.5;
  EXPECT_THROW(assemble_lindbladian(s), DomainError);
}

TEST(Lindblad, RejectsShapeMismatch) {
  LindbladSpec s;
  s.hamiltonian = Matrix::Zero(2, 2);
  s.jump_ops = {Matrix::Zero(3, 3)};
  s.rates = Matrix::Identity(1, 1);
  EXPECT_THROW(assemble_lindbladian(s), DimensionError);
  s.jump_ops = {Matrix::Zero(2, 2)};
  s.rates = Matrix::Identity(2, 2);
  EXPECT_THROW(assemble_lindbladian(s), DimensionError);
}

TEST(Lindblad, DiagonalizedRatesGiveSameGenerator) {
  Rng rng(13);
  LindbladSpec s = random_spec(3, 3, rng);
  // Rank-deficient rates: one channel is dropped.
  const Matrix a = testing::random_complex(3, 2, rng);
  s.rates = a * a.adjoint();
  const LindbladSpec diag = diagonalize_rate_matrix(s);
  EXPECT_EQ(diag.jump_ops.size(), 2u);
  EXPECT_LT((assemble_lindbladian(s).matrix - assemble_lindbladian(diag).matrix).norm(), 1e-10);
  for (Index k = 0; k < diag.rates.rows(); ++k) EXPECT_GT(diag.rates(k, k).real(), 0.0);
}

TEST(Lindblad, ZeroGeneratorKeepsStateConstant) {
  const SuperOperator l(Matrix::Zero(9, 9), Dims{3}, true);
  Rng rng(14);
  const DensityMatrix rho(testing::random_density(3, rng));
  const auto out = propagate(l, rho, linspace(0.0, 5.0, 11));
  for (const auto& s : out.states) EXPECT_LT((s - rho.matrix()).norm(), 1e-15);
}

TEST(Lindblad, PropagationMatchesExponentialOracle) {
  Rng rng(15);
  const SuperOperator l = assemble_lindbladian(random_spec(3, 2, rng));
  const Matrix rho0 = testing::random_density(3, rng);
  const std::vector<double> times = {0.0, 0.1, 0.35, 1.0, 1.5, 4.0};
  const auto states = propagate_states(l, rho0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix ref = unvec(Matrix((times[k] * l.matrix).exp()) * vec(rho0), 3);
    EXPECT_LT((states[k] - ref).norm(), 1e-11) << "t=" << times[k];
    EXPECT_NEAR(states[k].trace().real(), 1.0, 1e-12);
  }
}

TEST(Lindblad, TimeGridValidation) {
  EXPECT_THROW(check_time_grid({}), DomainError);
  EXPECT_THROW(check_time_grid({0.1, 0.2}), DomainError);
  EXPECT_THROW(check_time_grid({0.0, 0.2, 0.2}), DomainError);
  EXPECT_NO_THROW(check_time_grid({0.0}));
}

TEST(Lindblad, ReducedMapOfProductGenerator) {
  Rng rng(16);
  const SuperOperator ls = assemble_lindbladian(random_spec(2, 1, rng));
  const SuperOperator le = assemble_lindbladian(random_spec(3, 1, rng));
  const Matrix l = superop_tensor(ls.matrix, 2, Matrix::Identity(9, 9), 3) + superop_tensor(Matrix::Identity(4, 4), 2, le.matrix, 3);
  const Matrix g = expm((0.7 * l).eval());
  const Matrix rho_e = testing::random_density(3, rng);
  const Matrix red = reduced_system_map(g, rho_e, 2, 3);
  EXPECT_LT((red - expm((0.7 * ls.matrix).eval())).norm(), 1e-11);
}

TEST(Lindblad, TimeLocalGeneratorOfSemigroupIsConstant) {
  Rng rng(17);
  LindbladSpec spec = random_spec(2, 2, rng);
  for (auto& j : spec.jump_ops) j /= j.norm();
  spec.rates /= spec.rates.norm();
  spec.hamiltonian /= spec.hamiltonian.norm();
  const SuperOperator l = assemble_lindbladian(spec);
  const auto fam = propagator_family(l, linspace(0.0, 2.0, 401));
  const auto tl = time_local_generator(fam);
  ASSERT_FALSE(tl.step_warning) << tl.step_norm;
  for (std::size_t k = 0; k < fam.times.size(); ++k) {
    ASSERT_FALSE(tl.divergent(k));
    EXPECT_LT((*tl.generators[k] - l.matrix).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(Lindblad, TimeLocalGeneratorMarksCoherenceZeros) {
  // Reduced dephasing of the resonantly driven fluorescent environment: the
  // coherence passes through zero, so the generator diverges there.
  FluorDephasingParams p{1.0, 1.0, Matrix()};
  const auto times = linspace(0.0, 4.0, 4001);
  const ModelSpec m = fluor_model(p, Matrix(), times);
  const auto fam = reduced_system_family(propagator_family(m.total_generator(), times), m.rho0_e, 2, 2);
  const auto tl = time_local_generator(fam);
  const RateSeries rs = fluor_rate_series(p, times);
  ASSERT_FALSE(rs.divergences.empty());
  for (double root : rs.divergences) {
    const auto it = std::lower_bound(times.begin(), times.end(), root);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    EXPECT_TRUE(tl.divergent(hi) || tl.divergent(hi - 1)) << "root at " << root;
  }
  // Away from zeros the generator reproduces the closed-form rate.
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (tl.divergent(k) || !rs.values[k]) continue;
    bool near = false;
    for (double root : rs.divergences) near = near || std::abs(times[k] - root) < 0.01;
    if (near) continue;
    const Matrix gen = *tl.generators[k];
    // Coherence component: L[|0><1|] = -rate |0><1|.
    const double rate = -gen(2, 2).real();
    EXPECT_NEAR(rate, *rs.values[k], 2e-3 * std::max(1.0, std::abs(*rs.values[k]))) << "t=" << times[k];
  }
}

TEST(Lindblad, WitnessFlatForMarkovContraction) {
  Rng rng(18);
  const SuperOperator l = assemble_lindbladian(random_spec(2, 2, rng));
  const auto w = blp_trace_distance_witness(l, testing::random_density(2, rng), testing::random_density(2, rng),
                                            linspace(0.0, 5.0, 101));
  EXPECT_FALSE(w.non_markovian);
  EXPECT_LE(w.max_increase, 1e-12);
}

TEST(Lindblad, WitnessDetectsRevivalsInFluorDephasing) {
  FluorDephasingParams p{1.0, 1.0, Matrix()};
  const ModelSpec m = fluor_model(p);
  Matrix plus = Matrix::Constant(2, 2, 0.5);
  Matrix minus = plus;
  minus(0, 1) = minus(1, 0) = -0.5;
  const auto w = blp_trace_distance_witness(m.total_generator(), kron(plus, m.rho0_e), kron(minus, m.rho0_e),
                                            linspace(0.0, 6.0, 601), 0);
  EXPECT_TRUE(w.non_markovian);
  for (std::size_t k = 0; k < w.times.size(); ++k) {
    EXPECT_NEAR(w.distances[k], std::abs(coherence_f(p, w.times[k], 0.0)), 1e-9);
  }
}

}  // namespace
}  // namespace bystander
