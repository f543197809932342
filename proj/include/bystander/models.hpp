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

// Closed-form oracles for two solvable bystander models: a qubit dephased
// by a driven fluorescent two-level environment, and an N-qubit register
// hit by Pauli-string collisions from a thermal two-level environment.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bystander/structure.hpp"

namespace bystander {

struct FluorDephasingParams {
  double gamma = 1.0;
  double omega = 0.0;
  /// Initial environment state; empty selects the stationary state.
  Matrix rho0e;
};

void validate(const FluorDephasingParams& p);

/// [[W^2, -i g W], [i g W, g^2 + W^2]] / (g^2 + 2 W^2).
Matrix fluor_stationary_env(double gamma, double omega);

/// Environment marginal: -i(W/2)[sigma_x, .] + g D[sigma].
SuperOperator fluor_env_generator(double gamma, double omega);

/// -i(W/2)[sigma_x, .] + sign * g sigma . sigma^dag - (g/2){sigma^dag sigma, .}.
Matrix fluor_gpm_generator(double gamma, double omega, int sign);

/// Default system state is |+><+|; default grid is {0}.
ModelSpec fluor_model(const FluorDephasingParams& p, const Matrix& rho0_s = Matrix(),
                      const std::vector<double>& times = {0.0});

/// Propagated environment state at time t.
Matrix fluor_env_state(const FluorDephasingParams& p, double t);

struct CoherenceCoefficients {
  Complex a;
  Complex b;
  Complex c;
  /// Delta^2 = (g/4)^2 - W^2.
  double delta_sq = 0.0;
};

/// Coefficients of f(tau|t) for an environment in state env_state at time t.
CoherenceCoefficients fluor_coefficients(double gamma, double omega, const Matrix& env_state);

/// f(tau|t) = e^{-g tau} a + e^{-g tau/4} [b cosh(D tau) + c sinh(D tau)/D].
double coherence_f(const FluorDephasingParams& p, double tau, double t);

/// d/dtau f(tau|t).
double coherence_f_derivative(const FluorDephasingParams& p, double tau, double t);

/// g_t = -(d/dt) ln f(t|0); empty at a zero of f (divergence marker).
std::optional<double> fluor_canonical_rate(const FluorDephasingParams& p, double t);

struct RateSeries {
  std::vector<double> times;
  std::vector<std::optional<double>> values;
  /// Zeros of f(t|0) located between grid points, refined by bisection.
  std::vector<double> divergences;
};

/// Rate on a grid. Grid points adjacent to a zero of f(t|0) carry markers.
RateSeries fluor_rate_series(const FluorDephasingParams& p, const std::vector<double>& times);

/// Deterministic-scheme correlation for x-direction measurements.
double fluor_cpf_closed_form(const FluorDephasingParams& p, double t, double tau, int y, double mean_x);

struct MultipartiteParams {
  int n_qubits = 1;
  double gamma = 1.0;
  double phi = 1.0;
  double omega = 0.0;
  std::string string_a = "Z";
  std::string string_b = "X";
  /// Initial environment state; empty selects the maximally mixed state.
  Matrix rho0e;
};

void validate(const MultipartiteParams& p);

/// Default system state is the maximally mixed state.
ModelSpec multipartite_model(const MultipartiteParams& p, const Matrix& rho0_s = Matrix(),
                             const std::vector<double>& times = {0.0});

/// Superoperators S_0 = id, S_a, S_b, S_c = S_b S_a.
std::vector<Matrix> multipartite_label_maps(const MultipartiteParams& p);

/// (p0, pa, pb, pc) for phi = gamma.
std::array<double, 4> multipartite_weights(const MultipartiteParams& p, double t);

struct MultipartiteRates {
  double a = 0.0;
  double b = 0.0;
  /// Empty at a divergence.
  std::optional<double> c;
};

MultipartiteRates multipartite_rates(const MultipartiteParams& p, double t);

/// Deterministic-scheme correlation for sigma_a (or sigma_b) measurements, phi = gamma.
double multipartite_cpf_closed_form(const MultipartiteParams& p, double t, double tau, int y, double mean_x);

/// P(y) entering the closed form above.
double multipartite_outcome_probability(const MultipartiteParams& p, double t, int y, double mean_x);

/// Rows (1,1,1,1), (1,1,-1,-1), (1,-1,1,-1), (1,-1,-1,1).
Eigen::Matrix4d hadamard4();

/// Signed environment generator; u multiplies the g sigma . sigma^dag term
/// and v the phi sigma^dag . sigma term.
Matrix guv_generator(const MultipartiteParams& p, int u, int v);

struct GuvFamilies {
  std::vector<double> times;
  /// g[k][i]: G^{uv} at times[i] for k = ++, +-, -+, --.
  std::array<std::vector<Matrix>, 4> g;
  /// f[k][i] = (1/4) sum_l H(k, l) g[l][i] for labels 0, a, b, c.
  std::array<std::vector<Matrix>, 4> f;
};

GuvFamilies guv_solver(const MultipartiteParams& p, const std::vector<double>& times);

}  // namespace bystander
