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

// Two-time system correlations from the bipartite propagator, compared with
// predictions that use only the reduced system propagator.

#pragma once

#include <vector>

#include "bystander/lindblad.hpp"

namespace bystander {

/// Tr((A_i (x) I) exp(tau L)[rho0_se]) for each system operator A_i.
Vector expectation(const SuperOperator& l_total, const Matrix& rho0_se, const std::vector<Matrix>& ops, double tau);

struct CorrelationRequest {
  /// O, applied at time t.
  Matrix left;
  /// A_i, read out at time t + tau.
  std::vector<Matrix> right;
  double t = 0.0;
  double tau = 0.0;
};

/// Tr((A_i (x) I) G_{t+tau,t}[rho_t^se (O (x) I)]).
Vector exact_correlation(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se);

/// Tr(A_i G^s_{tau,0}[rho_t^s O]) with G^s[X] = Tr_e G_{tau,0}[X (x) rho0_e].
Vector qrt_prediction(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se,
                      const Matrix& rho0_e);

/// Max-norm of exact minus predicted.
double qrt_deviation(const SuperOperator& l_total, const CorrelationRequest& req, const Matrix& rho0_se,
                     const Matrix& rho0_e);

/// Unique fixed point of a trace-preserving generator. Throws
/// NumericalError when the spectral gap is below gap_tol.
Matrix stationary_state(const SuperOperator& l, double gap_tol = 1e-10);

}  // namespace bystander
