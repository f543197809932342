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

// Random operators and couplings for tests. Everything is driven by a
// caller-owned mt19937_64 so each test is reproducible.

#pragma once

#include <random>
#include <vector>

#include "bystander/structure.hpp"

namespace bystander::testing {

using Rng = std::mt19937_64;

inline Matrix random_complex(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline Matrix random_hermitian(Index d, Rng& rng) {
  const Matrix a = random_complex(d, d, rng);
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_traceless_hermitian(Index d, Rng& rng) {
  Matrix h = random_hermitian(d, rng);
  h -= h.trace() / static_cast<double>(d) * Matrix::Identity(d, d);
  return h;
}

inline Matrix random_density(Index d, Rng& rng) {
  const Matrix a = random_complex(d, d, rng);
  const Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_pure(Index d, Rng& rng) {
  const Matrix psi = random_complex(d, 1, rng).normalized();
  return psi * psi.adjoint();
}

inline Matrix random_unitary(Index d, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_complex(d, d, rng));
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// Kraus operators of a random channel from a random isometry d -> d * k.
inline KrausOps random_channel(Index d, Index k, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_complex(d * k, d, rng));
  const Matrix v = qr.householderQ() * Matrix::Identity(d * k, d);
  KrausOps out;
  for (Index j = 0; j < k; ++j) out.push_back(v.block(j * d, 0, d, d));
  return out;
}

inline Matrix random_psd(Index n, Rng& rng) {
  const Matrix a = random_complex(n, n, rng);
  return a * a.adjoint() / static_cast<double>(n);
}

inline SuperOperator random_lindbladian(Index d, Index jumps, Rng& rng) {
  LindbladSpec spec;
  spec.hamiltonian = random_hermitian(d, rng);
  for (Index k = 0; k < jumps; ++k) spec.jump_ops.push_back(random_complex(d, d, rng) / std::sqrt(double(d)));
  spec.rates = random_psd(jumps, rng);
  return assemble_lindbladian(spec);
}

/// Random valid coupling with a full rate matrix and symmetric S_ab.
inline BystanderCoupling random_coupling(Index ds, Index de, std::size_t channels, Rng& rng) {
  BystanderCoupling c;
  c.gamma = random_psd(static_cast<Index>(channels), rng);
  c.sys_maps.assign(channels, std::vector<KrausOps>(channels));
  for (std::size_t a = 0; a < channels; ++a) {
    c.env_ops.push_back(random_complex(de, de, rng) / std::sqrt(double(de)));
    for (std::size_t b = a; b < channels; ++b) {
      c.sys_maps[a][b] = random_channel(ds, a == b ? 2 : 1, rng);
      c.sys_maps[b][a] = c.sys_maps[a][b];
    }
  }
  return c;
}

inline BystanderCoupling random_diagonal_coupling(Index ds, Index de, std::size_t channels, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.5);
  std::vector<double> rates;
  std::vector<Matrix> ops;
  std::vector<KrausOps> maps;
  for (std::size_t a = 0; a < channels; ++a) {
    rates.push_back(u(rng));
    ops.push_back(random_complex(de, de, rng) / std::sqrt(double(de)));
    maps.push_back(random_channel(ds, 2, rng));
  }
  return diagonal_coupling(rates, ops, maps);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = n == 1 ? a : a + (b - a) * double(k) / double(n - 1);
  return out;
}

}  // namespace bystander::testing
