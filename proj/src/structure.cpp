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

#include "bystander/structure.hpp"

#include <array>
#include <cmath>
#include <string>

namespace bystander {

Index BystanderCoupling::system_dim() const {
  for (const auto& row : sys_maps) {
    for (const auto& kraus : row) {
      if (!kraus.empty()) return kraus.front().rows();
    }
  }
  throw DimensionError("coupling has no system maps");
}

Index BystanderCoupling::env_dim() const {
  if (env_ops.empty()) throw DimensionError("coupling has no environment operators");
  return env_ops.front().rows();
}

BystanderCoupling diagonal_coupling(const std::vector<double>& rates, const std::vector<Matrix>& env_ops,
                                    const std::vector<KrausOps>& maps) {
  const std::size_t n = rates.size();
  if (env_ops.size() != n || maps.size() != n) throw DimensionError("diagonal_coupling: list sizes differ");
  BystanderCoupling c;
  c.gamma = Matrix::Zero(n, n);
  c.env_ops = env_ops;
  c.sys_maps.assign(n, std::vector<KrausOps>(n));
  for (std::size_t a = 0; a < n; ++a) {
    c.gamma(a, a) = rates[a];
    c.sys_maps[a][a] = maps[a];
  }
  return c;
}

Matrix sys_map(const BystanderCoupling& c, std::size_t a, std::size_t b) {
  const KrausOps& kraus = c.sys_maps.at(a).at(b);
  if (kraus.empty()) throw DomainError("system map S_ab is undefined");
  return kraus_superop(kraus, kraus.front().rows());
}

void validate_coupling(const BystanderCoupling& c, double tol) {
  const std::size_t n = c.env_ops.size();
  if (static_cast<std::size_t>(c.gamma.rows()) != n || c.sys_maps.size() != n) {
    throw DimensionError("coupling: gamma, env_ops and sys_maps sizes differ");
  }
  check_rate_matrix(c.gamma, tol);
  const Index de = c.env_dim();
  const Index ds = c.system_dim();
  for (const auto& b : c.env_ops) {
    if (b.rows() != de || b.cols() != de) throw DimensionError("coupling: env operator dims differ");
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (c.sys_maps[a].size() != n) throw DimensionError("coupling: sys_maps is not square");
    for (std::size_t b = 0; b < n; ++b) {
      const KrausOps& kraus = c.sys_maps[a][b];
      if (kraus.empty()) {
        if (std::abs(c.gamma(a, b)) > tol) {
          throw DomainError("coupling: S_" + std::to_string(a) + std::to_string(b) + " missing for nonzero rate");
        }
        continue;
      }
      Matrix sum = Matrix::Zero(ds, ds);
      for (const auto& v : kraus) {
        if (v.rows() != ds || v.cols() != ds) throw DimensionError("coupling: Kraus operator dims differ");
        sum += v.adjoint() * v;
      }
      if ((sum - Matrix::Identity(ds, ds)).cwiseAbs().maxCoeff() > tol) {
        throw DomainError("coupling: S_" + std::to_string(a) + std::to_string(b) + " is not trace preserving");
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (c.sys_maps[a][b].empty() || c.sys_maps[b][a].empty()) continue;
      const Matrix sab = sys_map(c, a, b);
      const Matrix sba = sys_map(c, b, a);
      if ((hermitian_conjugate_map(sab, ds) - sba).cwiseAbs().maxCoeff() > tol) {
        throw DomainError("coupling: S_ab and S_ba violate the conjugation symmetry");
      }
    }
  }
}

Matrix coupling_generator(const BystanderCoupling& c) {
  const Index ds = c.system_dim();
  const Index de = c.env_dim();
  const Index d = ds * de;
  const Matrix is = Matrix::Identity(ds, ds);
  Matrix out = Matrix::Zero(d * d, d * d);
  const std::size_t n = c.env_ops.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const Complex g = c.gamma(a, b);
      if (g == Complex(0) || c.sys_maps[a][b].empty()) continue;
      for (const auto& v : c.sys_maps[a][b]) {
        out += g * sandwich(kron(v, c.env_ops[a]), kron(v, c.env_ops[b]).adjoint());
      }
      const Matrix anti = kron(is, (c.env_ops[b].adjoint() * c.env_ops[a]).eval());
      out -= 0.5 * g * (spre(anti) + spost(anti));
    }
  }
  return out;
}

SuperOperator build_generalSU(const SuperOperator& l_s, const SuperOperator& l_e, const BystanderCoupling& c) {
  validate_coupling(c);
  const Index ds = c.system_dim();
  const Index de = c.env_dim();
  if (l_s.dim() != ds || l_e.dim() != de) throw DimensionError("build_generalSU: generator dims differ from coupling");
  Matrix l = superop_tensor(l_s.matrix, ds, Matrix::Identity(de * de, de * de), de) +
             superop_tensor(Matrix::Identity(ds * ds, ds * ds), ds, l_e.matrix, de) + coupling_generator(c);
  return SuperOperator(std::move(l), Dims{ds, de}, true);
}

BystanderCheck verify_bystander_condition(const SuperOperator& l_se, double tol) {
  if (l_se.dims.size() != 2) throw DimensionError("verify_bystander_condition: need a bipartite generator");
  const Index ds = l_se.dims[0];
  const Index de = l_se.dims[1];
  const auto xs = hermitian_basis(ds);
  const auto ys = hermitian_basis(de);
  const Matrix mixed = Matrix::Identity(ds, ds) / static_cast<double>(ds);

  std::vector<Matrix> a_images;
  Matrix a = Matrix::Zero(de * de, de * de);
  for (const auto& y : ys) {
    Matrix img = trace_system(apply_map(l_se.matrix, kron(mixed, y)), ds, de);
    a += vec(img) * vec(y).adjoint();
    a_images.push_back(std::move(img));
  }
  double violation = 0.0;
  for (const auto& x : xs) {
    const Complex tr = x.trace();
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Matrix img = trace_system(apply_map(l_se.matrix, kron(x, ys[j])), ds, de);
      violation = std::max(violation, (img - tr * a_images[j]).norm());
    }
  }
  BystanderCheck out;
  out.violation = violation;
  out.holds = violation <= tol * std::max(1.0, l_se.matrix.cwiseAbs().maxCoeff());
  if (out.holds) out.env_generator = SuperOperator(std::move(a), Dims{de}, l_se.trace_preserving);
  return out;
}

UnitaryNoGo unitary_no_go_check(const Operator& h_se, double tol) {
  if (h_se.dims.size() != 2) throw DimensionError("unitary_no_go_check: need a bipartite operator");
  const Index ds = h_se.dims[0];
  const Index de = h_se.dims[1];
  const Matrix& h = h_se.data;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h) > kTolStruct * scale) throw DomainError("unitary_no_go_check: H is not Hermitian");
  const Matrix ie = Matrix::Identity(de, de);
  auto block = [&](Index s, Index sp) { return Matrix(h.block(s * de, sp * de, de, de)); };

  const Matrix q = block(0, 0);
  Matrix hs = Matrix::Zero(ds, ds);
  double defect = 0.0;
  for (Index s = 0; s < ds; ++s) {
    for (Index sp = 0; sp < ds; ++sp) {
      Matrix b = block(s, sp);
      if (s == sp) b -= q;
      const Complex c = b.trace() / static_cast<double>(de);
      hs(s, sp) = c;
      defect = std::max(defect, (b - c * ie).cwiseAbs().maxCoeff());
    }
  }
  UnitaryNoGo out;
  out.defect = defect;
  out.is_bystander = defect <= tol * scale;
  if (out.is_bystander) {
    out.q_env = q;
    out.h_system = hs;
  }
  return out;
}

DConstraint check_D_constraint(const FactorizedLindblad& raw, double tol) {
  const std::size_t nk = raw.sys_ops.size();
  const std::size_t na = raw.env_ops.size();
  if (static_cast<std::size_t>(raw.rates.rows()) != nk * na || raw.rates.cols() != raw.rates.rows()) {
    throw DimensionError("check_D_constraint: rate matrix size differs from jump count");
  }
  if (nk == 0) throw DimensionError("check_D_constraint: no system operators");
  const Index ds = raw.sys_ops.front().rows();
  DConstraint out;
  out.gamma = Matrix::Zero(na, na);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < na; ++b) {
      Matrix d = Matrix::Zero(ds, ds);
      for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t l = 0; l < nk; ++l) {
          d += raw.rates(k * na + a, l * na + b) * raw.sys_ops[l].adjoint() * raw.sys_ops[k];
        }
      }
      const Complex g = d.trace() / static_cast<double>(ds);
      out.gamma(a, b) = g;
      out.defect = std::max(out.defect, (d - g * Matrix::Identity(ds, ds)).cwiseAbs().maxCoeff());
    }
  }
  out.holds = out.defect <= tol * std::max(1.0, raw.rates.cwiseAbs().maxCoeff());
  return out;
}

SuperOperator env_marginal_generator(const BystanderCoupling& c, const SuperOperator& l_e) {
  validate_coupling(c);
  const Index de = c.env_dim();
  if (l_e.dim() != de) throw DimensionError("env_marginal_generator: L_e dims differ from coupling");
  Matrix l = l_e.matrix;
  for (std::size_t a = 0; a < c.env_ops.size(); ++a) {
    for (std::size_t b = 0; b < c.env_ops.size(); ++b) {
      if (c.gamma(a, b) == Complex(0)) continue;
      l += c.gamma(a, b) * dissipator(c.env_ops[a], c.env_ops[b]);
    }
  }
  return SuperOperator(std::move(l), Dims{de}, true);
}

namespace {

// <c| rho_se |c'> as a system operator.
Matrix env_block(const Matrix& rho, const Vector& c, const Vector& cp, Index ds, Index de) {
  Matrix out(ds, ds);
  for (Index s = 0; s < ds; ++s) {
    for (Index sp = 0; sp < ds; ++sp) {
      out(s, sp) = c.adjoint() * rho.block(s * de, sp * de, de, de) * cp;
    }
  }
  return out;
}

}  // namespace

SeparableDecomposition separability_decompose(const Matrix& rho_se, Index ds, Index de) {
  if (rho_se.rows() != ds * de) throw DimensionError("separability_decompose: dims differ");
  const auto eig = herm_eig(trace_system(rho_se, ds, de), kTolNum);
  SeparableDecomposition out;
  out.weights = eig.values;
  out.env_basis = eig.vectors;
  for (Index c = 0; c < de; ++c) {
    out.cond_states.push_back(env_block(rho_se, eig.vectors.col(c), eig.vectors.col(c), ds, de));
    for (Index cp = 0; cp < de; ++cp) {
      if (cp == c) continue;
      out.residual = std::max(out.residual,
                              env_block(rho_se, eig.vectors.col(c), eig.vectors.col(cp), ds, de).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

SeparableDecomposition separability_decompose(const DensityMatrix& rho_se) {
  if (rho_se.dims().size() != 2) throw DimensionError("separability_decompose: need a bipartite state");
  return separability_decompose(rho_se.matrix(), rho_se.dims()[0], rho_se.dims()[1]);
}

ConditionalRates conditional_rates(const BystanderCoupling& c, const SuperOperator& l_e, const Matrix& env_basis,
                                   double tol) {
  const Index de = c.env_dim();
  const Index ds = c.system_dim();
  if (env_basis.rows() != de || env_basis.cols() != de || l_e.dim() != de) {
    throw DimensionError("conditional_rates: basis or L_e dims differ");
  }
  if ((env_basis.adjoint() * env_basis - Matrix::Identity(de, de)).cwiseAbs().maxCoeff() > kTolNum) {
    throw DomainError("conditional_rates: basis is not orthonormal");
  }
  const std::size_t n = c.env_ops.size();
  ConditionalRates out;
  out.phi = RealMatrix::Zero(de, de);
  out.transition = RealMatrix::Zero(de, de);
  out.maps.assign(de * de, std::nullopt);
  for (Index ct = 0; ct < de; ++ct) {
    const Vector vct = env_basis.col(ct);
    const Matrix img = apply_map(l_e.matrix, (vct * vct.adjoint()).eval());
    for (Index cc = 0; cc < de; ++cc) {
      const Vector vc = env_basis.col(cc);
      out.phi(cc, ct) = (vc.adjoint() * img * vc)(0, 0).real();
      Complex total = 0.0;
      Matrix mix = Matrix::Zero(ds * ds, ds * ds);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (c.gamma(a, b) == Complex(0) || c.sys_maps[a][b].empty()) continue;
          const Complex ba = (vc.adjoint() * c.env_ops[a] * vct)(0, 0);
          const Complex bb = (vct.adjoint() * c.env_ops[b].adjoint() * vc)(0, 0);
          const Complex w = c.gamma(a, b) * ba * bb;
          total += w;
          if (w != Complex(0)) mix += w * sys_map(c, a, b);
        }
      }
      out.transition(ct, cc) = total.real();
      if (std::abs(total) > tol) out.maps[ct * de + cc] = mix / total;
    }
  }
  return out;
}

namespace {

struct TrackedBasis {
  std::vector<RealVector> weights;
  std::vector<Matrix> bases;
  std::vector<bool> degenerate;
  bool failed = false;
};

TrackedBasis track_env_basis(const std::vector<Matrix>& states, Index ds, Index de) {
  TrackedBasis out;
  for (std::size_t k = 0; k < states.size(); ++k) {
    auto eig = herm_eig(trace_system(states[k], ds, de), kTolNum);
    RealVector p = eig.values;
    Matrix v = eig.vectors;
    bool degenerate = false;
    for (Index i = 0; i + 1 < de; ++i) degenerate = degenerate || (p(i + 1) - p(i) < 1e-8);
    if (k > 0) {
      const RealMatrix overlap = (out.bases.back().adjoint() * v).cwiseAbs();
      std::vector<bool> used(de, false);
      Matrix vv(de, de);
      RealVector pp(de);
      for (Index i = 0; i < de; ++i) {
        Index best = -1;
        for (Index j = 0; j < de; ++j) {
          if (used[j]) continue;
          if (best < 0 || overlap(i, j) > overlap(i, best)) best = j;
        }
        if (overlap(i, best) < 0.5 && !degenerate) out.failed = true;
        used[best] = true;
        vv.col(i) = v.col(best);
        pp(i) = p(best);
      }
      v = vv;
      p = pp;
    }
    for (Index i = 0; i < de; ++i) {
      Index big;
      v.col(i).cwiseAbs().maxCoeff(&big);
      const Complex phase = v(big, i) / std::abs(v(big, i));
      v.col(i) *= std::conj(phase);
    }
    out.weights.push_back(p);
    out.bases.push_back(v);
    out.degenerate.push_back(degenerate);
  }
  return out;
}

// Central second-order weights for samples at k-1, k, k+1.
std::array<double, 3> central_weights(const std::vector<double>& t, std::size_t k) {
  const double h1 = t[k] - t[k - 1], h2 = t[k + 1] - t[k];
  return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
}

}  // namespace

EvolutionResidual pc_evolution_residual(const std::vector<Matrix>& states, const std::vector<double>& times,
                                        const BystanderCoupling& c, const SuperOperator& l_e) {
  if (states.size() != times.size() || states.size() < 3) throw DimensionError("pc_evolution_residual: need >= 3 samples");
  const Index ds = c.system_dim();
  const Index de = c.env_dim();
  const TrackedBasis tb = track_env_basis(states, ds, de);
  EvolutionResidual out;
  out.tracking_failed = tb.failed;
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    if (tb.degenerate[k - 1] || tb.degenerate[k] || tb.degenerate[k + 1]) {
      ++out.unreliable;
      continue;
    }
    const auto w = central_weights(times, k);
    const RealVector& p = tb.weights[k];
    const RealVector dp = w[0] * tb.weights[k - 1] + w[1] * p + w[2] * tb.weights[k + 1];
    const ConditionalRates r = conditional_rates(c, l_e, tb.bases[k]);
    for (Index cc = 0; cc < de; ++cc) {
      const Vector vc = tb.bases[k].col(cc);
      double lhs = dp(cc);
      double rhs = 0.0;
      for (Index ct = 0; ct < de; ++ct) {
        auto proj = [&](std::size_t m) {
          const Vector v = tb.bases[m].col(ct);
          return Matrix(v * v.adjoint());
        };
        const Matrix dproj = w[0] * proj(k - 1) + w[1] * proj(k) + w[2] * proj(k + 1);
        lhs += (vc.adjoint() * dproj * vc)(0, 0).real() * p(ct);
        rhs += r.phi(cc, ct) * p(ct) - r.phi(ct, cc) * p(cc);
        rhs += r.transition(ct, cc) * p(ct) - r.transition(cc, ct) * p(cc);
      }
      out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
    }
    ++out.evaluated;
  }
  return out;
}

EvolutionResidual rho_c_evolution_residual(const std::vector<Matrix>& states, const std::vector<double>& times,
                                           const BystanderCoupling& c, const SuperOperator& l_s,
                                           const SuperOperator& l_e) {
  if (states.size() != times.size() || states.size() < 3) {
    throw DimensionError("rho_c_evolution_residual: need >= 3 samples");
  }
  const Index ds = c.system_dim();
  const Index de = c.env_dim();
  if (l_s.dim() != ds) throw DimensionError("rho_c_evolution_residual: L_s dims differ");
  const TrackedBasis tb = track_env_basis(states, ds, de);
  auto cond = [&](std::size_t m, Index cc) {
    const Vector v = tb.bases[m].col(cc);
    return env_block(states[m], v, v, ds, de);
  };
  EvolutionResidual out;
  out.tracking_failed = tb.failed;
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    if (tb.degenerate[k - 1] || tb.degenerate[k] || tb.degenerate[k + 1]) {
      ++out.unreliable;
      continue;
    }
    const auto w = central_weights(times, k);
    const ConditionalRates r = conditional_rates(c, l_e, tb.bases[k]);
    std::vector<Matrix> rc;
    for (Index cc = 0; cc < de; ++cc) rc.push_back(cond(k, cc));
    for (Index cc = 0; cc < de; ++cc) {
      const Matrix lhs = w[0] * cond(k - 1, cc) + w[1] * rc[cc] + w[2] * cond(k + 1, cc);
      Matrix rhs = apply_map(l_s.matrix, rc[cc]);
      for (Index ct = 0; ct < de; ++ct) {
        rhs += r.phi(cc, ct) * rc[ct] - r.phi(ct, cc) * rc[cc];
        if (r.map(ct, cc)) rhs += r.transition(ct, cc) * apply_map(*r.map(ct, cc), rc[ct]);
        rhs -= r.transition(cc, ct) * rc[cc];
      }
      out.max_residual = std::max(out.max_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    ++out.evaluated;
  }
  return out;
}

}  // namespace bystander
