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

#include "bystander/cpf.hpp"

#include <cmath>

#include <Eigen/QR>

namespace bystander {

Measurement spectral_measurement(const Matrix& observable, double tol) {
  const auto eig = herm_eig(observable);
  Measurement out;
  const Index d = observable.rows();
  Index start = 0;
  while (start < d) {
    Index end = start + 1;
    while (end < d && eig.values(end) - eig.values(start) <= tol) ++end;
    Outcome o;
    o.projector = Matrix::Zero(d, d);
    double sum = 0.0;
    for (Index k = start; k < end; ++k) {
      o.projector += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
      sum += eig.values(k);
    }
    o.value = sum / static_cast<double>(end - start);
    out.push_back(std::move(o));
    start = end;
  }
  return out;
}

Measurement eigenbasis_measurement(const Matrix& observable) {
  const auto eig = herm_eig(observable);
  Measurement out;
  for (Index k = 0; k < observable.rows(); ++k) {
    out.push_back({eig.values(k), eig.vectors.col(k) * eig.vectors.col(k).adjoint()});
  }
  return out;
}

namespace {

int find_map(const std::vector<Matrix>& maps, const Matrix& m, double tol, double* defect) {
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const double diff = (maps[k] - m).cwiseAbs().maxCoeff();
    if (diff <= tol) {
      if (defect) *defect = std::max(*defect, diff);
      return static_cast<int>(k);
    }
  }
  return -1;
}

void check_measurement(const Measurement& m, Index ds, const char* name) {
  if (m.empty()) throw DimensionError(std::string("cpf: empty measurement ") + name);
  Matrix sum = Matrix::Zero(ds, ds);
  for (const auto& o : m) {
    if (o.projector.rows() != ds) throw DimensionError(std::string("cpf: projector dims differ in ") + name);
    sum += o.projector;
  }
  if ((sum - Matrix::Identity(ds, ds)).cwiseAbs().maxCoeff() > kTolNum) {
    throw DomainError(std::string("cpf: projectors do not resolve the identity in ") + name);
  }
}

double trace_re(const Matrix& a, const Matrix& b) { return (a * b).trace().real(); }

CpfResult make_result(Scheme scheme, const CpfObservables& obs, double t, double tau, std::size_t y_check) {
  if (y_check >= obs.y.size()) throw DimensionError("cpf: y outcome index out of range");
  CpfResult r;
  r.scheme = scheme;
  r.t = t;
  r.tau = tau;
  r.y_check = y_check;
  r.nz = obs.z.size();
  r.ny = obs.y.size();
  r.nx = obs.x.size();
  r.joint.assign(r.nz * r.ny * r.nx, 0.0);
  return r;
}

double& cell(CpfResult& r, std::size_t z, std::size_t y, std::size_t x) { return r.joint[(z * r.ny + y) * r.nx + x]; }

void validate_inputs(const SuperOperator& l_total, const CpfObservables& obs, double t, double tau,
                     const Matrix& rho0_s, const Matrix& rho0_e) {
  if (l_total.dims.size() != 2) throw DimensionError("cpf: generator must be bipartite");
  if (t < 0.0 || tau < 0.0) throw DomainError("cpf: negative time");
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  if (rho0_s.rows() != ds || rho0_e.rows() != de) throw DimensionError("cpf: initial state dims differ");
  check_measurement(obs.x, ds, "x");
  check_measurement(obs.y, ds, "y");
  check_measurement(obs.z, ds, "z");
}

Matrix propagator(const SuperOperator& l, double t) {
  if (t == 0.0) return Matrix::Identity(l.matrix.rows(), l.matrix.cols());
  return expm((t * l.matrix).eval());
}

}  // namespace

ClosureReport check_closure(const std::vector<Matrix>& maps, double tol) {
  ClosureReport r;
  r.closed = true;
  r.product.assign(maps.size(), std::vector<int>(maps.size(), -1));
  for (std::size_t a = 0; a < maps.size(); ++a) {
    for (std::size_t b = 0; b < maps.size(); ++b) {
      const int k = find_map(maps, maps[a] * maps[b], tol, &r.max_defect);
      r.product[a][b] = k;
      if (k < 0) r.closed = false;
    }
  }
  return r;
}

std::vector<Matrix> map_group(const BystanderCoupling& c, std::size_t max_size, double tol) {
  const Index ds = c.system_dim();
  std::vector<Matrix> group = {Matrix::Identity(ds * ds, ds * ds)};
  std::vector<Matrix> gens;
  for (std::size_t a = 0; a < c.channels(); ++a) {
    if (std::abs(c.gamma(a, a)) <= tol || c.sys_maps[a][a].empty()) continue;
    const Matrix s = sys_map(c, a, a);
    if (find_map(group, s, tol, nullptr) < 0) {
      group.push_back(s);
      gens.push_back(s);
    }
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const auto& g : gens) {
      const Matrix p = group[i] * g;
      if (find_map(group, p, tol, nullptr) < 0) {
        if (group.size() >= max_size) throw NumericalError("map_group: composition closure exceeds size limit");
        group.push_back(p);
      }
    }
  }
  return group;
}

PropagatorDecomposition extract_decomposition(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps,
                                              double t) {
  if (l_total.dims.size() != 2) throw DimensionError("extract_decomposition: generator must be bipartite");
  if (sys_maps.empty()) throw DimensionError("extract_decomposition: no system maps");
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  const Index n1 = ds * ds, n2 = de * de;
  for (const auto& s : sys_maps) {
    if (s.rows() != n1 || s.cols() != n1) throw DimensionError("extract_decomposition: map dims differ");
  }
  if (!check_closure(sys_maps).closed) throw DomainError("extract_decomposition: maps are not composition-closed");

  const Index m = static_cast<Index>(sys_maps.size());
  Matrix a(n1 * n1, m);
  for (Index k = 0; k < m; ++k) a.col(k) = vec(sys_maps[k]);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < m) throw NumericalError("extract_decomposition: system maps are linearly dependent");

  const Matrix r = realign(propagator(l_total, t), ds, de);
  const Matrix x = qr.solve(r);
  PropagatorDecomposition out;
  out.t = t;
  out.sys_maps = sys_maps;
  for (Index k = 0; k < m; ++k) {
    Matrix f(n2, n2);
    for (Index q = 0; q < n2; ++q) {
      for (Index p = 0; p < n2; ++p) f(p, q) = x(k, q * n2 + p);
    }
    out.env_maps.push_back(std::move(f));
  }
  out.residual = (a * x - r).cwiseAbs().maxCoeff();
  return out;
}

void check_stochastic(const RealMatrix& choice, std::size_t ny, std::size_t nx) {
  if (static_cast<std::size_t>(choice.rows()) != ny || static_cast<std::size_t>(choice.cols()) != nx) {
    throw DimensionError("choice matrix must be ny x nx");
  }
  if ((choice.array() < -kTolStruct).any()) throw DomainError("choice matrix has negative entries");
  for (Index c = 0; c < choice.cols(); ++c) {
    if (std::abs(choice.col(c).sum() - 1.0) > kTolStruct) throw DomainError("choice matrix columns must sum to 1");
  }
}

double cpf_from_joint(const CpfResult& r, const CpfObservables& obs) {
  const std::size_t y = r.y_check;
  double py = 0.0, ezx = 0.0, ez = 0.0, ex = 0.0;
  for (std::size_t z = 0; z < r.nz; ++z) {
    for (std::size_t x = 0; x < r.nx; ++x) {
      const double p = r.at(z, y, x);
      py += p;
      ezx += obs.z[z].value * obs.x[x].value * p;
      ez += obs.z[z].value * p;
      ex += obs.x[x].value * p;
    }
  }
  if (py <= kTolNum) throw NumericalError("cpf: P(y) vanishes, conditional undefined");
  return ezx / py - (ez / py) * (ex / py);
}

CpfResult cpf_deterministic(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps,
                            const CpfObservables& obs, double t, double tau, std::size_t y_check,
                            const Matrix& rho0_s, const Matrix& rho0_e) {
  validate_inputs(l_total, obs, t, tau, rho0_s, rho0_e);
  const Index ds = l_total.dims[0];
  const auto dec_t = extract_decomposition(l_total, sys_maps, t);
  const auto dec_tau = extract_decomposition(l_total, sys_maps, tau);
  if (dec_t.residual > kTolNum || dec_tau.residual > kTolNum) {
    throw NumericalError("cpf_deterministic: propagator does not split over the map set");
  }
  const std::size_t m = sys_maps.size();
  Matrix tab(m, m);
  RealVector tv(m);
  for (std::size_t b = 0; b < m; ++b) {
    const Matrix fb = apply_map(dec_t.env_maps[b], rho0_e);
    tv(b) = fb.trace().real();
    for (std::size_t a = 0; a < m; ++a) tab(a, b) = apply_map(dec_tau.env_maps[a], fb).trace();
  }

  CpfResult r = make_result(Scheme::kDeterministic, obs, t, tau, y_check);
  for (std::size_t x = 0; x < r.nx; ++x) {
    const Matrix px = obs.x[x].projector * rho0_s * obs.x[x].projector;
    for (std::size_t b = 0; b < m; ++b) {
      const Matrix sb = apply_map(sys_maps[b], px);
      for (std::size_t y = 0; y < r.ny; ++y) {
        const Matrix w = obs.y[y].projector * sb * obs.y[y].projector;
        for (std::size_t a = 0; a < m; ++a) {
          const Matrix sa = apply_map(sys_maps[a], w);
          for (std::size_t z = 0; z < r.nz; ++z) {
            cell(r, z, y, x) += (trace_re(obs.z[z].projector, sa) * tab(a, b)).real();
          }
        }
      }
    }
  }

  const Matrix& py_proj = obs.y[y_check].projector;
  if (std::abs(py_proj.trace().real() - 1.0) < kTolNum) {
    Matrix rho_x = Matrix::Zero(ds, ds);
    Matrix ox_rho = Matrix::Zero(ds, ds);
    for (const auto& o : obs.x) {
      const Matrix part = o.projector * rho0_s * o.projector;
      rho_x += part;
      ox_rho += o.value * part;
    }
    Matrix oz = Matrix::Zero(ds, ds);
    for (const auto& o : obs.z) oz += o.value * o.projector;
    RealVector zc(m), uc(m), rc(m);
    for (std::size_t k = 0; k < m; ++k) {
      const Matrix dual = dual_map(sys_maps[k]);
      const Matrix dual_y = apply_map(dual, py_proj);
      zc(k) = trace_re(py_proj, apply_map(dual, oz));
      uc(k) = trace_re(ox_rho, dual_y);
      rc(k) = trace_re(rho_x, dual_y);
    }
    const double py = rc.dot(tv);
    if (py <= kTolNum) throw NumericalError("cpf_deterministic: P(y) vanishes, conditional undefined");
    double sum = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        for (std::size_t mu = 0; mu < m; ++mu) {
          const double lambda = (tab(a, b) * tv(mu) - tab(a, mu) * tv(b)).real();
          sum += zc(a) * uc(b) * rc(mu) * lambda;
        }
      }
    }
    r.p_y = py;
    r.value = sum / (py * py);
  } else {
    r.value = cpf_from_joint(r, obs);
    r.p_y = 0.0;
    for (std::size_t z = 0; z < r.nz; ++z) {
      for (std::size_t x = 0; x < r.nx; ++x) r.p_y += r.at(z, y_check, x);
    }
  }
  return r;
}

CpfResult cpf_random(const SuperOperator& l_total, const std::vector<Matrix>& sys_maps, const CpfObservables& obs,
                     const RealMatrix& choice, double t, double tau, std::size_t y_check, const Matrix& rho0_s,
                     const Matrix& rho0_e) {
  validate_inputs(l_total, obs, t, tau, rho0_s, rho0_e);
  check_stochastic(choice, obs.y.size(), obs.x.size());
  const auto dec_t = extract_decomposition(l_total, sys_maps, t);
  const auto dec_tau = extract_decomposition(l_total, sys_maps, tau);
  if (dec_t.residual > kTolNum || dec_tau.residual > kTolNum) {
    throw NumericalError("cpf_random: propagator does not split over the map set");
  }
  const std::size_t m = sys_maps.size();
  Matrix rho_te = Matrix::Zero(rho0_e.rows(), rho0_e.cols());
  for (const auto& f : dec_t.env_maps) rho_te += apply_map(f, rho0_e);
  RealVector q(m);
  for (std::size_t a = 0; a < m; ++a) q(a) = apply_map(dec_tau.env_maps[a], rho_te).trace().real();

  CpfResult r = make_result(Scheme::kRandom, obs, t, tau, y_check);
  for (std::size_t y = 0; y < r.ny; ++y) {
    const Matrix rho_y = obs.y[y].projector / obs.y[y].projector.trace().real();
    std::vector<double> pz(r.nz, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      const Matrix sa = apply_map(sys_maps[a], rho_y);
      for (std::size_t z = 0; z < r.nz; ++z) pz[z] += trace_re(obs.z[z].projector, sa) * q(a);
    }
    for (std::size_t x = 0; x < r.nx; ++x) {
      const double px = trace_re(obs.x[x].projector, rho0_s);
      for (std::size_t z = 0; z < r.nz; ++z) cell(r, z, y, x) = pz[z] * choice(y, x) * px;
    }
  }
  r.value = cpf_from_joint(r, obs);
  for (std::size_t z = 0; z < r.nz; ++z) {
    for (std::size_t x = 0; x < r.nx; ++x) r.p_y += r.at(z, y_check, x);
  }
  return r;
}

CpfResult cpf_measurement_oracle(const SuperOperator& l_total, const CpfObservables& obs, double t, double tau,
                                 std::size_t y_check, Scheme scheme, const Matrix& rho0_s, const Matrix& rho0_e,
                                 const std::optional<RealMatrix>& choice) {
  validate_inputs(l_total, obs, t, tau, rho0_s, rho0_e);
  const Index ds = l_total.dims[0], de = l_total.dims[1];
  if (scheme == Scheme::kRandom) {
    if (!choice) throw DomainError("cpf_measurement_oracle: random scheme needs a choice matrix");
    check_stochastic(*choice, obs.y.size(), obs.x.size());
  }
  const Matrix gt = propagator(l_total, t);
  const Matrix gtau = propagator(l_total, tau);
  const Matrix ie = Matrix::Identity(de, de);
  CpfResult r = make_result(scheme, obs, t, tau, y_check);
  for (std::size_t x = 0; x < r.nx; ++x) {
    const double px = trace_re(obs.x[x].projector, rho0_s);
    if (px <= 0.0) continue;
    const Matrix rho_x = obs.x[x].projector * rho0_s * obs.x[x].projector / px;
    const Matrix rho_t = apply_map(gt, kron(rho_x, rho0_e));
    for (std::size_t y = 0; y < r.ny; ++y) {
      Matrix mid;
      double weight = px;
      if (scheme == Scheme::kDeterministic) {
        const Matrix py = kron(obs.y[y].projector, ie);
        mid = py * rho_t * py;
      } else {
        const Matrix rho_y = obs.y[y].projector / obs.y[y].projector.trace().real();
        mid = kron(rho_y, trace_system(rho_t, ds, de));
        weight *= (*choice)(y, x);
      }
      const Matrix fin = apply_map(gtau, mid);
      for (std::size_t z = 0; z < r.nz; ++z) {
        cell(r, z, y, x) = weight * trace_re(kron(obs.z[z].projector, ie), fin);
      }
    }
  }
  r.value = cpf_from_joint(r, obs);
  for (std::size_t z = 0; z < r.nz; ++z) {
    for (std::size_t x = 0; x < r.nx; ++x) r.p_y += r.at(z, y_check, x);
  }
  return r;
}

}  // namespace bystander
