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

#include "bystander/models.hpp"

#include <cmath>

#include "bystander/pauli.hpp"

namespace bystander {

namespace {

Matrix plus_state() { return Matrix::Constant(2, 2, 0.5); }

SuperOperator zero_generator(Index d) {
  return SuperOperator(Matrix::Zero(d * d, d * d), Dims{d}, true);
}

SuperOperator drive_generator(double omega) {
  return SuperOperator(commutator_generator((0.5 * omega * pauli_x()).eval()), Dims{2}, true);
}

Matrix env_or_default(const Matrix& given, const Matrix& fallback) {
  return given.size() == 0 ? fallback : given;
}

struct FEval {
  double f;
  double df;
};

FEval evaluate_f(double gamma, const CoherenceCoefficients& k, double tau) {
  const Complex delta = std::sqrt(Complex(k.delta_sq));
  const Complex z = delta * tau;
  const Complex ch = std::cosh(z);
  Complex sh;
  if (std::abs(z) < 1e-3) {
    const Complex z2 = z * z;
    sh = tau * (1.0 + z2 / 6.0 + z2 * z2 / 120.0 + z2 * z2 * z2 / 5040.0);
  } else {
    sh = std::sinh(z) / delta;
  }
  const double e1 = std::exp(-gamma * tau);
  const double e4 = std::exp(-0.25 * gamma * tau);
  const Complex inner = k.b * ch + k.c * sh;
  const Complex f = e1 * k.a + e4 * inner;
  const Complex df = -gamma * e1 * k.a + e4 * (-0.25 * gamma * inner + k.b * k.delta_sq * sh + k.c * ch);
  const double scale = std::max(1.0, std::abs(e1 * k.a) + e4 * (std::abs(k.b * ch) + std::abs(k.c * sh)));
  if (std::abs(f.imag()) > 1e-12 * scale) throw NumericalError("coherence_f: result is not real");
  return {f.real(), df.real()};
}

void require_equal_rates(const MultipartiteParams& p) {
  if (std::abs(p.phi - p.gamma) > 1e-12 * std::max(1.0, p.gamma)) {
    throw DomainError("closed forms require phi = gamma");
  }
}

}  // namespace

void validate(const FluorDephasingParams& p) {
  if (!(p.gamma > 0.0)) throw DomainError("fluor: gamma must be positive");
  if (!(p.omega >= 0.0)) throw DomainError("fluor: omega must be non-negative");
  if (p.rho0e.size() != 0) DensityMatrix check(p.rho0e);
}

Matrix fluor_stationary_env(double gamma, double omega) {
  Matrix r(2, 2);
  r << omega * omega, Complex(0, -gamma * omega), Complex(0, gamma * omega), gamma * gamma + omega * omega;
  return r / (gamma * gamma + 2 * omega * omega);
}

SuperOperator fluor_env_generator(double gamma, double omega) {
  Matrix l = drive_generator(omega).matrix + gamma * dissipator(lowering());
  return SuperOperator(std::move(l), Dims{2}, true);
}

Matrix fluor_gpm_generator(double gamma, double omega, int sign) {
  const Matrix s = lowering();
  const Matrix n = s.adjoint() * s;
  return drive_generator(omega).matrix + static_cast<double>(sign) * gamma * sandwich(s, s.adjoint()) -
         0.5 * gamma * (spre(n) + spost(n));
}

ModelSpec fluor_model(const FluorDephasingParams& p, const Matrix& rho0_s, const std::vector<double>& times) {
  validate(p);
  ModelSpec m;
  m.ds = 2;
  m.de = 2;
  m.l_s = zero_generator(2);
  m.l_e = drive_generator(p.omega);
  m.coupling = diagonal_coupling({p.gamma}, {lowering()}, {KrausOps{pauli_z()}});
  m.rho0_s = env_or_default(rho0_s, plus_state());
  m.rho0_e = env_or_default(p.rho0e, fluor_stationary_env(p.gamma, p.omega));
  m.times = times;
  return m;
}

Matrix fluor_env_state(const FluorDephasingParams& p, double t) {
  const Matrix rho = env_or_default(p.rho0e, fluor_stationary_env(p.gamma, p.omega));
  if (t == 0.0) return rho;
  return apply_map(expm((t * fluor_env_generator(p.gamma, p.omega).matrix).eval()), rho);
}

CoherenceCoefficients fluor_coefficients(double gamma, double omega, const Matrix& env_state) {
  const double sy = (env_state * pauli_y()).trace().real();
  const double sz = (env_state * pauli_z()).trace().real();
  const double den = gamma * gamma + 2 * omega * omega;
  CoherenceCoefficients k;
  k.b = (2 * gamma * omega * sy - sz * gamma * gamma) / den;
  k.a = 1.0 - k.b;
  k.c = -gamma * (6 * gamma * omega * sy + sz * (gamma * gamma + 8 * omega * omega)) / (4 * den);
  k.delta_sq = 0.0625 * gamma * gamma - omega * omega;
  return k;
}

double coherence_f(const FluorDephasingParams& p, double tau, double t) {
  if (tau < 0.0 || t < 0.0) throw DomainError("coherence_f: negative time");
  return evaluate_f(p.gamma, fluor_coefficients(p.gamma, p.omega, fluor_env_state(p, t)), tau).f;
}

double coherence_f_derivative(const FluorDephasingParams& p, double tau, double t) {
  if (tau < 0.0 || t < 0.0) throw DomainError("coherence_f_derivative: negative time");
  return evaluate_f(p.gamma, fluor_coefficients(p.gamma, p.omega, fluor_env_state(p, t)), tau).df;
}

std::optional<double> fluor_canonical_rate(const FluorDephasingParams& p, double t) {
  const FEval e = evaluate_f(p.gamma, fluor_coefficients(p.gamma, p.omega, fluor_env_state(p, 0.0)), t);
  if (std::abs(e.f) < 1e-13) return std::nullopt;
  return -e.df / e.f;
}

RateSeries fluor_rate_series(const FluorDephasingParams& p, const std::vector<double>& times) {
  validate(p);
  const CoherenceCoefficients k = fluor_coefficients(p.gamma, p.omega, fluor_env_state(p, 0.0));
  RateSeries out;
  out.times = times;
  std::vector<FEval> ev;
  for (double t : times) ev.push_back(evaluate_f(p.gamma, k, t));
  for (const auto& e : ev) {
    out.values.push_back(std::abs(e.f) < 1e-13 ? std::nullopt : std::optional<double>(-e.df / e.f));
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(ev[i].f * ev[i + 1].f < 0.0)) continue;
    double lo = times[i], hi = times[i + 1];
    const bool lo_positive = ev[i].f > 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((evaluate_f(p.gamma, k, mid).f > 0.0) == lo_positive) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double root = 0.5 * (lo + hi);
    out.divergences.push_back(root);
    const std::size_t nearest = (root - times[i] <= times[i + 1] - root) ? i : i + 1;
    out.values[nearest] = std::nullopt;
  }
  return out;
}

double fluor_cpf_closed_form(const FluorDephasingParams& p, double t, double tau, int y, double mean_x) {
  const double ft0 = coherence_f(p, t, 0.0);
  const double py = 0.5 * (1.0 + y * mean_x * ft0);
  if (py <= kTolNum) throw NumericalError("fluor_cpf_closed_form: P(y) vanishes");
  return (1.0 - mean_x * mean_x) / (4.0 * py * py) * (coherence_f(p, t + tau, 0.0) - coherence_f(p, tau, t) * ft0);
}

void validate(const MultipartiteParams& p) {
  if (p.n_qubits < 1) throw DomainError("multipartite: n_qubits must be >= 1");
  if (!(p.gamma > 0.0)) throw DomainError("multipartite: gamma must be positive");
  if (!(p.phi >= 0.0)) throw DomainError("multipartite: phi must be non-negative");
  if (!(p.omega >= 0.0)) throw DomainError("multipartite: omega must be non-negative");
  for (const auto* s : {&p.string_a, &p.string_b}) {
    if (static_cast<int>(s->size()) != p.n_qubits) throw DomainError("multipartite: Pauli string length differs from n_qubits");
    const Matrix m = pauli_string(*s);
    if ((m * m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() > kTolStruct) {
      throw DomainError("multipartite: Pauli string is not involutive");
    }
  }
  if (p.rho0e.size() != 0) DensityMatrix check(p.rho0e);
}

ModelSpec multipartite_model(const MultipartiteParams& p, const Matrix& rho0_s, const std::vector<double>& times) {
  validate(p);
  const Index ds = Index{1} << p.n_qubits;
  ModelSpec m;
  m.ds = ds;
  m.de = 2;
  m.l_s = zero_generator(ds);
  m.l_e = drive_generator(p.omega);
  m.coupling = diagonal_coupling({p.gamma, p.phi}, {lowering(), raising()},
                                 {KrausOps{pauli_string(p.string_a)}, KrausOps{pauli_string(p.string_b)}});
  m.rho0_s = env_or_default(rho0_s, Matrix::Identity(ds, ds) / static_cast<double>(ds));
  m.rho0_e = env_or_default(p.rho0e, Matrix::Identity(2, 2) / 2.0);
  m.times = times;
  return m;
}

std::vector<Matrix> multipartite_label_maps(const MultipartiteParams& p) {
  validate(p);
  const Matrix a = pauli_string(p.string_a);
  const Matrix b = pauli_string(p.string_b);
  const Matrix sa = sandwich(a, a);
  const Matrix sb = sandwich(b, b);
  return {Matrix::Identity(sa.rows(), sa.cols()), sa, sb, sb * sa};
}

std::array<double, 4> multipartite_weights(const MultipartiteParams& p, double t) {
  require_equal_rates(p);
  const double g = p.gamma, w = p.omega;
  const double chi2 = g * g + w * w;
  const double chi = std::sqrt(chi2);
  const double e = std::exp(-g * t);
  const double osc = g * g / chi2 * std::cos(chi * t) + w * w / chi2;
  const double pa = 0.25 * (1.0 - std::exp(-2 * g * t));
  return {0.5 * e * (std::cosh(g * t) + osc), pa, pa, 0.5 * e * (std::cosh(g * t) - osc)};
}

MultipartiteRates multipartite_rates(const MultipartiteParams& p, double t) {
  require_equal_rates(p);
  const double g = p.gamma, w = p.omega;
  const double chi = std::sqrt(g * g + w * w);
  MultipartiteRates r;
  r.a = r.b = 0.5 * g;
  const double den = (w / g) * (w / g) + std::cos(chi * t);
  if (std::abs(den) > 1e-12) r.c = 0.5 * chi * std::sin(chi * t) / den;
  return r;
}

double multipartite_outcome_probability(const MultipartiteParams& p, double t, int y, double mean_x) {
  require_equal_rates(p);
  const double g = p.gamma, w = p.omega;
  const double chi2 = g * g + w * w;
  const double chi = std::sqrt(chi2);
  return std::ldexp(1.0 + y * mean_x * std::exp(-g * t) * (w * w + g * g * std::cos(t * chi)) / chi2, -p.n_qubits);
}

double multipartite_cpf_closed_form(const MultipartiteParams& p, double t, double tau, int y, double mean_x) {
  const double g = p.gamma, w = p.omega;
  const double chi2 = g * g + w * w;
  const double chi = std::sqrt(chi2);
  const double py = multipartite_outcome_probability(p, t, y, mean_x);
  if (py <= kTolNum) throw NumericalError("multipartite_cpf_closed_form: P(y) vanishes");
  const double scaled = std::ldexp(py, p.n_qubits);
  const double st = std::sin(t * chi / 2), su = std::sin(tau * chi / 2);
  const double bracket = g * g / chi2 * std::sin(t * chi) * std::sin(tau * chi) -
                         4 * g * g * w * w / (chi2 * chi2) * st * st * su * su;
  return -(1.0 - mean_x * mean_x) / (scaled * scaled) * std::exp(-g * (t + tau)) * bracket;
}

Eigen::Matrix4d hadamard4() {
  Eigen::Matrix4d h;
  h << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  return h;
}

Matrix guv_generator(const MultipartiteParams& p, int u, int v) {
  const Matrix s = lowering();
  const Matrix sd = raising();
  const Matrix n_down = sd * s;
  const Matrix n_up = s * sd;
  return drive_generator(p.omega).matrix + static_cast<double>(u) * p.gamma * sandwich(s, sd) -
         0.5 * p.gamma * (spre(n_down) + spost(n_down)) + static_cast<double>(v) * p.phi * sandwich(sd, s) -
         0.5 * p.phi * (spre(n_up) + spost(n_up));
}

GuvFamilies guv_solver(const MultipartiteParams& p, const std::vector<double>& times) {
  validate(p);
  GuvFamilies out;
  out.times = times;
  const std::array<std::pair<int, int>, 4> signs = {{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  for (std::size_t k = 0; k < 4; ++k) {
    const SuperOperator gen(guv_generator(p, signs[k].first, signs[k].second), Dims{2});
    out.g[k] = propagator_family(gen, times).maps;
  }
  const Eigen::Matrix4d h = hadamard4();
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      Matrix f = Matrix::Zero(4, 4);
      for (std::size_t l = 0; l < 4; ++l) f += 0.25 * h(a, l) * out.g[l][i];
      out.f[a].push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace bystander
