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

#include "bystander/unravel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "bystander/rng.hpp"

namespace bystander {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_double(std::uint64_t& h, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  for (int k = 0; k < 8; ++k) {
    h ^= (bits >> (8 * k)) & 0xffULL;
    h *= kFnvPrime;
  }
}

void fnv_matrix(std::uint64_t& h, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      fnv_double(h, m(i, j).real());
      fnv_double(h, m(i, j).imag());
    }
  }
}

double vec_trace(const Vector& v, Index d) {
  double t = 0.0;
  for (Index i = 0; i < d; ++i) t += v(i * d + i).real();
  return t;
}

Matrix normalized(const Matrix& m) {
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw NumericalError("unravel: conditional state lost its trace");
  Matrix out = m / tr;
  return 0.5 * (out + out.adjoint());
}

}  // namespace

std::uint64_t TrajectoryRecord::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : samples) {
    fnv_double(h, s.time);
    fnv_matrix(h, s.rho_s);
    fnv_matrix(h, s.rho_e);
  }
  return h;
}

Unraveller::Unraveller(const ModelSpec& model, std::vector<double> times, UnravelOptions options)
    : ds_(model.ds), de_(model.de), times_(std::move(times)), options_(options) {
  check_time_grid(times_);
  const auto& c = model.coupling;
  validate_coupling(c);
  for (Index a = 0; a < c.gamma.rows(); ++a) {
    for (Index b = 0; b < c.gamma.cols(); ++b) {
      if (a != b && std::abs(c.gamma(a, b)) > kTolStruct) {
        throw DomainError("unravel: jump unravelling needs a diagonal rate matrix");
      }
    }
  }
  if (model.l_s.dim() != ds_ || model.l_e.dim() != de_) throw DimensionError("unravel: generator dims differ");
  if (model.rho0_s.rows() != ds_ || model.rho0_e.rows() != de_) throw DimensionError("unravel: state dims differ");
  if (!(options_.step_fraction > 0.0) || !(options_.max_rate_step > 0.0)) {
    throw DomainError("unravel: step controls must be positive");
  }

  l_s_ = model.l_s.matrix;
  trivial_sys_ = l_s_.cwiseAbs().maxCoeff() == 0.0;
  rho0_s_ = model.rho0_s;
  rho0_e_ = model.rho0_e;
  l_nj_ = model.l_e.matrix;
  double max_rate = 0.0;
  for (std::size_t a = 0; a < c.channels(); ++a) {
    const double g = c.gamma(a, a).real();
    const Matrix& b = c.env_ops[a];
    const Matrix bb = b.adjoint() * b;
    l_nj_ -= 0.5 * g * (spre(bb) + spost(bb));
    rates_.push_back(g);
    env_ops_.push_back(b);
    sys_maps_.push_back(c.sys_maps[a][a].empty() ? Matrix::Identity(ds_ * ds_, ds_ * ds_) : sys_map(c, a, a));
    max_rate += g * herm_eig(bb).values.maxCoeff();
  }

  const double horizon = times_.back();
  double grid_step = horizon > 0.0 ? horizon : 1.0;
  for (std::size_t k = 1; k < times_.size(); ++k) grid_step = std::min(grid_step, times_[k] - times_[k - 1]);
  h_ = grid_step * options_.step_fraction;
  if (max_rate > 0.0) h_ = std::min(h_, options_.max_rate_step / max_rate);
  if (max_rate > 0.0 && horizon > 0.0) {
    ladder_.push_back(expm((h_ * l_nj_).eval()));
    while (std::ldexp(h_, static_cast<int>(ladder_.size()) - 1) < horizon) ladder_.push_back(ladder_.back() * ladder_.back());
  }
}

Matrix Unraveller::sys_at(const Matrix& rho, double dt) const {
  if (trivial_sys_ || dt == 0.0) return rho;
  return normalized(apply_map(expm((dt * l_s_).eval()), rho));
}

Matrix Unraveller::env_drift(const Matrix& rho, double dt) const {
  if (dt == 0.0) return rho;
  return normalized(apply_map(expm((dt * l_nj_).eval()), rho));
}

TrajectoryRecord Unraveller::simulate(std::uint64_t seed, std::uint64_t index) const {
  CounterRng rng(seed, index);
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.index = index;
  rec.samples.reserve(times_.size());

  const double horizon = times_.back();
  double tc = 0.0;
  Matrix rho_s = rho0_s_;
  Matrix rho_e = rho0_e_;
  std::size_t next = 0;

  auto emit_until = [&](double limit, bool inclusive) {
    while (next < times_.size() && (times_[next] < limit || (inclusive && times_[next] <= limit))) {
      const double dt = times_[next] - tc;
      rec.samples.push_back({times_[next], sys_at(rho_s, dt), env_drift(rho_e, dt)});
      ++next;
    }
  };

  while (true) {
    if (ladder_.empty()) {
      emit_until(horizon, true);
      break;
    }
    const double u = rng.uniform();
    // Survival Tr exp(s L_nj)[rho_e] is non-increasing; find the last
    // internal step above u, then bisect inside the following step.
    Vector v = vec(rho_e);
    const double room = (horizon - tc) / h_;
    const std::uint64_t max_steps = room > 0.0 ? static_cast<std::uint64_t>(std::floor(room)) : 0;
    std::uint64_t m = 0;
    for (std::size_t k = ladder_.size(); k-- > 0;) {
      const std::uint64_t stride = std::uint64_t{1} << k;
      if (m + stride > max_steps) continue;
      Vector w = ladder_[k] * v;
      if (vec_trace(w, de_) > u) {
        v = std::move(w);
        m += stride;
      }
    }
    const double t_lo = tc + static_cast<double>(m) * h_;
    const double span = std::min(h_, horizon - t_lo);
    bool jumped = false;
    double s_hi = span;
    Vector at_jump;
    if (span > 0.0) {
      Vector w = expm((span * l_nj_).eval()) * v;
      if (vec_trace(w, de_) <= u) {
        jumped = true;
        double s_lo = 0.0;
        at_jump = std::move(w);
        for (int it = 0; it < 80 && s_hi - s_lo > 1e-15 * std::max(1.0, t_lo); ++it) {
          const double mid = 0.5 * (s_lo + s_hi);
          Vector x = expm((mid * l_nj_).eval()) * v;
          if (vec_trace(x, de_) > u) {
            s_lo = mid;
          } else {
            s_hi = mid;
            at_jump = std::move(x);
          }
        }
      }
    }
    if (!jumped) {
      emit_until(horizon, true);
      break;
    }

    const double tj = t_lo + s_hi;
    emit_until(tj, false);
    const Matrix pre = normalized(unvec(at_jump, de_));
    std::vector<double> weights(rates_.size());
    double total = 0.0;
    for (std::size_t a = 0; a < rates_.size(); ++a) {
      weights[a] = std::max(0.0, rates_[a] * (env_ops_[a] * pre * env_ops_[a].adjoint()).trace().real());
      total += weights[a];
    }
    if (!(total > 0.0)) throw NumericalError("unravel: jump with vanishing channel weights");
    double r = rng.uniform() * total;
    std::size_t channel = 0;
    while (channel + 1 < weights.size() && (r >= weights[channel] || weights[channel] == 0.0)) {
      r -= weights[channel];
      ++channel;
    }
    rho_s = normalized(apply_map(sys_maps_[channel], sys_at(rho_s, tj - tc)));
    rho_e = normalized(env_ops_[channel] * pre * env_ops_[channel].adjoint());
    tc = tj;
    rec.events.push_back({tj, channel});
    if (options_.max_jumps && rec.events.size() >= *options_.max_jumps) break;
  }
  return rec;
}

TrajectoryRecord simulate_trajectory(const ModelSpec& model, std::uint64_t seed, const std::vector<double>& t_grid,
                                     const UnravelOptions& options) {
  return Unraveller(model, t_grid, options).simulate(seed, 0);
}

std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec& model, std::uint64_t seed, std::size_t n,
                                                const std::vector<double>& t_grid, unsigned threads,
                                                const UnravelOptions& options) {
  const Unraveller engine(model, t_grid, options);
  std::vector<TrajectoryRecord> out(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = engine.simulate(seed, i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = cursor++; i < n && !failed; i = cursor++) out[i] = engine.simulate(seed, i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double EnsembleAverage::trace_distance_error(std::size_t k) const {
  return 0.5 * std::sqrt(static_cast<double>(mean[k].rows())) * std_error[k].norm();
}

EnsembleAverage ensemble_average(const std::vector<TrajectoryRecord>& records, const std::vector<double>& t_grid,
                                 std::optional<std::size_t> count) {
  const std::size_t n = count ? *count : records.size();
  if (n == 0 || n > records.size()) throw DomainError("ensemble_average: record count out of range");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = records[i].samples;
    if (s.size() != t_grid.size()) throw DimensionError("ensemble_average: inconsistent grids");
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k].time != t_grid[k]) throw DimensionError("ensemble_average: inconsistent grids");
    }
  }
  EnsembleAverage out;
  out.times = t_grid;
  out.count = n;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    Matrix sum = Matrix::Zero(0, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix x = records[i].samples[k].bipartite();
      if (i == 0) sum = Matrix::Zero(x.rows(), x.cols());
      sum += x;
    }
    const Matrix mean = sum / static_cast<double>(n);
    RealMatrix var = RealMatrix::Zero(mean.rows(), mean.cols());
    if (n > 1) {
      for (std::size_t i = 0; i < n; ++i) var += (records[i].samples[k].bipartite() - mean).cwiseAbs2();
      var /= static_cast<double>(n - 1) * static_cast<double>(n);
    }
    out.mean.push_back(mean);
    out.std_error.push_back(var.cwiseSqrt());
  }
  return out;
}

double ks_exponential(std::vector<double> samples, double rate) {
  if (samples.empty()) throw DomainError("ks_exponential: no samples");
  if (!(rate > 0.0)) throw DomainError("ks_exponential: rate must be positive");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

WaitingTimeStats waiting_time_histogram(const std::vector<TrajectoryRecord>& records, std::size_t bins,
                                        std::optional<double> reference_rate) {
  if (bins == 0) throw DomainError("waiting_time_histogram: need at least one bin");
  WaitingTimeStats out;
  for (const auto& r : records) {
    for (std::size_t k = 1; k < r.events.size(); ++k) out.intervals.push_back(r.events[k].time - r.events[k - 1].time);
  }
  if (out.intervals.empty()) return out;
  out.empty = false;
  const double n = static_cast<double>(out.intervals.size());
  for (double x : out.intervals) out.mean += x;
  out.mean /= n;
  if (out.intervals.size() > 1) {
    for (double x : out.intervals) out.variance += (x - out.mean) * (x - out.mean);
    out.variance /= n - 1.0;
  }
  out.std_error = std::sqrt(out.variance / n);
  const double top = *std::max_element(out.intervals.begin(), out.intervals.end());
  const double width = top > 0.0 ? top / static_cast<double>(bins) : 1.0;
  out.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) out.bin_edges[b] = width * static_cast<double>(b);
  out.density.assign(bins, 0.0);
  for (double x : out.intervals) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>(x / width));
    out.density[b] += 1.0 / (n * width);
  }
  const double rate = reference_rate ? *reference_rate : 1.0 / out.mean;
  if (rate > 0.0 && std::isfinite(rate)) out.ks_statistic = ks_exponential(out.intervals, rate);
  return out;
}

void write_records(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
  os << nlohmann::json{{"format", "bystander-trajectories"}, {"version", 1}}.dump() << '\n';
  for (const auto& r : records) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : r.events) events.push_back({e.time, e.channel});
    nlohmann::json line;
    line["index"] = r.index;
    line["seed"] = r.seed;
    line["events"] = std::move(events);
    line["checksum"] = r.checksum();
    os << line.dump() << '\n';
  }
}

std::vector<SerializedRecord> read_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("read_records: missing header");
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "bystander-trajectories" || header.value("version", 0) != 1) {
    throw DomainError("read_records: unsupported header");
  }
  std::vector<SerializedRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DomainError("read_records: malformed record");
    SerializedRecord r;
    r.index = j.at("index").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.checksum = j.at("checksum").get<std::uint64_t>();
    for (const auto& e : j.at("events")) r.events.push_back({e.at(0).get<double>(), e.at(1).get<std::size_t>()});
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bystander
