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

// Quantum-jump unravelling of bystander dynamics. The environment follows
// a jump process driven by the B_a channels and every jump applies the
// collisional map S_a to the system, so each trajectory stays a product
// state rho_s (x) rho_e.

#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bystander/structure.hpp"

namespace bystander {

struct JumpEvent {
  double time = 0.0;
  std::size_t channel = 0;
};

struct TrajectorySample {
  double time = 0.0;
  Matrix rho_s;
  Matrix rho_e;

  Matrix bipartite() const { return kron(rho_s, rho_e); }
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<JumpEvent> events;
  std::vector<TrajectorySample> samples;

  /// FNV-1a over the sample times and factor entries.
  std::uint64_t checksum() const;
};

struct UnravelOptions {
  /// Stop after this many jumps; later samples are omitted.
  std::optional<std::size_t> max_jumps;
  /// Internal step as a fraction of the smallest grid step.
  double step_fraction = 0.1;
  /// Upper bound on (max total rate) * internal step.
  double max_rate_step = 0.01;
};

/// Precomputed pieces of a diagonal-rate model, shared between trajectories.
class Unraveller {
 public:
  Unraveller(const ModelSpec& model, std::vector<double> times, UnravelOptions options = {});

  /// Trajectory `index` of the stream with master seed `seed`.
  TrajectoryRecord simulate(std::uint64_t seed, std::uint64_t index) const;

  const std::vector<double>& times() const { return times_; }
  double internal_step() const { return h_; }

 private:
  Matrix sys_at(const Matrix& rho, double dt) const;
  Matrix env_drift(const Matrix& rho, double dt) const;

  Index ds_ = 0, de_ = 0;
  std::vector<double> times_;
  UnravelOptions options_;
  Matrix l_s_;
  bool trivial_sys_ = false;
  Matrix l_nj_;
  std::vector<double> rates_;
  std::vector<Matrix> env_ops_;
  std::vector<Matrix> sys_maps_;
  Matrix rho0_s_, rho0_e_;
  double h_ = 0.0;
  /// ladder_[k] = exp(2^k h L_nj).
  std::vector<Matrix> ladder_;
};

/// Single trajectory with stream index 0.
TrajectoryRecord simulate_trajectory(const ModelSpec& model, std::uint64_t seed, const std::vector<double>& t_grid,
                                     const UnravelOptions& options = {});

/// Trajectories 0..n-1 of the stream; the result does not depend on threads.
std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec& model, std::uint64_t seed, std::size_t n,
                                                const std::vector<double>& t_grid, unsigned threads = 1,
                                                const UnravelOptions& options = {});

struct EnsembleAverage {
  std::vector<double> times;
  std::vector<Matrix> mean;
  /// Per-entry standard error of the complex mean.
  std::vector<RealMatrix> std_error;
  std::size_t count = 0;

  /// Scale for the trace distance error: sqrt(D)/2 times the Frobenius norm
  /// of the entrywise standard errors.
  double trace_distance_error(std::size_t k) const;
};

/// Uses the first `count` records (all when empty).
EnsembleAverage ensemble_average(const std::vector<TrajectoryRecord>& records, const std::vector<double>& t_grid,
                                 std::optional<std::size_t> count = std::nullopt);

struct WaitingTimeStats {
  std::vector<double> intervals;
  std::vector<double> bin_edges;
  /// Normalized density per bin.
  std::vector<double> density;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  /// Kolmogorov-Smirnov distance to an exponential law.
  double ks_statistic = 0.0;
  bool empty = true;
};

/// Intervals between consecutive jumps of each trajectory. The KS reference
/// rate defaults to 1 / mean.
WaitingTimeStats waiting_time_histogram(const std::vector<TrajectoryRecord>& records, std::size_t bins = 50,
                                        std::optional<double> reference_rate = std::nullopt);

double ks_exponential(std::vector<double> samples, double rate);

/// 5% critical value of the one-sample KS statistic for large n.
inline double ks_critical_5pct(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

/// JSON lines: a header {"format":"bystander-trajectories","version":1}
/// followed by one {"index","seed","events":[[t,a],...],"checksum"} per record.
void write_records(std::ostream& os, const std::vector<TrajectoryRecord>& records);

struct SerializedRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::vector<JumpEvent> events;
  std::uint64_t checksum = 0;
};

std::vector<SerializedRecord> read_records(std::istream& is);

}  // namespace bystander
