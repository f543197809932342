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

#include "scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "bystander/cpf.hpp"
#include "bystander/models.hpp"
#include "bystander/pauli.hpp"
#include "bystander/qrt.hpp"
#include "bystander/unravel.hpp"

#ifndef BYSTANDER_VERSION
#define BYSTANDER_VERSION "unknown"
#endif

namespace bystander::cli {

using json = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string render(const Table& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.header.size(); ++k) os << (k ? "," : "") << t.header[k];
  os << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << "\r\n";
  }
  return os.str();
}

void add_matrix_columns(std::vector<std::string>& header, const std::string& prefix, Index d) {
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      const std::string base = prefix + "_" + std::to_string(i) + std::to_string(j);
      header.push_back(base + "_re");
      header.push_back(base + "_im");
    }
  }
}

void add_matrix_values(std::vector<std::string>& row, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      row.push_back(num(m(i, j).real()));
      row.push_back(num(m(i, j).imag()));
    }
  }
}

// ---- config helpers ----

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

double get_number(const json& j, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + ": missing \"" + key + "\"");
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + ": \"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": \"" + key + "\" must be finite");
  return x;
}

std::string get_string(const json& j, const char* key, const std::string& where, std::optional<std::string> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + ": missing \"" + key + "\"");
  }
  if (!j.at(key).is_string()) throw ConfigError(where + ": \"" + key + "\" must be a string");
  return j.at(key).get<std::string>();
}

Complex parse_entry(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": matrix entries must be numbers or [re, im] pairs");
}

Matrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const Index rows = static_cast<Index>(v.size());
  const Index cols = v[0].is_array() ? static_cast<Index>(v[0].size()) : 0;
  if (cols == 0) throw ConfigError(where + ": expected a non-empty array of rows");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!v[i].is_array() || static_cast<Index>(v[i].size()) != cols) throw ConfigError(where + ": ragged matrix");
    for (Index j = 0; j < cols; ++j) m(i, j) = parse_entry(v[i][j], where);
  }
  return m;
}

Matrix parse_square(const json& v, Index d, const std::string& where) {
  Matrix m = parse_matrix(v, where);
  if (m.rows() != d || m.cols() != d) {
    throw ConfigError(where + ": expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  }
  return m;
}

Matrix power_state(const Matrix& single, int n) {
  Matrix out = single;
  for (int k = 1; k < n; ++k) out = kron(out, single);
  return out;
}

Matrix named_qubit_state(const std::string& name) {
  Matrix psi(2, 1);
  const double r = 1.0 / std::sqrt(2.0);
  if (name == "up") {
    psi << 1.0, 0.0;
  } else if (name == "down") {
    psi << 0.0, 1.0;
  } else if (name == "plus") {
    psi << r, r;
  } else if (name == "minus") {
    psi << r, -r;
  } else if (name == "plus_y") {
    psi << r, Complex(0.0, r);
  } else if (name == "minus_y") {
    psi << r, Complex(0.0, -r);
  } else if (name == "mixed") {
    return Matrix::Identity(2, 2) / 2.0;
  } else {
    throw ConfigError("unknown state name \"" + name + "\"");
  }
  return psi * psi.adjoint();
}

/// Named states apply per qubit; `qubits` is 0 when d is not a power of two.
Matrix parse_state(const json& v, Index d, int qubits, const std::string& where) {
  Matrix rho;
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "mixed") {
      rho = Matrix::Identity(d, d) / static_cast<double>(d);
    } else {
      if (qubits <= 0) throw ConfigError(where + ": named states need a qubit register");
      rho = power_state(named_qubit_state(name), qubits);
    }
  } else {
    rho = parse_square(v, d, where);
  }
  try {
    DensityMatrix check(rho);
    (void)check;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return rho;
}

Matrix parse_operator(const json& v, Index d, const std::string& where) {
  Matrix op;
  if (v.is_string()) {
    try {
      op = pauli_string(v.get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (op.rows() != d) throw ConfigError(where + ": Pauli string length does not match the system");
  } else {
    op = parse_square(v, d, where);
  }
  return op;
}

std::vector<double> parse_grid(const json& cfg) {
  const json& g = need(cfg, "time_grid", "config");
  std::vector<double> times;
  if (g.contains("values")) {
    if (!g.at("values").is_array() || g.at("values").empty()) throw ConfigError("time_grid.values must be a non-empty array");
    for (const auto& v : g.at("values")) {
      if (!v.is_number()) throw ConfigError("time_grid.values must hold numbers");
      times.push_back(v.get<double>());
    }
  } else {
    const double start = get_number(g, "start", "time_grid", 0.0);
    const double stop = get_number(g, "stop", "time_grid");
    const json& pts = need(g, "points", "time_grid");
    if (!pts.is_number_integer() || pts.get<long long>() < 1) throw ConfigError("time_grid.points must be a positive integer");
    const auto n = static_cast<std::size_t>(pts.get<long long>());
    if (n == 1) {
      times.push_back(start);
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        times.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(n - 1));
      }
    }
  }
  if (times.front() != 0.0) throw ConfigError("time_grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw ConfigError("time_grid must be strictly increasing");
  }
  return times;
}

// ---- scenario ----

enum class ModelKind { kFluor, kMultipartite, kCustom };

struct Scenario {
  json config;
  ModelKind kind = ModelKind::kFluor;
  FluorDephasingParams fluor;
  MultipartiteParams multi;
  json custom;
  int qubits = 1;
  Index ds = 2;
  Index de = 2;
  /// Config times are in units of 1/time_unit.
  double time_unit = 1.0;
  std::string time_column = "t_gamma";
  std::vector<double> grid;
  std::string task;
  json options;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<Matrix> system_state;

  std::vector<double> times() const {
    std::vector<double> out;
    for (double t : grid) out.push_back(t / time_unit);
    return out;
  }
};

Scenario parse_scenario(const json& cfg, const RunOptions& options) {
  Scenario s;
  s.config = cfg;
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  const json& version = need(cfg, "schema_version", "config");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version; expected " + std::to_string(kSchemaVersion));
  }
  const json& model = need(cfg, "model", "config");
  const std::string type = get_string(model, "type", "model");
  if (type == "fluor") {
    s.kind = ModelKind::kFluor;
    s.fluor.gamma = get_number(model, "gamma", "model", 1.0);
    s.fluor.omega = get_number(model, "omega", "model");
    if (!(s.fluor.gamma > 0.0)) throw ConfigError("model.gamma must be positive");
    if (s.fluor.omega < 0.0) throw ConfigError("model.omega must be non-negative");
    s.time_unit = s.fluor.gamma;
    if (model.contains("env_state") && model.at("env_state") != "stationary") {
      s.fluor.rho0e = parse_state(model.at("env_state"), 2, 1, "model.env_state");
    }
  } else if (type == "multipartite") {
    s.kind = ModelKind::kMultipartite;
    const json& n = need(model, "n_qubits", "model");
    if (!n.is_number_integer() || n.get<int>() < 1 || n.get<int>() > 3) throw ConfigError("model.n_qubits must be 1, 2 or 3");
    s.multi.n_qubits = n.get<int>();
    s.multi.gamma = get_number(model, "gamma", "model", 1.0);
    s.multi.phi = get_number(model, "phi", "model", s.multi.gamma);
    s.multi.omega = get_number(model, "omega", "model");
    s.multi.string_a = get_string(model, "string_a", "model", std::string(static_cast<std::size_t>(s.multi.n_qubits), 'Z'));
    s.multi.string_b = get_string(model, "string_b", "model", std::string(static_cast<std::size_t>(s.multi.n_qubits), 'X'));
    if (!(s.multi.gamma > 0.0) || s.multi.phi < 0.0) throw ConfigError("model rates must be positive");
    try {
      validate(s.multi);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    s.qubits = s.multi.n_qubits;
    s.ds = Index{1} << s.qubits;
    s.time_unit = s.multi.gamma;
    if (model.contains("env_state")) s.multi.rho0e = parse_state(model.at("env_state"), 2, 1, "model.env_state");
  } else if (type == "custom") {
    s.kind = ModelKind::kCustom;
    s.custom = model;
    const json& ds = need(model, "ds", "model");
    const json& de = need(model, "de", "model");
    if (!ds.is_number_integer() || !de.is_number_integer() || ds.get<int>() < 1 || de.get<int>() < 1) {
      throw ConfigError("model.ds and model.de must be positive integers");
    }
    s.ds = ds.get<int>();
    s.de = de.get<int>();
    s.qubits = 0;
    for (Index d = s.ds; d > 1 && d % 2 == 0; d /= 2) ++s.qubits;
    if ((Index{1} << s.qubits) != s.ds) s.qubits = 0;
    s.time_unit = 1.0;
    s.time_column = "t";
  } else {
    throw ConfigError("model.type must be fluor, multipartite or custom");
  }
  if (cfg.contains("system_state")) s.system_state = parse_state(cfg.at("system_state"), s.ds, s.qubits, "system_state");
  s.grid = parse_grid(cfg);
  s.task = get_string(cfg, "task", "config");
  static const std::vector<std::string> tasks = {"verify", "evolve", "cpf", "qrt", "witness", "trajectories"};
  if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) throw ConfigError("unknown task \"" + s.task + "\"");
  s.options = cfg.value("options", json::object());
  if (!s.options.is_object()) throw ConfigError("options must be an object");
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    s.seed = cfg.at("seed").get<std::uint64_t>();
  }
  if (options.seed) s.seed = *options.seed;
  s.threads = options.threads;
  return s;
}

ModelSpec custom_model(const Scenario& s) {
  const json& m = s.custom;
  ModelSpec spec;
  spec.ds = s.ds;
  spec.de = s.de;
  LindbladSpec sys;
  sys.hamiltonian = m.contains("h_s") ? parse_square(m.at("h_s"), s.ds, "model.h_s") : Matrix::Zero(s.ds, s.ds);
  LindbladSpec env;
  env.hamiltonian = m.contains("h_e") ? parse_square(m.at("h_e"), s.de, "model.h_e") : Matrix::Zero(s.de, s.de);
  auto dissipators = [](const json& list, Index d, LindbladSpec& out, const std::string& where) {
    if (!list.is_array()) throw ConfigError(where + " must be an array");
    out.rates = Matrix::Zero(static_cast<Index>(list.size()), static_cast<Index>(list.size()));
    for (std::size_t k = 0; k < list.size(); ++k) {
      out.jump_ops.push_back(parse_square(need(list[k], "op", where), d, where));
      out.rates(static_cast<Index>(k), static_cast<Index>(k)) = get_number(list[k], "rate", where);
    }
  };
  sys.rates = Matrix::Zero(0, 0);
  env.rates = Matrix::Zero(0, 0);
  if (m.contains("system_dissipators")) dissipators(m.at("system_dissipators"), s.ds, sys, "model.system_dissipators");
  if (m.contains("env_dissipators")) dissipators(m.at("env_dissipators"), s.de, env, "model.env_dissipators");
  spec.l_s = assemble_lindbladian(sys);
  spec.l_e = assemble_lindbladian(env);

  const json& ops = need(m, "env_ops", "model");
  if (!ops.is_array() || ops.empty()) throw ConfigError("model.env_ops must be a non-empty array");
  const std::size_t n = ops.size();
  for (const auto& op : ops) spec.coupling.env_ops.push_back(parse_square(op, s.de, "model.env_ops"));
  spec.coupling.gamma = parse_square(need(m, "rate_matrix", "model"), static_cast<Index>(n), "model.rate_matrix");
  const json& maps = need(m, "maps", "model");
  if (!maps.is_array() || maps.size() != n) throw ConfigError("model.maps must be an n x n array of Kraus lists");
  spec.coupling.sys_maps.assign(n, std::vector<KrausOps>(n));
  for (std::size_t a = 0; a < n; ++a) {
    if (!maps[a].is_array() || maps[a].size() != n) throw ConfigError("model.maps must be an n x n array of Kraus lists");
    for (std::size_t b = 0; b < n; ++b) {
      if (maps[a][b].is_null()) continue;
      if (!maps[a][b].is_array()) throw ConfigError("model.maps entries must be Kraus lists or null");
      for (const auto& k : maps[a][b]) spec.coupling.sys_maps[a][b].push_back(parse_square(k, s.ds, "model.maps"));
    }
  }
  spec.rho0_s = Matrix::Identity(s.ds, s.ds) / static_cast<double>(s.ds);
  spec.rho0_e = m.contains("env_state") ? parse_state(m.at("env_state"), s.de, 0, "model.env_state")
                                        : Matrix::Identity(s.de, s.de) / static_cast<double>(s.de);
  return spec;
}

ModelSpec build_model(const Scenario& s) {
  ModelSpec m;
  switch (s.kind) {
    case ModelKind::kFluor:
      m = fluor_model(s.fluor, Matrix(), s.times());
      break;
    case ModelKind::kMultipartite:
      m = multipartite_model(s.multi, Matrix(), s.times());
      break;
    case ModelKind::kCustom:
      m = custom_model(s);
      m.times = s.times();
      break;
  }
  if (s.system_state) m.rho0_s = *s.system_state;
  return m;
}

struct TaskOutput {
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> extra_files;
  json result = json::object();
};

// ---- tasks ----

TaskOutput task_verify(const Scenario& s) {
  const ModelSpec m = build_model(s);
  const SuperOperator l = m.total_generator();
  const BystanderCheck check = verify_bystander_condition(l);
  const auto times = s.times();
  const auto states = propagate_states(l, m.initial_state(), times);
  const auto env = propagate_states(m.env_generator(), m.rho0_e, times);
  double sep = 0.0, marginal = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    sep = std::max(sep, separability_decompose(states[k], m.ds, m.de).residual);
    marginal = std::max(marginal, trace_distance(trace_system(states[k], m.ds, m.de), env[k]));
  }
  TaskOutput out;
  Table t{"verify.csv", {"check", "holds", "value"}, {}};
  t.rows.push_back({"bystander_condition", check.holds ? "true" : "false", num(check.violation)});
  t.rows.push_back({"separability_residual", sep <= 1e-9 ? "true" : "false", num(sep)});
  t.rows.push_back({"env_marginal_distance", marginal <= kTolNum ? "true" : "false", num(marginal)});
  out.tables.push_back(std::move(t));
  out.result = {{"holds", check.holds},
                {"violation", check.violation},
                {"separability_residual", sep},
                {"env_marginal_distance", marginal}};
  return out;
}

TaskOutput task_evolve(const Scenario& s) {
  const ModelSpec m = build_model(s);
  const auto states = propagate_states(m.total_generator(), m.initial_state(), s.times());
  Table sys{"evolve_system.csv", {s.time_column}, {}};
  Table env{"evolve_env.csv", {s.time_column}, {}};
  add_matrix_columns(sys.header, "rho_s", m.ds);
  add_matrix_columns(env.header, "rho_e", m.de);
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::vector<std::string> a{num(s.grid[k])}, b{num(s.grid[k])};
    add_matrix_values(a, trace_env(states[k], m.ds, m.de));
    add_matrix_values(b, trace_system(states[k], m.ds, m.de));
    sys.rows.push_back(std::move(a));
    env.rows.push_back(std::move(b));
  }
  TaskOutput out;
  out.tables.push_back(std::move(sys));
  out.tables.push_back(std::move(env));
  out.result = {{"points", states.size()}};
  return out;
}

TaskOutput task_witness(const Scenario& s) {
  TaskOutput out;
  if (s.kind == ModelKind::kFluor) {
    std::vector<double> omegas;
    if (s.options.contains("omegas")) {
      if (!s.options.at("omegas").is_array() || s.options.at("omegas").empty()) throw ConfigError("options.omegas must be a non-empty array");
      for (const auto& w : s.options.at("omegas")) {
        if (!w.is_number() || w.get<double>() < 0.0) throw ConfigError("options.omegas must hold non-negative numbers");
        omegas.push_back(w.get<double>() * s.fluor.gamma);
      }
    } else {
      omegas.push_back(s.fluor.omega);
    }
    json series = json::array();
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      FluorDephasingParams p = s.fluor;
      p.omega = omegas[k];
      const RateSeries r = fluor_rate_series(p, s.times());
      Table t{"witness_rate_" + std::to_string(k) + ".csv", {s.time_column, "rate_per_gamma", "coherence"}, {}};
      for (std::size_t i = 0; i < r.times.size(); ++i) {
        t.rows.push_back({num(s.grid[i]), r.values[i] ? num(*r.values[i] / p.gamma) : "div",
                          num(coherence_f(p, r.times[i], 0.0))});
      }
      json divs = json::array();
      for (double d : r.divergences) divs.push_back(d * p.gamma);
      series.push_back({{"file", t.file}, {"omega_over_gamma", p.omega / p.gamma}, {"divergences_t_gamma", divs}});
      out.tables.push_back(std::move(t));
    }
    out.result = {{"kind", "canonical_rate"}, {"series", series}};
    return out;
  }
  const ModelSpec m = build_model(s);
  const Index qubits = s.qubits;
  const Matrix a = s.options.contains("state_a") ? parse_state(s.options.at("state_a"), m.ds, static_cast<int>(qubits), "options.state_a")
                                                 : parse_state(json("plus"), m.ds, static_cast<int>(qubits), "options.state_a");
  const Matrix b = s.options.contains("state_b") ? parse_state(s.options.at("state_b"), m.ds, static_cast<int>(qubits), "options.state_b")
                                                 : parse_state(json("minus"), m.ds, static_cast<int>(qubits), "options.state_b");
  const auto w = blp_trace_distance_witness(m.total_generator(), kron(a, m.rho0_e), kron(b, m.rho0_e), s.times(), 0);
  Table t{"witness_blp.csv", {s.time_column, "trace_distance"}, {}};
  for (std::size_t k = 0; k < w.times.size(); ++k) t.rows.push_back({num(s.grid[k]), num(w.distances[k])});
  out.tables.push_back(std::move(t));
  out.result = {{"kind", "trace_distance"}, {"non_markovian", w.non_markovian}, {"max_increase", w.max_increase}};
  return out;
}

TaskOutput task_cpf(const Scenario& s) {
  const ModelSpec m = build_model(s);
  const std::string scheme = s.options.value("scheme", std::string("deterministic"));
  if (scheme != "deterministic" && scheme != "random") throw ConfigError("options.scheme must be deterministic or random");
  const std::string route = s.options.value("route", std::string("formula"));
  if (route != "formula" && route != "oracle") throw ConfigError("options.route must be formula or oracle");
  const std::string fallback = s.qubits > 0 ? std::string(static_cast<std::size_t>(s.qubits), 'X') : std::string();
  auto observable = [&](const char* key) {
    if (s.options.contains(key)) return parse_operator(s.options.at(key), m.ds, std::string("options.") + key);
    if (fallback.empty()) throw ConfigError(std::string("options.") + key + " is required for this model");
    return pauli_string(fallback);
  };
  CpfObservables obs;
  obs.x = spectral_measurement(observable("x"));
  obs.y = spectral_measurement(observable("y"));
  obs.z = spectral_measurement(observable("z"));
  std::size_t y_check = obs.y.size() - 1;
  if (s.options.contains("y_outcome")) {
    const json& y = s.options.at("y_outcome");
    if (!y.is_number_integer() || y.get<long long>() < 0 || static_cast<std::size_t>(y.get<long long>()) >= obs.y.size()) {
      throw ConfigError("options.y_outcome must index an outcome of y (ascending eigenvalues)");
    }
    y_check = static_cast<std::size_t>(y.get<long long>());
  }
  std::optional<double> tau;
  if (s.options.contains("tau") && s.options.at("tau") != "equal") {
    if (!s.options.at("tau").is_number() || s.options.at("tau").get<double>() < 0.0) {
      throw ConfigError("options.tau must be \"equal\" or a non-negative number");
    }
    tau = s.options.at("tau").get<double>();
  }
  RealMatrix choice = RealMatrix::Constant(static_cast<Index>(obs.y.size()), static_cast<Index>(obs.x.size()),
                                           1.0 / static_cast<double>(obs.y.size()));
  if (s.options.contains("choice")) {
    const Matrix c = parse_matrix(s.options.at("choice"), "options.choice");
    choice = c.real();
    try {
      check_stochastic(choice, obs.y.size(), obs.x.size());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("options.choice: ") + e.what());
    }
  }
  const SuperOperator l = m.total_generator();
  const auto maps = map_group(m.coupling);
  Table t{"cpf.csv", {s.time_column, "tau" + s.time_column.substr(1), "value", "p_y"}, {}};
  for (double tg : s.grid) {
    const double tt = tg / s.time_unit;
    const double tu = (tau ? *tau : tg) / s.time_unit;
    CpfResult r;
    if (route == "oracle") {
      r = cpf_measurement_oracle(l, obs, tt, tu, y_check, scheme == "random" ? Scheme::kRandom : Scheme::kDeterministic,
                                 m.rho0_s, m.rho0_e, choice);
    } else if (scheme == "random") {
      r = cpf_random(l, maps, obs, choice, tt, tu, y_check, m.rho0_s, m.rho0_e);
    } else {
      r = cpf_deterministic(l, maps, obs, tt, tu, y_check, m.rho0_s, m.rho0_e);
    }
    t.rows.push_back({num(tg), num(tu * s.time_unit), num(r.value), num(r.p_y)});
  }
  TaskOutput out;
  out.tables.push_back(std::move(t));
  out.result = {{"scheme", scheme}, {"route", route}, {"maps", maps.size()}};
  return out;
}

TaskOutput task_qrt(const Scenario& s) {
  const ModelSpec m = build_model(s);
  const std::string fallback = s.qubits > 0 ? std::string(static_cast<std::size_t>(s.qubits), 'X') : std::string();
  CorrelationRequest req;
  if (s.options.contains("left")) {
    req.left = parse_operator(s.options.at("left"), m.ds, "options.left");
  } else {
    if (fallback.empty()) throw ConfigError("options.left is required for this model");
    req.left = pauli_string(fallback);
  }
  std::vector<std::string> names;
  if (s.options.contains("right")) {
    if (!s.options.at("right").is_array() || s.options.at("right").empty()) throw ConfigError("options.right must be a non-empty array");
    for (const auto& r : s.options.at("right")) {
      req.right.push_back(parse_operator(r, m.ds, "options.right"));
      names.push_back("A" + std::to_string(names.size()));
    }
  } else {
    if (fallback.empty()) throw ConfigError("options.right is required for this model");
    req.right.push_back(pauli_string(fallback));
    names.push_back("A0");
  }
  const double tau_g = get_number(s.options, "tau", "options", 1.0);
  if (tau_g < 0.0) throw ConfigError("options.tau must be non-negative");
  const SuperOperator l = m.total_generator();
  const Matrix rho0 = m.initial_state();
  Table t{"qrt.csv", {s.time_column, "tau" + s.time_column.substr(1)}, {}};
  for (const auto& n : names) {
    for (const char* part : {"_exact_re", "_exact_im", "_qrt_re", "_qrt_im"}) t.header.push_back(n + part);
  }
  t.header.push_back("deviation");
  double worst = 0.0;
  for (double tg : s.grid) {
    req.t = tg / s.time_unit;
    req.tau = tau_g / s.time_unit;
    const Vector exact = exact_correlation(l, req, rho0);
    const Vector pred = qrt_prediction(l, req, rho0, m.rho0_e);
    std::vector<std::string> row{num(tg), num(tau_g)};
    for (Index k = 0; k < exact.size(); ++k) {
      row.push_back(num(exact(k).real()));
      row.push_back(num(exact(k).imag()));
      row.push_back(num(pred(k).real()));
      row.push_back(num(pred(k).imag()));
    }
    const double dev = (exact - pred).cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    row.push_back(num(dev));
    t.rows.push_back(std::move(row));
  }
  TaskOutput out;
  out.tables.push_back(std::move(t));
  out.result = {{"max_deviation", worst}};
  return out;
}

TaskOutput task_trajectories(const Scenario& s) {
  const ModelSpec m = build_model(s);
  const json& count = s.options.contains("count") ? s.options.at("count") : json(1000);
  if (!count.is_number_integer() || count.get<long long>() < 1) throw ConfigError("options.count must be a positive integer");
  const auto n = static_cast<std::size_t>(count.get<long long>());
  const json& bins_j = s.options.contains("bins") ? s.options.at("bins") : json(50);
  if (!bins_j.is_number_integer() || bins_j.get<long long>() < 1) throw ConfigError("options.bins must be a positive integer");
  const auto bins = static_cast<std::size_t>(bins_j.get<long long>());
  const auto times = s.times();
  const auto records = simulate_ensemble(m, s.seed, n, times, s.threads);
  const auto avg = ensemble_average(records, times);
  const auto exact = propagate_states(m.total_generator(), m.initial_state(), times);

  Table a{"trajectories_average.csv", {s.time_column, "trace_distance", "trace_distance_se"}, {}};
  add_matrix_columns(a.header, "rho_s", m.ds);
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double d = trace_distance(avg.mean[k], exact[k]);
    const double se = avg.trace_distance_error(k);
    if (se > 0.0) worst_ratio = std::max(worst_ratio, d / se);
    std::vector<std::string> row{num(s.grid[k]), num(d), num(se)};
    add_matrix_values(row, trace_env(avg.mean[k], m.ds, m.de));
    a.rows.push_back(std::move(row));
  }
  const auto wt = waiting_time_histogram(records, bins);
  Table w{"waiting_times.csv", {"bin_lo" + s.time_column.substr(1), "bin_hi" + s.time_column.substr(1), "density"}, {}};
  for (std::size_t b = 0; b < wt.density.size(); ++b) {
    w.rows.push_back({num(wt.bin_edges[b] * s.time_unit), num(wt.bin_edges[b + 1] * s.time_unit), num(wt.density[b] / s.time_unit)});
  }
  std::ostringstream jsonl;
  write_records(jsonl, records);
  TaskOutput out;
  out.tables.push_back(std::move(a));
  out.tables.push_back(std::move(w));
  out.extra_files.emplace_back("trajectories.jsonl", jsonl.str());
  std::size_t jumps = 0;
  for (const auto& r : records) jumps += r.events.size();
  out.result = {{"trajectories", n},
                {"jumps", jumps},
                {"max_distance_over_se", worst_ratio},
                {"waiting_time_mean", wt.empty ? json(nullptr) : json(wt.mean * s.time_unit)},
                {"waiting_time_se", wt.empty ? json(nullptr) : json(wt.std_error * s.time_unit)},
                {"waiting_time_intervals", wt.intervals.size()}};
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::filesystem::filesystem_error("cannot open output", path, std::make_error_code(std::errc::io_error));
  os << bytes;
  if (!os) throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

int execute(const json& cfg, const RunOptions& options, std::ostream& err) {
  try {
    const Scenario s = parse_scenario(cfg, options);
    TaskOutput out;
    if (s.task == "verify") {
      out = task_verify(s);
    } else if (s.task == "evolve") {
      out = task_evolve(s);
    } else if (s.task == "witness") {
      out = task_witness(s);
    } else if (s.task == "cpf") {
      out = task_cpf(s);
    } else if (s.task == "qrt") {
      out = task_qrt(s);
    } else {
      out = task_trajectories(s);
    }
    std::filesystem::create_directories(options.out_dir);
    json files = json::array();
    for (const auto& t : out.tables) {
      const std::string bytes = render(t);
      write_file(options.out_dir / t.file, bytes);
      files.push_back({{"file", t.file}, {"fnv1a64", checksum_hex(bytes)}});
    }
    for (const auto& [name, bytes] : out.extra_files) {
      write_file(options.out_dir / name, bytes);
      files.push_back({{"file", name}, {"fnv1a64", checksum_hex(bytes)}});
    }
    json manifest;
    manifest["library_version"] = BYSTANDER_VERSION;
    manifest["schema_version"] = kSchemaVersion;
    manifest["config"] = cfg;
    manifest["seed"] = s.seed;
    manifest["outputs"] = files;
    manifest["result"] = out.result;
    write_file(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace

std::string checksum_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

int run_config_text(const std::string& config_text, const RunOptions& options, std::ostream& err) {
  const json cfg = json::parse(config_text, nullptr, false);
  if (cfg.is_discarded()) {
    err << "config error: invalid JSON\n";
    return kExitConfig;
  }
  return execute(cfg, options, err);
}

int run_config_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err) {
  std::ifstream is(config_path, std::ios::binary);
  if (!is) {
    err << "config error: cannot read " << config_path << '\n';
    return kExitConfig;
  }
  std::ostringstream buf;
  buf << is.rdbuf();
  return run_config_text(buf.str(), options, err);
}

}  // namespace bystander::cli
