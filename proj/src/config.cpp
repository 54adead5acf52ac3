#include "urbm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace urbm {

namespace {

const std::set<std::string> kExperiments = {"ite",        "quench",   "open",         "noise_scan",
                                            "gradient_scan", "autocorr", "circuit_check"};

double as_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

long long as_integer(const nlohmann::json& v, const std::string& key) {
  const double d = as_number(v, key);
  const long long r = std::llround(d);
  if (std::abs(d - double(r)) > 1e-9) throw ConfigError(key, "expected an integer");
  return r;
}

bool as_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string as_text(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, key));
  return out;
}

std::vector<int> as_integers(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(int(as_integer(e, key)));
  return out;
}

std::uint64_t as_seed(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return std::uint64_t(v.get<long long>());
  throw ConfigError(key, "expected a non-negative integer");
}

// Defaults that depend on the experiment (and model) before any user keys.
void apply_defaults(ExperimentConfig& cfg) {
  if (cfg.experiment == "ite") {
    cfg.n = 6;
    cfg.record_every = 10;
  } else if (cfg.experiment == "quench") {
    cfg.n = 8;
    if (cfg.model == "heisenberg") {
      cfg.dt = 2e-4;
      cfg.t_max = 1.0;
    } else if (cfg.model == "tafi2d") {
      cfg.dt = 5e-4;
      cfg.t_max = 1.5;
      cfg.n = 0;  // filled from the lattice shape below
    } else {
      cfg.dt = 5e-4;
      cfg.t_max = 2.0;
    }
  } else if (cfg.experiment == "open") {
    cfg.n = 6;
    cfg.boundary = "open";
    cfg.h_i = 1.0;
    cfg.dt = 5e-4;
    cfg.t_max = 2.0;
  } else if (cfg.experiment == "noise_scan") {
    cfg.n = 6;
    cfg.dt = 5e-4;
    cfg.t_max = 2.0;
  } else if (cfg.experiment == "gradient_scan") {
    cfg.h_i = 1.0;
    cfg.n = 6;
  } else {
    cfg.n = 6;  // autocorr / circuit_check keep the shared ansatz defaults
  }
}

double default_alpha(const std::string& experiment) {
  return experiment == "open" ? 6.0 : 4.0;
}

}  // namespace

nlohmann::json load_config_file(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("parse error in ") + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (value.is_object())
      throw ConfigError(key, "nested objects are not allowed; use flat dotted keys");
  return j;
}

void apply_overrides(nlohmann::json& flat, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set", "expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded() || value.is_object()) value = raw;  // plain string
    flat[key] = value;
  }
}

ExperimentConfig resolve_config(const std::string& experiment, const nlohmann::json& flat) {
  if (kExperiments.find(experiment) == kExperiments.end())
    throw ConfigError("experiment", "unknown experiment '" + experiment + "'");

  ExperimentConfig cfg;
  cfg.experiment = experiment;
  // The model (and experiment) steer the defaults, so read it first.
  if (flat.contains("model.kind")) cfg.model = as_text(flat.at("model.kind"), "model.kind");
  if (cfg.model != "tfi" && cfg.model != "heisenberg" && cfg.model != "tafi2d")
    throw ConfigError("model.kind", "expected tfi, heisenberg or tafi2d");
  apply_defaults(cfg);

  bool set_n = false, set_m = false, set_alpha = false;
  for (const auto& [key, value] : flat.items()) {
    if (key == "experiment") {
      const std::string given = as_text(value, key);
      if (kExperiments.find(given) == kExperiments.end())
        throw ConfigError(key, "unknown experiment '" + given + "'");
      // the command-line subcommand wins over the file entry
    } else if (key == "model.kind") {
      // consumed above
    } else if (key == "model.boundary") {
      cfg.boundary = as_text(value, key);
      if (cfg.boundary != "periodic" && cfg.boundary != "open")
        throw ConfigError(key, "expected periodic or open");
    } else if (key == "model.h_i") {
      cfg.h_i = as_number(value, key);
    } else if (key == "model.h_f") {
      cfg.h_f = as_number(value, key);
    } else if (key == "model.jz_i") {
      cfg.jz_i = as_number(value, key);
    } else if (key == "model.jz_f") {
      cfg.jz_f = as_number(value, key);
    } else if (key == "model.hz") {
      cfg.hz = as_number(value, key);
    } else if (key == "model.gamma") {
      cfg.gamma = as_number(value, key);
      if (cfg.gamma < 0.0) throw ConfigError(key, "must be non-negative");
    } else if (key == "model.lx") {
      cfg.lx = int(as_integer(value, key));
    } else if (key == "model.ly") {
      cfg.ly = int(as_integer(value, key));
    } else if (key == "ansatz.n") {
      cfg.n = int(as_integer(value, key));
      set_n = true;
    } else if (key == "ansatz.m") {
      cfg.m = int(as_integer(value, key));
      set_m = true;
    } else if (key == "ansatz.alpha") {
      cfg.alpha = as_number(value, key);
      set_alpha = true;
    } else if (key == "integrator.dt") {
      cfg.dt = as_number(value, key);
    } else if (key == "integrator.dtau") {
      cfg.dtau = as_number(value, key);
    } else if (key == "integrator.steps") {
      cfg.steps = int(as_integer(value, key));
    } else if (key == "integrator.t_max") {
      cfg.t_max = as_number(value, key);
    } else if (key == "integrator.record_every") {
      cfg.record_every = int(as_integer(value, key));
    } else if (key == "integrator.ridge") {
      cfg.ridge = as_number(value, key);
      if (cfg.ridge < 0.0) throw ConfigError(key, "must be non-negative");
    } else if (key == "integrator.svd_cutoff") {
      cfg.svd_cutoff = as_number(value, key);
    } else if (key == "integrator.strategy") {
      cfg.strategy = as_text(value, key);
      if (cfg.strategy != "auto" && cfg.strategy != "dense" && cfg.strategy != "transform")
        throw ConfigError(key, "expected auto, dense or transform");
    } else if (key == "integrator.allow_kernel") {
      cfg.allow_kernel = as_bool(value, key);
    } else if (key == "sampling.mode") {
      cfg.sampling_mode = as_text(value, key);
      if (cfg.sampling_mode != "exact" && cfg.sampling_mode != "mc")
        throw ConfigError(key, "expected exact or mc");
    } else if (key == "sampling.n_exp") {
      cfg.n_exp = as_integer(value, key);
      if (cfg.n_exp < 1) throw ConfigError(key, "must be positive");
    } else if (key == "sampling.burn_in") {
      cfg.burn_in = as_integer(value, key);
      if (cfg.burn_in < 0) throw ConfigError(key, "must be non-negative");
    } else if (key == "open.n_traj") {
      cfg.n_traj = int(as_integer(value, key));
      if (cfg.n_traj < 1) throw ConfigError(key, "must be positive");
    } else if (key == "open.exact_engine") {
      cfg.exact_engine = as_bool(value, key);
    } else if (key == "noise.deltas") {
      cfg.deltas = as_numbers(value, key);
      for (const double d : cfg.deltas)
        if (d < 0.0) throw ConfigError(key, "noise levels must be non-negative");
    } else if (key == "init.variance") {
      cfg.init_variance = as_number(value, key);
      if (cfg.init_variance < 0.0) throw ConfigError(key, "must be non-negative");
    } else if (key == "autocorr.temperature") {
      cfg.temperature = as_number(value, key);
      if (!(cfg.temperature > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "autocorr.sizes") {
      cfg.sizes = as_integers(value, key);
    } else if (key == "autocorr.sweeps") {
      cfg.sweeps = as_integer(value, key);
      if (cfg.sweeps < 1) throw ConfigError(key, "must be positive");
    } else if (key == "autocorr.n_seeds") {
      cfg.n_seeds = int(as_integer(value, key));
      if (cfg.n_seeds < 1) throw ConfigError(key, "must be positive");
    } else if (key == "autocorr.max_lag") {
      cfg.max_lag = int(as_integer(value, key));
      if (cfg.max_lag < 1) throw ConfigError(key, "must be positive");
    } else if (key == "autocorr.discard") {
      cfg.discard = as_integer(value, key);
      if (cfg.discard < 0) throw ConfigError(key, "must be non-negative");
    } else if (key == "scan.sizes") {
      cfg.scan_sizes = as_integers(value, key);
    } else if (key == "scan.m") {
      cfg.scan_m = int(as_integer(value, key));
      if (cfg.scan_m < 1) throw ConfigError(key, "must be positive");
    } else if (key == "scan.n_init") {
      cfg.n_init = int(as_integer(value, key));
      if (cfg.n_init < 1) throw ConfigError(key, "must be positive");
    } else if (key == "circuit.n_sets") {
      cfg.n_sets = int(as_integer(value, key));
      if (cfg.n_sets < 1) throw ConfigError(key, "must be positive");
    } else if (key == "circuit.n_max") {
      cfg.set_n_max = int(as_integer(value, key));
    } else if (key == "circuit.m_max") {
      cfg.set_m_max = int(as_integer(value, key));
    } else if (key == "seed") {
      cfg.seed = as_seed(value, key);
    } else if (key == "workers") {
      cfg.workers = int(as_integer(value, key));
      if (cfg.workers < 1) throw ConfigError(key, "must be positive");
    } else if (key == "out") {
      cfg.out_dir = as_text(value, key);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  // Lattice-shaped models pin N to the site count.
  if (cfg.model == "tafi2d") {
    if (cfg.lx < 2 || cfg.ly < 2) throw ConfigError("model.lx", "lattice needs lx, ly >= 2");
    const int sites = cfg.lx * cfg.ly;
    if (set_n && cfg.n != sites)
      throw ConfigError("ansatz.n", "must equal model.lx * model.ly for tafi2d");
    cfg.n = sites;
  }
  if (cfg.n < 1) throw ConfigError("ansatz.n", "must be positive");

  // One way to fix the hidden count; both are accepted only when they agree
  // (so an echoed config, which carries both, resolves back unchanged).
  if (set_m && set_alpha &&
      std::abs(cfg.alpha * double(cfg.n) - double(cfg.m)) > 1e-9 * std::max(1.0, double(cfg.m)))
    throw ConfigError("ansatz.m", "ansatz.m and ansatz.alpha contradict each other");
  if (set_m) {
    if (cfg.m < 1) throw ConfigError("ansatz.m", "must be positive");
    cfg.alpha = double(cfg.m) / double(cfg.n);
  } else {
    if (!set_alpha) cfg.alpha = default_alpha(cfg.experiment);
    const double prod = cfg.alpha * double(cfg.n);
    const long long r = std::llround(prod);
    if (r < 1 || std::abs(prod - double(r)) > 1e-9 * std::max(1.0, std::abs(prod)))
      throw ConfigError("ansatz.alpha", "alpha * N must be a positive integer");
    cfg.m = int(r);
  }

  if (!(cfg.dt > 0.0)) throw ConfigError("integrator.dt", "must be positive");
  if (!(cfg.dtau > 0.0)) throw ConfigError("integrator.dtau", "must be positive");
  if (!(cfg.t_max > 0.0)) throw ConfigError("integrator.t_max", "must be positive");
  if (cfg.steps < 1) throw ConfigError("integrator.steps", "must be positive");
  if (cfg.record_every < 1) throw ConfigError("integrator.record_every", "must be positive");

  // Enumeration guards: these experiments evaluate the state exhaustively.
  if (cfg.experiment == "ite" || cfg.experiment == "quench" || cfg.experiment == "open" ||
      cfg.experiment == "noise_scan") {
    if (cfg.n > 18) throw ConfigError("ansatz.n", "exact-mode experiments are limited to 18 spins");
  }
  if (cfg.experiment == "gradient_scan")
    for (const int sz : cfg.scan_sizes)
      if (sz < 1 || sz > 18) throw ConfigError("scan.sizes", "sizes must lie in [1, 18]");
  if (cfg.experiment == "autocorr") {
    if (cfg.sizes.empty()) throw ConfigError("autocorr.sizes", "needs at least one size");
    for (const int l : cfg.sizes)
      if (l < 4 || l % 2 != 0)
        throw ConfigError("autocorr.sizes", "triangular edge lengths must be even and >= 4");
  }
  if (cfg.experiment == "circuit_check") {
    if (cfg.set_n_max < 1 || cfg.set_n_max > 12)
      throw ConfigError("circuit.n_max", "must lie in [1, 12]");
    if (cfg.set_m_max < 1 || cfg.set_m_max > 12)
      throw ConfigError("circuit.m_max", "must lie in [1, 12]");
  }
  return cfg;
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["model.kind"] = model;
  j["model.boundary"] = boundary;
  j["model.h_i"] = h_i;
  j["model.h_f"] = h_f;
  j["model.jz_i"] = jz_i;
  j["model.jz_f"] = jz_f;
  j["model.hz"] = hz;
  j["model.gamma"] = gamma;
  j["model.lx"] = lx;
  j["model.ly"] = ly;
  j["ansatz.n"] = n;
  j["ansatz.m"] = m;
  j["ansatz.alpha"] = alpha;
  j["integrator.dt"] = dt;
  j["integrator.dtau"] = dtau;
  j["integrator.steps"] = steps;
  j["integrator.t_max"] = t_max;
  j["integrator.record_every"] = record_every;
  j["integrator.ridge"] = ridge;
  j["integrator.svd_cutoff"] = svd_cutoff;
  j["integrator.strategy"] = strategy;
  j["integrator.allow_kernel"] = allow_kernel;
  j["sampling.mode"] = sampling_mode;
  j["sampling.n_exp"] = n_exp;
  j["sampling.burn_in"] = burn_in;
  j["open.n_traj"] = n_traj;
  j["open.exact_engine"] = exact_engine;
  j["noise.deltas"] = deltas;
  j["init.variance"] = init_variance;
  j["autocorr.temperature"] = temperature;
  j["autocorr.sizes"] = sizes;
  j["autocorr.sweeps"] = sweeps;
  j["autocorr.n_seeds"] = n_seeds;
  j["autocorr.max_lag"] = max_lag;
  j["autocorr.discard"] = discard;
  j["scan.sizes"] = scan_sizes;
  j["scan.m"] = scan_m;
  j["scan.n_init"] = n_init;
  j["circuit.n_sets"] = n_sets;
  j["circuit.n_max"] = set_n_max;
  j["circuit.m_max"] = set_m_max;
  j["seed"] = seed;
  j["workers"] = workers;
  j["out"] = out_dir;
  return j;
}

}  // namespace urbm
