#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace urbm {

// Malformed or contradictory configuration; names the offending field. The
// command-line layer maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Fully resolved run description. Fields cover all experiments; each
// experiment reads the subset it needs and echoes everything into metadata.
struct ExperimentConfig {
  std::string experiment;  // ite | quench | open | gradient_scan | noise_scan |
                           // autocorr | circuit_check
  // model
  std::string model = "tfi";  // tfi | heisenberg | tafi2d
  std::string boundary = "periodic";
  double h_i = 0.5;   // transverse field (initial / only)
  double h_f = 1.0;   // post-quench transverse field
  double jz_i = 1.0;  // Heisenberg z coupling (initial / only)
  double jz_f = 0.5;
  double hz = 1.0;
  double gamma = 0.05;
  int lx = 4, ly = 3;  // triangular lattice shape
  // ansatz
  int n = 0;
  int m = 0;           // resolved hidden count (from m or alpha)
  double alpha = 0.0;  // echo only; 0 when m was given directly
  // integrator
  double dt = 5e-4;
  double dtau = 1e-2;
  int steps = 2500;  // imaginary-time steps (also ground-state preparation)
  double t_max = 2.0;
  int record_every = 20;
  double ridge = 1e-6;
  double svd_cutoff = 1e-8;
  std::string strategy = "auto";  // auto | dense | transform
  bool allow_kernel = true;
  // sampling
  std::string sampling_mode = "exact";  // exact | mc
  long long n_exp = 4000;
  long long burn_in = 100;
  // open system
  int n_traj = 2000;
  bool exact_engine = false;
  // noise scan
  std::vector<double> deltas = {1e-4, 1e-3, 1e-2};
  // initialization
  double init_variance = 0.01;
  // classical autocorrelation study
  double temperature = 0.3;
  std::vector<int> sizes = {6, 12};
  long long sweeps = 100000;
  int n_seeds = 5;
  int max_lag = 400;
  long long discard = 1000;
  // gradient scan
  std::vector<int> scan_sizes = {6, 8, 10, 12};
  int scan_m = 6;
  int n_init = 100;
  // circuit check
  int n_sets = 50;
  int set_n_max = 5;
  int set_m_max = 4;
  // run plumbing
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir;

  // Flat dotted-key view of every resolved field, echoed into metadata so a
  // run can be reproduced from its own output.
  nlohmann::json echo() const;
};

// Flat JSON object (dotted keys) from a config file; "" yields an empty map.
nlohmann::json load_config_file(const std::string& path);

// key=value override strings; the value is parsed as JSON when possible and
// kept as a string otherwise. Overrides win over file values.
void apply_overrides(nlohmann::json& flat, const std::vector<std::string>& sets);

// Validates keys/types, applies per-experiment defaults, resolves M/alpha.
// The experiment chosen on the command line wins over a config-file entry.
ExperimentConfig resolve_config(const std::string& experiment, const nlohmann::json& flat);

}  // namespace urbm
