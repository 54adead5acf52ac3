#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urbm/config.hpp"

namespace urbm {

// Runs the configured experiment, writing CSV/JSON artifacts (including
// metadata.json and manifest.json) under cfg.out_dir. Returns the process
// exit code: 0 on success, 1 on numerical failure (partial outputs are
// flushed), 2 on configuration or guard violations.
int run_experiment(const ExperimentConfig& cfg);

// Command-line flow: config file + key=value overrides + explicit flags
// (flags win), then dispatch. Errors are reported on stderr.
int cli_main(const std::string& experiment, const std::string& config_path,
             const std::vector<std::string>& sets, const std::string& out_dir,
             std::optional<std::uint64_t> seed, std::optional<int> workers);

}  // namespace urbm
