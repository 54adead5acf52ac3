#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "urbm/estimator.hpp"

namespace urbm {

enum class TvmcMode { RealTime, ImaginaryTime };

struct IntegratorConfig {
  TvmcMode mode = TvmcMode::RealTime;
  double dt = 5e-4;
  double t_max = 1.0;
  int record_every = 1;
  Regularization reg;
  AssemblyStrategy strategy = AssemblyStrategy::Auto;
  bool allow_kernel = true;  // permit the sample-space solver when it is cheaper
};

struct StepDiagnostics {
  Complex energy{0.0, 0.0};  // at the pre-step parameters
  double f_norm = 0.0;
  std::string solver_path;
  double min_eigenvalue_estimate = 0.0;
};

// One explicit-Euler update of the variational parameters. Real-time motion
// integrates the imaginary part of the force, imaginary-time descends along
// the real part. Noise (when enabled) perturbs the materialized system, so a
// nonzero delta forces the dense route.
RbmParams step_tvmc(const RbmParams& p, const SparseHamiltonian& h, const IntegratorConfig& cfg,
                    StepDiagnostics* diag = nullptr, const NoiseConfig* noise = nullptr,
                    std::mt19937_64* noise_rng = nullptr);

struct TvmcRecord {
  int step = 0;
  double t = 0.0;
  Complex energy{0.0, 0.0};
  double f_norm = 0.0;
  std::string solver_path;
  double min_eigenvalue_estimate = 0.0;
};

// Called with each emitted record and the parameters at that same time.
using TvmcObserver = std::function<void(const TvmcRecord&, const RbmParams&)>;

struct TvmcRunResult {
  RbmParams params{Eigen::VectorXcd(), Eigen::VectorXcd(), Eigen::MatrixXcd(), true};
  std::vector<TvmcRecord> records;
};

TvmcRunResult run_tvmc(const RbmParams& p0, const SparseHamiltonian& h,
                       const IntegratorConfig& cfg, const NoiseConfig& noise = {},
                       std::uint64_t noise_seed = 0, const TvmcObserver& observer = nullptr);

struct GradientScanRow {
  int n_sites = 0;
  int n_var = 0;
  double mean_f_norm = 0.0;
  double min_f_norm = 0.0;
  double mean_solution_norm = 0.0;
  double min_solution_norm = 0.0;
};

// Force and natural-gradient magnitudes (per parameter) at random restricted
// initializations, across system sizes at fixed hidden count. Deterministic:
// the generator for size N is seeded with seed + N.
std::vector<GradientScanRow> gradient_scan(const std::function<SparseHamiltonian(int)>& model,
                                           const std::vector<int>& n_list, int m_fixed,
                                           int n_init, std::uint64_t seed,
                                           const Regularization& reg = {});

}  // namespace urbm
