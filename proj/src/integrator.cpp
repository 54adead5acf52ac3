#include "urbm/integrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace urbm {

namespace {

RbmParams apply_update(const RbmParams& p, const Eigen::VectorXd& delta) {
  Eigen::VectorXd v = to_param_vector(p);
  v += delta;
  return from_param_vector(p.n_visible(), p.n_hidden(), p.urbm, v);
}

}  // namespace

RbmParams step_tvmc(const RbmParams& p, const SparseHamiltonian& h, const IntegratorConfig& cfg,
                    StepDiagnostics* diag, const NoiseConfig* noise, std::mt19937_64* noise_rng) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw std::invalid_argument("step_tvmc: dt must be positive");
  const bool rhs_imag = cfg.mode == TvmcMode::RealTime;
  const double direction = rhs_imag ? cfg.dt : -cfg.dt;
  const bool noisy = noise != nullptr && noise->delta != 0.0;
  if (noisy && noise_rng == nullptr)
    throw std::invalid_argument("step_tvmc: noise injection needs a generator");

  if (!noisy && cfg.allow_kernel) {
    if (auto k = solve_kernel_exact(p, h, rhs_imag, cfg.reg)) {
      if (diag != nullptr) {
        diag->energy = k->energy;
        diag->f_norm = k->f.norm();
        diag->solver_path = "kernel";
        diag->min_eigenvalue_estimate = 0.0;
      }
      return apply_update(p, direction * k->solution);
    }
  }

  TvmcLinearSystem sys = build_system_exact(p, h, cfg.strategy);
  if (noisy) sys = inject_noise(std::move(sys), *noise, *noise_rng);
  const Eigen::VectorXd rhs =
      rhs_imag ? Eigen::VectorXd(sys.f.imag()) : Eigen::VectorXd(sys.f.real());
  SolveDiagnostics sd;
  const Eigen::VectorXd x = solve_regularized(sys.a, rhs, cfg.reg, &sd);
  if (diag != nullptr) {
    diag->energy = sys.energy;
    diag->f_norm = sys.f.norm();
    diag->solver_path = sd.solver_path;
    diag->min_eigenvalue_estimate = sd.min_eigenvalue_estimate;
  }
  return apply_update(p, direction * x);
}

TvmcRunResult run_tvmc(const RbmParams& p0, const SparseHamiltonian& h,
                       const IntegratorConfig& cfg, const NoiseConfig& noise,
                       std::uint64_t noise_seed, const TvmcObserver& observer) {
  if (!(cfg.dt > 0.0) || !(cfg.t_max > 0.0))
    throw std::invalid_argument("run_tvmc: dt and t_max must be positive");
  if (cfg.record_every < 1) throw std::invalid_argument("run_tvmc: record_every must be >= 1");
  const double raw_steps = cfg.t_max / cfg.dt;
  const long long steps = std::llround(raw_steps);
  if (steps < 1 || std::abs(raw_steps - double(steps)) > 1e-9 * std::max(1.0, raw_steps))
    throw std::invalid_argument("run_tvmc: t_max must be an integer number of dt steps");

  std::mt19937_64 rng(noise_seed);
  const NoiseConfig* noise_ptr = noise.delta != 0.0 ? &noise : nullptr;

  TvmcRunResult out;
  out.params = p0;
  out.records.reserve(std::size_t(steps / cfg.record_every) + 2);
  auto emit = [&](const TvmcRecord& rec, const RbmParams& at) {
    out.records.push_back(rec);
    if (observer) observer(rec, at);
  };

  for (long long s = 0; s < steps; ++s) {
    StepDiagnostics d;
    RbmParams next = step_tvmc(out.params, h, cfg, &d, noise_ptr, &rng);
    if (s % cfg.record_every == 0)
      emit({int(s), double(s) * cfg.dt, d.energy, d.f_norm, d.solver_path,
            d.min_eigenvalue_estimate},
           out.params);
    out.params = std::move(next);
  }
  // Closing record at t_max: energy of the final parameters, no solve.
  emit({int(steps), double(steps) * cfg.dt, variational_expectation(out.params, h), 0.0, "final",
        0.0},
       out.params);
  return out;
}

std::vector<GradientScanRow> gradient_scan(const std::function<SparseHamiltonian(int)>& model,
                                           const std::vector<int>& n_list, int m_fixed,
                                           int n_init, std::uint64_t seed,
                                           const Regularization& reg) {
  if (n_init < 1) throw std::invalid_argument("gradient_scan: n_init must be >= 1");
  std::vector<GradientScanRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    const SparseHamiltonian h = model(n);
    std::mt19937_64 rng(seed + std::uint64_t(n));
    GradientScanRow row;
    row.n_sites = n;
    double sum_f = 0.0, sum_x = 0.0;
    double min_f = std::numeric_limits<double>::infinity();
    double min_x = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_init; ++k) {
      const RbmParams p = RbmParams::gaussian(n, m_fixed, 0.01, true, rng);
      row.n_var = p.n_var();
      const TvmcLinearSystem sys = build_system_exact(p, h, AssemblyStrategy::Auto);
      const Eigen::VectorXd xr = solve_regularized(sys.a, sys.f.real(), reg);
      const Eigen::VectorXd xi = solve_regularized(sys.a, sys.f.imag(), reg);
      const double fn = sys.f.norm() / double(row.n_var);
      const double xn = std::sqrt(xr.squaredNorm() + xi.squaredNorm()) / double(row.n_var);
      sum_f += fn;
      sum_x += xn;
      min_f = std::min(min_f, fn);
      min_x = std::min(min_x, xn);
    }
    row.mean_f_norm = sum_f / double(n_init);
    row.min_f_norm = min_f;
    row.mean_solution_norm = sum_x / double(n_init);
    row.min_solution_norm = min_x;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace urbm
