#include "urbm/open.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "urbm/rbm.hpp"

namespace urbm {

namespace {

// Number of full steps covering t_max with step dt, requiring a commensurate
// grid (same contract as the closed-system driver).
long long commensurate_steps(double t_max, double dt, const char* who) {
  if (!(dt > 0.0) || !(t_max > 0.0))
    throw std::invalid_argument(std::string(who) + ": dt and t_max must be positive");
  const double raw = t_max / dt;
  const long long steps = std::llround(raw);
  if (steps < 1 || std::abs(raw - double(steps)) > 1e-9 * std::max(1.0, raw))
    throw std::invalid_argument(std::string(who) + ": t_max must be an integer number of steps");
  return steps;
}

void check_channels(const SparseHamiltonian& h, const LindbladSpec& lind, const char* who) {
  if (lind.sites.size() != lind.ops.size())
    throw std::invalid_argument(std::string(who) + ": channel sites/ops mismatch");
  for (const auto& op : lind.ops)
    if (op.n() != h.n()) throw std::invalid_argument(std::string(who) + ": channel size mismatch");
}

// Channel index for a uniform draw u < total, by cumulative scan.
std::size_t pick_channel(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

}  // namespace

EffectiveHamiltonian effective_hamiltonian(const SparseHamiltonian& h, const LindbladSpec& lind) {
  check_channels(h, lind, "effective_hamiltonian");
  SparseHamiltonian gain(h.n(), std::vector<PauliTerm>{});
  for (const auto& op : lind.ops) gain = gain + op.dagger() * op;
  EffectiveHamiltonian eff;
  eff.hermitian_part = h;
  eff.decay_part = gain.scaled(Complex(0.0, -0.5));
  eff.total = eff.hermitian_part + eff.decay_part;
  return eff;
}

std::vector<double> jump_probabilities(const StateVector& psi, const LindbladSpec& lind,
                                       double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("jump_probabilities: dt must be positive");
  if (lind.sites.size() != lind.ops.size())
    throw std::invalid_argument("jump_probabilities: channel sites/ops mismatch");
  const double nrm2 = psi.amp.squaredNorm();
  if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
    throw std::invalid_argument("jump_probabilities: degenerate state");
  std::vector<double> probs(lind.ops.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < lind.ops.size(); ++k) {
    if (lind.ops[k].n() != psi.n)
      throw std::invalid_argument("jump_probabilities: channel size mismatch");
    // <L^dag L> dt as a squared norm, so round-off cannot drive it negative.
    probs[k] = std::max(0.0, lind.ops[k].apply(psi).amp.squaredNorm() / nrm2 * dt);
    total += probs[k];
  }
  if (total >= 0.1)
    std::fprintf(stderr,
                 "jump_probabilities: total jump probability %.3g per step; "
                 "first-order unravelling needs a smaller dt\n",
                 total);
  return probs;
}

std::vector<double> jump_probabilities(const RbmParams& p, const LindbladSpec& lind, double dt) {
  return jump_probabilities(build_statevector(p), lind, dt);
}

StateVector apply_jump_exact(const StateVector& psi, const SparseHamiltonian& op) {
  StateVector out = op.apply(psi);
  const double nrm = out.norm();
  if (!(nrm > 1e-150) || !std::isfinite(nrm))
    throw std::runtime_error("apply_jump_exact: channel annihilates the state");
  out.amp /= nrm;
  return out;
}

RbmParams apply_jump_variational(const RbmParams& p, int site, const JumpConfig& cfg) {
  if (site < 0 || site >= p.n_visible())
    throw std::invalid_argument("apply_jump_variational: site out of range");
  if (!(cfg.dt > 0.0) || !(cfg.tau > 0.0) || !(cfg.dtau > 0.0))
    throw std::invalid_argument("apply_jump_variational: steps must be positive");
  const int n = p.n_visible();

  // A raising collapse is an exchange of the target site's levels followed by
  // projection: rotate for a half period under X_site (swapping the level
  // amplitudes up to a global phase), then drain the residual weight of the
  // pre-collapse upper level by imaginary-time flow under |0><0|_site.
  const SparseHamiltonian rot(n, {PauliTerm{Complex(1.0, 0.0), {{site, Axis::X}}}});
  const SparseHamiltonian proj(
      n, {PauliTerm{Complex(0.5, 0.0), {}}, PauliTerm{Complex(0.5, 0.0), {{site, Axis::Z}}}});

  IntegratorConfig icfg;
  icfg.reg = cfg.reg;
  icfg.strategy = cfg.strategy;
  icfg.allow_kernel = cfg.allow_kernel;

  // Run `duration` of flow under `h`, with a shortened final step so the
  // segment lands exactly on the requested duration.
  auto segment = [&](RbmParams params, const SparseHamiltonian& h, TvmcMode mode, double duration,
                     double step) {
    icfg.mode = mode;
    const long long full = static_cast<long long>(duration / step);
    icfg.dt = step;
    for (long long s = 0; s < full; ++s) params = step_tvmc(params, h, icfg);
    const double rest = duration - double(full) * step;
    if (rest > 1e-12 * duration) {
      icfg.dt = rest;
      params = step_tvmc(params, h, icfg);
    }
    return params;
  };

  try {
    RbmParams out = segment(p, rot, TvmcMode::RealTime, std::numbers::pi / 2.0, cfg.dt);
    return segment(std::move(out), proj, TvmcMode::ImaginaryTime, cfg.tau, cfg.dtau);
  } catch (const std::exception& e) {
    throw std::runtime_error("apply_jump_variational: site " + std::to_string(site) +
                             " collapse failed: " + e.what());
  }
}

TrajectoryRecord run_trajectory(const RbmParams& p0, const SparseHamiltonian& h,
                                const LindbladSpec& lind, const ObservableSet& obs,
                                const TrajectoryConfig& cfg, std::uint64_t seed) {
  check_channels(h, lind, "run_trajectory");
  if (cfg.record_every < 1)
    throw std::invalid_argument("run_trajectory: record_every must be positive");
  const long long steps = commensurate_steps(cfg.t_max, cfg.dt, "run_trajectory");
  const EffectiveHamiltonian eff = effective_hamiltonian(h, lind);

  IntegratorConfig icfg;
  icfg.mode = TvmcMode::RealTime;
  icfg.dt = cfg.dt;
  icfg.reg = cfg.reg;
  icfg.strategy = cfg.strategy;
  icfg.allow_kernel = cfg.allow_kernel;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrajectoryRecord rec;
  rec.seed = seed;
  for (const auto& [name, op] : obs) rec.observables[name];

  RbmParams params = p0;
  auto record_point = [&](double t, const StateVector& psi) {
    rec.times.push_back(t);
    for (const auto& [name, op] : obs) rec.observables[name].push_back(op.expectation(psi).real());
  };

  for (long long s = 0; s < steps; ++s) {
    const double t = double(s) * cfg.dt;
    const StateVector psi = build_statevector(params);
    if (s % cfg.record_every == 0) record_point(t, psi);
    const std::vector<double> probs = jump_probabilities(psi, lind, cfg.dt);
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    const double u = unit(rng);
    if (u < total) {
      // The collapse replaces this step's drift motion.
      const std::size_t k = pick_channel(probs, u);
      params = apply_jump_variational(params, lind.sites[k], cfg.jump);
      rec.jumps.push_back({t, lind.sites[k]});
    } else {
      params = step_tvmc(params, eff.total, icfg);
    }
  }
  record_point(cfg.t_max, build_statevector(params));
  return rec;
}

TrajectoryRecord run_trajectory_exact(const StateVector& psi0, const SparseHamiltonian& h,
                                      const LindbladSpec& lind, const ObservableSet& obs,
                                      const TrajectoryConfig& cfg, std::uint64_t seed) {
  check_channels(h, lind, "run_trajectory_exact");
  if (psi0.n != h.n()) throw std::invalid_argument("run_trajectory_exact: state size mismatch");
  if (cfg.record_every < 1)
    throw std::invalid_argument("run_trajectory_exact: record_every must be positive");
  const long long steps = commensurate_steps(cfg.t_max, cfg.dt, "run_trajectory_exact");
  const EffectiveHamiltonian eff = effective_hamiltonian(h, lind);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrajectoryRecord rec;
  rec.seed = seed;
  for (const auto& [name, op] : obs) rec.observables[name];

  StateVector psi = psi0;
  psi.normalize();
  auto drift = [&](const Eigen::VectorXcd& a) -> Eigen::VectorXcd {
    return Complex(0.0, -1.0) * eff.total.apply(StateVector(psi0.n, a)).amp;
  };
  auto record_point = [&](double t) {
    rec.times.push_back(t);
    for (const auto& [name, op] : obs) rec.observables[name].push_back(op.expectation(psi).real());
  };

  for (long long s = 0; s < steps; ++s) {
    const double t = double(s) * cfg.dt;
    if (s % cfg.record_every == 0) record_point(t);
    const std::vector<double> probs = jump_probabilities(psi, lind, cfg.dt);
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    const double u = unit(rng);
    if (u < total) {
      const std::size_t k = pick_channel(probs, u);
      psi = apply_jump_exact(psi, lind.ops[k]);
      rec.jumps.push_back({t, lind.sites[k]});
    } else {
      const double dt = cfg.dt;
      const Eigen::VectorXcd k1 = drift(psi.amp);
      const Eigen::VectorXcd k2 = drift(psi.amp + 0.5 * dt * k1);
      const Eigen::VectorXcd k3 = drift(psi.amp + 0.5 * dt * k2);
      const Eigen::VectorXcd k4 = drift(psi.amp + dt * k3);
      psi.amp += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      psi.normalize();
    }
  }
  record_point(cfg.t_max);
  return rec;
}

namespace {

template <typename OneTrajectory>
std::vector<TrajectoryRecord> pooled_ensemble(int n_traj, std::uint64_t seed_base, int workers,
                                              const OneTrajectory& one) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: need at least one trajectory");
  if (workers < 1) throw std::invalid_argument("run_ensemble: need at least one worker");
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(n_traj));
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto body = [&]() {
    for (int i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1)) {
      try {
        out[std::size_t(i)] = one(seed_base + std::uint64_t(i));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace

std::vector<TrajectoryRecord> run_ensemble(const RbmParams& p0, const SparseHamiltonian& h,
                                           const LindbladSpec& lind, const ObservableSet& obs,
                                           const TrajectoryConfig& cfg, int n_traj,
                                           std::uint64_t seed_base, int workers) {
  return pooled_ensemble(n_traj, seed_base, workers, [&](std::uint64_t seed) {
    return run_trajectory(p0, h, lind, obs, cfg, seed);
  });
}

std::vector<TrajectoryRecord> run_ensemble_exact(const StateVector& psi0,
                                                 const SparseHamiltonian& h,
                                                 const LindbladSpec& lind,
                                                 const ObservableSet& obs,
                                                 const TrajectoryConfig& cfg, int n_traj,
                                                 std::uint64_t seed_base, int workers) {
  return pooled_ensemble(n_traj, seed_base, workers, [&](std::uint64_t seed) {
    return run_trajectory_exact(psi0, h, lind, obs, cfg, seed);
  });
}

EnsembleResult average_ensemble(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("average_ensemble: no trajectories");
  const TrajectoryRecord& first = records.front();
  const std::size_t len = first.times.size();
  for (const TrajectoryRecord& r : records) {
    if (r.times.size() != len || !std::equal(r.times.begin(), r.times.end(), first.times.begin()))
      throw std::invalid_argument("average_ensemble: recording grids differ");
    if (r.observables.size() != first.observables.size())
      throw std::invalid_argument("average_ensemble: observable sets differ");
  }

  EnsembleResult res;
  res.times = first.times;
  res.n_traj = int(records.size());
  res.stderr_defined = records.size() > 1;
  const double n = double(records.size());

  for (const auto& [name, series0] : first.observables) {
    if (series0.size() != len)
      throw std::invalid_argument("average_ensemble: series length mismatch");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(std::int64_t(len));
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(std::int64_t(len));
    for (const TrajectoryRecord& r : records) {
      const auto it = r.observables.find(name);
      if (it == r.observables.end() || it->second.size() != len)
        throw std::invalid_argument("average_ensemble: observable sets differ");
      for (std::size_t t = 0; t < len; ++t) {
        sum[std::int64_t(t)] += it->second[t];
        sumsq[std::int64_t(t)] += it->second[t] * it->second[t];
      }
    }
    const Eigen::VectorXd mean = sum / n;
    std::vector<double> se(len, 0.0);
    if (res.stderr_defined) {
      for (std::size_t t = 0; t < len; ++t) {
        const auto ti = std::int64_t(t);
        const double var = std::max(0.0, (sumsq[ti] - n * mean[ti] * mean[ti]) / (n - 1.0));
        se[t] = std::sqrt(var / n);
      }
    }
    res.mean[name] = std::vector<double>(mean.data(), mean.data() + mean.size());
    res.std_error[name] = std::move(se);
  }
  return res;
}

LindbladResult lindblad_oracle(const Eigen::MatrixXcd& rho0, const SparseHamiltonian& h,
                               const LindbladSpec& lind, double t_max, double dt,
                               int record_every) {
  check_channels(h, lind, "lindblad_oracle");
  if (h.n() > 8) throw std::invalid_argument("lindblad_oracle: dense evolution limited to 8 spins");
  const std::int64_t dim = std::int64_t(1) << h.n();
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("lindblad_oracle: density matrix dimension mismatch");
  if (record_every < 1) throw std::invalid_argument("lindblad_oracle: record_every must be positive");
  const long long steps = commensurate_steps(t_max, dt, "lindblad_oracle");

  const Eigen::MatrixXcd hd = h.dense();
  std::vector<Eigen::MatrixXcd> ld;
  ld.reserve(lind.ops.size());
  Eigen::MatrixXcd gd = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& op : lind.ops) {
    ld.push_back(op.dense());
    gd.noalias() += ld.back().adjoint() * ld.back();
  }

  Eigen::MatrixXcd tmp(dim, dim);
  auto liou = [&](const Eigen::MatrixXcd& r) {
    Eigen::MatrixXcd out = Complex(0.0, -1.0) * (hd * r - r * hd);
    out.noalias() -= 0.5 * (gd * r + r * gd);
    for (const Eigen::MatrixXcd& l : ld) {
      tmp.noalias() = l * r;
      out.noalias() += tmp * l.adjoint();
    }
    return out;
  };

  LindbladResult res;
  res.min_eigenvalue = std::numeric_limits<double>::infinity();
  const Complex tr0 = rho0.trace();
  Eigen::MatrixXcd r = rho0;

  auto record_point = [&](double t) {
    res.times.push_back(t);
    res.rho.push_back(r);
    res.max_hermiticity_violation = std::max(res.max_hermiticity_violation,
                                             (r - r.adjoint()).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(0.5 * (r + r.adjoint())),
                                                             Eigen::EigenvaluesOnly);
    res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues().minCoeff());
  };

  for (long long s = 0; s < steps; ++s) {
    if (s % record_every == 0) record_point(double(s) * dt);
    const Eigen::MatrixXcd k1 = liou(r);
    const Eigen::MatrixXcd k2 = liou(r + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = liou(r + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = liou(r + dt * k3);
    r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(r.trace() - tr0);
    if (!(drift <= 1e-6))
      throw std::runtime_error("lindblad_oracle: trace drift " + std::to_string(drift) +
                               " at t=" + std::to_string(double(s + 1) * dt));
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
  }
  record_point(t_max);
  return res;
}

}  // namespace urbm
