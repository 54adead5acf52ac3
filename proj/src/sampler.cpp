#include "urbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace urbm {

SampleBatch sample_exact(const RbmParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (p.n_visible() > 16) throw std::invalid_argument("sample_exact: enumeration limited to 16 spins");
  if (n == 0) throw std::invalid_argument("sample_exact: need at least one draw");
  const StateVector psi = build_statevector(p);
  const std::size_t dim = psi.amp.size();
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (std::size_t z = 0; z < dim; ++z) {
    acc += std::norm(psi.amp[z]);
    cdf[z] = acc;
  }
  cdf.back() = 1.0;  // guard against rounding in the final bin

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleBatch batch;
  batch.seed = seed;
  batch.configs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), unit(rng));
    const auto z = std::uint32_t(std::distance(cdf.begin(), it));
    batch.configs.emplace_back(std::min(z, std::uint32_t(dim - 1)), p.n_visible());
  }
  return batch;
}

SampleBatch metropolis_quantum(const RbmParams& p, std::size_t n, std::size_t burn_in,
                               std::uint64_t seed, double* acceptance_rate) {
  p.validate();
  if (n == 0) throw std::invalid_argument("metropolis_quantum: need at least one sample");
  const int nv = p.n_visible();
  const int m = p.n_hidden();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_site(0, nv - 1);

  BasisConfig cur(std::uint32_t(rng() & ((std::uint64_t{1} << nv) - 1)), nv);
  Eigen::VectorXcd th = theta(p, cur);
  Eigen::VectorXcd th_next(m);
  std::size_t accepted = 0, proposed = 0, since_refresh = 0;

  auto propose = [&]() {
    const int site = pick_site(rng);
    const double zi = double(cur.z(site));
    // log |psi(z')/psi(z)|^2 = 2 Re[ -2 b_i z_i + sum_j (log cosh th'_j - log cosh th_j) ]
    Complex log_ratio = -2.0 * p.b[site] * zi;
    for (int j = 0; j < m; ++j) {
      th_next[j] = th[j] - 2.0 * p.w(site, j) * zi;
      log_ratio += log_cosh(th_next[j]) - log_cosh(th[j]);
    }
    ++proposed;
    const double log_acc = 2.0 * log_ratio.real();
    if (log_acc >= 0.0 || unit(rng) < std::exp(log_acc)) {
      ++accepted;
      cur = cur.flipped(site);
      std::swap(th, th_next);
      // Incremental updates drift by rounding; refresh occasionally.
      if (++since_refresh >= 4096) {
        th = theta(p, cur);
        since_refresh = 0;
      }
    }
  };

  for (std::size_t s = 0; s < burn_in; ++s)
    for (int k = 0; k < nv; ++k) propose();

  SampleBatch batch;
  batch.seed = seed;
  batch.configs.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (int k = 0; k < nv; ++k) propose();
    batch.configs.push_back(cur);
  }
  if (acceptance_rate != nullptr)
    *acceptance_rate = proposed == 0 ? 0.0 : double(accepted) / double(proposed);
  return batch;
}

TvmcLinearSystem estimate_system_mc(const RbmParams& p, const SparseHamiltonian& h,
                                    const SampleBatch& batch) {
  p.validate();
  if (batch.configs.empty()) throw std::invalid_argument("estimate_system_mc: empty batch");
  if (h.n() != p.n_visible())
    throw std::invalid_argument("estimate_system_mc: operator size mismatch");
  if (!h.hermitian())
    throw std::invalid_argument("estimate_system_mc: local energies need a hermitian operator");

  // Deduplicate: identical configurations share one derivative row with the
  // summed weight, which leaves every sample mean unchanged.
  std::vector<std::uint32_t> bits(batch.configs.size());
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = batch.configs[k].bits;
  std::sort(bits.begin(), bits.end());

  const double inv_n = 1.0 / double(bits.size());
  std::vector<std::pair<std::uint32_t, double>> unique_weights;
  for (std::size_t k = 0; k < bits.size();) {
    std::size_t run = k;
    while (run < bits.size() && bits[run] == bits[k]) ++run;
    unique_weights.emplace_back(bits[k], double(run - k) * inv_n);
    k = run;
  }

  const std::size_t nu = unique_weights.size();
  Eigen::MatrixXcd o(nu, p.n_var());
  Eigen::VectorXd weight(nu);
  Eigen::VectorXcd weighted_eloc(nu);
  for (std::size_t k = 0; k < nu; ++k) {
    const BasisConfig z(unique_weights[k].first, p.n_visible());
    weight[k] = unique_weights[k].second;
    o.row(k) = log_derivatives(p, z).transpose();
    Complex eloc = 0.0;
    for (const auto& [zp, elem] : h.connected(z))
      eloc += std::conj(elem) * amplitude_ratio(p, z, zp);
    weighted_eloc[k] = weight[k] * eloc;
  }
  return assemble_from_values(o, weight, weighted_eloc);
}

std::vector<double> metropolis_classical_tafi(int l, double temperature, std::size_t n_sweeps,
                                              std::uint64_t seed) {
  if (l < 4 || l % 2 != 0)
    throw std::invalid_argument("metropolis_classical_tafi: need even L >= 4");
  if (!(temperature > 0.0))
    throw std::invalid_argument("metropolis_classical_tafi: temperature must be positive");
  const LatticeSpec lattice = LatticeSpec::triangular(l, l);
  const auto neighbors = lattice.neighbor_lists();
  const int n = l * l;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_site(0, n - 1);

  std::vector<int> z(n);
  for (int s = 0; s < n; ++s) z[s] = (rng() & 1u) ? -1 : 1;

  const int probe_a = 0;
  const int probe_b = (l / 2) * l + l / 2;
  std::vector<double> series;
  series.reserve(n_sweeps);
  for (std::size_t sweep = 0; sweep < n_sweeps; ++sweep) {
    for (int k = 0; k < n; ++k) {
      const int s = pick_site(rng);
      int field = 0;
      for (int nb : neighbors[s]) field += z[nb];
      // E = sum_<ij> z_i z_j, so flipping s changes it by -2 z_s * field.
      const double de = -2.0 * double(z[s]) * double(field);
      if (de <= 0.0 || unit(rng) < std::exp(-de / temperature)) z[s] = -z[s];
    }
    series.push_back(double(z[probe_a] * z[probe_b]));
  }
  return series;
}

AutocorrSeries autocorrelation(const std::vector<double>& series, int max_lag) {
  if (max_lag < 0) throw std::invalid_argument("autocorrelation: negative max_lag");
  const std::size_t n = series.size();
  if (n < std::size_t(10) * std::size_t(std::max(max_lag, 1)))
    throw std::invalid_argument("autocorrelation: series shorter than 10 * max_lag");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= double(n);

  auto cov = [&](int lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + std::size_t(lag) < n; ++t)
      s += (series[t] - mean) * (series[t + std::size_t(lag)] - mean);
    return s / double(n - std::size_t(lag));
  };
  const double c0 = cov(0);
  if (c0 == 0.0)
    throw std::domain_error("autocorrelation: constant series has zero variance");

  AutocorrSeries out;
  out.lags.resize(std::size_t(max_lag) + 1);
  out.values.resize(std::size_t(max_lag) + 1);
  for (int lag = 0; lag <= max_lag; ++lag) {
    out.lags[std::size_t(lag)] = lag;
    out.values[std::size_t(lag)] = cov(lag) / c0;
  }
  out.values[0] = 1.0;
  out.tau_int = 1.0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    if (out.values[std::size_t(lag)] < 0.0) break;
    out.tau_int += 2.0 * out.values[std::size_t(lag)];
  }
  return out;
}

}  // namespace urbm
