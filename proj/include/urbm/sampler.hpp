#pragma once

#include <cstdint>
#include <vector>

#include "urbm/estimator.hpp"
#include "urbm/models.hpp"

namespace urbm {

// A batch of measured configurations, in draw order.
struct SampleBatch {
  std::vector<BasisConfig> configs;
  std::uint64_t seed{0};
  std::size_t n_exp() const { return configs.size(); }
};

// n i.i.d. draws from |psi(z)|^2 by inverse-CDF over the exact enumeration.
// Guarded at N <= 16.
SampleBatch sample_exact(const RbmParams& p, std::size_t n, std::uint64_t seed);

// Metropolis-Hastings on |psi|^2: uniform single-site flip proposals accepted
// with min(1, |psi(z')/psi(z)|^2), hidden arguments updated incrementally.
// One sweep = N proposals; records one configuration per sweep, after
// burn_in sweeps. Optionally reports the overall acceptance fraction.
SampleBatch metropolis_quantum(const RbmParams& p, std::size_t n, std::size_t burn_in,
                               std::uint64_t seed, double* acceptance_rate = nullptr);

// Monte Carlo estimate of the variational linear system from a measured
// batch:
//   A_nm = mean[Re(O_n* O_m)] - Re(mean O_n) Re(mean O_m)
//   f_m  = mean[O_m* E_loc]   - Re(mean O_m) mean[E_loc]
// with local energies E_loc(z) = sum_z' <z|H|z'> psi(z')/psi(z) over the
// connected configurations. Requires a hermitian operator and a non-empty
// batch.
TvmcLinearSystem estimate_system_mc(const RbmParams& p, const SparseHamiltonian& h,
                                    const SampleBatch& batch);

// Single-spin-flip Metropolis on the classical antiferromagnetic energy of
// the periodic triangular lattice at temperature T (coupling units),
// acceptance min(1, exp(-dE/T)). One sweep = L^2 proposals at uniformly
// random sites; returns the correlator z_(0,0) z_(L/2,L/2) after every sweep.
// Requires even L >= 4.
std::vector<double> metropolis_classical_tafi(int l, double temperature, std::size_t n_sweeps,
                                              std::uint64_t seed);

// Normalized autocorrelation of a real series up to max_lag, plus the
// integrated autocorrelation time 1 + 2 sum C(tau) truncated at the first
// negative coefficient.
struct AutocorrSeries {
  std::vector<int> lags;
  std::vector<double> values;  // values[0] == 1 exactly
  double tau_int{1.0};
};
AutocorrSeries autocorrelation(const std::vector<double>& series, int max_lag);

}  // namespace urbm
