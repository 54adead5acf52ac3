#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "urbm/basis.hpp"
#include "urbm/statevector.hpp"

namespace urbm {

// Variational wavefunction
//   psi(z) = exp(sum_i b_i z_i) * prod_j cosh(m_j + sum_i w_ij z_i)
// over Ising variables z_i = 1 - 2 bit_i. In the unitary-coupling restriction
// (`urbm`) the visible-hidden couplings are purely imaginary: Re w == 0.
struct RbmParams {
  Eigen::VectorXcd b;  // visible biases, length N
  Eigen::VectorXcd m;  // hidden biases, length M
  Eigen::MatrixXcd w;  // couplings, N x M
  bool urbm{true};

  int n_visible() const { return static_cast<int>(b.size()); }
  int n_hidden() const { return static_cast<int>(m.size()); }
  int n_var() const;
  void validate() const;

  static RbmParams zero(int n, int m, bool urbm = true);
  // I.i.d. N(0, variance) on every real parameter component, drawn in
  // flattened-vector order.
  static RbmParams gaussian(int n, int m, double variance, bool urbm, std::mt19937_64& rng);
};

// Flattened real parameter vector, block order
//   [ b^R | b^I | m^R | m^I | W^I | (W^R if not urbm) ]
// with the visible index fastest inside coupling blocks: W_(ij) -> j*N + i.
Eigen::VectorXd to_param_vector(const RbmParams& p);
RbmParams from_param_vector(int n, int m, bool urbm, const Eigen::VectorXd& v);

// log cosh with a saturation branch for |Re| > 20 (value exact under exp).
Complex log_cosh(Complex t);

// Hidden-unit arguments theta_j(z) = m_j + sum_i w_ij z_i.
Eigen::VectorXcd theta(const RbmParams& p, const BasisConfig& z);

// Unnormalized log amplitude log psi(z), and psi(z) itself.
Complex log_amplitude(const RbmParams& p, const BasisConfig& z);
Complex amplitude(const RbmParams& p, const BasisConfig& z);

// psi(to) / psi(from).
Complex amplitude_ratio(const RbmParams& p, const BasisConfig& from, const BasisConfig& to);

// Normalized dense state; guarded at N <= 24, errors when every amplitude
// vanishes (degenerate parameter set).
StateVector build_statevector(const RbmParams& p);

// Log-derivative values O_n(z) = d log psi / d theta_n, flattened-vector order:
//   O_{b^R_i} = z_i        O_{b^I_i} = i z_i
//   O_{m^R_j} = tanh th_j  O_{m^I_j} = i tanh th_j
//   O_{W^I_ij} = i z_i tanh th_j   (O_{W^R_ij} = z_i tanh th_j when present)
Eigen::VectorXcd log_derivatives(const RbmParams& p, const BasisConfig& z);

// Full-enumeration tables used by the deterministic estimators: normalized
// amplitudes, weights |psi|^2, and tanh(theta_j(z)) stored column-major
// (hidden index j selects a contiguous 2^N column).
struct AmplitudeTable {
  int n{0}, m{0};
  Eigen::VectorXcd psi;
  Eigen::VectorXd weight;
  Eigen::MatrixXcd tanh_theta;
};
AmplitudeTable build_tables(const RbmParams& p);

// JSON (de)serialization with bit-exact number round-trip.
std::string params_to_json(const RbmParams& p);
RbmParams params_from_json(const std::string& text);
void save_params(const RbmParams& p, const std::string& path);
RbmParams load_params(const std::string& path);

}  // namespace urbm
