#include "urbm/circuit.hpp"

#include <cmath>
#include <stdexcept>

#include "urbm/basis.hpp"

namespace urbm {

RotationGate rotation_gate(Complex bias) {
  RotationGate g;
  g.c = std::sqrt(std::cosh(2.0 * bias.real()));
  // Target column e^{bias Z}|+> / c has moduli e^{+-Re bias} / (sqrt(2) c) and
  // phases +-Im bias, i.e. Rz(-2 Im bias) Ry(2 atan2(e^{-Re b}, e^{Re b}))|0>.
  g.ry_angle = 2.0 * std::atan2(std::exp(-bias.real()), std::exp(bias.real()));
  g.rz_angle = -2.0 * bias.imag();
  const double ch = std::cos(0.5 * g.ry_angle), sh = std::sin(0.5 * g.ry_angle);
  const Complex ph = std::exp(Complex(0.0, 0.5 * g.rz_angle));
  g.u << std::conj(ph) * ch, -std::conj(ph) * sh, ph * sh, ph * ch;
  return g;
}

Eigen::VectorXcd entangler_diagonal(const Eigen::VectorXcd& w_column) {
  const int n = static_cast<int>(w_column.size());
  if (n < 1 || n > 20) throw std::invalid_argument("entangler: unsupported column size");
  if (w_column.real().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("entangler: couplings must be purely imaginary");
  const std::size_t dim = std::size_t{1} << (n + 1);
  Eigen::VectorXcd d(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    const double h = (s >> n) & 1u ? -1.0 : 1.0;
    double phase = 0.0;
    for (int i = 0; i < n; ++i)
      phase += (((s >> i) & 1u) ? -1.0 : 1.0) * h * w_column[i].imag();
    d[s] = std::exp(Complex(0.0, phase));
  }
  return d;
}

PreparationReport prepare_recycled(const RbmParams& p) {
  p.validate();
  if (!p.urbm) throw std::invalid_argument("prepare_recycled: restricted parameters required");
  const int n = p.n_visible(), m = p.n_hidden();
  if (n > 16) throw std::invalid_argument("prepare_recycled: emulation limited to 16 spins");
  const std::size_t dim = std::size_t{1} << n;

  // Visible biases: diagonal (generally non-unitary) scaling of |+>^N,
  // renormalized before any ancilla round.
  Eigen::VectorXcd vis(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    Complex e = 0.0;
    for (int i = 0; i < n; ++i) e += (((s >> i) & 1u) ? -1.0 : 1.0) * p.b[i];
    vis[s] = std::exp(e);
  }
  vis /= vis.norm();

  PreparationReport rep;
  rep.ancilla_success_probs.resize(m);
  Eigen::VectorXcd full(2 * dim);
  for (int j = 0; j < m; ++j) {
    // Fresh ancilla in the top bit, then the coupling phases for column j.
    const Eigen::Vector2cd anc = rotation_gate(p.m[j]).u.col(0);
    full.head(dim) = anc[0] * vis;
    full.tail(dim) = anc[1] * vis;
    full.array() *= entangler_diagonal(p.w.col(j)).array();
    // Project the ancilla onto |+> and recycle it.
    vis = (full.head(dim) + full.tail(dim)) / std::sqrt(2.0);
    const double prob = vis.squaredNorm();
    // Probabilities this small are pure rounding noise from a projection that
    // annihilates the state exactly.
    if (!(prob > 1e-24))
      throw std::runtime_error("prepare_recycled: projection annihilated the state");
    rep.ancilla_success_probs[j] = prob;
    vis /= std::sqrt(prob);
  }
  rep.total_success = m == 0 ? 1.0 : rep.ancilla_success_probs.prod();
  rep.state.n = n;
  rep.state.amp = std::move(vis);
  return rep;
}

RealCouplingScheme realw_coupling(double w_real) {
  RealCouplingScheme s;
  s.theta1 = 2.0 * std::asin(std::sqrt(std::exp(w_real - std::abs(w_real))));
  s.theta2 = 2.0 * std::asin(std::sqrt(std::exp(-w_real - std::abs(w_real))));
  // Post-selecting the ancilla |1> branch leaves sin(theta/2) on each z z'
  // sector: diag entries e^{w z z' - |w|}, proportional to e^{w Z(x)Z}.
  const double like = std::exp(w_real - std::abs(w_real));
  const double unlike = std::exp(-w_real - std::abs(w_real));
  s.kernel = Eigen::Vector4cd(like, unlike, unlike, like).asDiagonal();
  s.success_prob = 0.5 * (like * like + unlike * unlike);
  return s;
}

std::vector<EnsembleTerm> ensemble_decompose(const RbmParams& p) {
  p.validate();
  if (!p.urbm) throw std::invalid_argument("ensemble_decompose: restricted parameters required");
  if (p.n_hidden() > 12) throw std::invalid_argument("ensemble_decompose: limited to 12 hidden units");
  const int n = p.n_visible(), m = p.n_hidden();
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t terms = std::size_t{1} << m;

  // Phases phi_j(z) = Im m_j + sum_i W^I_ij z_i and bias factors, shared by
  // the full state and every component.
  Eigen::MatrixXd phi(dim, m);
  Eigen::VectorXcd bias(dim);
  Eigen::VectorXcd total(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    Complex e = 0.0;
    for (int i = 0; i < n; ++i) e += (((s >> i) & 1u) ? -1.0 : 1.0) * p.b[i];
    bias[s] = std::exp(e);
    Complex prod = 1.0;
    for (int j = 0; j < m; ++j) {
      double f = p.m[j].imag();
      for (int i = 0; i < n; ++i)
        f += (((s >> i) & 1u) ? -1.0 : 1.0) * p.w(i, j).imag();
      phi(s, j) = f;
      prod *= std::cosh(Complex(p.m[j].real(), f));
    }
    total[s] = bias[s] * prod;
  }
  const double full_norm = total.norm();
  if (!(full_norm > 0.0)) throw std::runtime_error("ensemble_decompose: degenerate state");

  std::vector<EnsembleTerm> out(terms);
  for (std::size_t sel = 0; sel < terms; ++sel) {
    // Hidden-bias factor prod_j cosh(m^R_j) or sinh(m^R_j) by branch.
    double r = 1.0;
    for (int j = 0; j < m; ++j)
      r *= (sel >> j) & 1u ? std::sinh(p.m[j].real()) : std::cosh(p.m[j].real());
    Eigen::VectorXcd amp(dim);
    for (std::size_t s = 0; s < dim; ++s) {
      Complex g = 1.0;
      for (int j = 0; j < m; ++j)
        g *= (sel >> j) & 1u ? Complex(0.0, std::sin(phi(s, j))) : Complex(std::cos(phi(s, j)), 0.0);
      amp[s] = bias[s] * g;
    }
    const double nrm = amp.norm();
    EnsembleTerm& term = out[sel];
    term.state.n = n;
    if (nrm > 0.0) {
      term.weight = Complex(r * nrm / full_norm, 0.0);
      term.state.amp = amp / nrm;
    } else {
      term.weight = 0.0;
      term.state.amp = Eigen::VectorXcd::Zero(dim);
    }
  }
  return out;
}

}  // namespace urbm
