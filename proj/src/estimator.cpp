#include "urbm/estimator.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace urbm {

namespace {

constexpr Complex kI{0.0, 1.0};

template <typename Scalar>
void walsh_core(Scalar* a, int n_bits) {
  const std::size_t n = std::size_t{1} << n_bits;
  for (std::size_t len = 1; len < n; len <<= 1)
    for (std::size_t i = 0; i < n; i += (len << 1))
      for (std::size_t k = i; k < i + len; ++k) {
        const Scalar x = a[k], y = a[k + len];
        a[k] = x + y;
        a[k + len] = x - y;
      }
}

// Flattened-parameter offsets of the derivative blocks.
struct BlockLayout {
  int n, m;
  bool urbm;
  int b_re, b_im, m_re, m_im, w_im, w_re, total;
  explicit BlockLayout(const RbmParams& p)
      : n(p.n_visible()), m(p.n_hidden()), urbm(p.urbm) {
    b_re = 0;
    b_im = n;
    m_re = 2 * n;
    m_im = 2 * n + m;
    w_im = 2 * n + 2 * m;
    w_re = urbm ? -1 : w_im + n * m;
    total = p.n_var();
  }
  int wi(int i, int j) const { return w_im + j * n + i; }
  int wr(int i, int j) const { return w_re + j * n + i; }
};

Eigen::VectorXcd weighted_local_energy(const AmplitudeTable& tab, const SparseHamiltonian& h) {
  StateVector sv;
  sv.n = tab.n;
  sv.amp = tab.psi;
  return tab.psi.conjugate().cwiseProduct(h.apply(sv).amp);
}

// Walsh-transform assembly: every Gram entry of the derivative blocks is a
// low-order transform coefficient of w, w t_l, w conj(t_j) t_l, or of the
// weighted local energies. Restricted (imaginary-coupling) parameters only.
TvmcLinearSystem assemble_transform(const RbmParams& p, const AmplitudeTable& tab,
                                    const Eigen::VectorXcd& q) {
  const BlockLayout lay(p);
  const int n = lay.n, m = lay.m;
  const std::size_t dim = std::size_t{1} << n;

  TvmcLinearSystem sys;
  sys.a = Eigen::MatrixXd::Zero(lay.total, lay.total);
  sys.f = Eigen::VectorXcd::Zero(lay.total);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(lay.total);
  auto set_sym = [&](int r, int c, double v) {
    sys.a(r, c) = v;
    sys.a(c, r) = v;
  };

  // Bias-bias block and bias means from the weight transform.
  Eigen::VectorXd what = tab.weight;
  walsh_core(what.data(), n);
  for (int i = 0; i < n; ++i) rho[lay.b_re + i] = what[std::size_t{1} << i];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double g = what[(std::size_t{1} << i) ^ (std::size_t{1} << k)];
      sys.a(lay.b_re + i, lay.b_re + k) = g;
      sys.a(lay.b_im + i, lay.b_im + k) = g;
    }

  // Bias force entries and the energy from the local-energy transform.
  Eigen::VectorXcd qhat = q;
  walsh_core(qhat.data(), n);
  sys.energy = qhat[0];
  for (int i = 0; i < n; ++i) {
    const Complex g = qhat[std::size_t{1} << i];
    sys.f[lay.b_re + i] = g;
    sys.f[lay.b_im + i] = -kI * g;
  }

  // Per-hidden transforms of w t_l: bias-hidden entries and hidden means.
  Eigen::MatrixXcd u(dim, m);
  for (int l = 0; l < m; ++l) {
    for (std::size_t z = 0; z < dim; ++z) u(z, l) = tab.weight[z] * tab.tanh_theta(z, l);
    walsh_core(u.col(l).data(), n);
    rho[lay.m_re + l] = u(0, l).real();
    rho[lay.m_im + l] = -u(0, l).imag();
    for (int i = 0; i < n; ++i) {
      const Complex g = u(std::size_t{1} << i, l);
      rho[lay.wi(i, l)] = -g.imag();
      set_sym(lay.b_re + i, lay.m_re + l, g.real());
      set_sym(lay.b_re + i, lay.m_im + l, -g.imag());
      set_sym(lay.b_im + i, lay.m_re + l, g.imag());
      set_sym(lay.b_im + i, lay.m_im + l, g.real());
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const Complex g = u((std::size_t{1} << i) ^ (std::size_t{1} << k), l);
        set_sym(lay.b_re + i, lay.wi(k, l), -g.imag());
        set_sym(lay.b_im + i, lay.wi(k, l), g.real());
      }
  }

  // Per-hidden transforms of q conj(t_j): hidden force entries.
  Eigen::VectorXcd scratch(dim);
  for (int j = 0; j < m; ++j) {
    for (std::size_t z = 0; z < dim; ++z) scratch[z] = q[z] * std::conj(tab.tanh_theta(z, j));
    walsh_core(scratch.data(), n);
    sys.f[lay.m_re + j] = scratch[0];
    sys.f[lay.m_im + j] = -kI * scratch[0];
    for (int i = 0; i < n; ++i) sys.f[lay.wi(i, j)] = -kI * scratch[std::size_t{1} << i];
  }

  // Hidden-pair transforms of w conj(t_j) t_l: hidden-hidden and
  // hidden-coupling blocks (the j > l cases follow by conjugation).
  for (int j = 0; j < m; ++j)
    for (int l = j; l < m; ++l) {
      for (std::size_t z = 0; z < dim; ++z)
        scratch[z] = tab.weight[z] * std::conj(tab.tanh_theta(z, j)) * tab.tanh_theta(z, l);
      walsh_core(scratch.data(), n);
      const Complex g0 = scratch[0];
      set_sym(lay.m_re + j, lay.m_re + l, g0.real());
      set_sym(lay.m_re + j, lay.m_im + l, -g0.imag());
      set_sym(lay.m_im + j, lay.m_re + l, g0.imag());
      set_sym(lay.m_im + j, lay.m_im + l, g0.real());
      for (int k = 0; k < n; ++k) {
        const Complex g = scratch[std::size_t{1} << k];
        set_sym(lay.m_re + j, lay.wi(k, l), -g.imag());
        set_sym(lay.m_im + j, lay.wi(k, l), g.real());
        if (l != j) {  // conj pairing: sum of w conj(t_l) t_j z_k
          set_sym(lay.m_re + l, lay.wi(k, j), g.imag());
          set_sym(lay.m_im + l, lay.wi(k, j), g.real());
        }
      }
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          const double v = scratch[(std::size_t{1} << i) ^ (std::size_t{1} << k)].real();
          set_sym(lay.wi(i, j), lay.wi(k, l), v);
        }
    }

  sys.a.noalias() -= rho * rho.transpose();
  sys.f -= sys.energy * rho.cast<Complex>();
  return sys;
}

}  // namespace

void walsh_transform(Eigen::VectorXcd& a, int n_bits) {
  if (a.size() != Eigen::Index(std::size_t{1} << n_bits))
    throw std::invalid_argument("walsh_transform: length mismatch");
  walsh_core(a.data(), n_bits);
}

void walsh_transform(Eigen::VectorXd& a, int n_bits) {
  if (a.size() != Eigen::Index(std::size_t{1} << n_bits))
    throw std::invalid_argument("walsh_transform: length mismatch");
  walsh_core(a.data(), n_bits);
}

Eigen::MatrixXcd derivative_matrix(const RbmParams& p, const AmplitudeTable& tab) {
  const BlockLayout lay(p);
  if (tab.n != lay.n || tab.m != lay.m)
    throw std::invalid_argument("derivative_matrix: table shape mismatch");
  const std::size_t dim = std::size_t{1} << lay.n;
  Eigen::MatrixXcd o(dim, lay.total);
  for (int i = 0; i < lay.n; ++i)
    for (std::size_t z = 0; z < dim; ++z) {
      const double s = (z >> i) & 1u ? -1.0 : 1.0;
      o(z, lay.b_re + i) = s;
      o(z, lay.b_im + i) = Complex(0.0, s);
    }
  for (int j = 0; j < lay.m; ++j)
    for (std::size_t z = 0; z < dim; ++z) {
      const Complex t = tab.tanh_theta(z, j);
      o(z, lay.m_re + j) = t;
      o(z, lay.m_im + j) = kI * t;
    }
  for (int j = 0; j < lay.m; ++j)
    for (int i = 0; i < lay.n; ++i)
      for (std::size_t z = 0; z < dim; ++z) {
        const double s = (z >> i) & 1u ? -1.0 : 1.0;
        const Complex t = tab.tanh_theta(z, j);
        o(z, lay.wi(i, j)) = kI * (s * t);
        if (!lay.urbm) o(z, lay.wr(i, j)) = s * t;
      }
  return o;
}

TvmcLinearSystem assemble_from_values(const Eigen::MatrixXcd& o, const Eigen::VectorXd& weight,
                                      const Eigen::VectorXcd& weighted_eloc) {
  const Eigen::Index nz = o.rows(), nv = o.cols();
  if (weight.size() != nz || weighted_eloc.size() != nz)
    throw std::invalid_argument("assemble_from_values: length mismatch");
  TvmcLinearSystem sys;
  sys.energy = weighted_eloc.sum();
  const Eigen::VectorXd rho = (o.transpose() * weight).real();
  sys.f = o.adjoint() * weighted_eloc - sys.energy * rho.cast<Complex>();

  const Eigen::VectorXd sw = weight.cwiseSqrt();
  Eigen::MatrixXd x = o.real(), y = o.imag();
  x.array().colwise() *= sw.array();
  y.array().colwise() *= sw.array();
  sys.a = Eigen::MatrixXd::Zero(nv, nv);
  sys.a.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  sys.a.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  sys.a.selfadjointView<Eigen::Lower>().rankUpdate(rho, -1.0);
  sys.a = sys.a.selfadjointView<Eigen::Lower>();
  return sys;
}

TvmcLinearSystem build_system_exact(const RbmParams& p, const SparseHamiltonian& h,
                                    AssemblyStrategy strategy) {
  p.validate();
  const int n = p.n_visible();
  if (h.n() != n) throw std::invalid_argument("build_system_exact: operator size mismatch");
  if (n > 18) throw std::invalid_argument("build_system_exact: enumeration limited to 18 spins");
  const std::size_t dense_entries = (std::size_t{1} << n) * std::size_t(p.n_var());
  if (strategy == AssemblyStrategy::Auto)
    strategy = (p.urbm && dense_entries > (std::size_t{1} << 21)) ? AssemblyStrategy::Transform
                                                                  : AssemblyStrategy::Dense;
  if (strategy == AssemblyStrategy::Transform && !p.urbm)
    throw std::invalid_argument("build_system_exact: transform assembly needs restricted parameters");
  if (strategy == AssemblyStrategy::Dense && dense_entries > (std::size_t{1} << 23))
    throw std::invalid_argument("build_system_exact: dense assembly too large here");

  const AmplitudeTable tab = build_tables(p);
  const Eigen::VectorXcd q = weighted_local_energy(tab, h);
  if (strategy == AssemblyStrategy::Dense)
    return assemble_from_values(derivative_matrix(p, tab), tab.weight, q);
  return assemble_transform(p, tab, q);
}

Complex variational_expectation(const RbmParams& p, const SparseHamiltonian& op) {
  p.validate();
  if (op.n() != p.n_visible())
    throw std::invalid_argument("variational_expectation: operator size mismatch");
  if (p.n_visible() > 18)
    throw std::invalid_argument("variational_expectation: enumeration limited to 18 spins");
  return weighted_local_energy(build_tables(p), op).sum();
}

std::optional<KernelStepData> solve_kernel_exact(const RbmParams& p, const SparseHamiltonian& h,
                                                 bool rhs_imag, const Regularization& reg) {
  p.validate();
  const int n = p.n_visible();
  if (h.n() != n) throw std::invalid_argument("solve_kernel_exact: operator size mismatch");
  if (n > 18) throw std::invalid_argument("solve_kernel_exact: enumeration limited to 18 spins");
  const std::size_t dim = std::size_t{1} << n;
  const Eigen::Index nv = p.n_var();
  if (Eigen::Index(2 * dim) >= nv) return std::nullopt;  // materialized route is cheaper
  if (!(reg.ridge > 0.0)) return std::nullopt;           // Woodbury shift needs a positive ridge

  const AmplitudeTable tab = build_tables(p);
  const Eigen::VectorXcd q = weighted_local_energy(tab, h);
  const Eigen::MatrixXcd o = derivative_matrix(p, tab);

  KernelStepData out;
  out.energy = q.sum();
  const Eigen::VectorXd rho = (o.transpose() * tab.weight).real();
  out.f = o.adjoint() * q - out.energy * rho.cast<Complex>();
  const Eigen::VectorXd rhs = rhs_imag ? Eigen::VectorXd(out.f.imag()) : Eigen::VectorXd(out.f.real());

  const Eigen::VectorXd sw = tab.weight.cwiseSqrt();
  Eigen::MatrixXd x = o.real(), y = o.imag();
  x.array().colwise() *= sw.array();
  y.array().colwise() *= sw.array();

  // Gram of [X; Y] rows from the closed-form derivative sums: with
  // c = sum_i z_i z'_i, tau = sum_j conj(t_j) t'_j, kappa = sum_j t_j t'_j,
  //   sum_n conj(O_n(z)) O_n(z') = 2c + 2 tau + c tau   (+ c tau again with
  //                                real couplings present)
  //   sum_n O_n(z) O_n(z')       = -c kappa             (0 with real couplings)
  Eigen::MatrixXd c0(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      c0(a, b) = double(n) - 2.0 * double(std::popcount(std::uint32_t(a ^ b)));
      c0(b, a) = c0(a, b);
    }
  Eigen::MatrixXcd tw = tab.tanh_theta;
  tw.array().colwise() *= sw.cast<Complex>().array();
  const Eigen::MatrixXcd tau = tw.conjugate() * tw.transpose();
  const Eigen::MatrixXd cw = c0.cwiseProduct(sw * sw.transpose());
  const double wcoup = p.urbm ? 1.0 : 2.0;
  const Eigen::MatrixXcd s =
      2.0 * cw.cast<Complex>() + 2.0 * tau + wcoup * c0.cast<Complex>().cwiseProduct(tau);
  Eigen::MatrixXcd kmat = Eigen::MatrixXcd::Zero(dim, dim);
  if (p.urbm) kmat = -c0.cast<Complex>().cwiseProduct(tw * tw.transpose());

  Eigen::MatrixXd big(2 * dim, 2 * dim);
  big.topLeftCorner(dim, dim) = 0.5 * (s.real() + kmat.real());
  big.bottomRightCorner(dim, dim) = 0.5 * (s.real() - kmat.real());
  big.topRightCorner(dim, dim) = 0.5 * (kmat.imag() + s.imag());
  big.bottomLeftCorner(dim, dim) = 0.5 * (kmat.imag() - s.imag());
  big.diagonal().array() += reg.ridge;

  const Eigen::LLT<Eigen::MatrixXd> llt(big);
  if (llt.info() != Eigen::Success) return std::nullopt;

  auto shifted_inverse_apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd bv(2 * dim);
    bv.head(dim).noalias() = x * v;
    bv.tail(dim).noalias() = y * v;
    const Eigen::VectorXd uu = llt.solve(bv);
    Eigen::VectorXd back = v;
    back.noalias() -= x.transpose() * uu.head(dim);
    back.noalias() -= y.transpose() * uu.tail(dim);
    return Eigen::VectorXd((back / reg.ridge).eval());
  };
  const Eigen::VectorXd xv = shifted_inverse_apply(rhs);
  const Eigen::VectorXd xr = shifted_inverse_apply(rho);
  const double denom = 1.0 - rho.dot(xr);
  if (!std::isfinite(denom) || denom < 1e-8) return std::nullopt;
  out.solution = xv + xr * (rho.dot(xv) / denom);

  // Residual of (A + ridge) x = rhs applied through the factors.
  Eigen::VectorXd ax = reg.ridge * out.solution;
  ax.noalias() += x.transpose() * (x * out.solution);
  ax.noalias() += y.transpose() * (y * out.solution);
  ax.noalias() -= rho * rho.dot(out.solution);
  const double resid = (ax - rhs).norm();
  if (!std::isfinite(resid) || resid > 1e-8 * rhs.norm() + 1e-14) return std::nullopt;
  return out;
}

}  // namespace urbm
