#include "urbm/rbm.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace urbm {

namespace {

void check_shape(const RbmParams& p) {
  if (p.n_visible() < 1) throw std::invalid_argument("rbm: need at least one visible spin");
  if (p.n_hidden() < 0) throw std::invalid_argument("rbm: negative hidden count");
  if (p.w.rows() != p.n_visible() || p.w.cols() != p.n_hidden())
    throw std::invalid_argument("rbm: coupling matrix shape does not match biases");
  if (p.urbm && p.n_hidden() > 0 && p.w.real().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("rbm: urbm parameter set has a nonzero real coupling");
}

// tanh(x + iy) = (sinh 2x + i sin 2y) / (cosh 2x + cos 2y), saturated for
// large |x| where the exact expression would overflow.
inline Complex tanh_split(double x, double y) {
  if (std::abs(x) > 19.0) return {x > 0.0 ? 1.0 : -1.0, 0.0};
  const double sy = std::sin(y), cy = std::cos(y);
  const double denom = std::cosh(2.0 * x) + (2.0 * cy * cy - 1.0);
  return {std::sinh(2.0 * x) / denom, 2.0 * sy * cy / denom};
}

// Visible-bias exponents beta(z) = sum_i b_i z_i for every configuration,
// filled along a Gray-code walk (one bias update per step).
void fill_bias_table(const Eigen::VectorXcd& b, Eigen::VectorXd& re, Eigen::VectorXd& im) {
  const std::size_t dim = re.size();
  double br = b.real().sum(), bi = b.imag().sum();
  re[0] = br;
  im[0] = bi;
  std::uint32_t code = 0;
  for (std::size_t k = 1; k < dim; ++k) {
    const int site = std::countr_zero(k);
    code ^= (1u << site);
    const double s = ((code >> site) & 1u) ? -2.0 : 2.0;  // bit set means z_i = -1
    br += s * b[site].real();
    bi += s * b[site].imag();
    re[code] = br;
    im[code] = bi;
  }
}

// Core enumeration shared by build_statevector and build_tables: multiplies
// the hidden factors into `acc` configuration by configuration and optionally
// records tanh(theta_j).  Positive real per-column constants are dropped from
// the product (the caller normalizes), which keeps the accumulation bounded
// for restricted (imaginary-coupling) parameters.
void sweep_hidden(const RbmParams& p, Eigen::VectorXcd& acc, Eigen::MatrixXcd* tanh_out) {
  const int n = p.n_visible(), m = p.n_hidden();
  const std::size_t dim = acc.size();
  for (int j = 0; j < m; ++j) {
    Complex* t = tanh_out ? tanh_out->col(j).data() : nullptr;
    double x0 = p.m[j].real() + p.w.col(j).real().sum();
    double y = p.m[j].imag() + p.w.col(j).imag().sum();
    std::uint32_t code = 0;
    if (p.urbm) {
      // x = Re m_j is the same for every z: hoist the hyperbolics and keep
      // the reduced factor cos y + i tanh(x) sin y (true cosh / cosh x).
      const double tx = std::abs(x0) > 19.0 ? (x0 > 0.0 ? 1.0 : -1.0) : std::tanh(x0);
      const double ch2 = std::abs(x0) > 350.0 ? std::numeric_limits<double>::infinity()
                                              : std::cosh(2.0 * x0);
      const double sh2 = std::abs(x0) > 350.0
                             ? (x0 > 0.0 ? 1.0 : -1.0) * std::numeric_limits<double>::infinity()
                             : std::sinh(2.0 * x0);
      for (std::size_t k = 0;; ++k) {
        const double sy = std::sin(y), cy = std::cos(y);
        acc[code] *= Complex(cy, tx * sy);
        if (t) {
          if (std::abs(x0) > 19.0) {
            t[code] = {x0 > 0.0 ? 1.0 : -1.0, 0.0};
          } else {
            const double denom = ch2 + (2.0 * cy * cy - 1.0);
            t[code] = {sh2 / denom, 2.0 * sy * cy / denom};
          }
        }
        if (k + 1 == dim) break;
        const int site = std::countr_zero(k + 1);
        code ^= (1u << site);
        y += (((code >> site) & 1u) ? -2.0 : 2.0) * p.w(site, j).imag();
      }
    } else {
      double x = x0;
      for (std::size_t k = 0;; ++k) {
        const double sy = std::sin(y), cy = std::cos(y);
        acc[code] *= Complex(std::cosh(x) * cy, std::sinh(x) * sy);
        if (t) t[code] = tanh_split(x, y);
        if (k + 1 == dim) break;
        const int site = std::countr_zero(k + 1);
        code ^= (1u << site);
        const double s = (((code >> site) & 1u) ? -2.0 : 2.0);
        x += s * p.w(site, j).real();
        y += s * p.w(site, j).imag();
      }
    }
    // Keep the running product in range; a global positive factor is
    // irrelevant after normalization.
    const double peak = acc.cwiseAbs().maxCoeff();
    if (peak > 1e200) acc *= 1e-200;
  }
}

// Unnormalized amplitudes up to a global positive constant, shifted so the
// largest bias exponent is zero.
Eigen::VectorXcd raw_amplitudes(const RbmParams& p, Eigen::MatrixXcd* tanh_out) {
  const std::size_t dim = std::size_t{1} << p.n_visible();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Ones(dim);
  sweep_hidden(p, acc, tanh_out);
  Eigen::VectorXd bre(dim), bim(dim);
  fill_bias_table(p.b, bre, bim);
  const double shift = bre.maxCoeff();
  for (std::size_t z = 0; z < dim; ++z)
    acc[z] *= std::exp(bre[z] - shift) * Complex(std::cos(bim[z]), std::sin(bim[z]));
  return acc;
}

}  // namespace

int RbmParams::n_var() const {
  return 2 * n_visible() + 2 * n_hidden() + (urbm ? 1 : 2) * n_visible() * n_hidden();
}

void RbmParams::validate() const { check_shape(*this); }

RbmParams RbmParams::zero(int n, int m, bool urbm) {
  RbmParams p;
  p.b = Eigen::VectorXcd::Zero(n);
  p.m = Eigen::VectorXcd::Zero(m);
  p.w = Eigen::MatrixXcd::Zero(n, m);
  p.urbm = urbm;
  check_shape(p);
  return p;
}

RbmParams RbmParams::gaussian(int n, int m, double variance, bool urbm, std::mt19937_64& rng) {
  RbmParams p = zero(n, m, urbm);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  Eigen::VectorXd v(p.n_var());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = dist(rng);
  return from_param_vector(n, m, urbm, v);
}

Eigen::VectorXd to_param_vector(const RbmParams& p) {
  check_shape(p);
  const int n = p.n_visible(), m = p.n_hidden();
  Eigen::VectorXd v(p.n_var());
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) v[k++] = p.b[i].real();
  for (int i = 0; i < n; ++i) v[k++] = p.b[i].imag();
  for (int j = 0; j < m; ++j) v[k++] = p.m[j].real();
  for (int j = 0; j < m; ++j) v[k++] = p.m[j].imag();
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) v[k++] = p.w(i, j).imag();
  if (!p.urbm)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) v[k++] = p.w(i, j).real();
  return v;
}

RbmParams from_param_vector(int n, int m, bool urbm, const Eigen::VectorXd& v) {
  RbmParams p = RbmParams::zero(n, m, urbm);
  if (v.size() != p.n_var()) throw std::invalid_argument("rbm: parameter vector has wrong length");
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) p.b[i].real(v[k++]);
  for (int i = 0; i < n; ++i) p.b[i].imag(v[k++]);
  for (int j = 0; j < m; ++j) p.m[j].real(v[k++]);
  for (int j = 0; j < m; ++j) p.m[j].imag(v[k++]);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) p.w(i, j).imag(v[k++]);
  if (!urbm)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) p.w(i, j).real(v[k++]);
  return p;
}

Complex log_cosh(Complex t) {
  const double x = t.real(), y = t.imag();
  if (std::abs(x) > 20.0) {
    // cosh t = (e^|x| / 2) e^{i s y} (1 + e^{-2|x|} e^{-2 i s y}), s = sign x
    const double s = x > 0.0 ? 1.0 : -1.0;
    const Complex rest = std::log(1.0 + std::exp(-2.0 * std::abs(x)) *
                                            std::exp(Complex(0.0, -2.0 * s * y)));
    return Complex(std::abs(x) - std::log(2.0), s * y) + rest;
  }
  const double sy = std::sin(y), cy = std::cos(y);
  const Complex c(std::cosh(x) * cy, std::sinh(x) * sy);
  const double mag2 = std::norm(c);
  if (mag2 == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  return {0.5 * std::log(mag2), std::atan2(c.imag(), c.real())};
}

Eigen::VectorXcd theta(const RbmParams& p, const BasisConfig& z) {
  check_shape(p);
  if (z.n != p.n_visible()) throw std::invalid_argument("rbm: configuration size mismatch");
  Eigen::VectorXcd th = p.m;
  for (int i = 0; i < p.n_visible(); ++i) th += double(z.z(i)) * p.w.row(i).transpose();
  return th;
}

Complex log_amplitude(const RbmParams& p, const BasisConfig& z) {
  const Eigen::VectorXcd th = theta(p, z);
  Complex out = 0.0;
  for (int i = 0; i < p.n_visible(); ++i) out += double(z.z(i)) * p.b[i];
  for (int j = 0; j < p.n_hidden(); ++j) out += log_cosh(th[j]);
  return out;
}

Complex amplitude(const RbmParams& p, const BasisConfig& z) {
  return std::exp(log_amplitude(p, z));
}

Complex amplitude_ratio(const RbmParams& p, const BasisConfig& from, const BasisConfig& to) {
  return std::exp(log_amplitude(p, to) - log_amplitude(p, from));
}

StateVector build_statevector(const RbmParams& p) {
  check_shape(p);
  if (p.n_visible() > 24) throw std::invalid_argument("rbm: statevector limited to 24 spins");
  StateVector out;
  out.n = p.n_visible();
  out.amp = raw_amplitudes(p, nullptr);
  // Degenerate when the whole table sits at hidden-unit poles: everything
  // underflowed, or the peak collapsed so far that rounding noise dominates.
  const double nrm = out.amp.norm();
  const double peak2 = out.amp.cwiseAbs2().maxCoeff();
  if (!(nrm > 0.0) || !std::isfinite(nrm) || peak2 < 1e-280)
    throw std::runtime_error("rbm: degenerate parameter set, every amplitude vanishes");
  out.amp /= nrm;
  return out;
}

Eigen::VectorXcd log_derivatives(const RbmParams& p, const BasisConfig& z) {
  const Eigen::VectorXcd th = theta(p, z);
  const int n = p.n_visible(), m = p.n_hidden();
  Eigen::VectorXcd o(p.n_var());
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) o[k++] = double(z.z(i));
  for (int i = 0; i < n; ++i) o[k++] = Complex(0.0, double(z.z(i)));
  Eigen::VectorXcd t(m);
  for (int j = 0; j < m; ++j) t[j] = tanh_split(th[j].real(), th[j].imag());
  for (int j = 0; j < m; ++j) o[k++] = t[j];
  for (int j = 0; j < m; ++j) o[k++] = Complex(0.0, 1.0) * t[j];
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) o[k++] = Complex(0.0, double(z.z(i))) * t[j];
  if (!p.urbm)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) o[k++] = double(z.z(i)) * t[j];
  return o;
}

AmplitudeTable build_tables(const RbmParams& p) {
  check_shape(p);
  if (p.n_visible() > 24) throw std::invalid_argument("rbm: enumeration limited to 24 spins");
  AmplitudeTable tab;
  tab.n = p.n_visible();
  tab.m = p.n_hidden();
  const std::size_t dim = std::size_t{1} << tab.n;
  tab.tanh_theta.resize(dim, tab.m);
  tab.psi = raw_amplitudes(p, &tab.tanh_theta);
  const double nrm = tab.psi.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm) || tab.psi.cwiseAbs2().maxCoeff() < 1e-280)
    throw std::runtime_error("rbm: degenerate parameter set, every amplitude vanishes");
  tab.psi /= nrm;
  tab.weight = tab.psi.cwiseAbs2();
  return tab;
}

std::string params_to_json(const RbmParams& p) {
  check_shape(p);
  nlohmann::json j;
  j["N"] = p.n_visible();
  j["M"] = p.n_hidden();
  j["urbm"] = p.urbm;
  auto dump = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["b_re"] = dump(p.b.real());
  j["b_im"] = dump(p.b.imag());
  j["m_re"] = dump(p.m.real());
  j["m_im"] = dump(p.m.imag());
  // Couplings as N rows of M entries: W_re[i][j] pairs visible i, hidden j.
  nlohmann::json wre = nlohmann::json::array(), wim = nlohmann::json::array();
  for (int i = 0; i < p.n_visible(); ++i) {
    wre.push_back(dump(p.w.row(i).real().transpose()));
    wim.push_back(dump(p.w.row(i).imag().transpose()));
  }
  j["W_re"] = wre;
  j["W_im"] = wim;
  return j.dump(2);
}

RbmParams params_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int n = j.at("N").get<int>();
  const int m = j.at("M").get<int>();
  RbmParams p = RbmParams::zero(n, m, j.at("urbm").get<bool>());
  auto fill = [](const nlohmann::json& arr, std::size_t want, const char* name) {
    if (arr.size() != want)
      throw std::invalid_argument(std::string("rbm json: bad length for ") + name);
    return arr.get<std::vector<double>>();
  };
  const auto bre = fill(j.at("b_re"), n, "b_re"), bim = fill(j.at("b_im"), n, "b_im");
  const auto mre = fill(j.at("m_re"), m, "m_re"), mim = fill(j.at("m_im"), m, "m_im");
  for (int i = 0; i < n; ++i) p.b[i] = Complex(bre[i], bim[i]);
  for (int jj = 0; jj < m; ++jj) p.m[jj] = Complex(mre[jj], mim[jj]);
  const auto& wre = j.at("W_re");
  const auto& wim = j.at("W_im");
  if (wre.size() != std::size_t(n) || wim.size() != std::size_t(n))
    throw std::invalid_argument("rbm json: coupling arrays need one row per visible spin");
  for (int i = 0; i < n; ++i) {
    const auto rre = fill(wre[i], m, "W_re row"), rim = fill(wim[i], m, "W_im row");
    for (int jj = 0; jj < m; ++jj) p.w(i, jj) = Complex(rre[jj], rim[jj]);
  }
  check_shape(p);
  return p;
}

void save_params(const RbmParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("rbm: cannot open " + path + " for writing");
  out << params_to_json(p) << '\n';
}

RbmParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rbm: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

}  // namespace urbm
