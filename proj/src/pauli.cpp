#include "urbm/pauli.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace urbm {

namespace {
constexpr Complex kI{0.0, 1.0};
}

SparseHamiltonian::SparseHamiltonian(int n, std::vector<PauliTerm> terms) : n_(n) {
  if (n < 1 || n > 24) throw std::invalid_argument("SparseHamiltonian: n out of range");
  masks_.reserve(terms.size());
  for (const auto& t : terms) {
    Mask m{t.coeff, 0, 0};
    std::uint32_t seen = 0;
    for (const auto& [site, axis] : t.ops) {
      if (site < 0 || site >= n) throw std::invalid_argument("SparseHamiltonian: site out of range");
      const std::uint32_t bit = 1u << site;
      if (seen & bit) throw std::invalid_argument("SparseHamiltonian: duplicate site in term");
      seen |= bit;
      switch (axis) {
        case Axis::X: m.x |= bit; break;
        case Axis::Z: m.z |= bit; break;
        case Axis::Y:
          m.x |= bit;
          m.z |= bit;
          m.c *= kI;  // sigma_y = i X Z
          break;
      }
    }
    masks_.push_back(m);
  }
  canonicalize();
}

SparseHamiltonian::SparseHamiltonian(int n, std::vector<Mask> masks) : n_(n), masks_(std::move(masks)) {
  canonicalize();
}

void SparseHamiltonian::canonicalize() {
  std::map<std::pair<std::uint32_t, std::uint32_t>, Complex> merged;
  for (const auto& m : masks_) merged[{m.x, m.z}] += m.c;
  masks_.clear();
  for (const auto& [key, c] : merged)
    if (c != Complex{0.0, 0.0}) masks_.push_back({c, key.first, key.second});
  // A mask term is hermitian iff conj(c) * (-1)^{popcount(x & z)} == c.
  hermitian_ = true;
  for (const auto& m : masks_) {
    const Complex cd = std::conj(m.c) * parity_sign(m.x & m.z);
    if (std::abs(cd - m.c) > 1e-12 * (1.0 + std::abs(m.c))) hermitian_ = false;
  }
}

std::size_t SparseHamiltonian::offdiagonal_group_count() const {
  std::size_t k = 0;
  for (const auto& m : masks_)
    if (m.x != 0) ++k;
  return k;
}

std::vector<PauliTerm> SparseHamiltonian::terms() const {
  std::vector<PauliTerm> out;
  out.reserve(masks_.size());
  for (const auto& m : masks_) {
    PauliTerm t;
    t.coeff = m.c;
    for (int i = 0; i < n_; ++i) {
      const bool bx = (m.x >> i) & 1u, bz = (m.z >> i) & 1u;
      if (bx && bz) {
        t.ops.emplace_back(i, Axis::Y);
        t.coeff *= -kI;  // undo the compiled i^{n_Y}
      } else if (bx) {
        t.ops.emplace_back(i, Axis::X);
      } else if (bz) {
        t.ops.emplace_back(i, Axis::Z);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

StateVector SparseHamiltonian::apply(const StateVector& psi) const {
  if (psi.n != n_) throw std::invalid_argument("apply: size mismatch");
  StateVector out(n_);
  const std::int64_t dim = psi.dim();
  for (const auto& m : masks_) {
    for (std::int64_t s = 0; s < dim; ++s) {
      const double sign = parity_sign(m.z & static_cast<std::uint32_t>(s));
      out.amp[s ^ m.x] += m.c * sign * psi.amp[s];
    }
  }
  return out;
}

Complex SparseHamiltonian::expectation(const StateVector& psi) const {
  const StateVector hpsi = apply(psi);
  const double nrm2 = psi.amp.squaredNorm();
  return psi.amp.dot(hpsi.amp) / nrm2;
}

std::vector<std::pair<BasisConfig, Complex>> SparseHamiltonian::connected(const BasisConfig& z) const {
  if (z.n != n_) throw std::invalid_argument("connected: size mismatch");
  std::map<std::uint32_t, Complex> acc;
  for (const auto& m : masks_) acc[m.x] += m.c * parity_sign(m.z & z.bits);
  std::vector<std::pair<BasisConfig, Complex>> out;
  out.reserve(acc.size());
  for (const auto& [x, v] : acc)
    if (v != Complex{0.0, 0.0}) out.emplace_back(BasisConfig(z.bits ^ x, n_), v);
  return out;
}

Eigen::MatrixXcd SparseHamiltonian::dense() const {
  if (n_ > 14) throw std::domain_error("dense: guarded at n <= 14");
  const std::int64_t dim = std::int64_t(1) << n_;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& m : masks_)
    for (std::int64_t s = 0; s < dim; ++s)
      h(s ^ m.x, s) += m.c * parity_sign(m.z & static_cast<std::uint32_t>(s));
  return h;
}

SparseHamiltonian SparseHamiltonian::dagger() const {
  std::vector<Mask> out = masks_;
  for (auto& m : out) m.c = std::conj(m.c) * parity_sign(m.x & m.z);
  return SparseHamiltonian(n_, std::move(out));
}

SparseHamiltonian SparseHamiltonian::scaled(Complex factor) const {
  std::vector<Mask> out = masks_;
  for (auto& m : out) m.c *= factor;
  return SparseHamiltonian(n_, std::move(out));
}

SparseHamiltonian operator+(const SparseHamiltonian& a, const SparseHamiltonian& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("operator+: size mismatch");
  std::vector<SparseHamiltonian::Mask> out = a.masks_;
  out.insert(out.end(), b.masks_.begin(), b.masks_.end());
  return SparseHamiltonian(a.n_, std::move(out));
}

SparseHamiltonian operator*(const SparseHamiltonian& a, const SparseHamiltonian& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("operator*: size mismatch");
  std::vector<SparseHamiltonian::Mask> out;
  out.reserve(a.masks_.size() * b.masks_.size());
  for (const auto& ma : a.masks_)
    for (const auto& mb : b.masks_)
      // Z(z_a) X(x_b) = (-1)^{popcount(z_a & x_b)} X(x_b) Z(z_a)
      out.push_back({ma.c * mb.c * parity_sign(ma.z & mb.x),
                     ma.x ^ mb.x, ma.z ^ mb.z});
  return SparseHamiltonian(a.n_, std::move(out));
}

}  // namespace urbm
