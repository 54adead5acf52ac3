#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "urbm/basis.hpp"

namespace urbm {

using Complex = std::complex<double>;

// Dense state on n spin-1/2 sites; amplitudes indexed by BasisConfig::bits.
struct StateVector {
  int n{0};
  Eigen::VectorXcd amp;

  StateVector() = default;
  explicit StateVector(int n_) : n(n_), amp(Eigen::VectorXcd::Zero(std::int64_t(1) << n_)) {
    if (n_ < 1 || n_ > 24) throw std::invalid_argument("StateVector: n out of range");
  }
  StateVector(int n_, Eigen::VectorXcd a) : n(n_), amp(std::move(a)) {
    if ((std::int64_t(1) << n_) != amp.size()) throw std::invalid_argument("StateVector: dimension mismatch");
  }

  std::int64_t dim() const { return amp.size(); }
  double norm() const { return amp.norm(); }

  void normalize() {
    const double nn = amp.norm();
    if (!(nn > 0.0)) throw std::runtime_error("StateVector: cannot normalize zero state");
    amp /= nn;
  }

  // |+>^n : uniform superposition.
  static StateVector plus(int n_) {
    StateVector s(n_);
    s.amp.setConstant(1.0 / std::sqrt(double(s.dim())));
    return s;
  }

  static StateVector basis_state(BasisConfig c) {
    StateVector s(c.n);
    s.amp[c.bits] = 1.0;
    return s;
  }
};

inline Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.n != b.n) throw std::invalid_argument("overlap: size mismatch");
  return a.amp.dot(b.amp);  // conjugates a
}

inline double fidelity(const StateVector& a, const StateVector& b) {
  const double na = a.norm(), nb = b.norm();
  return std::norm(overlap(a, b)) / (na * na * nb * nb);
}

}  // namespace urbm
