#include "urbm/propagate.hpp"

#include <cmath>
#include <stdexcept>

namespace urbm {

namespace {
constexpr Complex kMinusI{0.0, -1.0};

Eigen::VectorXcd schrodinger_rhs(const SparseHamiltonian& h, const StateVector& psi) {
  return kMinusI * h.apply(psi).amp;
}
}  // namespace

PropagationResult propagate_exact(const SparseHamiltonian& h, const StateVector& psi0,
                                  double t_max, double dt, int record_every) {
  if (!h.hermitian()) throw std::invalid_argument("propagate_exact: non-hermitian Hamiltonian");
  if (!(dt > 0.0) || dt > 0.01 + 1e-15) throw std::invalid_argument("propagate_exact: require 0 < dt <= 0.01");
  if (t_max < 0.0) throw std::invalid_argument("propagate_exact: t_max < 0");
  if (record_every < 1) throw std::invalid_argument("propagate_exact: record_every < 1");
  const long long steps = std::llround(t_max / dt);
  if (std::abs(steps * dt - t_max) > 1e-9) throw std::invalid_argument("propagate_exact: t_max not a multiple of dt");

  PropagationResult res;
  StateVector psi = psi0;
  psi.normalize();
  res.times.push_back(0.0);
  res.states.push_back(psi);

  StateVector work(psi.n);
  for (long long s = 1; s <= steps; ++s) {
    const Eigen::VectorXcd k1 = schrodinger_rhs(h, psi);
    work.amp = psi.amp + 0.5 * dt * k1;
    const Eigen::VectorXcd k2 = schrodinger_rhs(h, work);
    work.amp = psi.amp + 0.5 * dt * k2;
    const Eigen::VectorXcd k3 = schrodinger_rhs(h, work);
    work.amp = psi.amp + dt * k3;
    const Eigen::VectorXcd k4 = schrodinger_rhs(h, work);
    psi.amp += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    res.max_norm_drift = std::max(res.max_norm_drift, std::abs(psi.norm() - 1.0));
    psi.normalize();
    if (s % record_every == 0 || s == steps) {
      res.times.push_back(s * dt);
      res.states.push_back(psi);
    }
  }
  return res;
}

StateVector propagate_eig(const SparseHamiltonian& h, const StateVector& psi0, double t) {
  if (!h.hermitian()) throw std::invalid_argument("propagate_eig: non-hermitian Hamiltonian");
  if (h.n() > 10) throw std::domain_error("propagate_eig: guarded at n <= 10");
  const Eigen::MatrixXcd hd = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hd);
  if (es.info() != Eigen::Success) throw std::runtime_error("propagate_eig: eigendecomposition failed");
  const Eigen::VectorXcd coeff = es.eigenvectors().adjoint() * psi0.amp;
  Eigen::VectorXcd phased(coeff.size());
  for (Eigen::Index k = 0; k < coeff.size(); ++k)
    phased[k] = std::exp(Complex(0.0, -es.eigenvalues()[k] * t)) * coeff[k];
  StateVector out(psi0.n, es.eigenvectors() * phased);
  out.normalize();
  return out;
}

}  // namespace urbm
