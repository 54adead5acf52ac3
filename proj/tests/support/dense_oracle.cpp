#include "support/dense_oracle.hpp"

#include <stdexcept>

namespace oracle {

Eigen::Matrix2cd axis_matrix(urbm::Axis axis) {
  Eigen::Matrix2cd m;
  const Complex i{0.0, 1.0};
  switch (axis) {
    case urbm::Axis::X: m << 0, 1, 1, 0; break;
    case urbm::Axis::Y: m << 0, -i, i, 0; break;
    case urbm::Axis::Z: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("axis");
  }
  return m;
}

namespace {
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}
}  // namespace

Eigen::MatrixXcd dense_from_terms(int n, const std::vector<urbm::PauliTerm>& terms) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : terms) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
    for (int site = n - 1; site >= 0; --site) {
      Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
      for (const auto& [s, axis] : term.ops)
        if (s == site) m = axis_matrix(axis);
      acc = kron(acc, m);
    }
    h += term.coeff * acc;
  }
  return h;
}

Eigen::VectorXcd evolve_dense(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi0;
  Eigen::VectorXcd phased(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    phased[k] = std::exp(Complex(0.0, -es.eigenvalues()[k] * t)) * c[k];
  return es.eigenvectors() * phased;
}

Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
  const double nrm = a.norm();
  int squarings = 0;
  Eigen::MatrixXcd scaled = a;
  while (scaled.norm() > 0.25) {
    scaled *= 0.5;
    ++squarings;
    if (squarings > 60) throw std::runtime_error("expm_taylor: matrix norm too large");
  }
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd term = result;
  for (int k = 1; k <= 30; ++k) {
    term = (term * scaled) / double(k);
    result += term;
    if (term.norm() < 1e-18 * (1.0 + nrm)) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

std::pair<double, Eigen::VectorXcd> ground_state_dense(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

}  // namespace oracle
