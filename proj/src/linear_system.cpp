#include "urbm/linear_system.hpp"

#include <stdexcept>

namespace urbm {

Eigen::VectorXd solve_regularized(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                  const Regularization& reg, SolveDiagnostics* diag) {
  if (a.rows() != a.cols() || a.rows() != rhs.size())
    throw std::invalid_argument("solve_regularized: dimension mismatch");
  if (!a.allFinite() || !rhs.allFinite())
    throw std::invalid_argument("solve_regularized: non-finite entries");
  if (reg.ridge < 0.0) throw std::invalid_argument("solve_regularized: negative ridge");

  Eigen::MatrixXd reg_a = a;
  reg_a.diagonal().array() += reg.ridge;
  const Eigen::LLT<Eigen::MatrixXd> llt(reg_a);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd x = llt.solve(rhs);
    const double resid = (reg_a.selfadjointView<Eigen::Lower>() * x - rhs).norm();
    if (x.allFinite() && resid <= 1e-8 * std::max(rhs.norm(), 1e-300)) {
      if (diag) {
        diag->solver_path = "cholesky";
        const double pivot = llt.matrixLLT().diagonal().minCoeff();
        diag->min_eigenvalue_estimate = pivot * pivot - reg.ridge;
      }
      return x;
    }
  }

  // Pseudo-inverse of the unshifted matrix, dropping the near-null space.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("solve_regularized: eigendecomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double lam_max = lam.cwiseAbs().maxCoeff();
  const double cut = reg.svd_cutoff * lam_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    if (lam[k] > cut && lam[k] > 0.0) inv[k] = 1.0 / lam[k];
  const Eigen::VectorXd x =
      eig.eigenvectors() * inv.asDiagonal() * (eig.eigenvectors().transpose() * rhs);
  if (diag) {
    diag->solver_path = "eigen_fallback";
    diag->min_eigenvalue_estimate = lam.minCoeff();
  }
  return x;
}

TvmcLinearSystem inject_noise(TvmcLinearSystem sys, const NoiseConfig& noise,
                              std::mt19937_64& rng) {
  if (noise.delta < 0.0) throw std::invalid_argument("inject_noise: negative delta");
  if (noise.delta == 0.0) return sys;
  std::normal_distribution<double> dist(0.0, noise.delta);
  const Eigen::Index n = sys.a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double d = dist(rng);
      sys.a(i, j) += d;
      if (j != i) sys.a(j, i) += d;
    }
  for (Eigen::Index k = 0; k < sys.f.size(); ++k)
    sys.f[k] += Complex(dist(rng), dist(rng));
  return sys;
}

}  // namespace urbm
