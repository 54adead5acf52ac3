#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "urbm/statevector.hpp"

namespace urbm {

// Variational linear system: covariance matrix A, force vector f and the
// energy expectation, all taken in the flattened-parameter basis.
//   A_nm = Re<O_n^dag O_m> - Re<O_n> Re<O_m>
//   f_m  = <O_m^dag H>     - Re<O_m> <H>
struct TvmcLinearSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXcd f;
  Complex energy{0.0, 0.0};
};

struct Regularization {
  double ridge = 1e-6;       // epsilon added to the diagonal before factorizing
  double svd_cutoff = 1e-8;  // relative eigenvalue cutoff of the fallback pseudo-inverse
};

struct SolveDiagnostics {
  std::string solver_path;                // "cholesky" | "eigen_fallback" | "kernel"
  double min_eigenvalue_estimate = 0.0;   // smallest pivot (cholesky) or eigenvalue (fallback)
};

// Solves (A + ridge I) x = rhs by Cholesky factorization; if the
// factorization fails or leaves a residual above 1e-8 |rhs|, falls back to an
// eigendecomposition pseudo-inverse of A that discards eigenvalues below
// svd_cutoff * lambda_max.
Eigen::VectorXd solve_regularized(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                  const Regularization& reg, SolveDiagnostics* diag = nullptr);

struct NoiseConfig {
  double delta = 0.0;  // standard deviation per perturbed real component
};

// Adds i.i.d. N(0, delta^2) draws to the upper triangle of A (mirrored to
// keep it exactly symmetric) and to the real and imaginary part of every f
// entry, modelling measurement noise on the assembled system.
TvmcLinearSystem inject_noise(TvmcLinearSystem sys, const NoiseConfig& noise,
                              std::mt19937_64& rng);

}  // namespace urbm
