#pragma once

#include <Eigen/Dense>
#include <optional>

#include "urbm/linear_system.hpp"
#include "urbm/pauli.hpp"
#include "urbm/rbm.hpp"

namespace urbm {

// How the exact (full-enumeration) linear system is assembled.
//   Dense:     materialize the per-configuration derivative matrix, weighted
//              Gram products via rank updates. Reference implementation.
//   Transform: Walsh-transform assembly that never materializes the
//              derivative matrix; reads every A/f entry off transform
//              coefficients of hidden-pair products. Much faster once
//              2^N * N_var grows large. Restricted parameters only.
enum class AssemblyStrategy { Auto, Dense, Transform };

// In-place fast Walsh-Hadamard transform over n_bits variables,
// a(S) <- sum_z a(z) (-1)^{popcount(S & z)} (unnormalized).
void walsh_transform(Eigen::VectorXcd& a, int n_bits);
void walsh_transform(Eigen::VectorXd& a, int n_bits);

// Derivative values O_n(z) for every configuration (rows) and parameter
// (columns, flattened order), read off the enumeration tables.
Eigen::MatrixXcd derivative_matrix(const RbmParams& p, const AmplitudeTable& tab);

// Assembles A, f, energy from per-configuration derivative values, weights
// summing to one, and the weighted local energies q_z (= w_z E_loc(z); the
// exact path passes conj(psi) (H psi) so configurations of zero weight never
// divide by zero).
TvmcLinearSystem assemble_from_values(const Eigen::MatrixXcd& o, const Eigen::VectorXd& weight,
                                      const Eigen::VectorXcd& weighted_eloc);

// Exact linear system by full enumeration of |psi|^2. Guarded at N <= 18.
TvmcLinearSystem build_system_exact(const RbmParams& p, const SparseHamiltonian& h,
                                    AssemblyStrategy strategy = AssemblyStrategy::Auto);

// <psi|op|psi> / <psi|psi> by full enumeration (N <= 18).
Complex variational_expectation(const RbmParams& p, const SparseHamiltonian& op);

// One solved step of the variational system computed entirely in sample
// space (Woodbury identity on the 2 * 2^N dimensional weighted-derivative
// Gram), profitable when the parameter count exceeds twice the number of
// configurations. Returns the solution of (A + ridge I) x = rhs where rhs is
// Im f (rhs_imag) or Re f, without ever materializing A.
struct KernelStepData {
  Eigen::VectorXd solution;
  Eigen::VectorXcd f;
  Complex energy;
};
// nullopt when not profitable or when conditioning guards trip; the caller
// falls back to the materialized route.
std::optional<KernelStepData> solve_kernel_exact(const RbmParams& p, const SparseHamiltonian& h,
                                                 bool rhs_imag, const Regularization& reg);

}  // namespace urbm
