#pragma once

// Brute-force reference implementations used only by tests. Everything here
// is built from explicit Kronecker products of 2x2 matrices and dense linear
// algebra, independent of the mask-compiled operator machinery under test.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "urbm/pauli.hpp"
#include "urbm/statevector.hpp"

namespace oracle {

using urbm::Complex;

Eigen::Matrix2cd axis_matrix(urbm::Axis axis);

// Dense operator from a Pauli term list; site 0 is the least-significant bit,
// so the full matrix is M_{n-1} (x) ... (x) M_0.
Eigen::MatrixXcd dense_from_terms(int n, const std::vector<urbm::PauliTerm>& terms);

// exp(-i H t) psi0 via dense eigendecomposition (hermitian H).
Eigen::VectorXcd evolve_dense(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0, double t);

// exp(A) for a general dense matrix via scaling-and-squaring of the Taylor
// series; used for small non-hermitian checks.
Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a);

// Dense ground state and energy of a hermitian operator.
std::pair<double, Eigen::VectorXcd> ground_state_dense(const Eigen::MatrixXcd& h);

}  // namespace oracle
