#pragma once

#include <Eigen/Dense>
#include <vector>

#include "urbm/rbm.hpp"
#include "urbm/statevector.hpp"

namespace urbm {

// Ancilla preparation gate: unitary G with
//   G|0> = e^{bias Z}|+> / c,   c = sqrt(cosh(2 Re bias)),
// realized as Rz(rz_angle) * Ry(ry_angle).
struct RotationGate {
  Eigen::Matrix2cd u;
  double c;
  double ry_angle;
  double rz_angle;
};
RotationGate rotation_gate(Complex bias);

// Diagonal of exp(i sum_i W^I_i z_i h) over N visible sites plus one hidden
// site occupying the top bit; entries indexed by the (N+1)-bit configuration.
// Couplings must be purely imaginary (restricted-parameter circuit).
Eigen::VectorXcd entangler_diagonal(const Eigen::VectorXcd& w_column);

// Result of the sequential single-ancilla preparation circuit.
struct PreparationReport {
  StateVector state;                     // visible state after all projections
  Eigen::VectorXd ancilla_success_probs; // one |+>-projection probability per hidden unit
  double total_success;                  // product of the projection probabilities
};

// Emulates the (N+1)-qubit preparation: visible biases as diagonal scaling of
// |+>^N, then per hidden unit j: ancilla prep via rotation_gate(m_j),
// entangling phases for coupling column j, projection of the ancilla onto
// |+> (recording the success probability), renormalization, ancilla reset.
PreparationReport prepare_recycled(const RbmParams& p);

// Probabilistic two-qubit block for a real coupling: rotation angles of the
// controlled gates, the post-selected diagonal kernel (proportional to
// e^{w Z (x) Z}), and the heralding probability for a |++> input.
struct RealCouplingScheme {
  double theta1;
  double theta2;
  Eigen::Matrix4cd kernel;
  double success_prob;
};
RealCouplingScheme realw_coupling(double w_real);

// Expansion of the state over hidden-unit sign assignments: 2^M terms of
// (weight, normalized component state) whose weighted sum reconstructs
// build_statevector(p). Term index sets bit j when hidden unit j takes the
// sinh/sin branch. Guarded at M <= 12; restricted (imaginary-coupling)
// parameters only.
struct EnsembleTerm {
  Complex weight;
  StateVector state;
};
std::vector<EnsembleTerm> ensemble_decompose(const RbmParams& p);

}  // namespace urbm
