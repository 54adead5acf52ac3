#pragma once

#include <vector>

#include "urbm/pauli.hpp"
#include "urbm/statevector.hpp"

namespace urbm {

struct PropagationResult {
  std::vector<double> times;        // includes t = 0
  std::vector<StateVector> states;  // recorded every `record_every` steps
  double max_norm_drift{0.0};       // max | ||psi|| - 1 | before renormalization
};

// Fixed-step RK4 integration of i d/dt psi = H psi with per-step
// renormalization. Requires hermitian H and dt <= 0.01.
PropagationResult propagate_exact(const SparseHamiltonian& h, const StateVector& psi0,
                                  double t_max, double dt, int record_every = 1);

// Dense eigendecomposition propagator, kept as a cross-check path (n <= 10).
StateVector propagate_eig(const SparseHamiltonian& h, const StateVector& psi0, double t);

}  // namespace urbm
