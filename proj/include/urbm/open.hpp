#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "urbm/integrator.hpp"
#include "urbm/models.hpp"

namespace urbm {

// Drift generator of the unravelled master equation. The anti-hermitian decay
// part collects -i/2 * L_k^dag L_k over all channels; `total` is what the
// deterministic segment between jumps evolves under.
struct EffectiveHamiltonian {
  SparseHamiltonian hermitian_part;
  SparseHamiltonian decay_part;
  SparseHamiltonian total;
};

EffectiveHamiltonian effective_hamiltonian(const SparseHamiltonian& h, const LindbladSpec& lind);

// First-order jump probabilities p_k = <L_k^dag L_k> * dt for a normalized
// snapshot of the state. Tiny negative round-off is clipped to zero; if the
// probabilities sum to 0.1 or more the step size is too coarse for the
// one-jump-per-step sampling and a warning is printed to stderr.
std::vector<double> jump_probabilities(const StateVector& psi, const LindbladSpec& lind,
                                       double dt);
std::vector<double> jump_probabilities(const RbmParams& p, const LindbladSpec& lind, double dt);

// Collapse psi -> L psi / ||L psi||. Throws if the channel annihilates psi.
StateVector apply_jump_exact(const StateVector& psi, const SparseHamiltonian& op);

// Knobs for realizing one raising-operator collapse inside the ansatz: a
// resonant half-period rotation that exchanges the target site's basis states,
// followed by imaginary-time projection that drains the residual weight left
// in the wrong level. Both segments reuse the deterministic stepper.
struct JumpConfig {
  double dt = 5e-4;     // real-time step during the rotation segment
  double tau = 20.0;    // projection duration
  double dtau = 1e-2;   // projection step
  Regularization reg;
  AssemblyStrategy strategy = AssemblyStrategy::Auto;
  bool allow_kernel = true;
};

// Variational surrogate for the collapse under L = sqrt(gamma) |1><0|_site.
RbmParams apply_jump_variational(const RbmParams& p, int site, const JumpConfig& cfg);

struct JumpEvent {
  double time = 0.0;
  int site = -1;
};

struct TrajectoryConfig {
  double t_max = 2.0;
  double dt = 5e-4;
  int record_every = 20;
  JumpConfig jump;
  Regularization reg;
  AssemblyStrategy strategy = AssemblyStrategy::Auto;
  bool allow_kernel = true;
};

// Named hermitian observables recorded along a trajectory.
using ObservableSet = std::vector<std::pair<std::string, SparseHamiltonian>>;

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<JumpEvent> jumps;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> observables;
};

// One unravelled trajectory in the ansatz. Each step draws a single uniform
// variate; with probability sum_k p_k the drift step is replaced by a collapse
// on the selected channel. Observables are recorded before the step at every
// `record_every`-th grid point and again at t_max.
TrajectoryRecord run_trajectory(const RbmParams& p0, const SparseHamiltonian& h,
                                const LindbladSpec& lind, const ObservableSet& obs,
                                const TrajectoryConfig& cfg, std::uint64_t seed);

// Reference trajectory engine on the full state vector (RK4 drift under the
// effective generator with renormalization, exact collapses). Identical jump
// sampling scheme, so matched seeds see the same decision sequence only as
// long as the two engines agree; it is meant for ensemble-level comparison.
TrajectoryRecord run_trajectory_exact(const StateVector& psi0, const SparseHamiltonian& h,
                                      const LindbladSpec& lind, const ObservableSet& obs,
                                      const TrajectoryConfig& cfg, std::uint64_t seed);

// Trajectory i of n uses seed seed_base + i; the result is independent of the
// worker count (any partition of a fixed seeded workload).
std::vector<TrajectoryRecord> run_ensemble(const RbmParams& p0, const SparseHamiltonian& h,
                                           const LindbladSpec& lind, const ObservableSet& obs,
                                           const TrajectoryConfig& cfg, int n_traj,
                                           std::uint64_t seed_base, int workers = 1);
std::vector<TrajectoryRecord> run_ensemble_exact(const StateVector& psi0,
                                                 const SparseHamiltonian& h,
                                                 const LindbladSpec& lind,
                                                 const ObservableSet& obs,
                                                 const TrajectoryConfig& cfg, int n_traj,
                                                 std::uint64_t seed_base, int workers = 1);

struct EnsembleResult {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> mean;
  std::map<std::string, std::vector<double>> std_error;  // named to dodge the stderr macro
  int n_traj = 0;
  bool stderr_defined = true;  // false for a single trajectory
};

// Pointwise mean and standard error of the mean (sample std with n-1, over
// sqrt(n)) across trajectories sharing one recording grid.
EnsembleResult average_ensemble(const std::vector<TrajectoryRecord>& records);

struct LindbladResult {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> rho;
  double max_trace_drift = 0.0;
  double max_hermiticity_violation = 0.0;
  double min_eigenvalue = 0.0;
};

// Deterministic master-equation reference: classical RK4 on the dense density
// matrix. Aborts if the trace drifts by more than 1e-6; hermiticity and the
// smallest eigenvalue are monitored at the recorded points.
LindbladResult lindblad_oracle(const Eigen::MatrixXcd& rho0, const SparseHamiltonian& h,
                               const LindbladSpec& lind, double t_max, double dt,
                               int record_every = 20);

}  // namespace urbm
