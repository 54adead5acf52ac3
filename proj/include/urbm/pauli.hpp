#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "urbm/basis.hpp"
#include "urbm/statevector.hpp"

namespace urbm {

enum class Axis : char { X = 'X', Y = 'Y', Z = 'Z' };

// One product of single-site Pauli operators with a complex prefactor.
// `ops` holds (site, axis) pairs with distinct sites.
struct PauliTerm {
  Complex coeff{1.0, 0.0};
  std::vector<std::pair<int, Axis>> ops;
};

// Sum of Pauli products on n sites. Terms are compiled to the canonical form
// c * X(x_mask) Z(z_mask) with X(x)Z(z)|s> = (-1)^{popcount(z & s)} |s ^ x>,
// where c absorbs the i^{n_Y} phase from sigma_y = i * sigma_x * sigma_z.
// Terms with equal masks are merged at construction.
class SparseHamiltonian {
 public:
  SparseHamiltonian() = default;
  SparseHamiltonian(int n, std::vector<PauliTerm> terms);

  int n() const { return n_; }
  bool hermitian() const { return hermitian_; }
  std::size_t term_count() const { return masks_.size(); }
  // Distinct nonzero flip masks = number of off-diagonal connection groups.
  std::size_t offdiagonal_group_count() const;
  std::vector<PauliTerm> terms() const;

  StateVector apply(const StateVector& psi) const;
  Complex expectation(const StateVector& psi) const;

  // Nonzero matrix elements <z'|H|z> for fixed z, duplicates merged,
  // ordered by flip mask (diagonal element first when nonzero).
  std::vector<std::pair<BasisConfig, Complex>> connected(const BasisConfig& z) const;

  Eigen::MatrixXcd dense() const;  // guarded at n <= 14

  SparseHamiltonian dagger() const;
  SparseHamiltonian scaled(Complex factor) const;
  friend SparseHamiltonian operator+(const SparseHamiltonian& a, const SparseHamiltonian& b);
  friend SparseHamiltonian operator*(const SparseHamiltonian& a, const SparseHamiltonian& b);

  struct Mask {
    Complex c;
    std::uint32_t x{0};
    std::uint32_t z{0};
  };
  const std::vector<Mask>& masks() const { return masks_; }

 private:
  SparseHamiltonian(int n, std::vector<Mask> masks);
  void canonicalize();

  int n_{0};
  bool hermitian_{false};
  std::vector<Mask> masks_;
};

}  // namespace urbm
