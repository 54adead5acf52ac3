#pragma once

#include <string>
#include <utility>
#include <vector>

#include "urbm/pauli.hpp"

namespace urbm {

enum class Boundary { Open, Periodic };

// Chain or periodic triangular-lattice geometry. Triangular sites are indexed
// row-major, site = y * lx + x, with bond offsets (+1,0), (0,+1), (+1,+1).
struct LatticeSpec {
  enum class Kind { Chain, Triangular };
  Kind kind{Kind::Chain};
  Boundary boundary{Boundary::Open};
  int n{0};
  int lx{0}, ly{0};

  static LatticeSpec chain(int n, Boundary bc);
  static LatticeSpec triangular(int lx, int ly);

  std::vector<std::pair<int, int>> bonds() const;  // deduplicated unordered pairs
  std::size_t raw_bond_count() const;              // before deduplication
  std::vector<std::vector<int>> neighbor_lists() const;
  std::string bonds_json() const;  // JSON array of [i, j] pairs
};

// H = -h * sum_i sigma^x_i - sum_<ij> sigma^z_i sigma^z_j on a chain.
SparseHamiltonian build_tfi(int n, double h, Boundary bc);

// H = -h_z * sum_i sigma^z_i + sum_<ij> (J_z zz + xx + yy) on a chain.
SparseHamiltonian build_heisenberg(int n, double jz, double hz, Boundary bc);

// Antiferromagnetic transverse-field Ising on the periodic triangular lattice:
// H = -h * sum_i sigma^x_i + sum_<ij> sigma^z_i sigma^z_j.
SparseHamiltonian build_tafi_2d(int lx, int ly, double h);
SparseHamiltonian build_tfi_lattice(const LatticeSpec& lattice, double h, double zz_coupling);

// Classical Ising energy E = sum_<ij> z_i z_j over the deduplicated bonds.
double classical_tafi_energy(const BasisConfig& config, const LatticeSpec& lattice);

// Local raising jump operators L_k = sqrt(gamma) |1><0|_k on every site.
struct LindbladSpec {
  double gamma{0.0};
  std::vector<int> sites;
  std::vector<SparseHamiltonian> ops;
};
LindbladSpec build_lindblad_raising(int n, double gamma);

}  // namespace urbm
