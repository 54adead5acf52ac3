#include "urbm/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace urbm {

LatticeSpec LatticeSpec::chain(int n, Boundary bc) {
  if (n < 1) throw std::invalid_argument("chain: n >= 1 required");
  if (bc == Boundary::Periodic && n < 3)
    throw std::invalid_argument("chain: periodic wrap needs n >= 3 (n = 2 would duplicate the bond)");
  LatticeSpec s;
  s.kind = Kind::Chain;
  s.boundary = bc;
  s.n = n;
  return s;
}

LatticeSpec LatticeSpec::triangular(int lx, int ly) {
  if (lx < 2 || ly < 2) throw std::invalid_argument("triangular: lx, ly >= 2 required (smaller wraps self-loop)");
  LatticeSpec s;
  s.kind = Kind::Triangular;
  s.boundary = Boundary::Periodic;
  s.lx = lx;
  s.ly = ly;
  s.n = lx * ly;
  return s;
}

std::size_t LatticeSpec::raw_bond_count() const {
  if (kind == Kind::Chain) return boundary == Boundary::Periodic ? std::size_t(n) : std::size_t(n - 1);
  return std::size_t(n) * 3;  // three bond directions per site before deduplication
}

std::vector<std::pair<int, int>> LatticeSpec::bonds() const {
  std::set<std::pair<int, int>> uniq;
  if (kind == Kind::Chain) {
    for (int i = 0; i + 1 < n; ++i) uniq.insert({i, i + 1});
    if (boundary == Boundary::Periodic) uniq.insert({0, n - 1});
  } else {
    const int offsets[3][2] = {{1, 0}, {0, 1}, {1, 1}};
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x)
        for (const auto& d : offsets) {
          const int a = y * lx + x;
          const int b = ((y + d[1]) % ly) * lx + (x + d[0]) % lx;
          if (a == b) throw std::invalid_argument("triangular: geometry yields self-loop bond");
          uniq.insert({std::min(a, b), std::max(a, b)});
        }
  }
  return {uniq.begin(), uniq.end()};
}

std::vector<std::vector<int>> LatticeSpec::neighbor_lists() const {
  std::vector<std::vector<int>> nbr(n);
  for (const auto& [a, b] : bonds()) {
    nbr[a].push_back(b);
    nbr[b].push_back(a);
  }
  return nbr;
}

std::string LatticeSpec::bonds_json() const {
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (const auto& [a, b] : bonds()) {
    if (!first) os << ",";
    os << "[" << a << "," << b << "]";
    first = false;
  }
  os << "]";
  return os.str();
}

SparseHamiltonian build_tfi_lattice(const LatticeSpec& lattice, double h, double zz_coupling) {
  std::vector<PauliTerm> terms;
  for (int i = 0; i < lattice.n; ++i) terms.push_back({Complex(-h, 0.0), {{i, Axis::X}}});
  for (const auto& [a, b] : lattice.bonds())
    terms.push_back({Complex(zz_coupling, 0.0), {{a, Axis::Z}, {b, Axis::Z}}});
  return SparseHamiltonian(lattice.n, std::move(terms));
}

SparseHamiltonian build_tfi(int n, double h, Boundary bc) {
  return build_tfi_lattice(LatticeSpec::chain(n, bc), h, -1.0);
}

SparseHamiltonian build_tafi_2d(int lx, int ly, double h) {
  return build_tfi_lattice(LatticeSpec::triangular(lx, ly), h, +1.0);
}

SparseHamiltonian build_heisenberg(int n, double jz, double hz, Boundary bc) {
  if (n < 2) throw std::invalid_argument("build_heisenberg: n >= 2 required");
  const LatticeSpec lattice = LatticeSpec::chain(n, bc);
  std::vector<PauliTerm> terms;
  for (int i = 0; i < n; ++i) terms.push_back({Complex(-hz, 0.0), {{i, Axis::Z}}});
  for (const auto& [a, b] : lattice.bonds()) {
    terms.push_back({Complex(jz, 0.0), {{a, Axis::Z}, {b, Axis::Z}}});
    terms.push_back({Complex(1.0, 0.0), {{a, Axis::X}, {b, Axis::X}}});
    terms.push_back({Complex(1.0, 0.0), {{a, Axis::Y}, {b, Axis::Y}}});
  }
  return SparseHamiltonian(n, std::move(terms));
}

double classical_tafi_energy(const BasisConfig& config, const LatticeSpec& lattice) {
  if (config.n != lattice.n) throw std::invalid_argument("classical_tafi_energy: size mismatch");
  double e = 0.0;
  for (const auto& [a, b] : lattice.bonds()) e += config.z(a) * config.z(b);
  return e;
}

LindbladSpec build_lindblad_raising(int n, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("build_lindblad_raising: gamma >= 0 required");
  LindbladSpec spec;
  spec.gamma = gamma;
  const double amp = 0.5 * std::sqrt(gamma);
  for (int k = 0; k < n; ++k) {
    spec.sites.push_back(k);
    // sqrt(gamma) |1><0|_k = sqrt(gamma) (X_k - i Y_k) / 2
    spec.ops.emplace_back(n, std::vector<PauliTerm>{
                                 {Complex(amp, 0.0), {{k, Axis::X}}},
                                 {Complex(0.0, -amp), {{k, Axis::Y}}},
                             });
  }
  return spec;
}

}  // namespace urbm
