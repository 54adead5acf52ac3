#include <doctest.h>

#include <random>

#include "support/dense_oracle.hpp"
#include "urbm/models.hpp"
#include "urbm/propagate.hpp"

using namespace urbm;

namespace {

// Random Pauli-sum on n sites: `nterms` products of up to `maxlen` factors.
SparseHamiltonian random_pauli_sum(int n, int nterms, int maxlen, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> site(0, n - 1), len(1, maxlen), ax(0, 2);
  std::normal_distribution<double> coeff(0.0, 1.0);
  std::vector<PauliTerm> terms;
  for (int t = 0; t < nterms; ++t) {
    PauliTerm term;
    term.coeff = Complex(coeff(rng), coeff(rng));
    const int l = len(rng);
    std::vector<int> sites;
    while (int(sites.size()) < l) {
      const int s = site(rng);
      bool dup = false;
      for (int q : sites) dup |= (q == s);
      if (!dup) sites.push_back(s);
    }
    for (int s : sites) {
      const int a = ax(rng);
      term.ops.emplace_back(s, a == 0 ? Axis::X : (a == 1 ? Axis::Y : Axis::Z));
    }
    terms.push_back(term);
  }
  return SparseHamiltonian(n, terms);
}

}  // namespace

TEST_SUITE("spinstate") {

TEST_CASE("basis config bit and eigenvalue convention") {
  const BasisConfig c(0b001u, 3);  // site 0 occupied
  CHECK(c.bit(0) == 1);
  CHECK(c.bit(1) == 0);
  CHECK(c.z(0) == -1);
  CHECK(c.z(1) == +1);
  CHECK(c.to_string() == "100");
  CHECK(BasisConfig::from_string("100").bits == 0b001u);
  CHECK(c.flipped(0).bits == 0u);
  CHECK_THROWS(BasisConfig(0b100u, 2));
}

TEST_CASE("statevector normalization and errors") {
  StateVector s = StateVector::plus(3);
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  StateVector z(2);
  CHECK_THROWS(z.normalize());
  CHECK(StateVector::basis_state(BasisConfig(2, 2)).amp[2] == Complex(1.0, 0.0));
}

TEST_CASE("single-site pauli matrices match the textbook forms") {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const SparseHamiltonian op(1, {{Complex(1, 0), {{0, a}}}});
    CHECK((op.dense() - oracle::axis_matrix(a)).norm() < 1e-15);
  }
}

TEST_CASE("apply matches the frozen TFI example") {
  // TFI(3, h=1, periodic) applied to |000>: -3|000> - |100> - |010> - |001>.
  const SparseHamiltonian h = build_tfi(3, 1.0, Boundary::Periodic);
  const StateVector psi = StateVector::basis_state(BasisConfig(0, 3));
  const StateVector out = h.apply(psi);
  CHECK(out.amp[0b000] == Complex(-3.0, 0.0));
  CHECK(out.amp[0b001] == Complex(-1.0, 0.0));
  CHECK(out.amp[0b010] == Complex(-1.0, 0.0));
  CHECK(out.amp[0b100] == Complex(-1.0, 0.0));
  for (int s : {3, 5, 6, 7}) CHECK(out.amp[s] == Complex(0.0, 0.0));
}

TEST_CASE("connected states: frozen example, merging, count bound") {
  const SparseHamiltonian h = build_tfi(3, 1.0, Boundary::Periodic);
  const auto conn = h.connected(BasisConfig(0, 3));
  REQUIRE(conn.size() == 4);
  CHECK(conn[0].first.bits == 0u);
  CHECK(conn[0].second == Complex(-3.0, 0.0));
  for (int k = 1; k < 4; ++k) CHECK(conn[k].second == Complex(-1.0, 0.0));
  CHECK(conn.size() <= 1 + h.offdiagonal_group_count());

  // Duplicate off-diagonal entries must merge: two equal X_0 terms.
  const SparseHamiltonian dup(2, {{Complex(0.5, 0), {{0, Axis::X}}}, {Complex(0.25, 0), {{0, Axis::X}}}});
  const auto cd = dup.connected(BasisConfig(0, 2));
  REQUIRE(cd.size() == 1);
  CHECK(cd[0].second == Complex(0.75, 0.0));
}

TEST_CASE("connected states reassemble the dense column") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseHamiltonian h = random_pauli_sum(4, 6, 3, rng);
    const Eigen::MatrixXcd hd = oracle::dense_from_terms(4, h.terms());
    for (std::uint32_t s = 0; s < 16; ++s) {
      Eigen::VectorXcd col = Eigen::VectorXcd::Zero(16);
      for (const auto& [cfg, elem] : h.connected(BasisConfig(s, 4))) col[cfg.bits] = elem;
      CHECK((col - hd.col(s)).norm() < 1e-12);
    }
  }
}

TEST_CASE("expectation value of the frozen two-site example") {
  const SparseHamiltonian h = build_tfi(2, 0.5, Boundary::Open);
  const StateVector psi = StateVector::basis_state(BasisConfig(0, 2));
  CHECK(std::abs(h.expectation(psi) - Complex(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("dense realization matches the kronecker oracle on random sums") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const SparseHamiltonian h = random_pauli_sum(5, 8, 4, rng);
    CHECK((h.dense() - oracle::dense_from_terms(5, h.terms())).norm() < 1e-11);
  }
}

TEST_CASE("apply agrees with dense matrix-vector product") {
  std::mt19937_64 rng(13);
  const SparseHamiltonian h = random_pauli_sum(5, 10, 3, rng);
  const Eigen::MatrixXcd hd = oracle::dense_from_terms(5, h.terms());
  std::normal_distribution<double> g(0.0, 1.0);
  StateVector psi(5);
  for (int i = 0; i < 32; ++i) psi.amp[i] = Complex(g(rng), g(rng));
  CHECK((h.apply(psi).amp - hd * psi.amp).norm() < 1e-12 * hd.norm());
}

TEST_CASE("pauli algebra: dagger, product, scaling against dense") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseHamiltonian a = random_pauli_sum(3, 5, 3, rng);
    const SparseHamiltonian b = random_pauli_sum(3, 5, 3, rng);
    const Eigen::MatrixXcd ad = oracle::dense_from_terms(3, a.terms());
    const Eigen::MatrixXcd bd = oracle::dense_from_terms(3, b.terms());
    CHECK((oracle::dense_from_terms(3, a.dagger().terms()) - ad.adjoint()).norm() < 1e-11);
    CHECK((oracle::dense_from_terms(3, (a * b).terms()) - ad * bd).norm() < 1e-10);
    CHECK((oracle::dense_from_terms(3, (a + b).terms()) - (ad + bd)).norm() < 1e-11);
    CHECK((oracle::dense_from_terms(3, a.scaled(Complex(0, 2)).terms()) - Complex(0, 2) * ad).norm() < 1e-11);
  }
}

TEST_CASE("hermiticity flag is computed, not declared") {
  CHECK(build_tfi(4, 0.7, Boundary::Periodic).hermitian());
  CHECK(build_heisenberg(4, 0.5, 1.0, Boundary::Open).hermitian());
  const auto lind = build_lindblad_raising(2, 0.05);
  CHECK(!lind.ops[0].hermitian());
  // Dense cross-check on a random hermitian model, N = 6.
  const auto h6 = build_heisenberg(6, 0.3, 0.9, Boundary::Periodic);
  const Eigen::MatrixXcd hd = h6.dense();
  CHECK((hd - hd.adjoint()).norm() < 1e-12);
}

TEST_CASE("rk4 propagation matches the eigendecomposition oracle at t = 1") {
  for (int n : {2, 3, 4}) {
    const SparseHamiltonian h = build_tfi(n, 1.3, Boundary::Open);
    StateVector psi0 = StateVector::plus(n);
    psi0.amp[0] += 0.2;  // break symmetry
    psi0.normalize();
    const auto res = propagate_exact(h, psi0, 1.0, 0.001);
    const Eigen::VectorXcd ref = oracle::evolve_dense(h.dense(), psi0.amp, 1.0);
    CHECK((res.states.back().amp - ref).norm() < 1e-8);
  }
}

TEST_CASE("rk4 norm drift stays below 1e-10 per step at dt = 5e-4") {
  const SparseHamiltonian h = build_tfi(4, 1.0, Boundary::Periodic);
  const auto res = propagate_exact(h, StateVector::plus(4), 0.05, 0.0005, 100);
  CHECK(res.max_norm_drift < 1e-10);
}

TEST_CASE("energy is conserved to 1e-6 over t = 2") {
  const SparseHamiltonian h = build_tfi(4, 1.0, Boundary::Periodic);
  StateVector psi0 = StateVector::basis_state(BasisConfig(0b0101, 4));
  const auto res = propagate_exact(h, psi0, 2.0, 0.0005, 400);
  const double e0 = h.expectation(res.states.front()).real();
  for (const auto& s : res.states)
    CHECK(std::abs(h.expectation(s).real() - e0) < 1e-6);
}

TEST_CASE("propagators cross-check: rk4 vs dense path on N = 6") {
  const SparseHamiltonian h = build_heisenberg(6, 0.5, 1.0, Boundary::Periodic);
  StateVector psi0 = StateVector::plus(6);
  const auto rk = propagate_exact(h, psi0, 0.5, 0.001);
  const StateVector eig = propagate_eig(h, psi0, 0.5);
  CHECK(fidelity(rk.states.back(), eig) > 1.0 - 1e-12);
}

TEST_CASE("propagate_exact input validation") {
  const SparseHamiltonian h = build_tfi(2, 1.0, Boundary::Open);
  const auto lind = build_lindblad_raising(2, 0.1);
  CHECK_THROWS(propagate_exact(lind.ops[0], StateVector::plus(2), 1.0, 0.001));
  CHECK_THROWS(propagate_exact(h, StateVector::plus(2), 1.0, 0.02));
  CHECK_THROWS(propagate_exact(h, StateVector::plus(2), -1.0, 0.001));
}

}  // TEST_SUITE
