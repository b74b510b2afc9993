#include <catch2/catch.hpp>

#include <random>

#include "spinvar/controllability.hpp"

using namespace spinvar;

namespace {

std::vector<PauliOp> dipolar_generators(int n) {
  const SpinConfiguration cfg = controllability_configuration(n);
  CouplingMatrix c = coupling_matrix(cfg);
  c.v /= c.v.cwiseAbs().maxCoeff();
  return {pauli::two_body(n, c.v, 3.0, -1.0), pauli::collective(n, Axis::X),
          pauli::collective(n, Axis::Y)};
}

}  // namespace

TEST_CASE("Pauli bracket agrees with dense matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 3;
  for (int trial = 0; trial < 4; ++trial) {
    PauliOp a = pauli::zero_op(n), b = pauli::zero_op(n);
    for (int k = 0; k < 5; ++k) {
      const auto ka = rng() % a.coeff.size(), kb = rng() % b.coeff.size();
      if (a.coeff[ka] == 0.0) a.nz.push_back(static_cast<std::uint32_t>(ka));
      if (b.coeff[kb] == 0.0) b.nz.push_back(static_cast<std::uint32_t>(kb));
      a.coeff[ka] += u(rng);
      b.coeff[kb] += u(rng);
    }
    const PauliOp r = pauli::bracket(a, b);
    const Eigen::MatrixXcd am = pauli::to_matrix(a), bm = pauli::to_matrix(b);
    const Eigen::MatrixXcd expected = -imag_unit * (am * bm - bm * am);
    REQUIRE((pauli::to_matrix(r) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("matrix round trip through the coefficient representation") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 3, 10.0);
  CouplingMatrix c = coupling_matrix(cfg);
  c.v /= c.v.cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd h = two_body_interaction_matrix(c, 3.0, -1.0);
  const PauliOp o = pauli::from_matrix(h);
  REQUIRE((pauli::to_matrix(o) - h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-qubit controls close to su(2)") {
  const auto closure =
      lie_closure(std::vector<PauliOp>{pauli::collective(1, Axis::X), pauli::collective(1, Axis::Y)});
  REQUIRE(closure.dimension == 3);
}

TEST_CASE("non-Hermitian generators are rejected") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 1) = 1.0;  // not Hermitian
  REQUIRE_THROWS_AS(lie_closure(std::vector<Eigen::MatrixXcd>{m}), std::invalid_argument);
}

TEST_CASE("closure dimension is independent of generator presentation") {
  const auto gens = dipolar_generators(2);
  const int dim = lie_closure(gens).dimension;

  SECTION("ordering") {
    std::vector<PauliOp> reordered = {gens[2], gens[0], gens[1]};
    REQUIRE(lie_closure(reordered).dimension == dim);
  }
  SECTION("invertible recombination") {
    std::vector<PauliOp> mixed = gens;
    // span-preserving mix: g0 + 2 g1, g1 - g2, g0 + g2
    for (Eigen::Index k = 0; k < mixed[0].coeff.size(); ++k) {
      const double a = gens[0].coeff[k], b = gens[1].coeff[k], c = gens[2].coeff[k];
      mixed[0].coeff[k] = a + 2.0 * b;
      mixed[1].coeff[k] = b - c;
      mixed[2].coeff[k] = a + c;
    }
    for (auto& m : mixed) m.rebuild_nz(0.0);
    REQUIRE(lie_closure(mixed).dimension == dim);
  }
}

TEST_CASE("closure basis is orthonormal, Hermitian-represented, and closed") {
  const auto closure = lie_closure(dipolar_generators(2));
  const auto& basis = closure.basis;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    REQUIRE(basis[i].norm() == Approx(1.0).margin(1e-12));
    // real coefficients on Hermitian strings: the matrix is Hermitian,
    // equivalently -i H is skew-Hermitian
    const Eigen::MatrixXcd m = pauli::to_matrix(basis[i]);
    REQUIRE(hermiticity_error(m) < 1e-12);
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      double dot = 0.0;
      for (auto k : basis[i].nz) dot += basis[i].coeff[k] * basis[j].coeff[k];
      REQUIRE(std::abs(dot) < 1e-10);
    }
  }
  // commutator closure: brackets of basis elements stay inside the span
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const auto& a = basis[rng() % basis.size()];
    const auto& b = basis[rng() % basis.size()];
    PauliOp k = pauli::bracket(a, b);
    for (const auto& o : basis) {
      double d = 0.0;
      for (auto idx : o.nz) d += o.coeff[idx] * k.coeff[idx];
      for (auto idx : o.nz) k.coeff[idx] -= d * o.coeff[idx];
    }
    k.rebuild_nz(0.0);
    REQUIRE(k.norm() < 1e-8);
  }
}

TEST_CASE("reference dimensions at desk size") {
  SECTION("dipolar drift with global controls") {
    REQUIRE(lie_closure(dipolar_generators(2)).dimension == 8);
    REQUIRE(lie_closure(dipolar_generators(3)).dimension == 38);
  }
  SECTION("symmetric Ising closures") {
    for (const auto& [n, expected] : std::vector<std::pair<int, int>>{{2, 9}, {3, 19}}) {
      Eigen::MatrixXd v = Eigen::MatrixXd::Ones(n, n);
      v.diagonal().setZero();
      const std::vector<PauliOp> gens = {pauli::two_body(n, v, 2.0, 0.0),
                                         pauli::collective(n, Axis::X),
                                         pauli::collective(n, Axis::Y)};
      REQUIRE(lie_closure(gens).dimension == expected);
    }
  }
}

TEST_CASE("controllability reports") {
  SECTION("two-spin dipolar: subspace but not completely controllable") {
    const auto rep = controllability_report(2, "dipolar-spin-half");
    REQUIRE(rep.dim == 8);
    REQUIRE(rep.dim_with_identity == 9);
    REQUIRE(rep.subspace_bound == 9);
    REQUIRE(rep.complete_su == 15);
    REQUIRE(rep.verdict == "subspace controllable but not completely controllable");
  }
  SECTION("three-spin symmetric Ising hits the permutation-invariant bound") {
    const auto rep = controllability_report(3, "symmetric-ising");
    REQUIRE(rep.dim == 19);
    REQUIRE(rep.subspace_bound == 19);
  }
  SECTION("single qubit with both controls is completely controllable") {
    const auto rep = controllability_report(1, "single-qubit");
    REQUIRE(rep.dim == 3);
    REQUIRE(rep.verdict == "completely controllable");
  }
  SECTION("size cap") {
    REQUIRE_THROWS_AS(controllability_report(6, "dipolar-spin-half"), std::invalid_argument);
  }
}

TEST_CASE("round budget surfaces as a lower bound") {
  LieClosureOptions opt;
  opt.max_rounds = 1;
  const auto closure = lie_closure(dipolar_generators(3), opt);
  REQUIRE(closure.budget_exhausted);
  REQUIRE(closure.dimension < 38);
  REQUIRE(closure.dimension >= 3);
}
