#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <random>

#include "spinvar/ensemble.hpp"
#include "spinvar/linalg.hpp"

using namespace spinvar;

TEST_CASE("chain of two spins at 10 nm spacing") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 2, 10.0);
  REQUIRE(cfg.positions[0].isApprox(Eigen::Vector3d(0, 0, 0)));
  REQUIRE(cfg.positions[1].isApprox(Eigen::Vector3d(10, 0, 0)));
}

TEST_CASE("square lattice fill order") {
  const double a = 7.0;
  const auto cfg = generate_configuration(ConfigKind::SquareLattice, 9, a);
  // n = 4 prefix is the 2x2 square with side a
  REQUIRE(cfg.positions[0].isApprox(Eigen::Vector3d(0, 0, 0)));
  REQUIRE(cfg.positions[1].isApprox(Eigen::Vector3d(a, 0, 0)));
  REQUIRE(cfg.positions[2].isApprox(Eigen::Vector3d(0, a, 0)));
  REQUIRE(cfg.positions[3].isApprox(Eigen::Vector3d(a, a, 0)));
  // spin 4 (1-based) sits at distance a from spins 2, 3, 6, 8 and sqrt(2) a
  // from the later additions 5, 7, 9
  const Eigen::Vector3d p4 = cfg.positions[3];
  for (int i : {1, 2, 5, 7}) REQUIRE((cfg.positions[i] - p4).norm() == Approx(a));
  for (int i : {4, 6, 8}) REQUIRE((cfg.positions[i] - p4).norm() == Approx(std::sqrt(2.0) * a));
}

TEST_CASE("seeded random-3d draws are deterministic and respect the density box") {
  const auto a = generate_configuration(ConfigKind::Random3d, 8, 10.0, 7);
  const auto b = generate_configuration(ConfigKind::Random3d, 8, 10.0, 7);
  for (int i = 0; i < 8; ++i) REQUIRE(a.positions[i] == b.positions[i]);
  const double box = 10.0 * std::cbrt(8.0);
  for (const auto& p : a.positions) {
    REQUIRE(p.minCoeff() >= 0.0);
    REQUIRE(p.maxCoeff() <= box);
  }
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      REQUIRE((a.positions[i] - a.positions[j]).norm() >= 0.05 * 10.0);
}

TEST_CASE("configuration validation") {
  REQUIRE_THROWS_AS(generate_configuration(ConfigKind::Chain, 0, 1.0), std::invalid_argument);
  SpinConfiguration bad = generate_configuration(ConfigKind::Chain, 2, 1.0);
  bad.positions[1] = bad.positions[0];
  REQUIRE_THROWS_AS(coupling_matrix(bad), std::invalid_argument);
}

TEST_CASE("magic angle zeroes the coupling") {
  SpinConfiguration cfg;
  cfg.positions = {{0, 0, 0}, {std::sqrt(2.0), 0, 1.0}};  // cos^2 beta = 1/3
  cfg.gamma = {constants::gamma_nv, constants::gamma_nv};
  const auto c = coupling_matrix(cfg);
  REQUIRE(std::abs(c.v(0, 1)) < 1e-12 * constants::gamma_nv);
}

TEST_CASE("coupling matrix is symmetric and matches the dimensional-analysis oracle") {
  SpinConfiguration cfg;
  cfg.positions = {{0, 0, 0}, {0, 0, 10.0}};  // along the field axis, beta = 0
  cfg.gamma = {constants::gamma_nv, constants::gamma_nv};
  const auto c = coupling_matrix(cfg);
  REQUIRE(c.v(0, 1) == c.v(1, 0));
  // independent recomputation from CODATA values
  const double mu0 = 1.25663706212e-6, hbar = 1.054571817e-34;
  const double gamma = 2.0 * M_PI * 28.03e9;
  const double r = 10e-9;
  const double expected = mu0 / (4.0 * M_PI) * gamma * gamma * hbar / (r * r * r) * (1.0 - 3.0) / 2.0;
  REQUIRE(c.v(0, 1) == Approx(expected).epsilon(1e-12));
  // the f-convention magnitude at 10 nm is the familiar ~52 kHz
  REQUIRE(std::abs(c.v(0, 1)) / constants::two_pi == Approx(52.06e3).epsilon(2e-3));
}

TEST_CASE("literal angular factor differs from the secular one away from beta = 0") {
  // r = pos_i - pos_j with i < j points along -z here, so cos beta = -1 and
  // the literal factor (1 - 3 cos beta) flips sign against the secular one
  SpinConfiguration cfg;
  cfg.positions = {{0, 0, 0}, {0, 0, 10.0}};
  cfg.gamma = {constants::gamma_nv, constants::gamma_nv};
  const auto secular = coupling_matrix(cfg, AngularFactor::Cos2);
  const auto literal = coupling_matrix(cfg, AngularFactor::Cos1);
  REQUIRE(secular.v(0, 1) < 0.0);
  REQUIRE(literal.v(0, 1) > 0.0);
  REQUIRE(literal.v(0, 1) == Approx(-2.0 * secular.v(0, 1)));
}

TEST_CASE("coupling invariance under translation and rotation about the field axis") {
  auto cfg = generate_configuration(ConfigKind::Random3d, 5, 8.0, 21);
  const auto base = coupling_matrix(cfg);

  SpinConfiguration shifted = cfg;
  for (auto& p : shifted.positions) p += Eigen::Vector3d(3.3, -1.2, 9.9);
  REQUIRE((coupling_matrix(shifted).v - base.v).cwiseAbs().maxCoeff() <
          1e-9 * base.v.cwiseAbs().maxCoeff());

  SpinConfiguration rotated = cfg;
  const double ang = 0.73;
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(ang, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  for (auto& p : rotated.positions) p = rz * p;
  REQUIRE((coupling_matrix(rotated).v - base.v).cwiseAbs().maxCoeff() <
          1e-9 * base.v.cwiseAbs().maxCoeff());
}

TEST_CASE("mean nearest-neighbor coupling") {
  SECTION("two spins: |V|/2pi") {
    const auto cfg = generate_configuration(ConfigKind::Chain, 2, 10.0);
    const auto c = coupling_matrix(cfg);
    REQUIRE(mean_nn_coupling(c, cfg) == Approx(std::abs(c.v(0, 1)) / constants::two_pi));
  }
  SECTION("equilateral circle: all nearest couplings equal") {
    const auto cfg = generate_configuration(ConfigKind::Circle, 3, 10.0);
    const auto c = coupling_matrix(cfg);
    const double mean = mean_nn_coupling(c, cfg);
    REQUIRE(mean == Approx(std::abs(c.v(0, 1)) / constants::two_pi));
  }
  SECTION("random-3d instance matches an exhaustive scan") {
    const auto cfg = generate_configuration(ConfigKind::Random3d, 8, 10.0, 3);
    const auto c = coupling_matrix(cfg);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
      double dmin = 1e300;
      int arg = -1;
      for (int j = 0; j < 8; ++j) {
        if (j == i) continue;
        const double d = (cfg.positions[i] - cfg.positions[j]).norm();
        if (d < dmin) {
          dmin = d;
          arg = j;
        }
      }
      acc += std::abs(c.v(i, arg)) / constants::two_pi;
    }
    REQUIRE(mean_nn_coupling(c, cfg) == Approx(acc / 8.0).epsilon(1e-12));
  }
  SECTION("single spin rejected") {
    const auto cfg = generate_configuration(ConfigKind::Chain, 1, 10.0);
    const auto c = coupling_matrix(cfg);
    REQUIRE_THROWS_AS(mean_nn_coupling(c, cfg), std::invalid_argument);
  }
}

TEST_CASE("two-spin dipolar Hamiltonian matches the hand expansion") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 2, 10.0);
  const auto c = coupling_matrix(cfg);
  const double v = c.v(0, 1);
  const auto h = build_hamiltonian(c, Model::DipolarSpinHalf);
  // V (2 Sz Sz - Sx Sx - Sy Sy) in the basis {00, 01, 10, 11}
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 0.5 * v;
  expected(1, 1) = expected(2, 2) = -0.5 * v;
  expected(1, 2) = expected(2, 1) = -0.5 * v;
  REQUIRE((h.matrix() - expected).cwiseAbs().maxCoeff() < 1e-9 * std::abs(v));
}

TEST_CASE("zero couplings give the zero Hamiltonian") {
  CouplingMatrix c;
  c.v = Eigen::MatrixXd::Zero(3, 3);
  const auto h = build_hamiltonian(c, Model::DipolarSpinHalf);
  REQUIRE(h.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nv-effective differs from dipolar-spin-half only by the Ising prefactor") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 3, 10.0);
  const auto c = coupling_matrix(cfg);
  const auto dd = build_hamiltonian(c, Model::DipolarSpinHalf);
  const auto nv = build_hamiltonian(c, Model::NvEffective);
  // H_dd - H_nv = sum V_ij Sz_i Sz_j
  const auto diff = dd.matrix() - nv.matrix();
  const auto szsz = two_body_interaction_matrix(c, 1.0, 0.0);
  REQUIRE((diff - szsz).cwiseAbs().maxCoeff() < 1e-9 * c.v.cwiseAbs().maxCoeff());
}

TEST_CASE("ising model carries 2V on SzSz with no transverse terms") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 2, 10.0);
  const auto c = coupling_matrix(cfg);
  const auto h = build_hamiltonian(c, Model::Ising);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b) REQUIRE(std::abs(h.matrix()(a, b)) == 0.0);
  REQUIRE(h.matrix()(0, 0).real() == Approx(2.0 * c.v(0, 1) * 0.25));
}

TEST_CASE("generic two-body couplings cover the named models") {
  const auto cfg = generate_configuration(ConfigKind::Chain, 3, 10.0);
  const auto c = coupling_matrix(cfg);
  const auto dd = build_hamiltonian(c, Model::DipolarSpinHalf);
  const auto gen = build_hamiltonian_generic(c, 3.0, -1.0);
  REQUIRE((dd.matrix() - gen.matrix()).cwiseAbs().maxCoeff() <
          1e-12 * dd.matrix().cwiseAbs().maxCoeff());
  // the cold-molecule pair (1, -1): Hermitian, magnetization-conserving
  const auto cold = build_hamiltonian_generic(c, 1.0, -1.0);
  const Eigen::MatrixXcd jz = collective_operator(3, Axis::Z);
  REQUIRE((cold.matrix() * jz - jz * cold.matrix()).cwiseAbs().maxCoeff() <
          1e-10 * cold.matrix().cwiseAbs().maxCoeff());
}

TEST_CASE("dipolar Hamiltonian conserves total Jz") {
  const auto cfg = generate_configuration(ConfigKind::Random3d, 4, 10.0, 11);
  const auto h = build_hamiltonian(coupling_matrix(cfg), Model::DipolarSpinHalf);
  const Eigen::MatrixXcd jz = collective_operator(4, Axis::Z);
  const Eigen::MatrixXcd comm = h.matrix() * jz - jz * h.matrix();
  REQUIRE(comm.cwiseAbs().maxCoeff() < 1e-10 * h.matrix().cwiseAbs().maxCoeff());
}

TEST_CASE("build_hamiltonian is linear in the couplings") {
  const auto cfg = generate_configuration(ConfigKind::Random3d, 3, 10.0, 5);
  auto c = coupling_matrix(cfg);
  const auto h1 = build_hamiltonian(c, Model::DipolarSpinHalf);
  CouplingMatrix scaled;
  scaled.v = 2.5 * c.v;
  const auto h2 = build_hamiltonian(scaled, Model::DipolarSpinHalf);
  REQUIRE((h2.matrix() - 2.5 * h1.matrix()).cwiseAbs().maxCoeff() <
          1e-9 * h2.matrix().cwiseAbs().maxCoeff());
}

TEST_CASE("Hamiltonian invariants: Hermiticity and eigendecomposition reconstruction") {
  const auto cfg = generate_configuration(ConfigKind::Random3d, 4, 10.0, 77);
  const auto h = build_hamiltonian(coupling_matrix(cfg), Model::DipolarSpinHalf);
  const double scale = h.matrix().cwiseAbs().maxCoeff();
  REQUIRE(hermiticity_error(h.matrix()) < 1e-12 * scale);
  const Eigen::MatrixXcd rebuilt = h.eigenvectors() *
                                   h.eigenvalues().asDiagonal().toDenseMatrix().cast<complexd>() *
                                   h.eigenvectors().adjoint();
  REQUIRE((rebuilt - h.matrix()).cwiseAbs().maxCoeff() < 1e-10 * scale);
}
