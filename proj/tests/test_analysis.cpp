#include <catch2/catch.hpp>

#include <random>

#include "spinvar/analysis.hpp"
#include "spinvar/metrology.hpp"

using namespace spinvar;

namespace {

// |Bell>|Bell> on spins (0,1) and (2,3)
QuantumState two_bell_pairs() {
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
  for (int a : {0, 3})
    for (int b : {0, 3}) psi[a * 4 + b] = bell[a] * bell[b];
  return QuantumState::pure(psi);
}

}  // namespace

TEST_CASE("von Neumann entropy") {
  SECTION("product states carry none") {
    REQUIRE(von_neumann_entropy(initial_state(3, 1.0), {1}) == Approx(0.0).margin(1e-12));
  }
  SECTION("GHZ marginals are maximally mixed") {
    for (auto kind : {ReferenceKind::GhzZ, ReferenceKind::GhzX}) {
      const auto ghz = reference_state(kind, 3);
      REQUIRE(von_neumann_entropy(ghz, {0}) == Approx(1.0).margin(1e-10));
    }
  }
  SECTION("a Bell pair is pure across the pair cut") {
    REQUIRE(von_neumann_entropy(two_bell_pairs(), {0, 1}) == Approx(0.0).margin(1e-10));
    REQUIRE(von_neumann_entropy(two_bell_pairs(), {0}) == Approx(1.0).margin(1e-10));
  }
  SECTION("pure-state entropy is symmetric under complementation") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Eigen::VectorXcd psi(16);
    for (auto& a : psi) a = complexd(g(rng), g(rng));
    psi.normalize();
    const auto s = QuantumState::pure(psi);
    REQUIRE(von_neumann_entropy(s, {0, 2}) ==
            Approx(von_neumann_entropy(s, {1, 3})).margin(1e-9));
  }
  SECTION("empty and full subsets rejected") {
    const auto s = initial_state(2, 1.0);
    REQUIRE_THROWS_AS(von_neumann_entropy(s, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(von_neumann_entropy(s, {0, 1}), std::invalid_argument);
  }
}

TEST_CASE("cluster partitioning") {
  SECTION("product states split into singletons") {
    const auto part = cluster_partition(initial_state(4, 1.0));
    REQUIRE(part.blocks.size() == 4);
    REQUIRE(part.max_block_size() == 1);
  }
  SECTION("two Bell pairs are found as two pair clusters") {
    const auto part = cluster_partition(two_bell_pairs());
    REQUIRE(part.blocks.size() == 2);
    REQUIRE(part.blocks[0] == std::vector<int>{0, 1});
    REQUIRE(part.blocks[1] == std::vector<int>{2, 3});
    for (double h : part.block_entropies) REQUIRE(h <= 0.4);
  }
  SECTION("GHZ stays a single cluster") {
    const auto part = cluster_partition(reference_state(ReferenceKind::GhzZ, 4));
    REQUIRE(part.blocks.size() == 1);
    REQUIRE(part.max_block_size() == 4);
  }
  SECTION("partitions are deterministic") {
    const auto a = cluster_partition(two_bell_pairs());
    const auto b = cluster_partition(two_bell_pairs());
    REQUIRE(a.blocks == b.blocks);
  }
}

TEST_CASE("Clebsch-Gordan internals") {
  using detail::clebsch_gordan;
  REQUIRE(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1.0, 0.0) == Approx(1.0 / std::sqrt(2.0)));
  REQUIRE(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0) == Approx(1.0 / std::sqrt(2.0)));
  REQUIRE(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0.0, 0.0) == Approx(-1.0 / std::sqrt(2.0)));
  REQUIRE(clebsch_gordan(1.0, 1.0, 1.0, -1.0, 0.0, 0.0) == Approx(1.0 / std::sqrt(3.0)));
  // completeness over j3 for fixed magnetic numbers
  double s = 0.0;
  for (double j3 : {0.0, 1.0, 2.0}) {
    const double c = clebsch_gordan(1.0, 1.0, 1.0, -1.0, j3, 0.0);
    s += c * c;
  }
  REQUIRE(s == Approx(1.0));
}

TEST_CASE("Wigner distribution") {
  SECTION("CSS shows a single positive lobe at +x") {
    const auto grid = wigner_distribution(initial_state(4, 1.0), 48, 96);
    Eigen::Index it, ip;
    grid.values.maxCoeff(&it, &ip);
    REQUIRE(std::abs(grid.theta[it] - M_PI / 2.0) < M_PI / 24.0);
    const double dphi = grid.phi[1] - grid.phi[0];
    const double phimax = grid.phi[ip];
    REQUIRE(std::min(phimax, constants::two_pi - phimax) < 2.5 * dphi);
    REQUIRE(grid.values(it, ip) > 0.0);
  }
  SECTION("the HL probe shows two antipodal lobes with alternating fringes") {
    const auto grid = wigner_distribution(reference_state(ReferenceKind::GhzX, 4), 48, 96);
    // lobes near +-y: (theta, phi) = (pi/2, pi/2) and (pi/2, 3pi/2)
    Eigen::Index it, ip;
    grid.values.maxCoeff(&it, &ip);
    REQUIRE(std::abs(grid.theta[it] - M_PI / 2.0) < M_PI / 24.0);
    const double dphi = grid.phi[1] - grid.phi[0];
    const bool near_plus_y = std::abs(grid.phi[ip] - M_PI / 2.0) < 2.5 * dphi;
    const bool near_minus_y = std::abs(grid.phi[ip] - 3.0 * M_PI / 2.0) < 2.5 * dphi;
    REQUIRE((near_plus_y || near_minus_y));
    // the antipodal lobe has comparable weight
    const int ip_anti = static_cast<int>((ip + grid.phi.size() / 2) % grid.phi.size());
    REQUIRE(grid.values(it, ip_anti) > 0.5 * grid.values(it, ip));
    // interference fringes alternate around the great circle through x and z
    int ip_x = 0;
    int sign_changes = 0;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.theta.size(); ++i) {
      const double v = grid.values(i, ip_x);
      if (prev != 0.0 && v * prev < 0.0) ++sign_changes;
      if (std::abs(v) > 1e-6) prev = v;
    }
    REQUIRE(sign_changes >= 2);
  }
  SECTION("sphere integral recovers the symmetric weight") {
    for (auto kind : {ReferenceKind::Css, ReferenceKind::GhzX, ReferenceKind::Dicke}) {
      const auto s = reference_state(kind, 3);
      const auto grid = wigner_distribution(s, 32, 64);
      REQUIRE(grid.integral() == Approx(grid.trace_sym).margin(1e-6));
      REQUIRE(grid.trace_sym == Approx(1.0).margin(1e-10));  // reference states are symmetric
    }
  }
  SECTION("non-symmetric states project onto the Dicke subspace") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    Eigen::VectorXcd psi(16);
    for (auto& a : psi) a = complexd(g(rng), g(rng));
    psi.normalize();
    const auto grid = wigner_distribution(QuantumState::pure(psi), 32, 64);
    REQUIRE(grid.trace_sym < 1.0);  // generic states are not permutation symmetric
    REQUIRE(grid.trace_sym > 0.0);
    REQUIRE(grid.integral() == Approx(grid.trace_sym).margin(1e-10));
  }
  SECTION("grids rotate with the state") {
    const auto s = reference_state(ReferenceKind::GhzX, 3);
    const int n_phi = 64;
    const auto base = wigner_distribution(s, 24, n_phi);
    const int shift_cells = 8;
    const double alpha = constants::two_pi * shift_cells / n_phi;
    const auto rotated = wigner_distribution(global_rotation(s, Axis::Z, alpha), 24, n_phi);
    for (std::size_t i = 0; i < base.theta.size(); ++i)
      for (int j = 0; j < n_phi; ++j)
        REQUIRE(rotated.values(i, (j + shift_cells) % n_phi) ==
                Approx(base.values(i, j)).margin(1e-8));
  }
}

TEST_CASE("squeezing parameter") {
  SECTION("coherent spin state sits at the projection noise limit") {
    REQUIRE(squeezing_parameter(initial_state(4, 1.0)) == Approx(1.0).margin(1e-10));
  }
  SECTION("one-axis twisting squeezes below unity") {
    // H = Jz^2 on four spins for a short twist
    const Eigen::MatrixXcd jz = collective_operator(4, Axis::Z);
    const Hamiltonian oat(jz * jz, Model::Generic);
    const auto out = interaction_evolution(initial_state(4, 1.0), oat, 0.1);
    // rotate about x to align the squeezed quadrature with y
    double best = 1e9;
    for (int k = 0; k < 64; ++k) {
      const auto rot = global_rotation(out, Axis::X, constants::two_pi * k / 64.0);
      try {
        best = std::min(best, squeezing_parameter(rot));
      } catch (const std::exception&) {
      }
    }
    REQUIRE(best < 1.0);
  }
  SECTION("GHZ states have no mean spin to reference") {
    REQUIRE_THROWS_AS(squeezing_parameter(reference_state(ReferenceKind::GhzZ, 3)),
                      std::runtime_error);
    REQUIRE_THROWS_AS(squeezing_parameter(reference_state(ReferenceKind::GhzX, 3)),
                      std::runtime_error);
  }
}

TEST_CASE("state fidelity") {
  const auto css = initial_state(2, 1.0);
  SECTION("self fidelity is one") { REQUIRE(state_fidelity(css, css) == Approx(1.0)); }
  SECTION("orthogonal states give zero") {
    Eigen::VectorXcd up = Eigen::VectorXcd::Zero(2), dn = Eigen::VectorXcd::Zero(2);
    up[0] = 1.0;
    dn[1] = 1.0;
    REQUIRE(state_fidelity(QuantumState::pure(up), QuantumState::pure(dn)) ==
            Approx(0.0).margin(1e-14));
  }
  SECTION("CSS overlaps") {
    REQUIRE(state_fidelity(css, reference_state(ReferenceKind::GhzZ, 2)) == Approx(0.5));
    REQUIRE(state_fidelity(css, reference_state(ReferenceKind::GhzX, 2)) == Approx(0.25));
  }
  SECTION("Uhlmann form agrees with the pure overlap") {
    const auto a = reference_state(ReferenceKind::GhzZ, 2);
    const double pure_val = state_fidelity(css, a);
    const auto mixed =
        state_fidelity(QuantumState::density(css.to_density()), QuantumState::density(a.to_density()));
    REQUIRE(mixed == Approx(pure_val).margin(1e-9));
  }
  SECTION("symmetry and dimension checks") {
    const auto a = reference_state(ReferenceKind::GhzX, 2);
    REQUIRE(state_fidelity(css, a) == Approx(state_fidelity(a, css)));
    REQUIRE_THROWS_AS(state_fidelity(css, initial_state(3, 1.0)), std::invalid_argument);
  }
}

TEST_CASE("interaction cutoff study") {
  const auto cfg = generate_configuration(ConfigKind::Random3d, 4, 10.0, 13);
  const double fdd = mean_nn_coupling(coupling_matrix(cfg), cfg);
  CircuitParams p;
  p.m = 2;
  p.tau_bound = 1.0 / fdd;
  p.theta.resize(6);
  p.theta << 0.4 * p.tau_bound, 1.1, 0.7 * p.tau_bound, 0.2 * p.tau_bound, 2.7, 0.5 * p.tau_bound;

  SECTION("zero cutoff is exact") {
    REQUIRE(cutoff_fidelity(cfg, p, 0.0) == Approx(1.0).margin(1e-10));
  }
  SECTION("fidelity decreases monotonically for nested cutoffs") {
    double prev = 1.0 + 1e-12;
    for (double frac : {0.0, 0.25, 0.5, 1.0, 4.0}) {
      const double f = cutoff_fidelity(cfg, p, frac * fdd);
      REQUIRE(f <= prev + 1e-9);
      prev = f;
    }
  }
  SECTION("removing every interaction changes the state") {
    const double vmax = coupling_matrix(cfg).v.cwiseAbs().maxCoeff() / constants::two_pi;
    REQUIRE(cutoff_fidelity(cfg, p, 2.0 * vmax) < 1.0 - 1e-6);
  }
}

TEST_CASE("preparation time accounting") {
  CircuitParams p;
  p.m = 4;
  p.tau_bound = 1.0;
  p.theta.resize(12);
  const double fdd = 43.5e3;
  for (int i = 0; i < 4; ++i) {
    p.theta[3 * i] = 0.1 / fdd;
    p.theta[3 * i + 1] = 1.0;
    p.theta[3 * i + 2] = 0.1 / fdd;
  }
  SECTION("zero times give zero") {
    CircuitParams z;
    z.m = 2;
    z.tau_bound = 1.0;
    z.theta = Eigen::VectorXd::Zero(6);
    REQUIRE(preparation_time(z, fdd) == 0.0);
  }
  SECTION("the dimensionless total is f_dd times the summed interaction time") {
    REQUIRE(preparation_time(p, fdd) == Approx(0.8).margin(1e-12));
  }
  SECTION("rotation angles do not contribute") {
    CircuitParams q = p;
    for (int i = 0; i < 4; ++i) q.theta[3 * i + 1] = 5.5;
    REQUIRE(preparation_time(q, fdd) == preparation_time(p, fdd));
  }
  SECTION("the worked comparison point: f_dd T = 0.8 at 43.5 kHz means 18.39 us") {
    const double t_prep = preparation_time(p, fdd) / fdd;
    REQUIRE(std::abs(t_prep - 1.839e-5) / 1.839e-5 < 5e-4);  // 4 significant figures
  }
}

TEST_CASE("reference states") {
  SECTION("css(1) is the +x qubit") {
    const auto s = reference_state(ReferenceKind::Css, 1);
    REQUIRE(s.vector()[0].real() == Approx(1.0 / std::sqrt(2.0)));
    REQUIRE(s.vector()[1].real() == Approx(1.0 / std::sqrt(2.0)));
  }
  SECTION("ghz-z(2) is a Bell state") {
    const auto s = reference_state(ReferenceKind::GhzZ, 2);
    REQUIRE(von_neumann_entropy(s, {0}) == Approx(1.0).margin(1e-12));
  }
  SECTION("ghz-x(3) attains the Heisenberg limit in the parity basis") {
    REQUIRE(cfi_phi(reference_state(ReferenceKind::GhzX, 3), MeasurementBasis::Parity) ==
            Approx(9.0).margin(1e-9));
  }
  SECTION("dicke(4) is symmetric with zero polarization") {
    const auto s = reference_state(ReferenceKind::Dicke, 4);
    REQUIRE(s.collective_expectation(Axis::Z) == Approx(0.0).margin(1e-12));
    const auto grid = wigner_distribution(s, 16, 32);
    REQUIRE(grid.trace_sym == Approx(1.0).margin(1e-12));
  }
}
