#include <catch2/catch.hpp>

#include <cmath>

#include "spinvar/cmaes.hpp"

using namespace spinvar;

namespace {

CmaesConfig box_config(int dim, double lo, double hi, std::uint64_t seed) {
  CmaesConfig cfg;
  cfg.seed = seed;
  cfg.lower = Eigen::VectorXd::Constant(dim, lo);
  cfg.upper = Eigen::VectorXd::Constant(dim, hi);
  return cfg;
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i], b = 1.0 - x[i];
    s += 100.0 * a * a + b * b;
  }
  return s;
}

}  // namespace

TEST_CASE("cmaes solves the sphere function") {
  auto cfg = box_config(6, -5.0, 5.0, 42);
  cfg.max_generations = 300;
  cfg.stagnation_window = 0;
  const auto rec = cmaes_minimize(sphere, 6, cfg);
  REQUIRE(rec.best_cost < 1e-10);
  REQUIRE(rec.generations <= 300);
}

TEST_CASE("cmaes solves rosenbrock") {
  auto cfg = box_config(4, -5.0, 10.0, 3);
  cfg.max_generations = 2000;
  cfg.stagnation_window = 0;
  const auto rec = cmaes_minimize(rosenbrock, 4, cfg);
  REQUIRE(rec.best_cost < 1e-6);
}

TEST_CASE("fixed seeds reproduce the full trace bit for bit") {
  auto cfg = box_config(5, -3.0, 3.0, 1234);
  cfg.max_generations = 60;
  const auto a = cmaes_minimize(sphere, 5, cfg);
  const auto b = cmaes_minimize(sphere, 5, cfg);
  REQUIRE(a.best_cost == b.best_cost);
  REQUIRE(a.evaluations == b.evaluations);
  REQUIRE(a.best_x == b.best_x);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    REQUIRE(a.trace[i].best_cost == b.trace[i].best_cost);
    REQUIRE(a.trace[i].mean_cost == b.trace[i].mean_cost);
    REQUIRE(a.trace[i].sigma == b.trace[i].sigma);
  }
}

TEST_CASE("parallel evaluation does not perturb the search") {
  auto cfg = box_config(4, -2.0, 2.0, 55);
  cfg.max_generations = 40;
  const auto serial = cmaes_minimize(sphere, 4, cfg);
  cfg.workers = 3;
  const auto parallel = cmaes_minimize(sphere, 4, cfg);
  REQUIRE(serial.best_cost == parallel.best_cost);
  REQUIRE(serial.best_x == parallel.best_x);
  REQUIRE(serial.evaluations == parallel.evaluations);
}

TEST_CASE("every evaluated candidate is feasible") {
  auto cfg = box_config(3, 0.0, 1.0, 9);
  cfg.max_generations = 50;
  cfg.sigma0 = 0.8;  // large step keeps reflection busy
  long violations = 0;
  auto cost = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < x.size(); ++i)
      if (x[i] < 0.0 || x[i] > 1.0) ++violations;
    return (x.array() - 0.5).matrix().squaredNorm();
  };
  cmaes_minimize(cost, 3, cfg);
  REQUIRE(violations == 0);
}

TEST_CASE("periodic coordinates are wrapped at evaluation") {
  auto cfg = box_config(2, 0.0, 2.0 * M_PI, 17);
  cfg.periodic = {1, 1};
  cfg.max_generations = 120;
  long violations = 0;
  auto cost = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < 2; ++i)
      if (x[i] < 0.0 || x[i] >= 2.0 * M_PI) ++violations;
    // smooth periodic bowl with minimum at (pi, pi/2)
    return 2.0 - std::cos(x[0] - M_PI) - std::cos(2.0 * (x[1] - M_PI / 4.0) - M_PI);
  };
  const auto rec = cmaes_minimize(cost, 2, cfg);
  REQUIRE(violations == 0);
  REQUIRE(rec.best_cost < 1e-8);
}

TEST_CASE("non-finite costs trigger resampling") {
  auto cfg = box_config(2, -4.0, 4.0, 23);
  cfg.max_generations = 150;
  SECTION("partial NaN region is survivable") {
    auto cost = [](const Eigen::VectorXd& x) {
      if (x[0] > 1.0) return std::nan("");
      return (x.array() + 1.0).matrix().squaredNorm();
    };
    const auto rec = cmaes_minimize(cost, 2, cfg);
    REQUIRE(std::isfinite(rec.best_cost));
    REQUIRE(rec.best_cost < 1e-6);
  }
  SECTION("an everywhere-NaN cost errors out") {
    auto cost = [](const Eigen::VectorXd&) { return std::nan(""); };
    REQUIRE_THROWS_AS(cmaes_minimize(cost, 2, cfg), std::runtime_error);
  }
}

TEST_CASE("record bookkeeping invariants") {
  auto cfg = box_config(4, -3.0, 3.0, 31);
  cfg.max_generations = 80;
  const auto rec = cmaes_minimize(rosenbrock, 4, cfg);
  for (std::size_t i = 1; i < rec.trace.size(); ++i)
    REQUIRE(rec.trace[i].best_cost <= rec.trace[i - 1].best_cost);
  REQUIRE(rosenbrock(rec.best_x) == Approx(rec.best_cost).margin(1e-12));
  REQUIRE(rec.evaluations >= static_cast<long>(rec.trace.size()) * 4);
}

TEST_CASE("stagnation stops long flat runs") {
  auto cfg = box_config(2, -1.0, 1.0, 3);
  cfg.max_generations = 2000;
  cfg.stagnation_window = 40;
  const auto rec = cmaes_minimize(sphere, 2, cfg);
  REQUIRE(rec.generations < 2000);
  REQUIRE(rec.best_cost < 1e-8);
}

TEST_CASE("cmaes configuration validation") {
  CmaesConfig cfg;
  cfg.lower = Eigen::VectorXd::Zero(2);
  cfg.upper = Eigen::VectorXd::Zero(2);  // lo == hi
  REQUIRE_THROWS_AS(cmaes_minimize(sphere, 2, cfg), std::invalid_argument);
}
