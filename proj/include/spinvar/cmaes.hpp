#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace spinvar {

// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
// cumulative step-size adaptation. Coordinates are handled in a normalized
// box: bounded coordinates are folded back by reflection, periodic ones are
// wrapped at evaluation, so every evaluated candidate is feasible.
struct CmaesConfig {
  int lambda = 0;                   // population size; 0 -> 4 + floor(3 ln d)
  double sigma0 = 0.3;              // initial step as a fraction of the box width
  int max_generations = 2000;
  double stagnation_rel_tol = 1e-8; // relative best-cost improvement ...
  int stagnation_window = 200;      // ... over this many generations
  std::uint64_t seed = 0;
  Eigen::VectorXd lower, upper;     // per-coordinate box
  std::vector<std::uint8_t> periodic;  // wrap instead of reflect (empty = none)
  int workers = 1;
  int max_resample_rounds = 100;    // non-finite cost handling

  void validate(int dim) const {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (lower.size() != dim || upper.size() != dim)
      throw std::invalid_argument("bounds must match the dimension");
    for (int i = 0; i < dim; ++i)
      if (!(lower[i] < upper[i])) throw std::invalid_argument("bounds need lo < hi");
    if (!periodic.empty() && static_cast<int>(periodic.size()) != dim)
      throw std::invalid_argument("periodic flags must match the dimension");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  }
};

struct GenerationStats {
  double best_cost;   // running (elitist) best
  double mean_cost;   // mean of the generation
  double sigma;
};

struct OptimizationRecord {
  std::vector<GenerationStats> trace;
  Eigen::VectorXd best_x;  // feasible coordinates of the best candidate
  double best_cost = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  int generations = 0;
};

namespace detail {

// Deterministic Box-Muller gaussian (independent of library distributions).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do { u1 = uniform(); } while (u1 <= 1e-300);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
  double uniform() {
    return (rng_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fold into [0, 1] by reflection (period-2 triangle wave).
inline double reflect_unit(double y) {
  double t = std::fmod(y, 2.0);
  if (t < 0.0) t += 2.0;
  return t <= 1.0 ? t : 2.0 - t;
}

inline double wrap_unit(double y) {
  double t = std::fmod(y, 1.0);
  return t < 0.0 ? t + 1.0 : t;
}

}  // namespace detail

inline OptimizationRecord cmaes_minimize(const std::function<double(const Eigen::VectorXd&)>& cost,
                                         int dim, const CmaesConfig& cfg) {
  cfg.validate(dim);
  const auto t_start = std::chrono::steady_clock::now();

  const int lambda = cfg.lambda > 0 ? cfg.lambda
                                    : 4 + static_cast<int>(std::floor(3.0 * std::log(dim)));
  if (lambda < 4) throw std::invalid_argument("population must be >= 4");
  const int mu = lambda / 2;
  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double cs = (mu_eff + 2.0) / (dim + mu_eff + 5.0);
  const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dim + 1.0)) - 1.0) + cs;
  const double cc = (4.0 + mu_eff / dim) / (dim + 4.0 + 2.0 * mu_eff / dim);
  const double c1 = 2.0 / ((dim + 1.3) * (dim + 1.3) + mu_eff);
  const double cmu = std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                            ((dim + 2.0) * (dim + 2.0) + mu_eff));
  const double chi_n = std::sqrt(static_cast<double>(dim)) *
                       (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim * dim));

  detail::Gaussian gauss(cfg.seed);
  const Eigen::VectorXd width = cfg.upper - cfg.lower;

  auto to_feasible = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) {
      const bool per = !cfg.periodic.empty() && cfg.periodic[i];
      const double unit = per ? detail::wrap_unit(y[i]) : detail::reflect_unit(y[i]);
      x[i] = cfg.lower[i] + unit * width[i];
    }
    return x;
  };

  // normalized-coordinate state
  Eigen::VectorXd mean(dim);
  for (int i = 0; i < dim; ++i) mean[i] = 0.2 + 0.6 * gauss.uniform();
  double sigma = cfg.sigma0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(dim), pc = Eigen::VectorXd::Zero(dim);

  OptimizationRecord rec;
  rec.seed = cfg.seed;

  std::vector<Eigen::VectorXd> zs(lambda), ys(lambda), xs(lambda);
  std::vector<double> costs(lambda);

  auto evaluate_batch = [&](const std::vector<int>& idx) {
    auto eval_one = [&](int i) { costs[i] = cost(xs[i]); };
    if (cfg.workers <= 1 || static_cast<int>(idx.size()) == 1) {
      for (int i : idx) eval_one(i);
      return;
    }
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    const int nw = std::min<int>(cfg.workers, static_cast<int>(idx.size()));
    for (int w = 0; w < nw; ++w)
      futs.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t k = next.fetch_add(1); k < idx.size(); k = next.fetch_add(1))
          eval_one(idx[k]);
      }));
    for (auto& f : futs) f.get();
  };

  for (int gen = 0; gen < cfg.max_generations; ++gen) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()));
    Eigen::VectorXd d_sqrt = es.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
    const Eigen::MatrixXd& B = es.eigenvectors();

    // sample serially on the master stream, then evaluate (possibly parallel)
    for (int i = 0; i < lambda; ++i) {
      Eigen::VectorXd z(dim);
      for (int k = 0; k < dim; ++k) z[k] = gauss();
      zs[i] = z;
      ys[i] = mean + sigma * (B * d_sqrt.cwiseProduct(z));
      xs[i] = to_feasible(ys[i]);
    }
    std::vector<int> all(lambda);
    std::iota(all.begin(), all.end(), 0);
    evaluate_batch(all);
    rec.evaluations += lambda;

    for (int round = 0; round < cfg.max_resample_rounds; ++round) {
      std::vector<int> bad;
      for (int i = 0; i < lambda; ++i)
        if (!std::isfinite(costs[i])) bad.push_back(i);
      if (bad.empty()) break;
      if (round + 1 == cfg.max_resample_rounds)
        throw std::runtime_error("cmaes: cost stayed non-finite after resampling");
      for (int i : bad) {
        Eigen::VectorXd z(dim);
        for (int k = 0; k < dim; ++k) z[k] = gauss();
        zs[i] = z;
        ys[i] = mean + sigma * (B * d_sqrt.cwiseProduct(z));
        xs[i] = to_feasible(ys[i]);
      }
      evaluate_batch(bad);
      rec.evaluations += static_cast<long>(bad.size());
    }

    std::vector<int> order(lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return costs[a] < costs[b]; });

    if (costs[order[0]] < rec.best_cost) {
      rec.best_cost = costs[order[0]];
      rec.best_x = xs[order[0]];
    }

    const Eigen::VectorXd mean_old = mean;
    Eigen::VectorXd zw = Eigen::VectorXd::Zero(dim);
    mean.setZero();
    for (int i = 0; i < mu; ++i) {
      mean += weights[i] * ys[order[i]];
      zw += weights[i] * zs[order[i]];
    }

    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mu_eff) * (B * zw);
    const double ps_norm = ps.norm();
    const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (gen + 1))) <
                      (1.4 + 2.0 / (dim + 1.0)) * chi_n;
    const Eigen::VectorXd y_mean = (mean - mean_old) / sigma;
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mu_eff) : 0.0) * y_mean;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < mu; ++i) {
      const Eigen::VectorXd yi = (ys[order[i]] - mean_old) / sigma;
      rank_mu += weights[i] * yi * yi.transpose();
    }
    const double c1a = c1 * (1.0 - (hsig ? 0.0 : 1.0) * cc * (2.0 - cc));
    C = (1.0 - c1a - cmu) * C + c1 * (pc * pc.transpose()) + cmu * rank_mu;

    sigma *= std::exp((cs / ds) * (ps_norm / chi_n - 1.0));

    double gen_mean = 0.0;
    for (int i = 0; i < lambda; ++i) gen_mean += costs[i];
    rec.trace.push_back({rec.best_cost, gen_mean / lambda, sigma});
    rec.generations = gen + 1;

    if (cfg.stagnation_window > 0 && gen + 1 >= cfg.stagnation_window) {
      const double then = rec.trace[gen + 1 - cfg.stagnation_window].best_cost;
      const double now = rec.best_cost;
      const double scale = std::max({std::abs(then), std::abs(now), 1e-30});
      if (then - now < cfg.stagnation_rel_tol * scale) break;
    }
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rec;
}

}  // namespace spinvar
