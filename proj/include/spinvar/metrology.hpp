#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinvar/engine.hpp"
#include "spinvar/state.hpp"

// Measurement models, noisy outcome distributions, Classical Fisher
// Information in three bases, CFI_omega / SNR analysis with time overhead,
// the analytic single-qubit Ramsey closed forms, and a Monte-Carlo maximum
// likelihood harness for the Cramer-Rao bound.
//
// The phase generator is exp(-i phi J_y) applied to the prepared state,
// measured in the z product basis; probabilities and the exact derivative
// dP/dphi at phi = 0 come from the commutator form
//   dP_z/dphi = i <psi| (J_y |z><z| - |z><z| J_y) |psi>.

namespace spinvar {

enum class MeasurementBasis { FullZ, TotalJz, Parity };

inline const char* basis_name(MeasurementBasis b) {
  switch (b) {
    case MeasurementBasis::FullZ: return "full-z";
    case MeasurementBasis::TotalJz: return "total-jz";
    case MeasurementBasis::Parity: return "parity";
  }
  return "?";
}

inline MeasurementBasis basis_from_name(const std::string& s) {
  if (s == "full-z") return MeasurementBasis::FullZ;
  if (s == "total-jz") return MeasurementBasis::TotalJz;
  if (s == "parity") return MeasurementBasis::Parity;
  throw std::invalid_argument("unknown measurement basis: " + s);
}

struct OutcomeDistribution {
  MeasurementBasis basis;
  Eigen::VectorXd p;   // probabilities
  Eigen::VectorXd dp;  // dP/dphi at the operating point (empty if not computed)
};

namespace detail {

// Per-qubit symmetric binary readout channel with flip probability 1 - rf,
// applied in place to a full-z vector (probabilities or their derivative).
inline void apply_readout_channel(Eigen::VectorXd& p, int n, double rf) {
  if (rf == 1.0) return;
  const double flip = 1.0 - rf;
  const Eigen::Index dim = p.size();
  for (int j = 0; j < n; ++j) {
    const Eigen::Index stride = spin_stride(n, j);
    for (Eigen::Index base = 0; base < dim; base += 2 * stride)
      for (Eigen::Index k = base; k < base + stride; ++k) {
        const double a = p[k], b = p[k + stride];
        p[k] = rf * a + flip * b;
        p[k + stride] = rf * b + flip * a;
      }
  }
}

inline Eigen::VectorXd aggregate(const Eigen::VectorXd& full, int n, MeasurementBasis basis) {
  if (basis == MeasurementBasis::FullZ) return full;
  const Eigen::Index outcomes = (basis == MeasurementBasis::TotalJz) ? n + 1 : 2;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(outcomes);
  for (Eigen::Index z = 0; z < full.size(); ++z) {
    const int down = __builtin_popcountll(static_cast<unsigned long long>(z));
    out[basis == MeasurementBasis::TotalJz ? down : (down & 1)] += full[z];
  }
  return out;
}

// Exact dP_z/dphi over the full z basis at the current state.
inline Eigen::VectorXd full_z_derivative(const QuantumState& state) {
  const int n = state.n_spins();
  Eigen::VectorXd d(state.dim());
  if (state.is_pure()) {
    const auto& psi = state.vector();
    const Eigen::VectorXcd jy_psi = apply_collective(psi, n, Axis::Y);
    for (Eigen::Index z = 0; z < psi.size(); ++z)
      d[z] = 2.0 * std::imag(std::conj(psi[z]) * jy_psi[z]);
  } else {
    const Eigen::MatrixXcd jy_rho = apply_collective_left(state.matrix(), n, Axis::Y);
    for (Eigen::Index z = 0; z < jy_rho.rows(); ++z) d[z] = 2.0 * std::imag(jy_rho(z, z));
  }
  return d;
}

}  // namespace detail

// Outcome probabilities: full-z populations pushed through the per-qubit
// readout channel, then aggregated for the collective bases.
inline OutcomeDistribution outcome_distribution(const QuantumState& state, MeasurementBasis basis,
                                                double rf = 1.0) {
  if (rf < 0.5 || rf > 1.0) throw std::invalid_argument("readout fidelity outside [0.5, 1]");
  Eigen::VectorXd full = state.z_populations();
  detail::apply_readout_channel(full, state.n_spins(), rf);
  OutcomeDistribution d;
  d.basis = basis;
  d.p = detail::aggregate(full, state.n_spins(), basis);
  return d;
}

// Exact dP/dphi at phi = 0. The readout channel is phi-independent, so it
// commutes with the derivative and is applied to the derivative vector.
inline Eigen::VectorXd distribution_derivative(const QuantumState& state, MeasurementBasis basis,
                                               double rf = 1.0) {
  if (rf < 0.5 || rf > 1.0) throw std::invalid_argument("readout fidelity outside [0.5, 1]");
  Eigen::VectorXd d = detail::full_z_derivative(state);
  detail::apply_readout_channel(d, state.n_spins(), rf);
  return detail::aggregate(d, state.n_spins(), basis);
}

namespace detail {

// CFI = sum d^2 / p with guarded handling of vanishing outcomes.
//
// Every legitimate derivative obeys |d_z| <= N sqrt(2^N p_z) (Cauchy-Schwarz
// through |<z|J_y psi>| and the doubly stochastic readout channel). A
// derivative beyond that bound on a near-zero outcome signals a broken input
// and raises. Below the bound, outcomes with p < 1e-14 are either dropped
// (derivative at rounding level) or evaluated with p clamped to 1e-14: the
// exact ratio d^2/p is then beneath floating-point resolution, and states
// approaching the parity-sector supremum legitimately drive p -> 0 with
// d ~ sqrt(p), so raising there would abort valid optimization runs.
inline double cfi_from(const Eigen::VectorXd& p, const Eigen::VectorXd& d, int n_spins) {
  const double consistency =
      n_spins * std::sqrt(static_cast<double>(Eigen::Index{1} << n_spins));
  double cfi = 0.0;
  for (Eigen::Index z = 0; z < p.size(); ++z) {
    if (p[z] < 1e-14) {
      const double bound = consistency * std::sqrt(std::max(p[z], 0.0)) + 1e-9;
      if (std::abs(d[z]) > bound)
        throw std::runtime_error("zero-probability outcome with nonzero derivative");
      if (std::abs(d[z]) < 1e-12) continue;
      cfi += d[z] * d[z] / 1e-14;
      continue;
    }
    cfi += d[z] * d[z] / p[z];
  }
  return cfi;
}

}  // namespace detail

// CFI_phi = sum_z (dP_z/dphi)^2 / P_z at phi = 0; bounded by N^2.
inline double cfi_phi(const QuantumState& state, MeasurementBasis basis, double rf = 1.0) {
  const OutcomeDistribution dist = outcome_distribution(state, basis, rf);
  const Eigen::VectorXd d = distribution_derivative(state, basis, rf);
  return detail::cfi_from(dist.p, d, state.n_spins());
}

// CFI_omega = CFI_phi * t_R^2.
inline double cfi_omega(double cfi_phi_value, double t_ramsey) {
  if (t_ramsey < 0.0) throw std::invalid_argument("t_R must be nonnegative");
  return cfi_phi_value * t_ramsey * t_ramsey;
}

// Closed-form single-qubit Ramsey: P0 = 1/2 + 1/2 e^{-2 gamma t} sin(omega t)
// and CFI_omega = t^2 cos^2(omega t) / (e^{4 gamma t} - sin^2(omega t)).
struct SingleQubitRamsey {
  double p0;
  double cfi_omega;
};

inline SingleQubitRamsey single_qubit_oracle(double omega, double gamma, double t) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  SingleQubitRamsey r;
  const double env = std::exp(-2.0 * gamma * t);
  const double s = std::sin(omega * t), c = std::cos(omega * t);
  r.p0 = 0.5 + 0.5 * env * s;
  r.cfi_omega = t * t * c * c / (std::exp(4.0 * gamma * t) - s * s);
  return r;
}

// Noisy Ramsey evaluation for one sensing time t. The probe is taken in the
// same frame the CFI_phi cost uses (phase generated by exp(-i phi J_y), no
// pulses); physically that wraps the accumulation window in a pulse pair,
//   R_x(pi/2) U_z(omega t) R_x(-pi/2) = exp(+i omega t J_y),
// so the pipeline is: pre-pulse R_x(-pi/2), dephasing plus z signal for t,
// readout pulse R_x(pi/2), z measurement. dP/domega comes from the exact
// commutator form with the factor t. The noiseless limit then reproduces
// CFI_phi(probe) * t^2 for every probe, and a single qubit reproduces the
// closed-form P0 = 1/2 + 1/2 e^{-2 gamma t} sin(omega t).
struct RamseyEvaluation {
  Eigen::VectorXd p;
  Eigen::VectorXd dp_domega;
  double cfi_omega;
};

inline RamseyEvaluation ramsey_evaluate(const QuantumState& probe, double t2, double nu, double t,
                                        double omega = 0.0, MeasurementBasis basis = MeasurementBasis::FullZ,
                                        double rf = 1.0, const OdeOptions& opt = {}) {
  QuantumState rho = global_rotation(probe, Axis::X, -constants::pi / 2.0);
  rho = nonmarkovian_propagate(std::move(rho), omega, t2, nu, t, opt);
  rho = global_rotation(std::move(rho), Axis::X, constants::pi / 2.0);
  RamseyEvaluation ev;
  ev.p = outcome_distribution(rho, basis, rf).p;
  Eigen::VectorXd d = distribution_derivative(rho, basis, rf);
  ev.dp_domega = -t * d;  // the readout pulse maps J_z onto -J_y
  ev.cfi_omega = detail::cfi_from(ev.p, ev.dp_domega, probe.n_spins());
  return ev;
}

struct SnrCurvePoint {
  double t;
  double cfi_omega;
  double cfi_omega_over_t;
};

struct SnrCurve {
  std::vector<SnrCurvePoint> points;
  double best_t = 0.0;
  double best_value = 0.0;  // max CFI_omega / t over the grid
};

// CFI_omega / t_R over a time grid (SNR^2 is proportional to this quantity).
inline SnrCurve ramsey_snr_curve(const QuantumState& probe, double t2, double nu,
                                 const std::vector<double>& t_grid, double omega = 0.0,
                                 const OdeOptions& opt = {}) {
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] <= 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw std::invalid_argument("time grid must be positive ascending");
  }
  SnrCurve curve;
  for (double t : t_grid) {
    RamseyEvaluation ev;
    try {
      ev = ramsey_evaluate(probe, t2, nu, t, omega, MeasurementBasis::FullZ, 1.0, opt);
    } catch (const std::exception& e) {
      throw std::runtime_error("ramsey integration failed at t = " + std::to_string(t) + ": " +
                               e.what());
    }
    const double val = ev.cfi_omega / t;
    curve.points.push_back({t, ev.cfi_omega, val});
    if (val > curve.best_value) {
      curve.best_value = val;
      curve.best_t = t;
    }
  }
  return curve;
}

struct OverheadAnalysis {
  std::vector<double> t;
  std::vector<double> snr2;      // CFI_omega / (t + t_oh), proportional to SNR^2
  double optimal_t = 0.0;        // numerically refined argmax
  double optimal_snr2 = 0.0;
  double css_optimum_closed;     // T2 / nu^(1/nu)
  double ghz_optimum_closed;     // T2 / (n nu)^(1/nu)
  double ghz_css_ratio_closed;   // n^(1 - 2/nu) in the t_oh >> t_R regime
};

namespace detail {

template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// SNR^2 with time overhead: SNR^2 ~ CFI_omega / (t_R + t_oh), plus the
// closed-form optima of the uncorrelated and GHZ reference curves.
inline OverheadAnalysis snr_with_overhead(const QuantumState& probe, double t2, double nu,
                                          double t_oh, const std::vector<double>& t_grid,
                                          const OdeOptions& opt = {}) {
  if (t_oh < 0.0) throw std::invalid_argument("t_oh must be nonnegative");
  OverheadAnalysis out;
  const int n = probe.n_spins();
  out.css_optimum_closed = t2 / std::pow(nu, 1.0 / nu);
  out.ghz_optimum_closed = t2 / std::pow(n * nu, 1.0 / nu);
  out.ghz_css_ratio_closed = std::pow(static_cast<double>(n), 1.0 - 2.0 / nu);

  auto snr2_of = [&](double t) {
    const RamseyEvaluation ev = ramsey_evaluate(probe, t2, nu, t, 0.0,
                                                MeasurementBasis::FullZ, 1.0, opt);
    return ev.cfi_omega / (t + t_oh);
  };
  double grid_best_t = t_grid.front(), grid_best = -1.0;
  for (double t : t_grid) {
    const double v = snr2_of(t);
    out.t.push_back(t);
    out.snr2.push_back(v);
    if (v > grid_best) {
      grid_best = v;
      grid_best_t = t;
    }
  }
  const double lo = std::max(t_grid.front(), grid_best_t * 0.5);
  const double hi = std::min(t_grid.back(), grid_best_t * 2.0);
  out.optimal_t = detail::golden_section_max(snr2_of, lo, hi, 1e-4 * t2);
  out.optimal_snr2 = snr2_of(out.optimal_t);
  return out;
}

// Monte-Carlo maximum-likelihood estimation over repeated measurements.
struct MleResult {
  double mean_estimate;
  double variance;
  int trials;
  int shots;
};

inline MleResult mle_simulate(const std::function<OutcomeDistribution(double)>& dist_family,
                              double phi0, int shots, int trials, std::uint64_t seed,
                              double search_halfwidth = 0.5) {
  if (shots < 100) throw std::invalid_argument("need at least 100 shots per trial");
  if (trials < 2) throw std::invalid_argument("need at least 2 trials");

  const OutcomeDistribution at_phi0 = dist_family(phi0);
  const Eigen::Index n_out = at_phi0.p.size();
  {
    // identifiability: the distribution must actually move with phi
    const double dphi = 1e-4;
    const Eigen::VectorXd shift =
        (dist_family(phi0 + dphi).p - dist_family(phi0 - dphi).p) / (2.0 * dphi);
    if (shift.cwiseAbs().maxCoeff() < 1e-9)
      throw std::runtime_error("mle_simulate: distribution is flat around phi0");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> estimates;
  estimates.reserve(trials);
  std::vector<long> counts(n_out);

  for (int trial = 0; trial < trials; ++trial) {
    std::fill(counts.begin(), counts.end(), 0L);
    for (int s = 0; s < shots; ++s) {
      double x = u(rng);
      Eigen::Index z = 0;
      for (; z < n_out - 1; ++z) {
        x -= at_phi0.p[z];
        if (x <= 0.0) break;
      }
      ++counts[z];
    }
    auto log_likelihood = [&](double phi) {
      const Eigen::VectorXd p = dist_family(phi).p;
      double ll = 0.0;
      for (Eigen::Index z = 0; z < n_out; ++z)
        if (counts[z] > 0) ll += counts[z] * std::log(std::max(p[z], 1e-300));
      return ll;
    };
    estimates.push_back(detail::golden_section_max(log_likelihood, phi0 - search_halfwidth,
                                                   phi0 + search_halfwidth, 1e-7));
  }

  MleResult r;
  r.trials = trials;
  r.shots = shots;
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= trials;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (trials - 1);
  r.mean_estimate = mean;
  r.variance = var;
  return r;
}

}  // namespace spinvar
