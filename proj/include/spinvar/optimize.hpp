#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "spinvar/cmaes.hpp"
#include "spinvar/engine.hpp"
#include "spinvar/ensemble.hpp"
#include "spinvar/metrology.hpp"

// Cost functions on top of the CMA-ES core: CFI maximization for the
// variational entangler and state-infidelity minimization for reachability
// studies.

namespace spinvar {

struct EntanglerRun {
  OptimizationRecord record;   // cost convention: minimized -CFI
  CircuitParams params;        // best circuit, feasible (wrapped/reflected)
  double cfi = 0.0;            // reported positive
  double f_dd_hz = 0.0;
  double prep_time_fdd = 0.0;  // f_dd * sum(tau_i + tau'_i)
};

namespace detail {

// tau coordinates are box-bounded in [0, tau_bound]; angles are periodic and
// wrapped mod 2pi at evaluation.
inline CmaesConfig entangler_cma(const CmaesConfig& base, int m, double tau_bound) {
  CmaesConfig cma = base;
  const int dim = 3 * m;
  cma.lower = Eigen::VectorXd::Zero(dim);
  cma.upper = Eigen::VectorXd::Zero(dim);
  cma.periodic.assign(dim, 0);
  for (int i = 0; i < m; ++i) {
    cma.upper[3 * i] = tau_bound;
    cma.upper[3 * i + 1] = constants::two_pi;
    cma.upper[3 * i + 2] = tau_bound;
    cma.periodic[3 * i + 1] = 1;
  }
  return cma;
}

inline CircuitParams params_from(const Eigen::VectorXd& theta, int m, double tau_bound) {
  CircuitParams p;
  p.m = m;
  p.theta = theta;
  p.tau_bound = tau_bound;
  return p;
}

}  // namespace detail

// Prepared-state CFI for a fixed circuit under the given noise model.
inline double entangler_cfi(const CircuitParams& params, const Hamiltonian& h,
                            MeasurementBasis basis, const PrepNoiseSpec& noise) {
  noise.validate();
  QuantumState in = initial_state(h.n_spins(), noise.init_fidelity);
  QuantumState out = [&] {
    if (std::isinf(noise.t2_prep)) return apply_entangler(params, h, std::move(in));
    const double gamma_z = 1.0 / (2.0 * noise.t2_prep);
    return apply_entangler_dephasing(params, h, std::move(in), gamma_z);
  }();
  return cfi_phi(out, basis, noise.readout_fidelity);
}

// Maximize CFI_phi over the 3m circuit parameters by minimizing its negation.
// tau bounds are [0, 1/f_dd] with f_dd the mean nearest-neighbor coupling.
inline EntanglerRun optimize_entangler(const SpinConfiguration& cfg, int m, MeasurementBasis basis,
                                       const PrepNoiseSpec& noise, const CmaesConfig& cma_base) {
  if (m < 0) throw std::invalid_argument("m must be nonnegative");
  const CouplingMatrix coupling = coupling_matrix(cfg);
  const Hamiltonian h = build_hamiltonian(coupling, cfg.model);
  const double f_dd = mean_nn_coupling(coupling, cfg);
  const double tau_bound = 1.0 / f_dd;

  EntanglerRun run;
  run.f_dd_hz = f_dd;

  if (m == 0) {
    run.params = detail::params_from(Eigen::VectorXd::Zero(0), 0, tau_bound);
    run.cfi = entangler_cfi(run.params, h, basis, noise);
    run.record.best_cost = -run.cfi;
    run.record.best_x = Eigen::VectorXd::Zero(0);
    run.record.evaluations = 1;
    run.record.seed = cma_base.seed;
    return run;
  }

  const CmaesConfig cma = detail::entangler_cma(cma_base, m, tau_bound);
  auto cost = [&](const Eigen::VectorXd& theta) {
    return -entangler_cfi(detail::params_from(theta, m, tau_bound), h, basis, noise);
  };
  run.record = cmaes_minimize(cost, 3 * m, cma);
  run.params = detail::params_from(run.record.best_x, m, tau_bound);
  run.cfi = -run.record.best_cost;
  double prep = 0.0;
  for (int i = 0; i < m; ++i) prep += run.params.tau(i) + run.params.tau_prime(i);
  run.prep_time_fdd = f_dd * prep;
  return run;
}

struct FidelityRun {
  OptimizationRecord record;  // cost = 1 - |<target|S(theta)|CSS>|^2
  CircuitParams params;
  double infidelity = 1.0;
};

// Minimize state infidelity to a pure target over the circuit parameters.
inline FidelityRun optimize_fidelity(const QuantumState& target, const SpinConfiguration& cfg,
                                     int m, const CmaesConfig& cma_base) {
  if (!target.is_pure()) throw std::invalid_argument("target must be a pure state");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  const CouplingMatrix coupling = coupling_matrix(cfg);
  const Hamiltonian h = build_hamiltonian(coupling, cfg.model);
  if (target.dim() != h.dim()) throw std::invalid_argument("target dimension mismatch");
  const double f_dd = mean_nn_coupling(coupling, cfg);
  const double tau_bound = 1.0 / f_dd;

  const CmaesConfig cma = detail::entangler_cma(cma_base, m, tau_bound);
  const QuantumState css = initial_state(h.n_spins(), 1.0);
  auto cost = [&](const Eigen::VectorXd& theta) {
    const QuantumState out =
        apply_entangler(detail::params_from(theta, m, tau_bound), h, css);
    const complexd ov = target.vector().dot(out.vector());
    return 1.0 - std::norm(ov);
  };

  FidelityRun run;
  run.record = cmaes_minimize(cost, 3 * m, cma);
  run.params = detail::params_from(run.record.best_x, m, tau_bound);
  run.infidelity = run.record.best_cost;
  return run;
}

}  // namespace spinvar
