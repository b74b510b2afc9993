#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinvar/ensemble.hpp"
#include "spinvar/linalg.hpp"
#include "spinvar/ode.hpp"
#include "spinvar/state.hpp"

// Exact quantum evolution: global rotations, interaction gates, the m-layer
// entangler, Markovian dephasing during preparation, and the non-Markovian
// time-local master equation used for Ramsey propagation.

namespace spinvar {

// theta = (tau_1, vartheta_1, tau'_1, ..., tau_m, vartheta_m, tau'_m),
// interaction times in seconds within [0, tau_bound], angles in radians.
struct CircuitParams {
  int m = 0;
  Eigen::VectorXd theta;
  double tau_bound = 0.0;  // 1 / f_dd

  double tau(int layer) const { return theta[3 * layer]; }
  double angle(int layer) const { return theta[3 * layer + 1]; }
  double tau_prime(int layer) const { return theta[3 * layer + 2]; }

  void validate() const {
    if (theta.size() != 3 * m) throw std::invalid_argument("theta must have 3m entries");
    for (int i = 0; i < m; ++i) {
      if (tau(i) < 0.0 || tau(i) > tau_bound || tau_prime(i) < 0.0 || tau_prime(i) > tau_bound)
        throw std::invalid_argument("interaction time outside [0, tau_bound]");
      if (angle(i) < 0.0 || angle(i) >= constants::two_pi)
        throw std::invalid_argument("rotation angle outside [0, 2pi)");
    }
  }
};

// Initialization fidelity, dephasing during the entangler, readout fidelity.
struct PrepNoiseSpec {
  double init_fidelity = 1.0;                               // (N_up - N_down)/N in [-1, 1]
  double t2_prep = std::numeric_limits<double>::infinity();  // seconds
  double readout_fidelity = 1.0;                            // 1 - p(flip) in [0.5, 1]

  bool noiseless_prep() const { return init_fidelity == 1.0 && std::isinf(t2_prep); }

  void validate() const {
    if (init_fidelity < -1.0 || init_fidelity > 1.0)
      throw std::invalid_argument("init fidelity outside [-1, 1]");
    if (readout_fidelity < 0.5 || readout_fidelity > 1.0)
      throw std::invalid_argument("readout fidelity outside [0.5, 1]");
    if (!(t2_prep > 0.0)) throw std::invalid_argument("T2_prep must be positive");
  }
};

// R_mu(angle) = exp(-i angle J_mu), a product of identical single-qubit rotations.
inline QuantumState global_rotation(QuantumState state, Axis axis, double angle) {
  const Eigen::Matrix2cd u = rotation_2x2(axis, angle);
  const int n = state.n_spins();
  if (state.is_pure()) {
    for (int j = 0; j < n; ++j) apply_single_qubit(state.vector(), n, j, u);
  } else {
    for (int j = 0; j < n; ++j) conjugate_single_qubit(state.matrix(), n, j, u);
  }
  return state;
}

// Ramsey phase accumulation exp(-i phi J_y).
inline QuantumState ramsey_phase(QuantumState state, double phi) {
  return global_rotation(std::move(state), Axis::Y, phi);
}

// D(tau) = exp(-i tau H) through the cached eigendecomposition.
inline QuantumState interaction_evolution(QuantumState state, const Hamiltonian& h, double tau) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (state.dim() != h.dim()) throw std::invalid_argument("state/Hamiltonian dimension mismatch");
  const auto& v = h.eigenvectors();
  const auto& lam = h.eigenvalues();
  Eigen::VectorXcd phase(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    phase[k] = std::exp(-imag_unit * tau * lam[k]);
  if (state.is_pure()) {
    Eigen::VectorXcd w = v.adjoint() * state.vector();
    w.array() *= phase.array();
    state.vector() = v * w;
  } else {
    Eigen::MatrixXcd a = v.adjoint() * state.matrix() * v;
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) *= phase[r] * std::conj(phase[c]);
    state.matrix() = v * a * v.adjoint();
  }
  return state;
}

// IF = 1 gives the pure +x coherent spin state; IF < 1 the product density
// rho_i = (I + IF sigma_x)/2 per spin.
inline QuantumState initial_state(int n, double init_fidelity = 1.0) {
  if (n < 1) throw std::invalid_argument("need at least one spin");
  if (init_fidelity < -1.0 || init_fidelity > 1.0)
    throw std::invalid_argument("init fidelity outside [-1, 1]");
  if (init_fidelity == 1.0) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(dim, std::pow(2.0, -0.5 * n));
    return QuantumState::pure(std::move(psi));
  }
  Eigen::Matrix2cd one = 0.5 * (Eigen::Matrix2cd::Identity() + init_fidelity * pauli_matrix(Axis::X));
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < n; ++i) rho = kron(rho, one);
  return QuantumState::density(std::move(rho));
}

// drho/dt = -i[H, rho] + gamma_z sum_i (Z_i rho Z_i - rho), gamma_z = 1/(2 T2)
// so a lone spin's coherence decays as exp(-t/T2). The dephasing superoperator
// is diagonal in the z basis: entry (a, b) scales by -2 gamma_z h(a xor b)
// with h the Hamming weight.
inline QuantumState lindblad_dephasing_propagate(QuantumState state, const Hamiltonian& h,
                                                 double gamma_z, double duration,
                                                 const OdeOptions& opt = {}) {
  if (!(gamma_z >= 0.0)) throw std::invalid_argument("gamma_z must be nonnegative");
  if (duration < 0.0) throw std::invalid_argument("duration must be nonnegative");
  if (state.is_pure()) throw std::invalid_argument("dephasing requires a density operator");
  if (duration == 0.0) return state;
  const Eigen::Index dim = state.dim();
  const auto& hm = h.matrix();

  auto rhs = [&](double, const Eigen::VectorXcd& flat) {
    Eigen::Map<const Eigen::MatrixXcd> rho(flat.data(), dim, dim);
    Eigen::MatrixXcd d = -imag_unit * (hm * rho - rho * hm);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) {
        const int hw = __builtin_popcountll(static_cast<unsigned long long>(a ^ b));
        d(a, b) -= 2.0 * gamma_z * hw * rho(a, b);
      }
    return Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(d.data(), dim * dim));
  };

  Eigen::VectorXcd flat = Eigen::Map<const Eigen::VectorXcd>(state.matrix().data(), dim * dim);
  flat = integrate_rk45(rhs, std::move(flat), 0.0, duration, opt);
  state.matrix() = Eigen::Map<const Eigen::MatrixXcd>(flat.data(), dim, dim);
  return state;
}

// Time-local master equation for uncorrelated stretched-exponential dephasing,
// gamma_z(t) = (nu/2) t^(nu-1) / T2^nu, plus the signal term
// -(i/2) omega [sigma_z^i, rho] on every spin. Integrated with RK45; the
// single-spin coherence envelope is exp(-(t/T2)^nu).
inline QuantumState nonmarkovian_propagate(QuantumState state, double omega, double t2, double nu,
                                           double t, const OdeOptions& opt = {}) {
  if (!(t2 > 0.0)) throw std::invalid_argument("T2 must be positive");
  if (nu < 1.0) throw std::invalid_argument("stretch factor nu must be >= 1");
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  if (state.is_pure()) state = QuantumState::density(state.to_density());
  if (t == 0.0) return state;
  const int n = state.n_spins();
  const Eigen::Index dim = state.dim();

  // Per-element generator: d rho_ab = [-i omega (m_a - m_b)/... - 2 gamma_z(t) h(a^b)] rho_ab
  // where m_a = sum_i s_i = (n - 2 popcount(a)) and the signal term is
  // -(i/2) omega sum_i [sigma_z^i, .] -> -(i/2) omega (m'_a - m'_b) with m' = popcount-based +-1 sums.
  auto rhs = [&](double time, const Eigen::VectorXcd& flat) {
    const double g = (nu == 1.0) ? (0.5 / t2)
                                 : (0.5 * nu * std::pow(time / t2, nu - 1.0) / t2);
    Eigen::VectorXcd d(dim * dim);
    for (Eigen::Index b = 0; b < dim; ++b)
      for (Eigen::Index a = 0; a < dim; ++a) {
        const int hw = __builtin_popcountll(static_cast<unsigned long long>(a ^ b));
        const int ma = n - 2 * __builtin_popcountll(static_cast<unsigned long long>(a));
        const int mb = n - 2 * __builtin_popcountll(static_cast<unsigned long long>(b));
        const complexd coeff = -0.5 * imag_unit * omega * static_cast<double>(ma - mb) -
                               2.0 * g * static_cast<double>(hw);
        d[b * dim + a] = coeff * flat[b * dim + a];
      }
    return d;
  };

  Eigen::VectorXcd flat = Eigen::Map<const Eigen::VectorXcd>(state.matrix().data(), dim * dim);
  flat = integrate_rk45(rhs, std::move(flat), 0.0, t, opt);
  state.matrix() = Eigen::Map<const Eigen::MatrixXcd>(flat.data(), dim, dim);
  return state;
}

// One variational layer U_i = R_y(pi/2) D(tau') R_y(-pi/2) R_x(angle) D(tau),
// rightmost gate first; the full entangler is S(theta) = U_m ... U_2 U_1.
inline QuantumState apply_entangler(const CircuitParams& params, const Hamiltonian& h,
                                    QuantumState input) {
  params.validate();
  if (input.dim() != h.dim()) throw std::invalid_argument("state/Hamiltonian dimension mismatch");
  QuantumState s = std::move(input);
  constexpr double half_pi = constants::pi / 2.0;
  for (int i = 0; i < params.m; ++i) {
    s = interaction_evolution(std::move(s), h, params.tau(i));
    s = global_rotation(std::move(s), Axis::X, params.angle(i));
    s = global_rotation(std::move(s), Axis::Y, -half_pi);
    s = interaction_evolution(std::move(s), h, params.tau_prime(i));
    s = global_rotation(std::move(s), Axis::Y, half_pi);
  }
  return s;
}

// Entangler with Markovian dephasing active during the interaction intervals;
// rotation pulses are treated as instantaneous.
inline QuantumState apply_entangler_dephasing(const CircuitParams& params, const Hamiltonian& h,
                                              QuantumState input, double gamma_z,
                                              const OdeOptions& opt = {}) {
  params.validate();
  if (input.is_pure()) input = QuantumState::density(input.to_density());
  QuantumState s = std::move(input);
  constexpr double half_pi = constants::pi / 2.0;
  for (int i = 0; i < params.m; ++i) {
    s = lindblad_dephasing_propagate(std::move(s), h, gamma_z, params.tau(i), opt);
    s = global_rotation(std::move(s), Axis::X, params.angle(i));
    s = global_rotation(std::move(s), Axis::Y, -half_pi);
    s = lindblad_dephasing_propagate(std::move(s), h, gamma_z, params.tau_prime(i), opt);
    s = global_rotation(std::move(s), Axis::Y, half_pi);
  }
  return s;
}

}  // namespace spinvar
