#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinvar/engine.hpp"
#include "spinvar/state.hpp"

// State characterization: von Neumann entropies, entanglement cluster
// partitioning, the spherical Wigner distribution on the symmetric subspace,
// the Wineland squeezing parameter, state fidelity, the interaction-cutoff
// study, preparation-time accounting and reference-state constructors.

namespace spinvar {

// Reduced density operator of the given spins (complement traced out).
inline Eigen::MatrixXcd partial_trace(const QuantumState& state, std::vector<int> subset) {
  const int n = state.n_spins();
  std::sort(subset.begin(), subset.end());
  if (subset.empty()) throw std::invalid_argument("subset must be nonempty");
  if (std::adjacent_find(subset.begin(), subset.end()) != subset.end())
    throw std::invalid_argument("duplicate spin index");
  if (subset.front() < 0 || subset.back() >= n) throw std::invalid_argument("spin index out of range");

  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(subset.begin(), subset.end(), i)) rest.push_back(i);

  const int ns = static_cast<int>(subset.size());
  const int ne = n - ns;
  const Eigen::Index ds = Eigen::Index{1} << ns, de = Eigen::Index{1} << ne;

  auto full_index = [&](Eigen::Index s, Eigen::Index e) {
    Eigen::Index z = 0;
    for (int k = 0; k < ns; ++k)
      if (s & (Eigen::Index{1} << k)) z |= spin_stride(n, subset[ns - 1 - k]);
    for (int k = 0; k < ne; ++k)
      if (e & (Eigen::Index{1} << k)) z |= spin_stride(n, rest[ne - 1 - k]);
    return z;
  };

  Eigen::MatrixXcd rho_s = Eigen::MatrixXcd::Zero(ds, ds);
  if (state.is_pure()) {
    const auto& psi = state.vector();
    Eigen::MatrixXcd m(ds, de);
    for (Eigen::Index s = 0; s < ds; ++s)
      for (Eigen::Index e = 0; e < de; ++e) m(s, e) = psi[full_index(s, e)];
    rho_s = m * m.adjoint();
  } else {
    const auto& rho = state.matrix();
    for (Eigen::Index s = 0; s < ds; ++s)
      for (Eigen::Index t = 0; t < ds; ++t) {
        complexd acc{0.0, 0.0};
        for (Eigen::Index e = 0; e < de; ++e) acc += rho(full_index(s, e), full_index(t, e));
        rho_s(s, t) = acc;
      }
  }
  return rho_s;
}

// Entanglement entropy of a proper subset with the rest of the system, in bits.
inline double von_neumann_entropy(const QuantumState& state, const std::vector<int>& subset) {
  if (subset.empty() || static_cast<int>(subset.size()) >= state.n_spins())
    throw std::invalid_argument("subset must be nonempty and proper");
  const Eigen::MatrixXcd rho_s = partial_trace(state, subset);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_s, Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    if (lam > 1e-14) h -= lam * std::log2(lam);
  }
  return h;
}

struct ClusterPartition {
  std::vector<std::vector<int>> blocks;   // disjoint, covering 0..N-1
  std::vector<double> block_entropies;    // boundary entropy per block
  double threshold = 0.4;
  int max_block_size() const {
    std::size_t m = 0;
    for (const auto& b : blocks) m = std::max(m, b.size());
    return static_cast<int>(m);
  }
};

namespace detail {

struct PartitionSearch {
  const QuantumState& state;
  int n;
  double threshold;
  std::map<std::uint32_t, double> entropy_cache;

  double block_entropy(const std::vector<int>& block) {
    if (static_cast<int>(block.size()) == n) return 0.0;  // whole system: no boundary
    std::uint32_t mask = 0;
    for (int i : block) mask |= 1u << i;
    auto it = entropy_cache.find(mask);
    if (it != entropy_cache.end()) return it->second;
    const double h = von_neumann_entropy(state, block);
    entropy_cache.emplace(mask, h);
    return h;
  }

  bool feasible(const std::vector<std::vector<int>>& blocks) {
    for (const auto& b : blocks)
      if (block_entropy(b) > threshold) return false;
    return true;
  }

  // Canonical comparison key: (descending block sizes, then the canonical
  // flattened form with blocks ordered by smallest element).
  static std::pair<std::vector<int>, std::vector<int>> key_of(
      std::vector<std::vector<int>> blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::vector<int> sizes, flat;
    for (const auto& b : blocks) {
      flat.insert(flat.end(), b.begin(), b.end());
      flat.push_back(-1);
    }
    for (const auto& b : blocks) sizes.push_back(static_cast<int>(b.size()));
    std::sort(sizes.rbegin(), sizes.rend());
    return {sizes, flat};
  }

  std::vector<std::vector<int>> best;
  std::pair<std::vector<int>, std::vector<int>> best_key;
  bool found = false;

  void consider(const std::vector<std::vector<int>>& blocks, int level) {
    int mx = 0;
    for (const auto& b : blocks) mx = std::max<int>(mx, static_cast<int>(b.size()));
    if (mx != level) return;  // smaller max sizes were exhausted at earlier levels
    if (!feasible(blocks)) return;
    auto key = key_of(blocks);
    if (!found || key < best_key) {
      found = true;
      best = blocks;
      best_key = std::move(key);
    }
  }

  void enumerate(int next_spin, std::vector<std::vector<int>>& blocks, int cap) {
    if (next_spin == n) {
      consider(blocks, cap);
      return;
    }
    for (auto& b : blocks)
      if (static_cast<int>(b.size()) < cap) {
        b.push_back(next_spin);
        enumerate(next_spin + 1, blocks, cap);
        b.pop_back();
      }
    blocks.emplace_back(1, next_spin);
    enumerate(next_spin + 1, blocks, cap);
    blocks.pop_back();
  }
};

}  // namespace detail

// Smallest clusters whose boundary entropy with the rest stays below the
// threshold. Partitions are searched in nondecreasing max-block-size order
// and the search stops at the first feasible level; ties break to the
// lexicographically smallest descending size sequence, then to the smallest
// canonical index order. The single-block partition (boundary entropy 0) makes
// the search always terminate.
inline ClusterPartition cluster_partition(const QuantumState& state, double threshold = 0.4) {
  const int n = state.n_spins();
  if (n > 12) throw std::invalid_argument("cluster search is exhaustive; N <= 12 required");
  detail::PartitionSearch search{state, n, threshold, {}, {}, {}, false};
  for (int cap = 1; cap <= n; ++cap) {
    std::vector<std::vector<int>> blocks;
    search.enumerate(0, blocks, cap);
    if (search.found) break;
  }
  ClusterPartition part;
  part.threshold = threshold;
  part.blocks = search.best;
  for (auto& b : part.blocks) std::sort(b.begin(), b.end());
  std::sort(part.blocks.begin(), part.blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& b : part.blocks) part.block_entropies.push_back(search.block_entropy(b));
  return part;
}

// ---------------------------------------------------------------------------
// Spherical Wigner distribution on the symmetric (Dicke) subspace
// ---------------------------------------------------------------------------

namespace detail {

inline double log_factorial(double x) {
  const long n = std::lround(x);
  if (n < 0) throw std::invalid_argument("negative factorial argument");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// Clebsch-Gordan coefficient <j1 m1 j2 m2 | j3 m3> (Racah's formula).
inline double clebsch_gordan(double j1, double m1, double j2, double m2, double j3, double m3) {
  if (std::abs(m1 + m2 - m3) > 1e-9) return 0.0;
  if (j3 < std::abs(j1 - j2) - 1e-9 || j3 > j1 + j2 + 1e-9) return 0.0;
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 || std::abs(m3) > j3 + 1e-9) return 0.0;

  const double pref =
      0.5 * (std::log(2.0 * j3 + 1.0) + log_factorial(j1 + j2 - j3) + log_factorial(j1 - j2 + j3) +
             log_factorial(-j1 + j2 + j3) - log_factorial(j1 + j2 + j3 + 1.0) +
             log_factorial(j1 + m1) + log_factorial(j1 - m1) + log_factorial(j2 + m2) +
             log_factorial(j2 - m2) + log_factorial(j3 + m3) + log_factorial(j3 - m3));

  const long k_min = std::lround(std::max({0.0, j2 - j3 - m1, j1 + m2 - j3}));
  const long k_max = std::lround(std::min({j1 + j2 - j3, j1 - m1, j2 + m2}));
  double sum = 0.0;
  for (long k = k_min; k <= k_max; ++k) {
    const double lg = log_factorial(k) + log_factorial(j1 + j2 - j3 - k) +
                      log_factorial(j1 - m1 - k) + log_factorial(j2 + m2 - k) +
                      log_factorial(j3 - j2 + m1 + k) + log_factorial(j3 - j1 - m2 + k);
    sum += ((k % 2) ? -1.0 : 1.0) * std::exp(pref - lg);
  }
  return sum;
}

// Gauss-Legendre nodes/weights on [-1, 1]; the Wigner kernel is a degree <= 2J
// spherical-harmonic expansion, so the polar quadrature is exact.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double xi = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * xi * p1 - k * p2) / (k + 1.0);
      }
      const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      const double dx = p0 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p1 = 0.0;
    p0 = 1.0;
    for (int k = 0; k < n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k + 1.0) * xi * p1 - k * p2) / (k + 1.0);
    }
    const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
    x[i] = -xi;
    x[n - 1 - i] = xi;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

inline double binom(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

}  // namespace detail

// Projection of the state onto the J = N/2 symmetric subspace, indexed by
// M = J..-J (row 0 is M = +J, i.e. zero down spins).
inline Eigen::MatrixXcd symmetric_block(const QuantumState& state) {
  const int n = state.n_spins();
  const Eigen::Index dim = state.dim();
  std::vector<std::vector<Eigen::Index>> strings(n + 1);
  for (Eigen::Index z = 0; z < dim; ++z)
    strings[__builtin_popcountll(static_cast<unsigned long long>(z))].push_back(z);

  Eigen::MatrixXcd block(n + 1, n + 1);
  if (state.is_pure()) {
    const auto& psi = state.vector();
    Eigen::VectorXcd a(n + 1);
    for (int d = 0; d <= n; ++d) {
      complexd acc{0.0, 0.0};
      for (Eigen::Index z : strings[d]) acc += psi[z];
      a[d] = acc / std::sqrt(detail::binom(n, d));
    }
    block = a * a.adjoint();
  } else {
    const auto& rho = state.matrix();
    for (int d = 0; d <= n; ++d)
      for (int e = 0; e <= n; ++e) {
        complexd acc{0.0, 0.0};
        for (Eigen::Index z : strings[d])
          for (Eigen::Index y : strings[e]) acc += rho(z, y);
        block(d, e) = acc / std::sqrt(detail::binom(n, d) * detail::binom(n, e));
      }
  }
  return block;
}

struct WignerGrid {
  std::vector<double> theta;        // polar nodes (Gauss-Legendre in cos theta)
  std::vector<double> phi;          // uniform azimuthal nodes
  std::vector<double> polar_weight; // quadrature weights for the theta nodes
  Eigen::MatrixXd values;           // theta x phi
  double trace_sym = 0.0;           // weight of the symmetric subspace
  std::string convention = "symmetric-subspace projection";

  double integral() const {
    double s = 0.0;
    const double dphi = constants::two_pi / static_cast<double>(phi.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
      for (std::size_t j = 0; j < phi.size(); ++j) s += values(i, j) * polar_weight[i] * dphi;
    return s;
  }
};

// Multipole spherical Wigner function of the symmetric-subspace projection:
// W = sqrt((2J+1)/4pi) sum_kq rho_kq Y_kq with rho_kq = Tr(rho_sym T_kq^dag),
// normalized so the sphere integral equals Tr(rho_sym).
inline WignerGrid wigner_distribution(const QuantumState& state, int n_theta = 64,
                                      int n_phi = 128) {
  const int n = state.n_spins();
  const double j = 0.5 * n;
  const Eigen::MatrixXcd rho_sym = symmetric_block(state);

  // rho_kq; T_kq matrix elements <J M'|T_kq|J M> = sqrt((2k+1)/(2J+1)) <J M k q|J M'>
  std::vector<std::vector<complexd>> rho_kq(n + 1);
  for (int k = 0; k <= n; ++k) {
    rho_kq[k].assign(2 * k + 1, complexd{0.0, 0.0});
    for (int qi = 0; qi <= 2 * k; ++qi) {
      const int q = qi - k;
      complexd acc{0.0, 0.0};
      for (int row = 0; row <= n; ++row) {
        const double m_prime = j - row;
        const double m = m_prime - q;
        const int col = static_cast<int>(std::lround(j - m));
        if (col < 0 || col > n) continue;
        const double t =
            std::sqrt((2.0 * k + 1.0) / (n + 1.0)) * detail::clebsch_gordan(j, m, k, q, j, m_prime);
        acc += std::conj(complexd(t, 0.0)) * rho_sym(row, col);
      }
      rho_kq[k][qi] = acc;
    }
  }

  WignerGrid grid;
  grid.trace_sym = rho_sym.trace().real();
  std::vector<double> x, w;
  detail::gauss_legendre(n_theta, x, w);
  for (int i = 0; i < n_theta; ++i) {
    grid.theta.push_back(std::acos(x[n_theta - 1 - i]));  // ascending theta
    grid.polar_weight.push_back(w[n_theta - 1 - i]);
  }
  for (int jphi = 0; jphi < n_phi; ++jphi)
    grid.phi.push_back(constants::two_pi * jphi / n_phi);

  const double scale = std::sqrt((n + 1.0) / (4.0 * constants::pi));
  grid.values.resize(n_theta, n_phi);
  for (int it = 0; it < n_theta; ++it) {
    const double th = grid.theta[it];
    for (int ip = 0; ip < n_phi; ++ip) {
      const double ph = grid.phi[ip];
      double val = 0.0;
      for (int k = 0; k <= n; ++k) {
        val += rho_kq[k][k].real() * std::sph_legendre(k, 0, th);
        for (int q = 1; q <= k; ++q) {
          const complexd y = std::sph_legendre(k, q, th) *
                             std::exp(imag_unit * static_cast<double>(q) * ph);
          val += 2.0 * (rho_kq[k][k + q] * y).real();
        }
      }
      grid.values(it, ip) = scale * val;
    }
  }
  return grid;
}

// Wineland parameter xi^2 = N (dJ_y)^2 / <J_x>^2 for x-polarized, y-squeezed
// states; undefined (raises) when the mean spin vanishes.
inline double squeezing_parameter(const QuantumState& state) {
  const int n = state.n_spins();
  double jx, jy, jy2;
  if (state.is_pure()) {
    const auto& psi = state.vector();
    const Eigen::VectorXcd jx_psi = apply_collective(psi, n, Axis::X);
    const Eigen::VectorXcd jy_psi = apply_collective(psi, n, Axis::Y);
    jx = std::real(psi.dot(jx_psi));
    jy = std::real(psi.dot(jy_psi));
    jy2 = jy_psi.squaredNorm();
  } else {
    const auto& rho = state.matrix();
    const Eigen::MatrixXcd jy_rho = apply_collective_left(rho, n, Axis::Y);
    jx = apply_collective_left(rho, n, Axis::X).trace().real();
    jy = jy_rho.trace().real();
    jy2 = apply_collective_left(jy_rho, n, Axis::Y).trace().real();
  }
  if (std::abs(jx) <= 1e-9)
    throw std::runtime_error("squeezing parameter undefined: vanishing mean spin");
  const double var = jy2 - jy * jy;
  return n * var / (jx * jx);
}

// |<a|b>|^2 for pure states, <psi|rho|psi> for pure/mixed, Uhlmann fidelity
// for two density operators.
inline double state_fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
  if (a.is_pure() && b.is_pure()) return std::norm(a.vector().dot(b.vector()));
  if (a.is_pure()) return std::real(a.vector().dot(b.matrix() * a.vector()));
  if (b.is_pure()) return std::real(b.vector().dot(a.matrix() * b.vector()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix());
  const Eigen::MatrixXcd sqrt_a = es.eigenvectors() *
                                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                  es.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(sqrt_a * b.matrix() * sqrt_a);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < em.eigenvalues().size(); ++i)
    tr += std::sqrt(std::max(0.0, em.eigenvalues()[i]));
  return tr * tr;
}

// Fidelity between the entangler output and the output of the same circuit
// with every pairwise coupling below f_cutoff (Hz) set to zero.
inline double cutoff_fidelity(const SpinConfiguration& cfg, const CircuitParams& params,
                              double f_cutoff_hz) {
  const CouplingMatrix full = coupling_matrix(cfg);
  CouplingMatrix cut = full;
  for (Eigen::Index i = 0; i < cut.v.rows(); ++i)
    for (Eigen::Index k = 0; k < cut.v.cols(); ++k)
      if (std::abs(cut.v(i, k)) / constants::two_pi < f_cutoff_hz) cut.v(i, k) = 0.0;
  const Hamiltonian h_full = build_hamiltonian(full, cfg.model);
  const Hamiltonian h_cut = build_hamiltonian(cut, cfg.model);
  const QuantumState css = initial_state(cfg.n_spins(), 1.0);
  const QuantumState ref = apply_entangler(params, h_full, css);
  const QuantumState alt = apply_entangler(params, h_cut, css);
  return state_fidelity(ref, alt);
}

// Dimensionless preparation time f_dd * T with T = sum_i (tau_i + tau'_i).
inline double preparation_time(const CircuitParams& params, double f_dd_hz) {
  double total = 0.0;
  for (int i = 0; i < params.m; ++i) total += params.tau(i) + params.tau_prime(i);
  return f_dd_hz * total;
}

enum class ReferenceKind { Css, GhzX, GhzZ, Dicke };

inline ReferenceKind reference_kind_from_name(const std::string& s) {
  if (s == "css") return ReferenceKind::Css;
  if (s == "ghz-x") return ReferenceKind::GhzX;
  if (s == "ghz-z") return ReferenceKind::GhzZ;
  if (s == "dicke") return ReferenceKind::Dicke;
  throw std::invalid_argument("unknown reference state: " + s);
}

// Reference probes. ghz-z is the computational GHZ (|0..0>+|1..1>)/sqrt2;
// ghz-x is the Heisenberg-limit probe in the measurement frame of the
// exp(-i phi J_y) convention: the equal superposition of the two extremal
// J_y coherent states with quadrature phase, (|up_y..> - i |down_y..>)/sqrt2,
// whose full-z CFI at phi = 0 equals N^2 exactly. dicke is the half-filled
// Dicke state |J = N/2, M> with floor(N/2) flipped spins.
inline QuantumState reference_state(ReferenceKind kind, int n) {
  if (n < 1) throw std::invalid_argument("need at least one spin");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  switch (kind) {
    case ReferenceKind::Css:
      psi.setConstant(std::pow(2.0, -0.5 * n));
      break;
    case ReferenceKind::GhzZ:
      psi[0] = psi[dim - 1] = 1.0 / std::sqrt(2.0);
      break;
    case ReferenceKind::GhzX: {
      // amplitudes (i^|z| - i (-i)^|z|) / 2^{(n+1)/2}
      const double norm = std::pow(2.0, -0.5 * (n + 1));
      const complexd iu = imag_unit;
      for (Eigen::Index z = 0; z < dim; ++z) {
        const int d = __builtin_popcountll(static_cast<unsigned long long>(z));
        complexd up = 1.0, dn = 1.0;
        for (int k = 0; k < (d % 4); ++k) {
          up *= iu;
          dn *= -iu;
        }
        psi[z] = norm * (up - iu * dn);
      }
      break;
    }
    case ReferenceKind::Dicke: {
      const int down = n / 2;
      const double amp = 1.0 / std::sqrt(detail::binom(n, down));
      for (Eigen::Index z = 0; z < dim; ++z)
        if (__builtin_popcountll(static_cast<unsigned long long>(z)) == down) psi[z] = amp;
      break;
    }
  }
  return QuantumState::pure(std::move(psi));
}

}  // namespace spinvar
