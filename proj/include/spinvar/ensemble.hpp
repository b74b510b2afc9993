#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinvar/constants.hpp"
#include "spinvar/linalg.hpp"

// Spin configurations, pairwise dipolar couplings and system Hamiltonians.
//
// Units: positions in nanometers, gyromagnetic ratios in rad s^-1 T^-1,
// couplings V_ij in angular frequency (rad/s) so that tau * V is dimensionless
// for tau in seconds. Frequencies reported to users (f_dd) are V / 2pi in Hz.

namespace spinvar {

enum class Model { DipolarSpinHalf, NvEffective, Ising, Generic };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::DipolarSpinHalf: return "dipolar-spin-half";
    case Model::NvEffective: return "nv-effective";
    case Model::Ising: return "ising";
    case Model::Generic: return "generic";
  }
  return "?";
}

inline Model model_from_name(const std::string& s) {
  if (s == "dipolar-spin-half") return Model::DipolarSpinHalf;
  if (s == "nv-effective") return Model::NvEffective;
  if (s == "ising") return Model::Ising;
  if (s == "generic") return Model::Generic;
  throw std::invalid_argument("unknown interaction model: " + s);
}

// Ising and symmetric coupling constants (J^I, J^S) of the two-body form
// H = sum V_ij (J^I Sz Sz + J^S S.S). The spin-echo Ising model keeps
// 2 V_ij Sz Sz with no transverse terms.
struct ModelCouplings {
  double jI, jS;
};

inline ModelCouplings model_couplings(Model m) {
  switch (m) {
    case Model::DipolarSpinHalf: return {3.0, -1.0};
    case Model::NvEffective: return {2.0, -1.0};
    case Model::Ising: return {2.0, 0.0};
    case Model::Generic: throw std::invalid_argument("generic model needs explicit (jI, jS)");
  }
  throw std::invalid_argument("bad model");
}

struct SpinConfiguration {
  std::vector<Eigen::Vector3d> positions;  // nm
  std::vector<double> gamma;               // rad s^-1 T^-1
  Eigen::Vector3d field_axis{0.0, 0.0, 1.0};
  Model model = Model::DipolarSpinHalf;
  std::string label;
  std::optional<std::uint64_t> seed;

  int n_spins() const { return static_cast<int>(positions.size()); }

  void validate() const {
    if (positions.empty()) throw std::invalid_argument("configuration needs at least one spin");
    if (gamma.size() != positions.size())
      throw std::invalid_argument("one gyromagnetic ratio per spin required");
    if (std::abs(field_axis.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("field axis must be a unit vector");
    for (std::size_t i = 0; i < positions.size(); ++i)
      for (std::size_t j = i + 1; j < positions.size(); ++j)
        if ((positions[i] - positions[j]).norm() <= 0.0)
          throw std::invalid_argument("coincident spins");
  }
};

enum class ConfigKind { Chain, SquareLattice, Circle, Random3d };

inline const char* config_kind_name(ConfigKind k) {
  switch (k) {
    case ConfigKind::Chain: return "chain";
    case ConfigKind::SquareLattice: return "square-lattice";
    case ConfigKind::Circle: return "circle";
    case ConfigKind::Random3d: return "random-3d";
  }
  return "?";
}

inline ConfigKind config_kind_from_name(const std::string& s) {
  if (s == "chain") return ConfigKind::Chain;
  if (s == "square-lattice") return ConfigKind::SquareLattice;
  if (s == "circle") return ConfigKind::Circle;
  if (s == "random-3d") return ConfigKind::Random3d;
  throw std::invalid_argument("unknown configuration kind: " + s);
}

// Square-lattice fill order: complete growing square shells, so any n is valid.
// Shell k adds (k, 0..k-1), then (0..k-1, k), then (k, k); n = 4 is the 2x2
// square, n = 9 the 3x3 square with the first shell's order preserved.
inline Eigen::Vector2i square_lattice_site(int index) {
  int k = 0;
  while ((k + 1) * (k + 1) <= index) ++k;
  const int r = index - k * k;
  if (r < k) return {k, r};
  if (r < 2 * k) return {r - k, k};
  return {k, k};
}

inline SpinConfiguration generate_configuration(ConfigKind kind, int n, double scale,
                                                std::uint64_t seed = 0,
                                                Model model = Model::DipolarSpinHalf) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  SpinConfiguration cfg;
  cfg.model = model;
  cfg.label = config_kind_name(kind);
  switch (kind) {
    case ConfigKind::Chain:
      for (int i = 0; i < n; ++i) cfg.positions.emplace_back(i * scale, 0.0, 0.0);
      break;
    case ConfigKind::SquareLattice:
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector2i s = square_lattice_site(i);
        cfg.positions.emplace_back(s.x() * scale, s.y() * scale, 0.0);
      }
      break;
    case ConfigKind::Circle: {
      // neighbor spacing = scale; a single spin sits at the origin
      if (n == 1) {
        cfg.positions.emplace_back(0.0, 0.0, 0.0);
        break;
      }
      const double radius = scale / (2.0 * std::sin(constants::pi / n));
      for (int i = 0; i < n; ++i) {
        const double a = constants::two_pi * i / n;
        cfg.positions.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
      }
      break;
    }
    case ConfigKind::Random3d: {
      cfg.seed = seed;
      std::mt19937_64 rng(seed);
      const double box = scale * std::cbrt(static_cast<double>(n));  // constant density
      std::uniform_real_distribution<double> u(0.0, box);
      const double min_dist = 0.05 * scale;
      const int max_attempts = 1000;
      for (int attempt = 0;; ++attempt) {
        if (attempt == max_attempts)
          throw std::runtime_error("random-3d: could not draw a configuration with min pair distance");
        cfg.positions.clear();
        for (int i = 0; i < n; ++i) cfg.positions.emplace_back(u(rng), u(rng), u(rng));
        bool ok = true;
        for (int i = 0; ok && i < n; ++i)
          for (int j = i + 1; ok && j < n; ++j)
            if ((cfg.positions[i] - cfg.positions[j]).norm() < min_dist) ok = false;
        if (ok) break;
      }
      break;
    }
  }
  cfg.gamma.assign(n, constants::gamma_nv);
  cfg.validate();
  return cfg;
}

// N x N real symmetric coupling matrix in rad/s with exactly zero diagonal.
struct CouplingMatrix {
  Eigen::MatrixXd v;

  int n_spins() const { return static_cast<int>(v.rows()); }

  void validate() const {
    if (v.rows() != v.cols()) throw std::invalid_argument("coupling matrix must be square");
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > 0.0)
      throw std::invalid_argument("coupling matrix must be symmetric");
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      if (v(i, i) != 0.0) throw std::invalid_argument("coupling matrix diagonal must be zero");
  }
};

// The secular factor is (1 - 3 cos^2 beta)/2 by default; Cos1 reproduces the
// printed (1 - 3 cos beta) variant literally.
enum class AngularFactor { Cos2, Cos1 };

inline CouplingMatrix coupling_matrix(const SpinConfiguration& cfg,
                                      AngularFactor factor = AngularFactor::Cos2) {
  cfg.validate();
  const int n = cfg.n_spins();
  CouplingMatrix c;
  c.v = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d r = cfg.positions[i] - cfg.positions[j];
      const double dist_m = r.norm() * 1e-9;  // nm -> m
      const double cb = r.normalized().dot(cfg.field_axis);
      const double ang = (factor == AngularFactor::Cos2) ? (1.0 - 3.0 * cb * cb) : (1.0 - 3.0 * cb);
      // V_ij in rad/s: a single hbar so that exp(-i tau V) is dimensionless.
      const double v = constants::mu0 / (4.0 * constants::pi) * cfg.gamma[i] * cfg.gamma[j] *
                       constants::hbar / (dist_m * dist_m * dist_m) * ang / 2.0;
      c.v(i, j) = v;
      c.v(j, i) = v;
    }
  return c;
}

enum class NeighborRule { Distance, Coupling };

// Average nearest-neighbor interaction strength f_dd in Hz. The neighbor of
// spin i is the closest spin by Euclidean distance (a |V|-nearest variant is
// exposed because V vanishes at the magic angle).
inline double mean_nn_coupling(const CouplingMatrix& coupling, const SpinConfiguration& cfg,
                               NeighborRule rule = NeighborRule::Distance) {
  const int n = cfg.n_spins();
  if (n < 2) throw std::invalid_argument("mean_nn_coupling undefined for a single spin");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double best_key = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double key = (rule == NeighborRule::Distance)
                             ? (cfg.positions[i] - cfg.positions[j]).norm()
                             : -std::abs(coupling.v(i, j));
      if (best < 0 || key < best_key) {
        best = j;
        best_key = key;
      }
    }
    acc += std::abs(coupling.v(i, best)) / constants::two_pi;
  }
  return acc / n;
}

// Dense Hermitian matrix on the 2^N Hilbert space with a cached
// eigendecomposition used for exp(-i tau H).
class Hamiltonian {
 public:
  Hamiltonian(Eigen::MatrixXcd matrix, Model model) : model_(model), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("Hamiltonian must be square");
    n_ = n_spins_of_dim(matrix_.rows());
    const double scale = std::max(matrix_.cwiseAbs().maxCoeff(), 1.0);
    if (hermiticity_error(matrix_) > 1e-12 * scale)
      throw std::invalid_argument("Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_);
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
  }

  int n_spins() const { return n_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  Model model() const { return model_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }

 private:
  Model model_;
  int n_ = 0;
  Eigen::MatrixXcd matrix_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
};

inline Eigen::MatrixXcd two_body_interaction_matrix(const CouplingMatrix& coupling, double jI,
                                                    double jS) {
  const int n = coupling.n_spins();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  // Diagonal part: (jI + jS) sum V_ij Sz_i Sz_j
  for (Eigen::Index b = 0; b < dim; ++b) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double szi = (b & spin_stride(n, i)) ? -0.5 : 0.5;
      for (int j = i + 1; j < n; ++j) {
        const double szj = (b & spin_stride(n, j)) ? -0.5 : 0.5;
        e += (jI + jS) * coupling.v(i, j) * szi * szj;
      }
    }
    h(b, b) = e;
  }
  // Transverse part: jS sum V_ij (Sx Sx + Sy Sy) = jS/2 sum V_ij (S+S- + S-S+)
  if (jS != 0.0) {
    for (Eigen::Index b = 0; b < dim; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const Eigen::Index si = spin_stride(n, i), sj = spin_stride(n, j);
          const bool di = (b & si) != 0, dj = (b & sj) != 0;
          if (di != dj) h(b ^ si ^ sj, b) += 0.5 * jS * coupling.v(i, j);
        }
  }
  return h;
}

inline Hamiltonian build_hamiltonian(const CouplingMatrix& coupling, Model model) {
  coupling.validate();
  const ModelCouplings mc = model_couplings(model);
  return Hamiltonian(two_body_interaction_matrix(coupling, mc.jI, mc.jS), model);
}

inline Hamiltonian build_hamiltonian_generic(const CouplingMatrix& coupling, double jI, double jS) {
  coupling.validate();
  return Hamiltonian(two_body_interaction_matrix(coupling, jI, jS), Model::Generic);
}

}  // namespace spinvar
