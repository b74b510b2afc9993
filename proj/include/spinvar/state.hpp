#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <utility>
#include <variant>

#include "spinvar/linalg.hpp"

namespace spinvar {

// Pure amplitude vector or density operator, tagged. Every evolution
// operation accepts both representations.
class QuantumState {
 public:
  static QuantumState pure(Eigen::VectorXcd psi) {
    QuantumState s;
    s.n_ = n_spins_of_dim(psi.size());
    s.repr_ = std::move(psi);
    return s;
  }

  static QuantumState density(Eigen::MatrixXcd rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    QuantumState s;
    s.n_ = n_spins_of_dim(rho.rows());
    s.repr_ = std::move(rho);
    return s;
  }

  bool is_pure() const { return std::holds_alternative<Eigen::VectorXcd>(repr_); }
  int n_spins() const { return n_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_; }

  const Eigen::VectorXcd& vector() const {
    if (!is_pure()) throw std::logic_error("state is a density operator");
    return std::get<Eigen::VectorXcd>(repr_);
  }
  Eigen::VectorXcd& vector() {
    if (!is_pure()) throw std::logic_error("state is a density operator");
    return std::get<Eigen::VectorXcd>(repr_);
  }
  const Eigen::MatrixXcd& matrix() const {
    if (is_pure()) throw std::logic_error("state is a pure vector");
    return std::get<Eigen::MatrixXcd>(repr_);
  }
  Eigen::MatrixXcd& matrix() {
    if (is_pure()) throw std::logic_error("state is a pure vector");
    return std::get<Eigen::MatrixXcd>(repr_);
  }

  Eigen::MatrixXcd to_density() const {
    if (is_pure()) {
      const auto& v = vector();
      return v * v.adjoint();
    }
    return matrix();
  }

  // Diagonal of the density operator in the z basis (outcome probabilities).
  Eigen::VectorXd z_populations() const {
    if (is_pure()) return vector().cwiseAbs2();
    return matrix().diagonal().real();
  }

  double purity() const {
    if (is_pure()) return 1.0;
    return matrix().cwiseProduct(matrix().adjoint().transpose()).sum().real();
  }

  // <J_mu>
  double collective_expectation(Axis axis) const {
    if (is_pure()) {
      const auto& v = vector();
      return std::real(v.dot(apply_collective(v, n_, axis)));
    }
    return apply_collective_left(matrix(), n_, axis).trace().real();
  }

  // Norm (pure) and trace/Hermiticity/positivity (density) sanity checks.
  void validate(double tol_norm = 1e-10, double tol_psd = 1e-9) const {
    if (is_pure()) {
      if (std::abs(vector().norm() - 1.0) > tol_norm)
        throw std::runtime_error("pure state is not normalized");
      return;
    }
    const auto& rho = matrix();
    if (std::abs(rho.trace().real() - 1.0) > tol_norm)
      throw std::runtime_error("density matrix trace is not 1");
    if (hermiticity_error(rho) > tol_psd)
      throw std::runtime_error("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol_psd)
      throw std::runtime_error("density matrix has a significantly negative eigenvalue");
  }

 private:
  QuantumState() = default;
  int n_ = 0;
  std::variant<Eigen::VectorXcd, Eigen::MatrixXcd> repr_;
};

}  // namespace spinvar
