#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

// Shared low-level pieces: Pauli matrices, kronecker products, and in-place
// application of single-qubit gates and collective spin operators.
//
// Basis convention used everywhere: spin j occupies bit (n-1-j) of the basis
// index, so spin 0 is the leftmost tensor factor. Bit value 0 is |up_z>
// (s_z = +1/2), bit value 1 is |down_z>.

namespace spinvar {

using complexd = std::complex<double>;
inline constexpr complexd imag_unit{0.0, 1.0};

enum class Axis { X, Y, Z };

inline Eigen::Matrix2cd pauli_matrix(Axis a) {
  Eigen::Matrix2cd m;
  switch (a) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, -imag_unit, imag_unit, 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Single-qubit rotation exp(-i angle sigma_mu / 2).
inline Eigen::Matrix2cd rotation_2x2(Axis axis, double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return c * Eigen::Matrix2cd::Identity() - imag_unit * s * pauli_matrix(axis);
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

inline int n_spins_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("dimension is not a power of two");
  return n;
}

// Stride of spin j in the basis index.
inline Eigen::Index spin_stride(int n, int j) { return Eigen::Index{1} << (n - 1 - j); }

// psi <- (U_j) psi with U_j the 2x2 gate u acting on spin j.
inline void apply_single_qubit(Eigen::VectorXcd& psi, int n, int j, const Eigen::Matrix2cd& u) {
  const Eigen::Index stride = spin_stride(n, j);
  const Eigen::Index dim = psi.size();
  for (Eigen::Index base = 0; base < dim; base += 2 * stride)
    for (Eigen::Index k = base; k < base + stride; ++k) {
      const complexd a = psi[k], b = psi[k + stride];
      psi[k] = u(0, 0) * a + u(0, 1) * b;
      psi[k + stride] = u(1, 0) * a + u(1, 1) * b;
    }
}

// rho <- (U_j) rho (U_j)^dagger.
inline void conjugate_single_qubit(Eigen::MatrixXcd& rho, int n, int j, const Eigen::Matrix2cd& u) {
  const Eigen::Index stride = spin_stride(n, j);
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index col = 0; col < dim; ++col)
    for (Eigen::Index base = 0; base < dim; base += 2 * stride)
      for (Eigen::Index k = base; k < base + stride; ++k) {
        const complexd a = rho(k, col), b = rho(k + stride, col);
        rho(k, col) = u(0, 0) * a + u(0, 1) * b;
        rho(k + stride, col) = u(1, 0) * a + u(1, 1) * b;
      }
  for (Eigen::Index row = 0; row < dim; ++row)
    for (Eigen::Index base = 0; base < dim; base += 2 * stride)
      for (Eigen::Index k = base; k < base + stride; ++k) {
        const complexd a = rho(row, k), b = rho(row, k + stride);
        rho(row, k) = std::conj(u(0, 0)) * a + std::conj(u(0, 1)) * b;
        rho(row, k + stride) = std::conj(u(1, 0)) * a + std::conj(u(1, 1)) * b;
      }
}

// J_mu psi with J_mu = sum_j S_j^mu (spin-1/2 operators, S = sigma/2).
inline Eigen::VectorXcd apply_collective(const Eigen::VectorXcd& psi, int n, Axis axis) {
  const Eigen::Index dim = psi.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const complexd v = psi[b];
    if (v == complexd{0.0, 0.0}) continue;
    for (int j = 0; j < n; ++j) {
      const Eigen::Index stride = spin_stride(n, j);
      const bool down = (b & stride) != 0;
      switch (axis) {
        case Axis::X:
          out[b ^ stride] += 0.5 * v;
          break;
        case Axis::Y:
          // sigma_y |0> = i|1>, sigma_y |1> = -i|0>
          out[b ^ stride] += (down ? -imag_unit : imag_unit) * 0.5 * v;
          break;
        case Axis::Z:
          out[b] += (down ? -0.5 : 0.5) * v;
          break;
      }
    }
  }
  return out;
}

// J_mu rho (left multiplication).
inline Eigen::MatrixXcd apply_collective_left(const Eigen::MatrixXcd& rho, int n, Axis axis) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (Eigen::Index col = 0; col < rho.cols(); ++col) {
    Eigen::VectorXcd v = rho.col(col);
    out.col(col) = apply_collective(v, n, axis);
  }
  return out;
}

inline Eigen::MatrixXcd collective_operator(int n, Axis axis) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  return apply_collective_left(id, n, axis);
}

inline double hermiticity_error(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace spinvar
