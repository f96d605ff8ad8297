#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace aimvqe {

using Complex = std::complex<double>;

// Pure state over n qubits; qubit 0 is the least-significant bit of the
// computational-basis index.
struct StateVector {
  int n_qubits = 0;
  std::vector<Complex> amplitudes;

  StateVector() = default;
  explicit StateVector(int n)
      : n_qubits(n), amplitudes(std::size_t(1) << n, Complex(0.0, 0.0)) {
    amplitudes[0] = Complex(1.0, 0.0);
  }
  std::size_t dim() const { return amplitudes.size(); }
  double norm() const;
};

// Mixed state over n qubits, stored dense; same basis convention.
struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd matrix;

  DensityMatrix() = default;
  explicit DensityMatrix(int n) : n_qubits(n) {
    const Eigen::Index d = Eigen::Index(1) << n;
    matrix = Eigen::MatrixXcd::Zero(d, d);
    matrix(0, 0) = Complex(1.0, 0.0);
  }
  static DensityMatrix from_pure(const StateVector& psi);
  Eigen::Index dim() const { return matrix.rows(); }
  double trace_real() const { return matrix.trace().real(); }
};

}  // namespace aimvqe
