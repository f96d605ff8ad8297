#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aimvqe/state.hpp"

namespace aimvqe {

enum class Axis : std::uint8_t { X, Y, Z };

char axis_letter(Axis a);

// Tensor product of single-qubit Pauli factors, stored as symplectic bit
// masks: bit q of `x` marks an X component on qubit q, bit q of `z` a Z
// component; both bits set mean Y. The empty string (both masks zero) is the
// identity. Supports qubit indices 0..63.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  PauliString() = default;
  static PauliString from_factors(const std::vector<std::pair<int, Axis>>& factors);
  static PauliString single(int qubit, Axis axis);

  void set(int qubit, Axis axis);
  std::optional<Axis> axis_at(int qubit) const;
  bool is_identity() const { return x == 0 && z == 0; }
  int width() const;         // 1 + highest qubit index, 0 for identity
  int support_size() const;  // number of non-identity factors
  int y_count() const;
  std::vector<std::pair<int, Axis>> factors() const;  // ascending qubit order
  std::string str() const;                            // e.g. "X0 Z3"

  // Relabel qubits: factor on qubit q moves to qubit permutation[q].
  PauliString relabeled(const std::vector<int>& permutation) const;

  bool operator==(const PauliString& o) const { return x == o.x && z == o.z; }
  bool operator!=(const PauliString& o) const { return !(*this == o); }
  bool operator<(const PauliString& o) const {
    return x != o.x ? x < o.x : z < o.z;
  }
};

// Qubit-wise product a*b = phase * product, phase in {1, -1, i, -i}.
std::pair<Complex, PauliString> multiply_strings(const PauliString& a,
                                                 const PauliString& b);

struct Term {
  Complex coefficient;
  PauliString string;
};

// Weighted sum of Pauli strings.
class QubitOperator {
 public:
  QubitOperator() = default;
  explicit QubitOperator(int declared_qubits) : declared_qubits_(declared_qubits) {}

  void add_term(Complex coefficient, PauliString string);
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  // Width: max(declared width, 1 + highest qubit index used).
  int num_qubits() const;
  void declare_qubits(int n);
  int declared_qubits() const { return declared_qubits_; }

  // Merge duplicate strings, drop |coefficient| < tol (with tol == 0,
  // exact cancellations are kept as single zero-coefficient terms).
  QubitOperator simplified(double tol = 1e-12) const;

  bool is_hermitian(double tol = 1e-12) const;
  double max_imag_coefficient() const;

  QubitOperator adjoint() const;
  QubitOperator scaled(Complex factor) const;
  QubitOperator operator+(const QubitOperator& o) const;
  QubitOperator operator-(const QubitOperator& o) const;
  QubitOperator operator*(const QubitOperator& o) const;  // not simplified
  QubitOperator& operator+=(const QubitOperator& o);

  QubitOperator relabeled(const std::vector<int>& permutation) const;

  // Structural equality: same term order, same strings, bit-equal coefficients.
  bool structurally_equal(const QubitOperator& o) const;

 private:
  std::vector<Term> terms_;
  int declared_qubits_ = 0;
};

// Parse the operator listing format, e.g. "(0.07335+0j) [Z0 Z1]" with terms
// joined by " +" and a line break. Throws SyntaxError with position info, or
// EmptyInput for whitespace-only text.
QubitOperator parse_operator(std::string_view text);

// Inverse of parse_operator: one term per line, " +" continuations, factors
// ascending, shortest round-trip decimals, explicit imaginary part.
std::string serialize_operator(const QubitOperator& op);

// Shortest round-trip decimal formatting used by the serializer and the CSV
// writers (kept in one place so outputs are reproducible byte-for-byte).
std::string format_double(double value);

// Dense 2^n x 2^n realization; qubit 0 indexes the least-significant bit.
// Throws TooWide for n_qubits > 12, WidthMismatch if the operator is wider
// than n_qubits.
Eigen::MatrixXcd to_matrix(const QubitOperator& op, int n_qubits);
Eigen::MatrixXcd to_matrix(const PauliString& p, int n_qubits);

// <state|op|state> (term-by-term, no matrix materialization).
Complex expectation(const QubitOperator& op, const StateVector& state);
// tr(op * rho).
Complex expectation(const QubitOperator& op, const DensityMatrix& state);
// Single-string expectations.
Complex expectation(const PauliString& p, const StateVector& state);
Complex expectation(const PauliString& p, const DensityMatrix& state);

// out += coefficient * P|psi>. `out` must have the same dimension as `psi`.
void accumulate_pauli_apply(const PauliString& p, Complex coefficient,
                            const std::vector<Complex>& psi,
                            std::vector<Complex>& out);

// |psi> -> exp(-i angle/2 P)|psi> in place. The span overload operates on any
// contiguous amplitude block (e.g. one column of a density matrix).
void apply_pauli_evolution(const PauliString& p, double angle,
                           std::span<Complex> amplitudes);
void apply_pauli_evolution(const PauliString& p, double angle, StateVector& psi);

}  // namespace aimvqe
