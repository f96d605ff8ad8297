#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aimvqe/noise.hpp"
#include "aimvqe/pauli.hpp"
#include "aimvqe/state.hpp"

namespace aimvqe {

enum class GateKind {
  U1,   // diag(1, e^{i lambda})
  U2,   // U3(pi/2, phi, lambda)
  U3,   // [[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]]
  RX,   // exp(-i t/2 X)
  RY,   // exp(-i t/2 Y)
  RZ,   // exp(-i t/2 Z)
  X,
  H,
  CNOT,  // q0 = control, q1 = target
  SWAP,
  PauliEvolution,  // exp(-i t/2 P) for a stored Pauli string
};

const char* gate_kind_name(GateKind kind);

// One circuit instruction. Angle slots hold literals; a rotation-style gate
// (U1, RX, RY, RZ, PauliEvolution) may instead bind its first angle to a
// declared parameter: angle = param_scale * value[param_id].
struct Gate {
  GateKind kind = GateKind::X;
  int q0 = -1;
  int q1 = -1;                       // second operand for CNOT / SWAP
  double angles[3] = {0.0, 0.0, 0.0};
  int param_id = -1;                 // -1 means all angles are literal
  double param_scale = 1.0;
  PauliString pauli;                 // PauliEvolution only

  bool is_two_qubit() const {
    return kind == GateKind::CNOT || kind == GateKind::SWAP;
  }
  bool is_symbolic() const { return param_id >= 0; }
};

// A gate list over a fixed register with named symbolic parameters.
// Builder methods validate operand ranges (IndexOutOfRange for bad qubits,
// UnboundParameter for an undeclared parameter id).
struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  std::vector<std::string> param_names;

  explicit Circuit(int qubits = 0);

  int n_params() const { return int(param_names.size()); }
  // Declares a new symbolic parameter and returns its id.
  int add_parameter(std::string name);

  void add_x(int q);
  void add_h(int q);
  void add_cnot(int control, int target);
  void add_swap(int a, int b);
  void add_u1(int q, double lambda);
  void add_u2(int q, double phi, double lambda);
  void add_u3(int q, double theta, double phi, double lambda);
  void add_rx(int q, double angle);
  void add_ry(int q, double angle);
  void add_rz(int q, double angle);
  // Symbolic rotations: angle = scale * value[param_id].
  void add_rx_param(int q, int param_id, double scale = 1.0);
  void add_ry_param(int q, int param_id, double scale = 1.0);
  void add_rz_param(int q, int param_id, double scale = 1.0);
  void add_pauli_evolution(const PauliString& p, double angle);
  void add_pauli_evolution_param(const PauliString& p, int param_id,
                                 double scale = 1.0);

 private:
  void check_qubit(int q) const;
  void check_param(int param_id) const;
};

// Rewrites every gate over the native set {U1, U2, U3, CNOT}:
//   RZ(a) -> U1(a)            (drops the global phase e^{-ia/2})
//   RX(a) -> U3(a, -pi/2, pi/2), RY(a) -> U3(a, 0, 0)
//   X -> U3(pi, 0, pi), H -> U2(0, pi), SWAP -> three CNOTs
//   PauliEvolution -> basis changes + CNOT ladder + U1(angle) + undo
// Symbolic bindings survive on the gate that carries the angle. A
// PauliEvolution on the identity string is a pure global phase and is dropped.
Circuit transpile_to_native(const Circuit& c);

// Gate tally by kind after transpiling to the native set.
std::map<std::string, long> count_gates(const Circuit& c);

// Applies the circuit to |0...0>. `bindings` supplies one value per declared
// parameter (UnboundParameter otherwise); WidthMismatch if a gate operand or
// evolution string exceeds the register.
StateVector run_statevector(const Circuit& c,
                            const std::vector<double>& bindings = {});

// Density-matrix run from |0...0><0...0|, at most 10 qubits (TooWide).
// With a noise model the circuit is first transpiled to native gates; after
// each gate the model's channels act on the targeted operand qubits only, and
// any terminal depolarizing acts once per target at the end. InvalidChannel
// reports a channel/operand arity mismatch.
DensityMatrix run_density(const Circuit& c,
                          const std::vector<double>& bindings = {},
                          const NoiseModel* noise = nullptr);

// rho -> sum_k K rho K^H on the given target qubits (size must match the
// channel arity; InvalidChannel otherwise).
void apply_channel(DensityMatrix& rho, const KrausChannel& channel,
                   const std::vector<int>& targets);

// Measures all qubits in the computational basis `shots` times. Keys are
// bitstrings with qubit n-1 leftmost and qubit 0 rightmost. Deterministic for
// a fixed (state, shots, seed); shots must be >= 1 (NonPositiveValue).
std::map<std::string, long> sample_counts(const StateVector& state, long shots,
                                          std::uint64_t seed);

// Shot-based estimate of <op> on the circuit's output state: terms are
// greedily packed (first fit, in term order) into qubit-wise commuting groups,
// shots are split evenly across groups (remainder to the earliest groups), and
// each group is rotated into the computational basis and sampled. Identity
// terms contribute exactly. Deterministic per seed.
double estimate_expectation_sampled(const QubitOperator& op, const Circuit& c,
                                    const std::vector<double>& bindings,
                                    long shots, std::uint64_t seed);

}  // namespace aimvqe
