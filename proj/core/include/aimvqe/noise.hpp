#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace aimvqe {

// Completely-positive trace-preserving map given by Kraus operators of equal
// dimension (2 for one qubit, 4 for two).
struct KrausChannel {
  int n_qubits = 1;
  std::vector<Eigen::MatrixXcd> operators;

  // Max |sum K^H K - I| entry; 0 for an exactly complete channel.
  double completeness_defect() const;
};

struct QubitTimes {
  double t1 = 50.0;  // microseconds
  double t2 = 70.0;  // microseconds
};

// Native-gate durations in nanoseconds. U1 is a frame change and takes no
// time; two-qubit gates default to a typical superconducting value.
struct GateDurations {
  double u1 = 0.0;
  double u2 = 50.0;
  double u3 = 100.0;
  double cnot = 300.0;
  double measure = 1000.0;
  double reset = 1000.0;
};

// Relaxation channel over one gate duration: population decay toward |0> with
// gamma = 1 - e^(-d/T1) composed with pure dephasing at rate
// 1/Tphi = 1/T2 - 1/(2 T1), so coherences decay by e^(-d/T2).
// Times in microseconds, duration in nanoseconds.
KrausChannel thermal_relaxation_channel(double t1, double t2,
                                        double duration_ns);

// rho -> (1-p) rho + p I/2^n on n in {1, 2} qubits.
KrausChannel depolarizing_channel(double p, int n_qubits);

// Per-qubit (T1, T2) draws: normal around the given means, redrawn while
// non-positive, then T2 truncated to at most 2*T1. Deterministic per seed.
std::vector<QubitTimes> sample_qubit_times(int n_qubits, std::uint64_t seed,
                                           double mean_t1 = 50.0,
                                           double sd_t1 = 10.0,
                                           double mean_t2 = 70.0,
                                           double sd_t2 = 10.0);

// Noise attached to a circuit run. Thermal relaxation acts after every native
// gate on each targeted operand qubit, for the gate's (scaled) duration.
// Optional depolarizing noise acts after one-/two-qubit gates (p1/p2) and,
// when terminal_depolarizing > 0, once per qubit at the end of the circuit.
struct NoiseModel {
  std::vector<QubitTimes> times;  // per qubit; required when thermal_enabled
  std::vector<int> targets;       // sorted qubit subset the channels act on
  double scale = 1.0;             // multiplies every duration
  GateDurations durations;
  bool thermal_enabled = true;
  double p1 = 0.0;                    // depolarizing after 1-qubit gates
  double p2 = 0.0;                    // depolarizing after 2-qubit gates
  double terminal_depolarizing = 0.0; // per-qubit depolarizing at circuit end

  bool is_target(int qubit) const;
  // True when the model is exactly "terminal depolarizing only", which admits
  // a statevector fast path.
  bool terminal_only() const;
};

// Thermal model over the given qubits: validates every pair (throws InvalidT2
// outside 0 < t2 <= 2 t1), sorts targets, applies the duration scale.
NoiseModel build_noise_model(std::vector<QubitTimes> times,
                             std::vector<int> targets, double scale);

}  // namespace aimvqe
