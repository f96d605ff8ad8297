#pragma once

#include <cstdint>
#include <vector>

#include "aimvqe/ansatz.hpp"
#include "aimvqe/circuit.hpp"
#include "aimvqe/noise.hpp"
#include "aimvqe/optimize.hpp"
#include "aimvqe/pauli.hpp"

namespace aimvqe {

enum class BackendKind { ExactStatevector, Sampled, Density };

const char* backend_kind_name(BackendKind kind);

struct BackendSpec {
  BackendKind kind = BackendKind::ExactStatevector;
  long shots = 4096;          // sampled backend
  std::uint64_t seed = 0;     // sampled backend; per-evaluation streams derive from it
  NoiseModel noise;           // density backend; default model is noiseless
};

struct VqeRun {
  QubitOperator hamiltonian;
  AnsatzSpec ansatz;
  Circuit circuit;            // synthesized (or routed) ansatz circuit
  BackendSpec backend;
  OptimizerConfig optimizer;
  std::vector<double> initial_parameters;  // empty -> all zeros
  std::uint64_t master_seed = 0;

  void validate() const;
};

// Convenience constructor: synthesizes the ansatz circuit for `spec`.
VqeRun make_vqe_run(QubitOperator hamiltonian, const AnsatzSpec& spec);

// Energy of the bound circuit on the configured backend. Exact and density
// backends are deterministic; the sampled backend derives its shot stream
// from (backend.seed, evaluation_index).
double evaluate_energy(const VqeRun& run, const std::vector<double>& params,
                       std::uint64_t evaluation_index = 0);

// Two-point parameter-shift rule, exact for circuits whose parameters enter
// only through Pauli evolutions and single-qubit rotations: component i is
// (E(theta_i + pi/2) - E(theta_i - pi/2)) / 2. Only the exact backend
// supports analytic shifts here; other backends raise UnsupportedAnsatz and
// callers fall back to finite differences.
std::vector<double> parameter_shift_gradient(const VqeRun& run,
                                             const std::vector<double>& params);

struct VqeOutcome {
  ConvergenceTrace trace;
  double reference_energy = 0.0;  // energy at the initial parameters
};

// Full optimization loop; fully reproducible from (run, master_seed).
VqeOutcome run_vqe(const VqeRun& run);

}  // namespace aimvqe
