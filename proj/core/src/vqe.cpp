#include "aimvqe/vqe.hpp"

#include <bit>
#include <cmath>
#include <utility>

#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

namespace {

std::uint64_t derived_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t state = base;
  return splitmix64(state) ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

// Depolarizing noise applied once at the end of the circuit commutes into the
// observable: each Pauli factor on a depolarized qubit is damped by (1 - p),
// so the energy is a statevector sum with per-term damping. Valid exactly
// when the model is terminal-only.
double terminal_depolarizing_energy(const QubitOperator& op,
                                    const Circuit& circuit,
                                    const std::vector<double>& params,
                                    const NoiseModel& noise) {
  const StateVector psi = run_statevector(circuit, params);
  std::uint64_t target_mask = 0;
  for (int q : noise.targets) target_mask |= std::uint64_t{1} << q;
  const double keep = 1.0 - noise.terminal_depolarizing;
  double energy = 0.0;
  for (const Term& term : op.terms()) {
    const std::uint64_t support = term.string.x | term.string.z;
    const int damped = std::popcount(support & target_mask);
    const double factor = std::pow(keep, damped);
    energy += (term.coefficient * expectation(term.string, psi)).real() * factor;
  }
  return energy;
}

// Copy of `circuit` with every symbolic angle frozen to its bound value, so
// individual gate angles can then be nudged independently.
Circuit literalized(const Circuit& circuit, const std::vector<double>& params) {
  if (int(params.size()) != circuit.n_params()) {
    throw UnboundParameter("expected " + std::to_string(circuit.n_params()) +
                           " parameters, got " + std::to_string(params.size()));
  }
  Circuit lit(circuit.n_qubits);
  lit.gates = circuit.gates;
  for (Gate& g : lit.gates) {
    if (g.param_id >= 0) {
      g.angles[0] = g.param_scale * params[size_t(g.param_id)];
      g.param_id = -1;
      g.param_scale = 1.0;
    }
  }
  return lit;
}

}  // namespace

const char* backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::ExactStatevector: return "exact-statevector";
    case BackendKind::Sampled: return "sampled";
    case BackendKind::Density: return "density";
  }
  return "?";
}

void VqeRun::validate() const {
  if (!initial_parameters.empty() &&
      int(initial_parameters.size()) != circuit.n_params()) {
    throw DimensionMismatch(
        "initial parameter vector has " +
        std::to_string(initial_parameters.size()) + " entries, ansatz has " +
        std::to_string(circuit.n_params()));
  }
  if (backend.kind == BackendKind::Sampled && backend.shots < 1) {
    throw NonPositiveValue("sampled backend needs shots >= 1");
  }
  if (hamiltonian.num_qubits() > circuit.n_qubits) {
    throw WidthMismatch("hamiltonian acts on " +
                        std::to_string(hamiltonian.num_qubits()) +
                        " qubits, circuit has " +
                        std::to_string(circuit.n_qubits));
  }
  optimizer.validate();
}

VqeRun make_vqe_run(QubitOperator hamiltonian, const AnsatzSpec& spec) {
  VqeRun run;
  run.hamiltonian = std::move(hamiltonian);
  run.ansatz = spec;
  run.circuit = build_ansatz_circuit(spec);
  return run;
}

double evaluate_energy(const VqeRun& run, const std::vector<double>& params,
                       std::uint64_t evaluation_index) {
  std::vector<double> wrapped = params;
  wrap_angles(wrapped);
  switch (run.backend.kind) {
    case BackendKind::ExactStatevector: {
      const StateVector psi = run_statevector(run.circuit, wrapped);
      return expectation(run.hamiltonian, psi).real();
    }
    case BackendKind::Sampled: {
      const std::uint64_t seed =
          derived_seed(run.backend.seed, evaluation_index);
      return estimate_expectation_sampled(run.hamiltonian, run.circuit,
                                          wrapped, run.backend.shots, seed);
    }
    case BackendKind::Density: {
      if (run.backend.noise.terminal_only()) {
        return terminal_depolarizing_energy(run.hamiltonian, run.circuit,
                                            wrapped, run.backend.noise);
      }
      const DensityMatrix rho =
          run_density(run.circuit, wrapped, &run.backend.noise);
      return expectation(run.hamiltonian, rho).real();
    }
  }
  throw NumericalFailure("unknown backend kind");
}

std::vector<double> parameter_shift_gradient(
    const VqeRun& run, const std::vector<double>& params) {
  if (run.backend.kind != BackendKind::ExactStatevector) {
    throw UnsupportedAnsatz(
        "analytic parameter shifts need the exact backend; use the "
        "finite-difference fallback on sampled/density backends");
  }
  std::vector<double> wrapped = params;
  wrap_angles(wrapped);
  Circuit lit = literalized(run.circuit, wrapped);

  auto energy_of = [&]() {
    const StateVector psi = run_statevector(lit, {});
    return expectation(run.hamiltonian, psi).real();
  };

  // Each gate occurrence of a parameter is a rotation with a +/-1 eigenvalue
  // pair generator, so its own angle dependence is a first-harmonic cosine
  // and the two-point rule is exact; the chain rule sums occurrences with
  // their angle scales.
  std::vector<double> grad(size_t(run.circuit.n_params()), 0.0);
  const double shift = M_PI / 2.0;
  for (size_t gi = 0; gi < run.circuit.gates.size(); ++gi) {
    const Gate& symbolic = run.circuit.gates[gi];
    if (symbolic.param_id < 0) continue;
    const double base = lit.gates[gi].angles[0];
    lit.gates[gi].angles[0] = base + shift;
    const double e_plus = energy_of();
    lit.gates[gi].angles[0] = base - shift;
    const double e_minus = energy_of();
    lit.gates[gi].angles[0] = base;
    grad[size_t(symbolic.param_id)] +=
        symbolic.param_scale * 0.5 * (e_plus - e_minus);
  }
  return grad;
}

VqeOutcome run_vqe(const VqeRun& run) {
  run.validate();
  std::vector<double> initial = run.initial_parameters;
  if (initial.empty()) initial.assign(size_t(run.circuit.n_params()), 0.0);

  // The master seed re-keys every stochastic stream so replicas with
  // different master seeds are independent while staying reproducible.
  VqeRun keyed = run;
  if (keyed.backend.kind == BackendKind::Sampled) {
    keyed.backend.seed = derived_seed(run.master_seed, run.backend.seed);
  }
  OptimizerConfig opt = run.optimizer;
  if (opt.kind == OptimizerKind::Spsa) {
    opt.spsa.seed = derived_seed(run.master_seed, run.optimizer.spsa.seed);
  }
  if (opt.kind == OptimizerKind::ParameterShiftGd &&
      opt.gradient.evaluations_per_gradient < 0) {
    if (keyed.backend.kind == BackendKind::ExactStatevector) {
      long symbolic_gates = 0;
      for (const Gate& g : keyed.circuit.gates) {
        if (g.param_id >= 0) ++symbolic_gates;
      }
      opt.gradient.evaluations_per_gradient = 2 * symbolic_gates;
    } else {
      opt.gradient.evaluations_per_gradient = 2 * keyed.circuit.n_params();
    }
  }

  std::uint64_t evaluation_index = 0;
  EnergyFn energy = [&](const std::vector<double>& params) {
    return evaluate_energy(keyed, params, evaluation_index++);
  };

  GradientFn gradient;
  if (opt.kind == OptimizerKind::ParameterShiftGd) {
    if (keyed.backend.kind == BackendKind::ExactStatevector) {
      gradient = [&](const std::vector<double>& params) {
        return parameter_shift_gradient(keyed, params);
      };
    } else {
      // Central finite differences stand in where analytic shifts are
      // unsupported (documented fallback for non-exact backends).
      gradient = [&energy](const std::vector<double>& params) {
        const double h = 1e-5;
        std::vector<double> probe = params;
        std::vector<double> grad(params.size(), 0.0);
        for (size_t i = 0; i < params.size(); ++i) {
          probe[i] = params[i] + h;
          const double e_plus = energy(probe);
          probe[i] = params[i] - h;
          const double e_minus = energy(probe);
          probe[i] = params[i];
          grad[i] = (e_plus - e_minus) / (2.0 * h);
        }
        return grad;
      };
    }
  }

  VqeOutcome outcome;
  outcome.reference_energy = evaluate_energy(keyed, initial, evaluation_index++);
  outcome.trace = minimize(opt, energy, gradient, std::move(initial));
  return outcome;
}

}  // namespace aimvqe
