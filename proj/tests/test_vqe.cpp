#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "aimvqe/ansatz.hpp"
#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"
#include "aimvqe/topology.hpp"
#include "aimvqe/vqe.hpp"
#include "test_util.hpp"

using namespace aimvqe;

namespace {

QubitOperator aim_6q() {
  return parse_operator(
      testutil::load_text(testutil::data_path("hamiltonians/aim_6q.txt")));
}

AnsatzSpec spec_6q(AnsatzFamily family) {
  AnsatzSpec spec;
  spec.family = family;
  spec.n_qubits = 6;
  spec.reference = {0, 1, 2, 3};
  return spec;
}

QubitOperator random_hermitian(int n_qubits, std::uint64_t seed, int n_terms) {
  Rng rng(seed);
  QubitOperator op(n_qubits);
  const std::uint64_t mask = (std::uint64_t{1} << n_qubits) - 1;
  for (int t = 0; t < n_terms; ++t) {
    PauliString p;
    p.x = rng.uniform_below(mask + 1);
    p.z = rng.uniform_below(mask + 1);
    op.add_term(Complex(rng.uniform() - 0.5, 0.0), p);
  }
  return op;
}

Circuit random_circuit(int n_qubits, int n_gates, std::uint64_t seed) {
  Rng rng(seed);
  Circuit c(n_qubits);
  for (int g = 0; g < n_gates; ++g) {
    const int kind = int(rng.uniform_below(5));
    const int q = int(rng.uniform_below(std::uint64_t(n_qubits)));
    int q2 = q;
    while (q2 == q) q2 = int(rng.uniform_below(std::uint64_t(n_qubits)));
    const double angle = (rng.uniform() - 0.5) * 5.0;
    switch (kind) {
      case 0: c.add_h(q); break;
      case 1: c.add_rx(q, angle); break;
      case 2: c.add_rz(q, angle); break;
      case 3: c.add_cnot(q, q2); break;
      default: {
        PauliString p;
        p.set(q, Axis::Y);
        p.set(q2, Axis::Z);
        c.add_pauli_evolution(p, angle);
        break;
      }
    }
  }
  return c;
}

}  // namespace

TEST_CASE("run validation") {
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::SpinConservedUCCSD));

  VqeRun bad = run;
  bad.initial_parameters = {0.1, 0.2};
  CHECK_THROWS_AS(bad.validate(), DimensionMismatch);

  bad = run;
  bad.backend.kind = BackendKind::Sampled;
  bad.backend.shots = 0;
  CHECK_THROWS_AS(bad.validate(), NonPositiveValue);

  bad = run;
  bad.circuit = Circuit(4);
  CHECK_THROWS_AS(bad.validate(), WidthMismatch);

  CHECK_NOTHROW(run.validate());
  CHECK(run.circuit.n_params() == 24);  // 6 singles + 18 parity-conserving doubles
}

TEST_CASE("identity Hamiltonian evaluates to its coefficient on every backend") {
  QubitOperator identity(2);
  identity.add_term(Complex(0.625, 0.0), PauliString{});
  VqeRun run;
  run.hamiltonian = identity;
  run.circuit = Circuit(2);
  run.circuit.add_h(0);
  run.circuit.add_cnot(0, 1);

  run.backend.kind = BackendKind::ExactStatevector;
  CHECK(evaluate_energy(run, {}) == doctest::Approx(0.625).epsilon(1e-14));
  run.backend.kind = BackendKind::Sampled;
  run.backend.shots = 64;
  CHECK(evaluate_energy(run, {}) == doctest::Approx(0.625).epsilon(1e-14));
  run.backend.kind = BackendKind::Density;
  CHECK(evaluate_energy(run, {}) == doctest::Approx(0.625).epsilon(1e-14));
}

TEST_CASE("identity Hamiltonian converges immediately") {
  QubitOperator identity(6);
  identity.add_term(Complex(-1.5, 0.0), PauliString{});
  VqeRun run = make_vqe_run(identity, spec_6q(AnsatzFamily::GeneralizedUCCS));
  const VqeOutcome out = run_vqe(run);
  CHECK(out.trace.final.converged);
  CHECK(out.trace.final.energy == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(out.trace.iterations.size() == 1);
  CHECK(out.trace.final.reason == "gradient norm below tolerance");
}

TEST_CASE("zero parameters reproduce the Hartree-Fock reference energy") {
  const auto golden = testutil::load_golden();
  const double hf = testutil::golden_value(golden, "aim_6q_hf_energy");
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::SpinConservedUCCSD));
  const std::vector<double> zeros(size_t(run.circuit.n_params()), 0.0);
  CHECK(evaluate_energy(run, zeros) == doctest::Approx(hf).epsilon(1e-12));

  // Wrapping is part of the evaluation contract: a full turn changes nothing.
  std::vector<double> shifted = zeros;
  shifted[3] = 2.0 * M_PI;
  CHECK(evaluate_energy(run, shifted) ==
        doctest::Approx(evaluate_energy(run, zeros)).epsilon(1e-12));
}

TEST_CASE("variational bound holds over 200 random parameter draws") {
  const auto golden = testutil::load_golden();
  const double e0 = testutil::golden_value(golden, "aim_6q_e0");
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCSD));
  Rng rng(404);
  std::vector<double> params(size_t(run.circuit.n_params()));
  for (int draw = 0; draw < 200; ++draw) {
    for (double& p : params) p = (rng.uniform() - 0.5) * 2.0 * M_PI;
    CHECK(evaluate_energy(run, params) >= e0 - 1e-10);
  }
}

TEST_CASE("parameter-shift gradient matches finite differences") {
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::SpinConservedUCCSD));
  Rng rng(11);
  std::vector<double> params(size_t(run.circuit.n_params()));
  for (double& p : params) p = (rng.uniform() - 0.5) * 1.0;

  const std::vector<double> analytic = parameter_shift_gradient(run, params);
  const double h = 1e-5;
  std::vector<double> probe = params;
  for (size_t i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + h;
    const double e_plus = evaluate_energy(run, probe);
    probe[i] = params[i] - h;
    const double e_minus = evaluate_energy(run, probe);
    probe[i] = params[i];
    CHECK(analytic[i] ==
          doctest::Approx((e_plus - e_minus) / (2.0 * h)).epsilon(1e-5));
  }
}

TEST_CASE("parameter-shift gradient matches finite differences for the "
          "hardware-efficient ansatz") {
  AnsatzSpec spec = spec_6q(AnsatzFamily::EfficientSU2);
  spec.reps = 1;
  VqeRun run = make_vqe_run(aim_6q(), spec);
  Rng rng(12);
  std::vector<double> params(size_t(run.circuit.n_params()));
  for (double& p : params) p = (rng.uniform() - 0.5) * 2.0;

  const std::vector<double> analytic = parameter_shift_gradient(run, params);
  const double h = 1e-5;
  std::vector<double> probe = params;
  for (size_t i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + h;
    const double e_plus = evaluate_energy(run, probe);
    probe[i] = params[i] - h;
    const double e_minus = evaluate_energy(run, probe);
    probe[i] = params[i];
    CHECK(analytic[i] ==
          doctest::Approx((e_plus - e_minus) / (2.0 * h)).epsilon(1e-5));
  }
}

TEST_CASE("gradient edge cases") {
  VqeRun run = make_vqe_run(QubitOperator(6),
                            spec_6q(AnsatzFamily::SpinConservedUCCSD));
  const std::vector<double> zeros(size_t(run.circuit.n_params()), 0.0);
  for (double g : parameter_shift_gradient(run, zeros)) CHECK(g == 0.0);

  VqeRun sampled = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCS));
  sampled.backend.kind = BackendKind::Sampled;
  CHECK_THROWS_AS(parameter_shift_gradient(
                      sampled, std::vector<double>(15, 0.0)),
                  UnsupportedAnsatz);
}

TEST_CASE("UCCSD on the exact backend reaches the ground state") {
  const auto golden = testutil::load_golden();
  const double e0 = testutil::golden_value(golden, "aim_6q_e0");
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCSD));
  const VqeOutcome out = run_vqe(run);

  CHECK(out.trace.final.converged);
  CHECK(out.trace.iterations.size() <= 300);
  const double rel_err = std::abs(out.trace.final.energy - e0) / std::abs(e0);
  MESSAGE("relative error " << rel_err << " after "
                            << out.trace.iterations.size() << " iterations");
  CHECK(rel_err <= 0.005);

  // Every traced energy respects the variational bound and the best-so-far
  // envelope is non-increasing.
  double best = std::numeric_limits<double>::infinity();
  int prev_iteration = -1;
  for (const IterationRecord& rec : out.trace.iterations) {
    CHECK(rec.energy >= e0 - 1e-10);
    CHECK(rec.iteration > prev_iteration);
    prev_iteration = rec.iteration;
    const double prev_best = best;
    best = std::min(best, rec.energy);
    CHECK(best <= prev_best);
  }
  for (double p : out.trace.final.parameters) {
    CHECK(p > -M_PI);
    CHECK(p <= M_PI);
  }
  // Stationarity at the optimum.
  const std::vector<double> grad =
      parameter_shift_gradient(run, out.trace.final.parameters);
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  CHECK(std::sqrt(norm) <= 1e-5);
  // The reference energy is the Hartree-Fock starting point.
  CHECK(out.reference_energy ==
        doctest::Approx(testutil::golden_value(golden, "aim_6q_hf_energy"))
            .epsilon(1e-12));
}

TEST_CASE("sampled-backend SPSA runs are reproducible per master seed") {
  auto make = [&](std::uint64_t master) {
    VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCS));
    run.backend.kind = BackendKind::Sampled;
    run.backend.shots = 256;
    run.optimizer.kind = OptimizerKind::Spsa;
    run.optimizer.spsa.max_iterations = 40;
    run.master_seed = master;
    return run_vqe(run);
  };
  const VqeOutcome a = make(3);
  const VqeOutcome b = make(3);
  const VqeOutcome c = make(4);
  REQUIRE(a.trace.iterations.size() == 40);
  REQUIRE(b.trace.iterations.size() == 40);
  bool differs = false;
  for (size_t i = 0; i < 40; ++i) {
    CHECK(a.trace.iterations[i].energy == b.trace.iterations[i].energy);
    CHECK(a.trace.iterations[i].parameter_hash ==
          b.trace.iterations[i].parameter_hash);
    differs = differs || a.trace.iterations[i].parameter_hash !=
                             c.trace.iterations[i].parameter_hash;
  }
  CHECK(a.trace.final.energy == b.trace.final.energy);
  CHECK(differs);
  CHECK_FALSE(a.trace.final.converged);
}

TEST_CASE("sampled evaluations draw independent shot streams per index") {
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCS));
  run.backend.kind = BackendKind::Sampled;
  run.backend.shots = 128;
  const std::vector<double> params(15, 0.3);
  const double e0a = evaluate_energy(run, params, 0);
  const double e0b = evaluate_energy(run, params, 0);
  const double e1 = evaluate_energy(run, params, 1);
  CHECK(e0a == e0b);
  CHECK(e0a != e1);
}

TEST_CASE("SPSA accepts a 10000-iteration budget on 6 qubits") {
  VqeRun run = make_vqe_run(aim_6q(), spec_6q(AnsatzFamily::GeneralizedUCCS));
  run.backend.kind = BackendKind::Sampled;
  run.backend.shots = 128;
  run.optimizer.kind = OptimizerKind::Spsa;
  run.optimizer.spsa.max_iterations = 10000;
  const VqeOutcome out = run_vqe(run);
  CHECK(out.trace.iterations.size() == 10000);
  CHECK(out.trace.final.total_evaluations == 2 * 10000 + 1);
  CHECK(out.trace.final.energy < out.reference_energy);
  MESSAGE("SPSA 10000 iterations, final energy " << out.trace.final.energy);
}

TEST_CASE("terminal depolarizing fast path agrees with the density simulation") {
  const QubitOperator op = random_hermitian(4, 909, 10);
  const Circuit c = random_circuit(4, 25, 910);

  NoiseModel noise;
  noise.thermal_enabled = false;
  noise.targets = {0, 2};
  noise.terminal_depolarizing = 0.37;
  REQUIRE(noise.terminal_only());

  VqeRun run;
  run.hamiltonian = op;
  run.circuit = c;
  run.backend.kind = BackendKind::Density;
  run.backend.noise = noise;
  const double fast = evaluate_energy(run, {});

  const DensityMatrix rho = run_density(c, {}, &noise);
  const double direct = expectation(op, rho).real();
  CHECK(fast == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("terminal depolarizing on a Bell pair damps ZZ by (1-p) squared") {
  QubitOperator zz(2);
  zz.add_term(Complex(1.0, 0.0),
              PauliString::from_factors({{0, Axis::Z}, {1, Axis::Z}}));
  Circuit bell(2);
  bell.add_h(0);
  bell.add_cnot(0, 1);

  NoiseModel noise;
  noise.thermal_enabled = false;
  noise.targets = {0, 1};
  noise.terminal_depolarizing = 0.2;

  VqeRun run;
  run.hamiltonian = zz;
  run.circuit = bell;
  run.backend.kind = BackendKind::Density;
  run.backend.noise = noise;
  CHECK(evaluate_energy(run, {}) == doctest::Approx(0.8 * 0.8).epsilon(1e-12));
}

// Thermal noise confined to one site pair of the routed circuit: relaxation
// on the bath pair costs more energy than on either impurity pair, and the
// two impurity pairs behave similarly.
TEST_CASE("noise location ordering: bath exceeds both impurities") {
  const auto golden = testutil::load_golden();
  const double e0 = testutil::golden_value(golden, "aim_6q_e0");
  const QubitOperator h = aim_6q();
  const CouplingMap map = default_heavy_hex_map();
  const Placement config_b = preset_placements(map).config_b;

  VqeRun logical = make_vqe_run(h, spec_6q(AnsatzFamily::SpinConservedUCCSD));
  const VqeOutcome noiseless = run_vqe(logical);
  REQUIRE(noiseless.trace.final.converged);
  const std::vector<double> theta = noiseless.trace.final.parameters;

  const RoutedCircuit routed = route_circuit(logical.circuit, map, config_b);
  VqeRun physical;
  physical.hamiltonian = h.relabeled(routed.final_permutation);
  physical.ansatz = logical.ansatz;
  physical.circuit = routed.circuit;
  physical.backend.kind = BackendKind::Density;

  const std::vector<std::vector<int>> logical_pairs = {{0, 1}, {2, 3}, {4, 5}};
  double mean_error[3];
  for (int g = 0; g < 3; ++g) {
    std::vector<int> targets;
    for (int l : logical_pairs[g]) targets.push_back(config_b.mapping[size_t(l)]);
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      VqeRun noisy = physical;
      noisy.backend.noise =
          build_noise_model(sample_qubit_times(7, seed), targets, 1.0);
      sum += std::abs(evaluate_energy(noisy, theta) - e0);
    }
    mean_error[g] = sum / 5.0;
  }
  const double imp1 = mean_error[0], imp2 = mean_error[1], bath = mean_error[2];
  MESSAGE("mean errors: imp1=" << imp1 << " imp2=" << imp2 << " bath=" << bath);
  CHECK(bath > imp1);
  CHECK(bath > imp2);
  CHECK(std::abs(imp1 - imp2) < 0.3 * bath);
}
