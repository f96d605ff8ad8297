#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "aimvqe/circuit.hpp"
#include "aimvqe/errors.hpp"
#include "aimvqe/noise.hpp"
#include "aimvqe/rng.hpp"
#include "test_util.hpp"

using namespace aimvqe;

namespace {

DensityMatrix plus_state() {
  DensityMatrix rho;
  rho.n_qubits = 1;
  rho.matrix = Eigen::MatrixXcd::Constant(2, 2, Complex(0.5, 0.0));
  return rho;
}

DensityMatrix single_qubit(const Eigen::Matrix2cd& m) {
  DensityMatrix rho;
  rho.n_qubits = 1;
  rho.matrix = m;
  return rho;
}

// Hermitian operator basis spanning all 2x2 matrices over C by linearity;
// agreement of two channels on these four inputs implies equal superoperators.
std::vector<Eigen::Matrix2cd> hermitian_basis() {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd e00, e11, h1, h2;
  e00 << 1, 0, 0, 0;
  e11 << 0, 0, 0, 1;
  h1 << 0, 1, 1, 0;
  h2 << 0, i, -i, 0;
  return {e00, e11, h1, h2};
}

Eigen::MatrixXcd chain(const std::vector<KrausChannel>& channels,
                       const Eigen::Matrix2cd& input) {
  DensityMatrix rho = single_qubit(input);
  for (const auto& ch : channels) {
    apply_channel(rho, ch, {0});
  }
  return rho.matrix;
}

}  // namespace

TEST_CASE("thermal relaxation matches the closed form on a superposition") {
  const auto golden = testutil::load_golden();
  const double want_offdiag =
      testutil::golden_value(golden, "thermal_plus_offdiag");

  const KrausChannel ch = thermal_relaxation_channel(50.0, 70.0, 100.0);
  CHECK(ch.completeness_defect() <= 1e-12);

  DensityMatrix rho = plus_state();
  apply_channel(rho, ch, {0});
  CHECK(rho.matrix(0, 1).real() == doctest::Approx(want_offdiag).epsilon(1e-12));
  CHECK(std::abs(rho.matrix(0, 1).imag()) <= 1e-15);
  // Coherences decay by e^{-d/T2} exactly.
  CHECK(rho.matrix(0, 1).real() ==
        doctest::Approx(0.5 * std::exp(-0.1 / 70.0)).epsilon(1e-12));
  // Populations relax toward |0> with the T1 factor.
  CHECK(rho.matrix(1, 1).real() ==
        doctest::Approx(0.5 * std::exp(-0.1 / 50.0)).epsilon(1e-12));
  CHECK(rho.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("thermal relaxation validates its arguments") {
  CHECK_THROWS_AS(thermal_relaxation_channel(50.0, 101.0, 100.0), InvalidT2);
  CHECK_THROWS_AS(thermal_relaxation_channel(50.0, 0.0, 100.0), InvalidT2);
  CHECK_THROWS_AS(thermal_relaxation_channel(50.0, -3.0, 100.0), InvalidT2);
  CHECK_THROWS_AS(thermal_relaxation_channel(0.0, 70.0, 100.0), InvalidT2);
  CHECK_THROWS_AS(thermal_relaxation_channel(-1.0, 70.0, 100.0), InvalidT2);
  CHECK_THROWS_AS(thermal_relaxation_channel(50.0, 70.0, -1.0),
                  NonPositiveValue);
  CHECK_NOTHROW(thermal_relaxation_channel(50.0, 100.0, 100.0));  // T2 = 2 T1
}

TEST_CASE("zero duration is the identity channel") {
  const KrausChannel ch = thermal_relaxation_channel(50.0, 70.0, 0.0);
  Rng rng(11);
  Eigen::Matrix2cd m;
  m << Complex(rng.uniform(), 0.0), Complex(rng.uniform(), rng.uniform()),
      0.0, Complex(rng.uniform(), 0.0);
  m(1, 0) = std::conj(m(0, 1));
  DensityMatrix rho = single_qubit(m);
  apply_channel(rho, ch, {0});
  CHECK((rho.matrix - m).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("the ground state is a fixed point of thermal relaxation") {
  Eigen::Matrix2cd e00;
  e00 << 1, 0, 0, 0;
  DensityMatrix rho = single_qubit(e00);
  apply_channel(rho, thermal_relaxation_channel(50.0, 70.0, 5000.0), {0});
  CHECK((rho.matrix - e00).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("T2 at the 2*T1 boundary leaves only amplitude damping") {
  DensityMatrix rho = plus_state();
  apply_channel(rho, thermal_relaxation_channel(50.0, 100.0, 100.0), {0});
  CHECK(rho.matrix(0, 1).real() ==
        doctest::Approx(0.5 * std::exp(-0.1 / 100.0)).epsilon(1e-12));
}

TEST_CASE("thermal relaxation composes over durations") {
  const auto half = thermal_relaxation_channel(50.0, 70.0, 60.0);
  const auto full = thermal_relaxation_channel(50.0, 70.0, 120.0);
  for (const auto& input : hermitian_basis()) {
    const Eigen::MatrixXcd twice = chain({half, half}, input);
    const Eigen::MatrixXcd once = chain({full}, input);
    CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("depolarizing mixes toward the maximally mixed state") {
  const KrausChannel ch = depolarizing_channel(0.1, 1);
  CHECK(ch.completeness_defect() <= 1e-12);
  Eigen::Matrix2cd e00;
  e00 << 1, 0, 0, 0;
  DensityMatrix rho = single_qubit(e00);
  apply_channel(rho, ch, {0});
  CHECK(rho.matrix(0, 0).real() == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(rho.matrix(1, 1).real() == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(std::abs(rho.matrix(0, 1)) <= 1e-15);

  // Unital: the maximally mixed state is fixed.
  DensityMatrix mixed = single_qubit(Eigen::Matrix2cd::Identity() * 0.5);
  apply_channel(mixed, depolarizing_channel(0.7, 1), {0});
  CHECK((mixed.matrix - Eigen::Matrix2cd::Identity() * 0.5)
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
}

TEST_CASE("depolarizing composes by survival probabilities") {
  const auto a = depolarizing_channel(0.1, 1);
  const auto b = depolarizing_channel(0.25, 1);
  const auto combined = depolarizing_channel(1.0 - 0.9 * 0.75, 1);
  for (const auto& input : hermitian_basis()) {
    CHECK((chain({a, b}, input) - chain({combined}, input))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("two-qubit depolarizing acts on the full pair") {
  const KrausChannel ch = depolarizing_channel(0.2, 2);
  CHECK(ch.operators.size() == 16);
  CHECK(ch.completeness_defect() <= 1e-12);

  // Bell state: rho -> 0.8 rho + 0.2 I/4.
  Circuit bell(2);
  bell.add_h(0);
  bell.add_cnot(0, 1);
  DensityMatrix rho = run_density(bell);
  const Eigen::MatrixXcd pure = rho.matrix;
  apply_channel(rho, ch, {0, 1});
  const Eigen::MatrixXcd want =
      0.8 * pure + 0.2 * Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  CHECK((rho.matrix - want).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("depolarizing validates probability and width") {
  CHECK_THROWS_AS(depolarizing_channel(-0.01, 1), ProbabilityOutOfRange);
  CHECK_THROWS_AS(depolarizing_channel(1.01, 1), ProbabilityOutOfRange);
  CHECK_THROWS_AS(depolarizing_channel(0.1, 3), InvalidChannel);
  CHECK_NOTHROW(depolarizing_channel(0.0, 1));
  CHECK_NOTHROW(depolarizing_channel(1.0, 2));
}

TEST_CASE("channel application validates targets") {
  Circuit c(2);
  c.add_h(0);
  DensityMatrix rho = run_density(c);
  const auto one = depolarizing_channel(0.1, 1);
  const auto two = depolarizing_channel(0.1, 2);
  CHECK_THROWS_AS(apply_channel(rho, one, {0, 1}), InvalidChannel);
  CHECK_THROWS_AS(apply_channel(rho, two, {0}), InvalidChannel);
  CHECK_THROWS_AS(apply_channel(rho, two, {1, 1}), InvalidChannel);
  CHECK_THROWS_AS(apply_channel(rho, one, {5}), IndexOutOfRange);
}

TEST_CASE("qubit time sampling is deterministic and physical") {
  const auto a = sample_qubit_times(6, 42);
  const auto b = sample_qubit_times(6, 42);
  const auto c = sample_qubit_times(6, 43);
  REQUIRE(a.size() == 6);
  bool all_equal = true, any_diff_seed = false;
  for (size_t q = 0; q < 6; ++q) {
    all_equal = all_equal && a[q].t1 == b[q].t1 && a[q].t2 == b[q].t2;
    any_diff_seed = any_diff_seed || a[q].t1 != c[q].t1;
  }
  CHECK(all_equal);
  CHECK(any_diff_seed);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto& qt : sample_qubit_times(4, seed)) {
      CHECK(qt.t1 > 0.0);
      CHECK(qt.t2 > 0.0);
      CHECK(qt.t2 <= 2.0 * qt.t1 + 1e-15);
    }
  }

  // Zero spread pins the means exactly.
  for (const auto& qt : sample_qubit_times(3, 7, 50.0, 0.0, 70.0, 0.0)) {
    CHECK(qt.t1 == 50.0);
    CHECK(qt.t2 == 70.0);
  }
}

TEST_CASE("noise model construction validates and normalizes") {
  std::vector<QubitTimes> times(4);
  NoiseModel model = build_noise_model(times, {3, 1, 1, 0}, 1.0);
  CHECK(model.targets == std::vector<int>{0, 1, 3});
  CHECK(model.is_target(1));
  CHECK_FALSE(model.is_target(2));
  CHECK(model.thermal_enabled);
  CHECK_FALSE(model.terminal_only());

  std::vector<QubitTimes> bad(2);
  bad[1].t2 = 3.0 * bad[1].t1;
  CHECK_THROWS_AS(build_noise_model(bad, {0}, 1.0), InvalidT2);
  CHECK_THROWS_AS(build_noise_model(times, {4}, 1.0), IndexOutOfRange);
  CHECK_THROWS_AS(build_noise_model(times, {-1}, 1.0), IndexOutOfRange);
  CHECK_THROWS_AS(build_noise_model(times, {0}, -0.5), NonPositiveValue);
}

TEST_CASE("duration scale compounds exponentially in circuit runs") {
  std::vector<QubitTimes> times(1);
  Circuit c(1);
  c.add_h(0);  // one U2, 50 ns

  auto offdiag_at_scale = [&](double scale) {
    NoiseModel model = build_noise_model(times, {0}, scale);
    DensityMatrix rho = run_density(c, {}, &model);
    return rho.matrix(0, 1).real();
  };

  const double full = offdiag_at_scale(1.0);
  const double half = offdiag_at_scale(0.5);
  const double off = offdiag_at_scale(0.0);
  CHECK(full == doctest::Approx(0.5 * std::exp(-0.05 / 70.0)).epsilon(1e-12));
  // Halving every duration takes the square root of the decay factor.
  CHECK(half / 0.5 == doctest::Approx(std::sqrt(full / 0.5)).epsilon(1e-12));
  CHECK(off == doctest::Approx(0.5).epsilon(1e-14));
}
