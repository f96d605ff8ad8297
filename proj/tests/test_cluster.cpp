#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aimvqe/cluster.hpp"
#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"
#include "test_util.hpp"

using namespace aimvqe;

namespace {

ClusterParameters reference_params() {
  ClusterParameters p;
  p.delta = 0.2104;
  p.t_pd = 0.0578;
  p.u_d = 0.2934;
  p.u_p = 0.0;
  return p;
}

double j_formula_no_up(const ClusterParameters& p) {
  const double t2 = p.t_pd * p.t_pd;
  const double t4 = t2 * t2;
  return 4.0 * t4 / (p.delta * p.delta) * (1.0 / p.u_d + 1.0 / p.delta);
}

}  // namespace

TEST_CASE("charge-transfer energy from onsite energies") {
  CHECK(derive_delta(-0.0633, -0.2842, -0.2633) ==
        doctest::Approx(0.21045).epsilon(1e-13));
  CHECK(std::abs(derive_delta(-0.0633, -0.2842, -0.2633) - 0.2104) <= 5e-4);
  CHECK(derive_delta(0, 0, 0) == 0.0);
  CHECK(derive_delta(1, -1, -1) == 2.0);

  // Golden cross-check.
  const auto g = testutil::load_golden();
  CHECK(derive_delta(-0.0633, -0.2842, -0.2633) ==
        doctest::Approx(testutil::golden_value(g, "cluster_delta_from_onsite"))
            .epsilon(1e-12));

  // Affine and symmetric in the two impurity energies.
  Rng rng(42);
  for (int i = 0; i < 20; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    CHECK(derive_delta(a, b, c) == derive_delta(a, c, b));
    const double s = rng.normal();
    CHECK(derive_delta(a + s, b, c) ==
          doctest::Approx(derive_delta(a, b, c) + s).epsilon(1e-12));
    CHECK(derive_delta(a, b + 2 * s, c) ==
          doctest::Approx(derive_delta(a, b, c) - s).epsilon(1e-12));
  }
}

TEST_CASE("exchange coupling matches the frozen reference value") {
  const auto g = testutil::load_golden();
  const double j = exchange_coupling(reference_params());
  const double want = testutil::golden_value(g, "cluster_j");
  CHECK(std::abs(j - want) / std::abs(want) <= 1e-10);
  CHECK(j == doctest::Approx(8.23e-3).epsilon(1e-3));
}

TEST_CASE("exchange coupling edge cases") {
  ClusterParameters p = reference_params();
  p.t_pd = 0.0;
  CHECK(exchange_coupling(p) == 0.0);

  // u_p = 0 evaluates bit-for-bit like the reduced formula.
  const ClusterParameters r = reference_params();
  CHECK(exchange_coupling(r) == j_formula_no_up(r));

  ClusterParameters bad = reference_params();
  bad.delta = 0.0;
  CHECK_THROWS_AS(exchange_coupling(bad), SingularParameters);
  bad.delta = -0.1;
  CHECK_THROWS_AS(exchange_coupling(bad), SingularParameters);

  bad = reference_params();
  bad.u_d = 0.0;
  CHECK_THROWS_AS(exchange_coupling(bad), SingularParameters);

  bad = reference_params();
  bad.u_p = -2.0 * bad.delta;  // delta + u_p/2 = 0
  CHECK_THROWS_AS(exchange_coupling(bad), SingularParameters);
}

TEST_CASE("hopping-noise first order") {
  const ClusterParameters p = reference_params();
  const double j0 = exchange_coupling(p);

  CHECK(noisy_j_tpd_first_order(p, 0.0) == j0);

  // Literal evaluation at d = -t gives -3J (the expansion is not clamped).
  CHECK(noisy_j_tpd_first_order(p, -p.t_pd) ==
        doctest::Approx(-3.0 * j0).epsilon(1e-12));

  // Quadratic convergence against exact recomputation at t + d.
  auto error_at = [&](double d) {
    ClusterParameters q = p;
    q.t_pd = p.t_pd + d;
    return std::abs(noisy_j_tpd_first_order(p, d) - exchange_coupling(q));
  };
  for (const double d : {1e-3, 1e-4}) {
    CHECK(error_at(d / 2) <= 0.3 * error_at(d));
  }
}

TEST_CASE("charge-transfer-noise first order") {
  const ClusterParameters p = reference_params();
  const double j0 = exchange_coupling(p);

  CHECK(noisy_j_delta_first_order(p, 0.0) == j0);

  // A positive shift lowers the first-order value at these parameters.
  CHECK(noisy_j_delta_first_order(p, 1e-3) < j0);

  auto error_at = [&](double d) {
    ClusterParameters q = p;
    q.delta = p.delta + d;
    return std::abs(noisy_j_delta_first_order(p, d) - exchange_coupling(q));
  };
  for (const double d : {1e-3, 1e-4}) {
    CHECK(error_at(d / 2) <= 0.3 * error_at(d));
  }
}

TEST_CASE("hopping sensitivity dominates at reference parameters") {
  const ClusterParameters p = reference_params();
  const double h = 1e-6;
  ClusterParameters tp = p, tm = p, dp = p, dm = p;
  tp.t_pd += h;
  tm.t_pd -= h;
  dp.delta += h;
  dm.delta -= h;
  const double dj_dt = (exchange_coupling(tp) - exchange_coupling(tm)) / (2 * h);
  const double dj_dd = (exchange_coupling(dp) - exchange_coupling(dm)) / (2 * h);
  CHECK(std::abs(dj_dt) > std::abs(dj_dd));
}

TEST_CASE("monte carlo determinism and degenerate amplitude") {
  const ClusterParameters p = reference_params();
  const double j0 = exchange_coupling(p);

  const MonteCarloSummary zero = monte_carlo_j(p, 0.0, NoiseSource::Delta, 64, 9);
  CHECK(zero.n_excluded == 0);
  CHECK(zero.std_dev == 0.0);
  CHECK(zero.mean == j0);
  for (const NoisySample& s : zero.samples) {
    CHECK(s.j_exact == j0);
    CHECK(s.delta_perturbation == 0.0);
  }

  const MonteCarloSummary a = monte_carlo_j(p, 0.01, NoiseSource::Tpd, 257, 1234);
  const MonteCarloSummary b = monte_carlo_j(p, 0.01, NoiseSource::Tpd, 257, 1234);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].delta_perturbation == b.samples[i].delta_perturbation);
    CHECK(a.samples[i].j_exact == b.samples[i].j_exact);
    CHECK(a.samples[i].j_first_order == b.samples[i].j_first_order);
  }
  // A different seed draws different perturbations.
  const MonteCarloSummary c = monte_carlo_j(p, 0.01, NoiseSource::Tpd, 257, 99);
  CHECK(c.samples[0].delta_perturbation != a.samples[0].delta_perturbation);
}

TEST_CASE("monte carlo mean tracks the curvature-corrected baseline") {
  const ClusterParameters p = reference_params();
  const double amplitude = 0.01 * p.delta;
  const MonteCarloSummary mc =
      monte_carlo_j(p, amplitude, NoiseSource::Delta, 10000, 20260822);
  CHECK(mc.n_excluded == 0);

  // E[J(delta + d)] ~= J + J''(delta) amplitude^2 / 2 for Gaussian d.
  const double h = 1e-5;
  ClusterParameters up = p, dn = p;
  up.delta += h;
  dn.delta -= h;
  const double j0 = exchange_coupling(p);
  const double second =
      (exchange_coupling(up) - 2 * j0 + exchange_coupling(dn)) / (h * h);
  const double corrected = j0 + 0.5 * second * amplitude * amplitude;
  const double se = mc.std_dev / std::sqrt(double(mc.samples.size()));
  CHECK(std::abs(mc.mean - corrected) <= 3.0 * se);
}

TEST_CASE("monte carlo excludes nonphysical draws") {
  const ClusterParameters p = reference_params();
  // Amplitude equal to delta: a sizable fraction of draws push delta below 0.
  const MonteCarloSummary mc =
      monte_carlo_j(p, p.delta, NoiseSource::Delta, 2000, 7);
  CHECK(mc.n_excluded > 0);
  int excluded_seen = 0;
  for (const NoisySample& s : mc.samples) {
    if (s.excluded) {
      ++excluded_seen;
      CHECK(p.delta + s.delta_perturbation <= 0.0);
    } else {
      CHECK(p.delta + s.delta_perturbation > 0.0);
      CHECK(std::isfinite(s.j_exact));
    }
  }
  CHECK(excluded_seen == mc.n_excluded);

  CHECK_THROWS_AS(monte_carlo_j(p, 0.1, NoiseSource::Delta, 0, 1),
                  NonPositiveValue);
  CHECK_THROWS_AS(monte_carlo_j(p, -0.1, NoiseSource::Delta, 10, 1),
                  NonPositiveValue);
}
