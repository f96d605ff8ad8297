#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "aimvqe/errors.hpp"
#include "aimvqe/optimize.hpp"

using namespace aimvqe;

namespace {

// Smooth convex bowl with its minimum strictly inside (-pi, pi]^n.
EnergyFn quadratic(const std::vector<double>& target) {
  return [target](const std::vector<double>& x) {
    double f = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - target[i];
      f += (1.0 + double(i)) * d * d;
    }
    return f;
  };
}

GradientFn quadratic_gradient(const std::vector<double>& target) {
  return [target](const std::vector<double>& x) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      g[i] = 2.0 * (1.0 + double(i)) * (x[i] - target[i]);
    }
    return g;
  };
}

}  // namespace

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(2.0 * M_PI) == doctest::Approx(0.0));
  CHECK(wrap_angle(1.5 * M_PI) == doctest::Approx(-0.5 * M_PI));
  CHECK(wrap_angle(-1.5 * M_PI) == doctest::Approx(0.5 * M_PI));
  for (int k = -40; k <= 40; ++k) {
    const double theta = 0.37 * double(k);
    const double w = wrap_angle(theta);
    CHECK(w > -M_PI);
    CHECK(w <= M_PI);
    // The wrapped angle differs from the input by a whole number of turns.
    CHECK(std::remainder(theta - w, 2.0 * M_PI) == doctest::Approx(0.0));
  }
}

TEST_CASE("hash_parameters is bit-exact and order-sensitive") {
  const std::vector<double> a = {0.1, 0.2, 0.3};
  const std::vector<double> b = {0.1, 0.2, 0.3};
  const std::vector<double> c = {0.3, 0.2, 0.1};
  CHECK(hash_parameters(a) == hash_parameters(b));
  CHECK(hash_parameters(a) != hash_parameters(c));
  CHECK(hash_parameters({0.0}) != hash_parameters({-0.0}));
  CHECK(hash_parameters({}) != 0);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig cfg;

  cfg.kind = OptimizerKind::Spsa;
  cfg.spsa.a = -0.1;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveValue);
  cfg.spsa.a = 0.2;
  cfg.spsa.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveValue);
  cfg.spsa.max_iterations = 10;
  CHECK_NOTHROW(cfg.validate());

  cfg.kind = OptimizerKind::NelderMead;
  cfg.nelder_mead.f_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveValue);
  cfg.nelder_mead.f_tol = 1e-10;
  CHECK_NOTHROW(cfg.validate());

  cfg.kind = OptimizerKind::ParameterShiftGd;
  cfg.gradient.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveValue);
  cfg.gradient.learning_rate = 0.5;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("gradient descent converges on a quadratic bowl") {
  const std::vector<double> target = {0.3, -1.1, 2.0};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::ParameterShiftGd;
  cfg.gradient.learning_rate = 0.1;
  cfg.gradient.max_iterations = 500;
  const ConvergenceTrace trace =
      minimize(cfg, quadratic(target), quadratic_gradient(target),
               {0.0, 0.0, 0.0});
  CHECK(trace.final.converged);
  CHECK(trace.final.energy < 1e-10);
  for (size_t i = 0; i < target.size(); ++i) {
    CHECK(trace.final.parameters[i] == doctest::Approx(target[i]).epsilon(1e-5));
  }
  // Iterations strictly increasing, evaluations recorded, envelope monotone.
  double best = std::numeric_limits<double>::infinity();
  double prev_best = best;
  for (size_t i = 0; i < trace.iterations.size(); ++i) {
    CHECK(trace.iterations[i].iteration == int(i));
    CHECK(trace.iterations[i].evaluations > 0);
    best = std::min(best, trace.iterations[i].energy);
    CHECK(best <= prev_best);
    prev_best = best;
  }
  CHECK(trace.final.total_evaluations > 0);
}

TEST_CASE("gradient descent stops on a vanishing gradient") {
  const std::vector<double> target = {0.4, -0.2};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::ParameterShiftGd;
  const ConvergenceTrace trace =
      minimize(cfg, quadratic(target), quadratic_gradient(target), target);
  CHECK(trace.final.converged);
  CHECK(trace.final.reason == "gradient norm below tolerance");
  CHECK(trace.iterations.size() == 1);
  CHECK(trace.final.parameters == target);
}

TEST_CASE("gradient descent without a gradient callback is rejected") {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::ParameterShiftGd;
  CHECK_THROWS_AS(minimize(cfg, quadratic({0.0}), GradientFn{}, {1.0}),
                  UnsupportedAnsatz);
}

TEST_CASE("Nelder-Mead converges on a quadratic bowl") {
  const std::vector<double> target = {0.7, -0.4};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::NelderMead;
  cfg.nelder_mead.simplex_scale = 0.5;
  cfg.nelder_mead.max_iterations = 2000;
  const ConvergenceTrace trace =
      minimize(cfg, quadratic(target), GradientFn{}, {0.0, 0.0});
  CHECK(trace.final.converged);
  CHECK(trace.final.energy < 1e-8);
  for (size_t i = 0; i < target.size(); ++i) {
    CHECK(trace.final.parameters[i] == doctest::Approx(target[i]).epsilon(1e-3));
  }
}

TEST_CASE("Nelder-Mead on a constant objective collapses immediately") {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::NelderMead;
  const ConvergenceTrace trace = minimize(
      cfg, [](const std::vector<double>&) { return 2.5; }, GradientFn{},
      {0.3, 0.1});
  CHECK(trace.final.converged);
  CHECK(trace.final.energy == 2.5);
  CHECK(trace.iterations.size() < 20);
}

TEST_CASE("SPSA runs its full budget and reports non-convergence") {
  const std::vector<double> target = {0.3, -0.5};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::Spsa;
  cfg.spsa.a = 0.3;
  cfg.spsa.c = 0.1;
  cfg.spsa.max_iterations = 120;
  cfg.spsa.seed = 42;
  const ConvergenceTrace trace =
      minimize(cfg, quadratic(target), GradientFn{}, {1.5, 1.5});
  CHECK(trace.iterations.size() == 120);
  CHECK_FALSE(trace.final.converged);
  CHECK(trace.final.reason == "iteration budget exhausted");
  for (const IterationRecord& rec : trace.iterations) {
    CHECK(rec.evaluations == 2);
  }
  // 2 probes per iteration plus the closing evaluation.
  CHECK(trace.final.total_evaluations == 2 * 120 + 1);
  // It should still have made real progress on a smooth bowl.
  const double initial = quadratic(target)({1.5, 1.5});
  CHECK(trace.final.energy < 0.1 * initial);
}

TEST_CASE("SPSA is deterministic per seed and varies across seeds") {
  const std::vector<double> target = {0.2, 0.9, -0.7};
  auto run = [&](std::uint64_t seed) {
    OptimizerConfig cfg;
    cfg.kind = OptimizerKind::Spsa;
    cfg.spsa.max_iterations = 50;
    cfg.spsa.seed = seed;
    return minimize(cfg, quadratic(target), GradientFn{}, {1.0, -1.0, 1.0});
  };
  const ConvergenceTrace t1 = run(7);
  const ConvergenceTrace t2 = run(7);
  const ConvergenceTrace t3 = run(8);
  REQUIRE(t1.iterations.size() == t2.iterations.size());
  bool any_diff_vs_t3 = false;
  for (size_t i = 0; i < t1.iterations.size(); ++i) {
    CHECK(t1.iterations[i].energy == t2.iterations[i].energy);
    CHECK(t1.iterations[i].parameter_hash == t2.iterations[i].parameter_hash);
    any_diff_vs_t3 = any_diff_vs_t3 || t1.iterations[i].parameter_hash !=
                                           t3.iterations[i].parameter_hash;
  }
  CHECK(t1.final.parameters == t2.final.parameters);
  CHECK(any_diff_vs_t3);
}

TEST_CASE("parameters stay wrapped during optimization") {
  // Periodic objective whose minimum sits near the branch cut.
  const EnergyFn energy = [](const std::vector<double>& x) {
    return -std::cos(x[0] - 3.0);  // minimum at x = 3.0 (inside (-pi, pi])
  };
  const GradientFn gradient = [](const std::vector<double>& x) {
    return std::vector<double>{std::sin(x[0] - 3.0)};
  };
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::ParameterShiftGd;
  cfg.gradient.learning_rate = 0.3;
  cfg.gradient.max_iterations = 400;
  const ConvergenceTrace trace = minimize(cfg, energy, gradient, {-2.8});
  CHECK(trace.final.converged);
  CHECK(trace.final.energy == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(trace.final.parameters[0] > -M_PI);
  CHECK(trace.final.parameters[0] <= M_PI);
}
