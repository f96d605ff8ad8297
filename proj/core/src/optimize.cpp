#include "aimvqe/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

double wrap_angle(double theta) {
  const double two_pi = 2.0 * M_PI;
  double w = std::remainder(theta, two_pi);  // lands in [-pi, pi]
  if (w <= -M_PI) w += two_pi;               // move the closed end to +pi
  return w;
}

void wrap_angles(std::vector<double>& thetas) {
  for (double& t : thetas) t = wrap_angle(t);
}

std::uint64_t hash_parameters(const std::vector<double>& params) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
  for (double value : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (bits >> (8 * byte)) & 0xffu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

const char* optimizer_kind_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Spsa: return "spsa";
    case OptimizerKind::NelderMead: return "nelder-mead";
    case OptimizerKind::ParameterShiftGd: return "parameter-shift-gd";
  }
  return "?";
}

void OptimizerConfig::validate() const {
  switch (kind) {
    case OptimizerKind::Spsa:
      if (spsa.a <= 0 || spsa.c <= 0 || spsa.alpha <= 0 || spsa.gamma <= 0 ||
          spsa.stability < 0) {
        throw NonPositiveValue("SPSA rates must be positive");
      }
      if (spsa.max_iterations < 1) {
        throw NonPositiveValue("SPSA needs max_iterations >= 1");
      }
      break;
    case OptimizerKind::NelderMead:
      if (nelder_mead.simplex_scale <= 0 || nelder_mead.x_tol <= 0 ||
          nelder_mead.f_tol <= 0) {
        throw NonPositiveValue("Nelder-Mead scales/tolerances must be positive");
      }
      if (nelder_mead.max_iterations < 1) {
        throw NonPositiveValue("Nelder-Mead needs max_iterations >= 1");
      }
      break;
    case OptimizerKind::ParameterShiftGd:
      if (gradient.learning_rate <= 0 || gradient.gradient_tol <= 0) {
        throw NonPositiveValue("gradient-descent rate/tolerance must be positive");
      }
      if (gradient.max_iterations < 1) {
        throw NonPositiveValue("gradient descent needs max_iterations >= 1");
      }
      break;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Tracks the "relative energy change < 1e-8 for 10 consecutive iterations"
// stopping rule shared by the deterministic optimizers.
class ConvergenceWatch {
 public:
  bool update(double energy) {
    if (has_last_) {
      const double rel = std::abs(energy - last_) /
                         std::max(std::abs(energy), 1e-12);
      streak_ = rel < 1e-8 ? streak_ + 1 : 0;
    }
    has_last_ = true;
    last_ = energy;
    return streak_ >= 10;
  }

 private:
  bool has_last_ = false;
  double last_ = 0.0;
  int streak_ = 0;
};

ConvergenceTrace run_spsa(const SpsaConfig& cfg, const EnergyFn& energy,
                          std::vector<double> theta) {
  const auto start = Clock::now();
  ConvergenceTrace trace;
  Rng rng(cfg.seed);
  const size_t n = theta.size();
  long total_evals = 0;

  std::vector<double> best = theta;
  double best_energy = std::numeric_limits<double>::infinity();

  std::vector<double> plus(n), minus(n), delta(n);
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const double ak = cfg.a / std::pow(cfg.stability + k, cfg.alpha);
    const double ck = cfg.c / std::pow(double(k), cfg.gamma);
    for (size_t i = 0; i < n; ++i) delta[i] = rng.rademacher();
    for (size_t i = 0; i < n; ++i) {
      plus[i] = wrap_angle(theta[i] + ck * delta[i]);
      minus[i] = wrap_angle(theta[i] - ck * delta[i]);
    }
    const double e_plus = energy(plus);
    const double e_minus = energy(minus);
    total_evals += 2;
    const double diff = (e_plus - e_minus) / (2.0 * ck);
    for (size_t i = 0; i < n; ++i) {
      theta[i] = wrap_angle(theta[i] - ak * diff / delta[i]);
    }

    const double probe = 0.5 * (e_plus + e_minus);
    if (probe < best_energy) {
      best_energy = probe;
      best = theta;
    }
    IterationRecord rec;
    rec.iteration = int(trace.iterations.size());
    rec.energy = probe;
    rec.parameter_hash = hash_parameters(theta);
    rec.evaluations = 2;
    rec.wall_ms = elapsed_ms(start);
    trace.iterations.push_back(rec);
  }

  // One closing evaluation so the reported energy matches the reported
  // parameters rather than a perturbed probe.
  const double final_at_theta = energy(theta);
  ++total_evals;
  if (final_at_theta <= best_energy) {
    best_energy = final_at_theta;
    best = theta;
  }
  trace.final.parameters = best;
  trace.final.energy = best_energy;
  trace.final.converged = false;
  trace.final.reason = "iteration budget exhausted";
  trace.final.total_evaluations = total_evals;
  return trace;
}

ConvergenceTrace run_nelder_mead(const NelderMeadConfig& cfg,
                                 const EnergyFn& energy,
                                 std::vector<double> initial) {
  const auto start = Clock::now();
  ConvergenceTrace trace;
  const size_t n = initial.size();
  long total_evals = 0;

  auto eval = [&](const std::vector<double>& x) {
    ++total_evals;
    return energy(x);
  };

  std::vector<std::vector<double>> simplex;
  std::vector<double> values;
  simplex.push_back(initial);
  values.push_back(eval(initial));
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> vertex = initial;
    vertex[i] = wrap_angle(vertex[i] + cfg.simplex_scale);
    simplex.push_back(vertex);
    values.push_back(eval(vertex));
  }
  const size_t m = simplex.size();

  auto order = [&]() {
    std::vector<size_t> idx(m);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (size_t i : idx) {
      s2.push_back(std::move(simplex[i]));
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };
  order();

  ConvergenceWatch watch;
  bool converged = false;
  std::string reason = "iteration budget exhausted";

  for (int k = 0; k < cfg.max_iterations; ++k) {
    const long evals_before = total_evals;

    std::vector<double> centroid(n, 0.0);
    for (size_t v = 0; v + 1 < m; ++v) {
      for (size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i];
    }
    for (double& c : centroid) c /= double(n);

    auto blend = [&](double t) {
      std::vector<double> x(n);
      for (size_t i = 0; i < n; ++i) {
        x[i] = wrap_angle(centroid[i] + t * (centroid[i] - simplex[m - 1][i]));
      }
      return x;
    };

    const std::vector<double> reflected = blend(1.0);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[0]) {
      const std::vector<double> expanded = blend(2.0);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[m - 1] = expanded;
        values[m - 1] = f_expanded;
      } else {
        simplex[m - 1] = reflected;
        values[m - 1] = f_reflected;
      }
    } else if (f_reflected < values[m - 2]) {
      simplex[m - 1] = reflected;
      values[m - 1] = f_reflected;
    } else {
      const std::vector<double> contracted = blend(-0.5);
      const double f_contracted = eval(contracted);
      if (f_contracted < values[m - 1]) {
        simplex[m - 1] = contracted;
        values[m - 1] = f_contracted;
      } else {
        for (size_t v = 1; v < m; ++v) {
          for (size_t i = 0; i < n; ++i) {
            simplex[v][i] = wrap_angle(
                simplex[0][i] + 0.5 * (simplex[v][i] - simplex[0][i]));
          }
          values[v] = eval(simplex[v]);
        }
      }
    }
    order();

    IterationRecord rec;
    rec.iteration = int(trace.iterations.size());
    rec.energy = values[0];
    rec.parameter_hash = hash_parameters(simplex[0]);
    rec.evaluations = total_evals - evals_before;
    rec.wall_ms = elapsed_ms(start);
    trace.iterations.push_back(rec);

    double spread_x = 0.0;
    for (size_t v = 1; v < m; ++v) {
      for (size_t i = 0; i < n; ++i) {
        spread_x = std::max(spread_x, std::abs(simplex[v][i] - simplex[0][i]));
      }
    }
    const double spread_f = values[m - 1] - values[0];
    if (spread_x < cfg.x_tol && spread_f < cfg.f_tol) {
      converged = true;
      reason = "simplex collapsed";
      break;
    }
    if (watch.update(values[0])) {
      converged = true;
      reason = "energy stationary for 10 iterations";
      break;
    }
  }

  trace.final.parameters = simplex[0];
  trace.final.energy = values[0];
  trace.final.converged = converged;
  trace.final.reason = reason;
  trace.final.total_evaluations = total_evals;
  return trace;
}

ConvergenceTrace run_parameter_shift_gd(const ParameterShiftGdConfig& cfg,
                                        const EnergyFn& energy,
                                        const GradientFn& gradient,
                                        std::vector<double> theta) {
  if (!gradient) {
    throw UnsupportedAnsatz(
        "parameter-shift gradient descent needs a gradient callback");
  }
  const auto start = Clock::now();
  ConvergenceTrace trace;
  const size_t n = theta.size();
  long total_evals = 0;

  ConvergenceWatch watch;
  bool converged = false;
  std::string reason = "iteration budget exhausted";
  const long grad_cost = cfg.evaluations_per_gradient >= 0
                             ? cfg.evaluations_per_gradient
                             : long(2 * n);

  std::vector<double> prev_step(n, 0.0), prev_grad(n, 0.0);
  bool have_prev = false;
  double current = energy(theta);
  ++total_evals;

  for (int k = 0; k < cfg.max_iterations; ++k) {
    const long evals_before = total_evals;
    const std::vector<double> grad = gradient(theta);
    total_evals += grad_cost;

    double grad_norm = 0.0;
    for (double g : grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);

    IterationRecord rec;
    rec.iteration = int(trace.iterations.size());
    rec.energy = current;
    rec.parameter_hash = hash_parameters(theta);

    if (grad_norm <= cfg.gradient_tol) {
      rec.evaluations = total_evals - evals_before;
      rec.wall_ms = elapsed_ms(start);
      trace.iterations.push_back(rec);
      converged = true;
      reason = "gradient norm below tolerance";
      break;
    }

    // Barzilai-Borwein step length once history exists; the configured
    // learning rate seeds the first move and any non-descent fallback.
    double step = cfg.learning_rate;
    if (have_prev) {
      double sy = 0.0, ss = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double y = grad[i] - prev_grad[i];
        sy += prev_step[i] * y;
        ss += prev_step[i] * prev_step[i];
      }
      if (sy > 1e-30) step = ss / sy;
    }

    for (size_t i = 0; i < n; ++i) {
      prev_step[i] = -step * grad[i];
      theta[i] = wrap_angle(theta[i] + prev_step[i]);
    }
    prev_grad = grad;
    have_prev = true;

    current = energy(theta);
    ++total_evals;

    rec.evaluations = total_evals - evals_before;
    rec.wall_ms = elapsed_ms(start);
    trace.iterations.push_back(rec);

    if (watch.update(current)) {
      converged = true;
      reason = "energy stationary for 10 iterations";
      break;
    }
  }

  trace.final.parameters = theta;
  trace.final.energy = current;
  trace.final.converged = converged;
  trace.final.reason = reason;
  trace.final.total_evaluations = total_evals;
  return trace;
}

}  // namespace

ConvergenceTrace minimize(const OptimizerConfig& config, const EnergyFn& energy,
                          const GradientFn& gradient,
                          std::vector<double> initial) {
  config.validate();
  wrap_angles(initial);
  switch (config.kind) {
    case OptimizerKind::Spsa:
      return run_spsa(config.spsa, energy, std::move(initial));
    case OptimizerKind::NelderMead:
      return run_nelder_mead(config.nelder_mead, energy, std::move(initial));
    case OptimizerKind::ParameterShiftGd:
      return run_parameter_shift_gd(config.gradient, energy, gradient,
                                    std::move(initial));
  }
  throw NumericalFailure("unknown optimizer kind");
}

}  // namespace aimvqe
