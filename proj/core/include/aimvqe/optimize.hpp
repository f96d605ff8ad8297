#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aimvqe {

// Wrap an angle into (-pi, pi].
double wrap_angle(double theta);
void wrap_angles(std::vector<double>& thetas);

// Bit-exact FNV-1a hash of a parameter vector, for trace records.
std::uint64_t hash_parameters(const std::vector<double>& params);

struct SpsaConfig {
  double a = 0.2;            // step-size numerator: a / (A + k)^alpha
  double c = 0.1;            // perturbation numerator: c / k^gamma
  double alpha = 0.602;
  double gamma = 0.101;
  double stability = 10.0;   // the A in the step-size schedule
  int max_iterations = 200;
  std::uint64_t seed = 0;
};

struct NelderMeadConfig {
  double simplex_scale = 0.1;  // offset of the initial simplex vertices
  double x_tol = 1e-10;
  double f_tol = 1e-10;
  int max_iterations = 500;
};

struct ParameterShiftGdConfig {
  double learning_rate = 0.5;  // first step; later steps use a Barzilai-Borwein size
  int max_iterations = 300;
  double gradient_tol = 1e-8;
  // Objective evaluations one gradient call consumes, for trace bookkeeping;
  // -1 means the two-point default of 2 * n_params. Ansatz circuits whose
  // parameters drive several gates cost 2 * (gate occurrences) instead.
  long evaluations_per_gradient = -1;
};

enum class OptimizerKind { Spsa, NelderMead, ParameterShiftGd };

const char* optimizer_kind_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::ParameterShiftGd;
  SpsaConfig spsa;
  NelderMeadConfig nelder_mead;
  ParameterShiftGdConfig gradient;

  void validate() const;  // positive rates/tolerances, max_iterations >= 1
};

struct IterationRecord {
  int iteration = 0;        // strictly increasing from 0
  double energy = 0.0;
  std::uint64_t parameter_hash = 0;
  long evaluations = 0;     // objective evaluations consumed by this iteration
  double wall_ms = 0.0;     // cumulative wall time; excluded from determinism
};

struct OptimizationResult {
  std::vector<double> parameters;
  double energy = 0.0;
  bool converged = false;
  std::string reason;
  long total_evaluations = 0;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> iterations;
  OptimizationResult final;
};

using EnergyFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Minimize energy(params) starting from `initial`. Parameters are wrapped to
// (-pi, pi] after every update (the objective is 2*pi-periodic per parameter
// for every ansatz family this project produces). Deterministic optimizers
// stop once the relative energy change stays below 1e-8 for 10 consecutive
// iterations; SPSA always runs its full iteration budget. `gradient` is
// required for ParameterShiftGd and ignored otherwise.
ConvergenceTrace minimize(const OptimizerConfig& config, const EnergyFn& energy,
                          const GradientFn& gradient,
                          std::vector<double> initial);

}  // namespace aimvqe
