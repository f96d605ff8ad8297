#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace aimvqe {

// Three-site cluster model parameters. delta is the charge-transfer energy,
// t_pd the hopping, u_d/u_p the impurity/bath Coulomb energies. Onsite
// energies are optional inputs used to derive delta.
struct ClusterParameters {
  double delta = 0.0;
  double t_pd = 0.0;
  double u_d = 0.0;
  double u_p = 0.0;
  std::optional<double> e_bath;
  std::optional<double> e_imp1;
  std::optional<double> e_imp2;
};

enum class NoiseSource { Delta, Tpd };

struct NoisySample {
  double delta_perturbation = 0.0;
  NoiseSource source = NoiseSource::Delta;
  double j_exact = 0.0;
  double j_first_order = 0.0;
  bool excluded = false;
};

struct MonteCarloSummary {
  double mean = 0.0;               // exact recomputation, included samples
  double std_dev = 0.0;            // sample standard deviation
  double mean_first_order = 0.0;
  double std_dev_first_order = 0.0;
  int n_excluded = 0;
  std::vector<NoisySample> samples;
};

// Charge-transfer energy from onsite energies: e_bath - (e_imp1 + e_imp2)/2.
double derive_delta(double e_bath, double e_imp1, double e_imp2);

// Superexchange coupling J = 4 t^4/delta^2 (1/u_d + 1/(delta + u_p/2)).
// With u_p = 0 this reduces exactly to 4 t^4/delta^2 (1/u_d + 1/delta).
// Throws SingularParameters when any denominator is <= 0.
double exchange_coupling(const ClusterParameters& p);

// First-order effect of a hopping perturbation t -> t + d:
// 4 (t^4 + 4 t^3 d)/delta^2 (1/u_d + 1/delta). Evaluated literally (not
// clamped), so large negative d can produce negative values.
double noisy_j_tpd_first_order(const ClusterParameters& p,
                               double delta_perturbation);

// First-order effect of a charge-transfer perturbation delta -> delta + d:
// (4 t^4/delta^2)(1 - 2 d/delta)(1/u_d + 1/delta - d/delta^2).
double noisy_j_delta_first_order(const ClusterParameters& p,
                                 double delta_perturbation);

// Gaussian noise propagation: draws d ~ Normal(0, amplitude) per sample from
// an independent stream keyed by (seed, sample index), recomputes J exactly
// at the perturbed parameter and evaluates the matching first-order formula.
// Samples whose perturbed parameters make a denominator <= 0 are excluded
// from the statistics and counted. Deterministic for a fixed seed.
MonteCarloSummary monte_carlo_j(const ClusterParameters& p, double amplitude,
                                NoiseSource source, int n_samples,
                                std::uint64_t seed);

}  // namespace aimvqe
