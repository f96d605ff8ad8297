#include "aimvqe/cluster.hpp"

#include <cmath>
#include <string>

#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

namespace {

void check_denominators(const ClusterParameters& p, bool with_up) {
  if (p.delta <= 0.0) {
    throw SingularParameters("charge-transfer energy must be positive, got " +
                             std::to_string(p.delta));
  }
  if (p.u_d <= 0.0) {
    throw SingularParameters("impurity Coulomb energy must be positive, got " +
                             std::to_string(p.u_d));
  }
  if (with_up && p.delta + p.u_p / 2.0 <= 0.0) {
    throw SingularParameters("delta + u_p/2 must be positive, got " +
                             std::to_string(p.delta + p.u_p / 2.0));
  }
}

}  // namespace

double derive_delta(double e_bath, double e_imp1, double e_imp2) {
  return e_bath - (e_imp1 + e_imp2) / 2.0;
}

double exchange_coupling(const ClusterParameters& p) {
  check_denominators(p, /*with_up=*/true);
  const double t2 = p.t_pd * p.t_pd;
  const double t4 = t2 * t2;
  return 4.0 * t4 / (p.delta * p.delta) *
         (1.0 / p.u_d + 1.0 / (p.delta + p.u_p / 2.0));
}

double noisy_j_tpd_first_order(const ClusterParameters& p,
                               double delta_perturbation) {
  check_denominators(p, /*with_up=*/false);
  const double t2 = p.t_pd * p.t_pd;
  const double t4 = t2 * t2;
  const double t3 = t2 * p.t_pd;
  return 4.0 * (t4 + 4.0 * t3 * delta_perturbation) / (p.delta * p.delta) *
         (1.0 / p.u_d + 1.0 / p.delta);
}

double noisy_j_delta_first_order(const ClusterParameters& p,
                                 double delta_perturbation) {
  check_denominators(p, /*with_up=*/false);
  const double t2 = p.t_pd * p.t_pd;
  const double t4 = t2 * t2;
  const double base = 4.0 * t4 / (p.delta * p.delta);
  const double shrink = 1.0 - 2.0 * delta_perturbation / p.delta;
  const double response = 1.0 / p.u_d + 1.0 / p.delta -
                          delta_perturbation / (p.delta * p.delta);
  return base * shrink * response;
}

MonteCarloSummary monte_carlo_j(const ClusterParameters& p, double amplitude,
                                NoiseSource source, int n_samples,
                                std::uint64_t seed) {
  if (n_samples < 1) {
    throw NonPositiveValue("sample count must be at least 1, got " +
                           std::to_string(n_samples));
  }
  if (amplitude < 0.0) {
    throw NonPositiveValue("noise amplitude must be non-negative, got " +
                           std::to_string(amplitude));
  }
  check_denominators(p, /*with_up=*/true);

  MonteCarloSummary out;
  out.samples.resize(std::size_t(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = Rng::stream(seed, std::uint64_t(i));
    const double d = rng.normal() * amplitude;
    NoisySample& s = out.samples[std::size_t(i)];
    s.delta_perturbation = d;
    s.source = source;
    ClusterParameters perturbed = p;
    if (source == NoiseSource::Delta) {
      perturbed.delta = p.delta + d;
    } else {
      perturbed.t_pd = p.t_pd + d;
    }
    try {
      s.j_exact = exchange_coupling(perturbed);
      s.j_first_order = (source == NoiseSource::Delta)
                            ? noisy_j_delta_first_order(p, d)
                            : noisy_j_tpd_first_order(p, d);
    } catch (const SingularParameters&) {
      s.excluded = true;
    }
  }

  double sum = 0.0, sum_fo = 0.0;
  int n = 0;
  for (const NoisySample& s : out.samples) {
    if (s.excluded) {
      ++out.n_excluded;
      continue;
    }
    sum += s.j_exact;
    sum_fo += s.j_first_order;
    ++n;
  }
  if (n > 0) {
    out.mean = sum / n;
    out.mean_first_order = sum_fo / n;
  }
  if (n > 1) {
    double ss = 0.0, ss_fo = 0.0;
    for (const NoisySample& s : out.samples) {
      if (s.excluded) continue;
      ss += (s.j_exact - out.mean) * (s.j_exact - out.mean);
      ss_fo += (s.j_first_order - out.mean_first_order) *
               (s.j_first_order - out.mean_first_order);
    }
    out.std_dev = std::sqrt(ss / (n - 1));
    out.std_dev_first_order = std::sqrt(ss_fo / (n - 1));
  }
  return out;
}

}  // namespace aimvqe
