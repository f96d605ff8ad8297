#include "aimvqe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

}  // namespace

double KrausChannel::completeness_defect() const {
  const int dim = 1 << n_qubits;
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& k : operators) {
    sum += k.adjoint() * k;
  }
  sum -= Eigen::MatrixXcd::Identity(dim, dim);
  return sum.cwiseAbs().maxCoeff();
}

KrausChannel thermal_relaxation_channel(double t1, double t2,
                                        double duration_ns) {
  if (!(t1 > 0.0)) {
    throw InvalidT2("relaxation time T1 must be positive, got " +
                    std::to_string(t1));
  }
  if (!(t2 > 0.0) || t2 > 2.0 * t1) {
    throw InvalidT2("dephasing time T2 must satisfy 0 < T2 <= 2*T1, got T2=" +
                    std::to_string(t2) + " with T1=" + std::to_string(t1));
  }
  if (duration_ns < 0.0) {
    throw NonPositiveValue("gate duration must be non-negative, got " +
                           std::to_string(duration_ns));
  }
  const double d_us = duration_ns * 1e-3;
  const double gamma = 1.0 - std::exp(-d_us / t1);
  // Pure-dephasing rate; non-negative because t2 <= 2 t1.
  const double rate_phi = 1.0 / t2 - 1.0 / (2.0 * t1);
  const double p_phi = 0.5 * (1.0 - std::exp(-d_us * rate_phi));

  const double keep = std::sqrt(1.0 - gamma);
  Eigen::MatrixXcd k1(2, 2), k2(2, 2), k3(2, 2);
  k1 << 1.0, 0.0, 0.0, keep;
  k1 *= std::sqrt(1.0 - p_phi);
  k2 << 1.0, 0.0, 0.0, -keep;
  k2 *= std::sqrt(p_phi);
  k3 << 0.0, std::sqrt(gamma), 0.0, 0.0;

  KrausChannel channel;
  channel.n_qubits = 1;
  channel.operators = {k1, k2, k3};
  return channel;
}

KrausChannel depolarizing_channel(double p, int n_qubits) {
  if (!(p >= 0.0) || p > 1.0) {
    throw ProbabilityOutOfRange("depolarizing probability must lie in [0, 1], got " +
                                std::to_string(p));
  }
  if (n_qubits != 1 && n_qubits != 2) {
    throw InvalidChannel("depolarizing channel supports 1 or 2 qubits, got " +
                         std::to_string(n_qubits));
  }
  const int dim = 1 << n_qubits;
  const int n_paulis = dim * dim;  // 4 or 16
  Eigen::MatrixXcd x(2, 2), y(2, 2), z(2, 2), id(2, 2);
  id.setIdentity();
  x << 0.0, 1.0, 1.0, 0.0;
  y << 0.0, -kI, kI, 0.0;
  z << 1.0, 0.0, 0.0, -1.0;
  const Eigen::MatrixXcd singles[4] = {id, x, y, z};

  KrausChannel channel;
  channel.n_qubits = n_qubits;
  for (int code = 0; code < n_paulis; ++code) {
    const double weight =
        code == 0 ? 1.0 - p * double(n_paulis - 1) / double(n_paulis)
                  : p / double(n_paulis);
    Eigen::MatrixXcd op = singles[code & 3];
    if (n_qubits == 2) {
      // Kronecker: factor for the higher qubit goes on the left.
      Eigen::MatrixXcd full(4, 4);
      const Eigen::MatrixXcd& high = singles[(code >> 2) & 3];
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          full.block(2 * r, 2 * c, 2, 2) = high(r, c) * op;
        }
      }
      op = full;
    }
    channel.operators.push_back(std::sqrt(weight) * op);
  }
  return channel;
}

std::vector<QubitTimes> sample_qubit_times(int n_qubits, std::uint64_t seed,
                                           double mean_t1, double sd_t1,
                                           double mean_t2, double sd_t2) {
  if (n_qubits < 0) {
    throw IndexOutOfRange("qubit count must be non-negative, got " +
                          std::to_string(n_qubits));
  }
  Rng rng(seed);
  auto positive_draw = [&rng](double mean, double sd) {
    double v = mean + sd * rng.normal();
    while (!(v > 0.0)) {
      v = mean + sd * rng.normal();
    }
    return v;
  };
  std::vector<QubitTimes> times;
  times.reserve(size_t(n_qubits));
  for (int q = 0; q < n_qubits; ++q) {
    QubitTimes qt;
    qt.t1 = positive_draw(mean_t1, sd_t1);
    qt.t2 = positive_draw(mean_t2, sd_t2);
    qt.t2 = std::min(qt.t2, 2.0 * qt.t1);
    times.push_back(qt);
  }
  return times;
}

bool NoiseModel::is_target(int qubit) const {
  return std::binary_search(targets.begin(), targets.end(), qubit);
}

bool NoiseModel::terminal_only() const {
  return !thermal_enabled && p1 == 0.0 && p2 == 0.0 &&
         terminal_depolarizing > 0.0;
}

NoiseModel build_noise_model(std::vector<QubitTimes> times,
                             std::vector<int> targets, double scale) {
  if (scale < 0.0) {
    throw NonPositiveValue("noise scale must be non-negative, got " +
                           std::to_string(scale));
  }
  for (const auto& qt : times) {
    if (!(qt.t1 > 0.0)) {
      throw InvalidT2("relaxation time T1 must be positive, got " +
                      std::to_string(qt.t1));
    }
    if (!(qt.t2 > 0.0) || qt.t2 > 2.0 * qt.t1) {
      throw InvalidT2("dephasing time T2 must satisfy 0 < T2 <= 2*T1, got T2=" +
                      std::to_string(qt.t2) + " with T1=" +
                      std::to_string(qt.t1));
    }
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (int q : targets) {
    if (q < 0 || size_t(q) >= times.size()) {
      throw IndexOutOfRange("noise target qubit " + std::to_string(q) +
                            " has no coherence times");
    }
  }
  NoiseModel model;
  model.times = std::move(times);
  model.targets = std::move(targets);
  model.scale = scale;
  model.thermal_enabled = true;
  return model;
}

}  // namespace aimvqe
