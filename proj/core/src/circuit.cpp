#include "aimvqe/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "aimvqe/errors.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

namespace {

constexpr double kPi = std::numbers::pi;

struct Mat2 {
  Complex m00, m01, m10, m11;
};

Mat2 u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const Complex eip = std::polar(1.0, phi);
  const Complex eil = std::polar(1.0, lambda);
  return Mat2{c, -eil * s, eip * s, eip * eil * c};
}

// Resolved single-qubit matrix for every kind except CNOT/SWAP/PauliEvolution.
Mat2 single_qubit_matrix(GateKind kind, const double a[3]) {
  switch (kind) {
    case GateKind::U1:
      return Mat2{1.0, 0.0, 0.0, std::polar(1.0, a[0])};
    case GateKind::U2:
      return u3_matrix(kPi / 2.0, a[0], a[1]);
    case GateKind::U3:
      return u3_matrix(a[0], a[1], a[2]);
    case GateKind::RX: {
      const double c = std::cos(a[0] / 2.0), s = std::sin(a[0] / 2.0);
      return Mat2{c, Complex(0.0, -s), Complex(0.0, -s), c};
    }
    case GateKind::RY: {
      const double c = std::cos(a[0] / 2.0), s = std::sin(a[0] / 2.0);
      return Mat2{c, -s, s, c};
    }
    case GateKind::RZ:
      return Mat2{std::polar(1.0, -a[0] / 2.0), 0.0, 0.0,
                  std::polar(1.0, a[0] / 2.0)};
    case GateKind::X:
      return Mat2{0.0, 1.0, 1.0, 0.0};
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      return Mat2{r, r, r, -r};
    }
    default:
      throw InvalidChannel("gate has no single-qubit matrix");
  }
}

void apply_mat2(std::span<Complex> amp, int q, const Mat2& m) {
  const std::uint64_t bit = std::uint64_t{1} << q;
  const std::uint64_t n = amp.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i & bit) continue;
    const Complex a0 = amp[i], a1 = amp[i | bit];
    amp[i] = m.m00 * a0 + m.m01 * a1;
    amp[i | bit] = m.m10 * a0 + m.m11 * a1;
  }
}

void apply_mat4(std::span<Complex> amp, int qa, int qb,
                const Eigen::Matrix4cd& m) {
  // qa indexes the low bit of the 4-dim subspace, qb the high bit.
  const std::uint64_t abit = std::uint64_t{1} << qa;
  const std::uint64_t bbit = std::uint64_t{1} << qb;
  const std::uint64_t n = amp.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i & (abit | bbit)) continue;
    const std::uint64_t idx[4] = {i, i | abit, i | bbit, i | abit | bbit};
    Complex in[4];
    for (int k = 0; k < 4; ++k) in[k] = amp[idx[k]];
    for (int r = 0; r < 4; ++r) {
      Complex acc(0.0, 0.0);
      for (int c = 0; c < 4; ++c) acc += m(r, c) * in[c];
      amp[idx[r]] = acc;
    }
  }
}

void apply_cnot_span(std::span<Complex> amp, int control, int target) {
  const std::uint64_t cbit = std::uint64_t{1} << control;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  const std::uint64_t n = amp.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & cbit) && !(i & tbit)) {
      std::swap(amp[i], amp[i | tbit]);
    }
  }
}

void apply_swap_span(std::span<Complex> amp, int a, int b) {
  const std::uint64_t abit = std::uint64_t{1} << a;
  const std::uint64_t bbit = std::uint64_t{1} << b;
  const std::uint64_t n = amp.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & abit) && !(i & bbit)) {
      std::swap(amp[i], amp[i ^ abit ^ bbit]);
    }
  }
}

double resolve_angle(const Gate& g, const std::vector<double>& bindings) {
  if (!g.is_symbolic()) return g.angles[0];
  if (g.param_id >= int(bindings.size())) {
    throw UnboundParameter("gate references parameter " +
                           std::to_string(g.param_id) + " but only " +
                           std::to_string(bindings.size()) +
                           " values were bound");
  }
  return g.param_scale * bindings[size_t(g.param_id)];
}

void check_gate_width(const Gate& g, int n_qubits) {
  const int hi = std::max(g.q0, g.q1);
  if (g.kind == GateKind::PauliEvolution) {
    if (g.pauli.width() > n_qubits) {
      throw WidthMismatch("evolution string spans " +
                          std::to_string(g.pauli.width()) +
                          " qubits but the register has " +
                          std::to_string(n_qubits));
    }
    return;
  }
  if (hi >= n_qubits || g.q0 < 0 || (g.is_two_qubit() && g.q1 < 0)) {
    throw WidthMismatch("gate operand outside register of " +
                        std::to_string(n_qubits) + " qubits");
  }
}

void apply_gate_span(std::span<Complex> amp, const Gate& g,
                     const std::vector<double>& bindings) {
  switch (g.kind) {
    case GateKind::CNOT:
      apply_cnot_span(amp, g.q0, g.q1);
      return;
    case GateKind::SWAP:
      apply_swap_span(amp, g.q0, g.q1);
      return;
    case GateKind::PauliEvolution:
      apply_pauli_evolution(g.pauli, resolve_angle(g, bindings), amp);
      return;
    default: {
      double a[3] = {resolve_angle(g, bindings), g.angles[1], g.angles[2]};
      apply_mat2(amp, g.q0, single_qubit_matrix(g.kind, a));
      return;
    }
  }
}

void left_apply_gate(Eigen::MatrixXcd& m, const Gate& g,
                     const std::vector<double>& bindings) {
  const size_t rows = size_t(m.rows());
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    apply_gate_span(std::span<Complex>(m.col(col).data(), rows), g, bindings);
  }
}

// rho -> U rho U^H, assuming rho is Hermitian on entry.
void conjugate_gate(Eigen::MatrixXcd& rho, const Gate& g,
                    const std::vector<double>& bindings) {
  left_apply_gate(rho, g, bindings);  // U rho
  rho.adjointInPlace();               // rho U^H
  left_apply_gate(rho, g, bindings);  // U rho U^H
}

void left_apply_kraus(Eigen::MatrixXcd& m, const Eigen::MatrixXcd& k,
                      const std::vector<int>& targets) {
  const size_t rows = size_t(m.rows());
  if (targets.size() == 1) {
    const Mat2 k2{k(0, 0), k(0, 1), k(1, 0), k(1, 1)};
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      apply_mat2(std::span<Complex>(m.col(col).data(), rows), targets[0], k2);
    }
  } else {
    const Eigen::Matrix4cd k4 = k;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      apply_mat4(std::span<Complex>(m.col(col).data(), rows), targets[0],
                 targets[1], k4);
    }
  }
}

double native_duration(const GateDurations& d, GateKind kind) {
  switch (kind) {
    case GateKind::U1:
      return d.u1;
    case GateKind::U2:
      return d.u2;
    case GateKind::U3:
      return d.u3;
    case GateKind::CNOT:
      return d.cnot;
    default:
      throw InvalidChannel(std::string("no duration for non-native gate ") +
                           gate_kind_name(kind));
  }
}

void apply_noise_after_gate(DensityMatrix& rho, const Gate& g,
                            const NoiseModel& noise) {
  std::vector<int> operands;
  operands.push_back(g.q0);
  if (g.is_two_qubit()) operands.push_back(g.q1);

  if (noise.thermal_enabled) {
    const double duration =
        native_duration(noise.durations, g.kind) * noise.scale;
    if (duration > 0.0) {
      for (int q : operands) {
        if (!noise.is_target(q)) continue;
        const QubitTimes& t = noise.times.at(size_t(q));
        apply_channel(rho, thermal_relaxation_channel(t.t1, t.t2, duration),
                      {q});
      }
    }
  }
  if (!g.is_two_qubit() && noise.p1 > 0.0) {
    if (noise.is_target(g.q0)) {
      apply_channel(rho, depolarizing_channel(noise.p1, 1), {g.q0});
    }
  }
  if (g.is_two_qubit() && noise.p2 > 0.0) {
    const bool t0 = noise.is_target(g.q0), t1 = noise.is_target(g.q1);
    if (t0 && t1) {
      apply_channel(rho, depolarizing_channel(noise.p2, 2), {g.q0, g.q1});
    } else if (t0 || t1) {
      apply_channel(rho, depolarizing_channel(noise.p2, 1), {t0 ? g.q0 : g.q1});
    }
  }
}

void check_bindings(const Circuit& c, const std::vector<double>& bindings) {
  if (int(bindings.size()) != c.n_params()) {
    throw UnboundParameter("circuit declares " + std::to_string(c.n_params()) +
                           " parameters but " +
                           std::to_string(bindings.size()) +
                           " values were bound");
  }
}

// Histogram of basis-state indices; shared by the public samplers.
std::map<std::uint64_t, long> sample_histogram(const StateVector& state,
                                               long shots, Rng rng) {
  if (shots < 1) {
    throw NonPositiveValue("shot count must be at least 1, got " +
                           std::to_string(shots));
  }
  const std::uint64_t dim = state.amplitudes.size();
  std::vector<double> cumulative(dim);
  double total = 0.0;
  for (std::uint64_t i = 0; i < dim; ++i) {
    total += std::norm(state.amplitudes[i]);
    cumulative[i] = total;
  }
  std::map<std::uint64_t, long> hist;
  for (long s = 0; s < shots; ++s) {
    const double u = rng.uniform() * total;
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::uint64_t index =
        it == cumulative.end() ? dim - 1
                               : std::uint64_t(it - cumulative.begin());
    ++hist[index];
  }
  return hist;
}

std::string bitstring_of(std::uint64_t index, int n_qubits) {
  std::string s(size_t(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if ((index >> q) & 1) s[size_t(n_qubits - 1 - q)] = '1';
  }
  return s;
}

}  // namespace

const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::U1: return "U1";
    case GateKind::U2: return "U2";
    case GateKind::U3: return "U3";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::X: return "X";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
    case GateKind::SWAP: return "SWAP";
    case GateKind::PauliEvolution: return "PauliEvolution";
  }
  return "?";
}

Circuit::Circuit(int qubits) : n_qubits(qubits) {
  if (qubits < 0) {
    throw IndexOutOfRange("qubit count must be non-negative, got " +
                          std::to_string(qubits));
  }
}

int Circuit::add_parameter(std::string name) {
  param_names.push_back(std::move(name));
  return int(param_names.size()) - 1;
}

void Circuit::check_qubit(int q) const {
  if (q < 0 || q >= n_qubits) {
    throw IndexOutOfRange("qubit " + std::to_string(q) +
                          " outside register of " + std::to_string(n_qubits));
  }
}

void Circuit::check_param(int param_id) const {
  if (param_id < 0 || param_id >= n_params()) {
    throw UnboundParameter("parameter id " + std::to_string(param_id) +
                           " is not declared");
  }
}

void Circuit::add_x(int q) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::X;
  g.q0 = q;
  gates.push_back(g);
}

void Circuit::add_h(int q) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::H;
  g.q0 = q;
  gates.push_back(g);
}

void Circuit::add_cnot(int control, int target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) {
    throw IndexOutOfRange("two-qubit gate operands must be distinct");
  }
  Gate g;
  g.kind = GateKind::CNOT;
  g.q0 = control;
  g.q1 = target;
  gates.push_back(g);
}

void Circuit::add_swap(int a, int b) {
  check_qubit(a);
  check_qubit(b);
  if (a == b) {
    throw IndexOutOfRange("two-qubit gate operands must be distinct");
  }
  Gate g;
  g.kind = GateKind::SWAP;
  g.q0 = a;
  g.q1 = b;
  gates.push_back(g);
}

void Circuit::add_u1(int q, double lambda) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::U1;
  g.q0 = q;
  g.angles[0] = lambda;
  gates.push_back(g);
}

void Circuit::add_u2(int q, double phi, double lambda) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::U2;
  g.q0 = q;
  g.angles[0] = phi;
  g.angles[1] = lambda;
  gates.push_back(g);
}

void Circuit::add_u3(int q, double theta, double phi, double lambda) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::U3;
  g.q0 = q;
  g.angles[0] = theta;
  g.angles[1] = phi;
  g.angles[2] = lambda;
  gates.push_back(g);
}

void Circuit::add_rx(int q, double angle) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::RX;
  g.q0 = q;
  g.angles[0] = angle;
  gates.push_back(g);
}

void Circuit::add_ry(int q, double angle) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::RY;
  g.q0 = q;
  g.angles[0] = angle;
  gates.push_back(g);
}

void Circuit::add_rz(int q, double angle) {
  check_qubit(q);
  Gate g;
  g.kind = GateKind::RZ;
  g.q0 = q;
  g.angles[0] = angle;
  gates.push_back(g);
}

void Circuit::add_rx_param(int q, int param_id, double scale) {
  check_qubit(q);
  check_param(param_id);
  Gate g;
  g.kind = GateKind::RX;
  g.q0 = q;
  g.param_id = param_id;
  g.param_scale = scale;
  gates.push_back(g);
}

void Circuit::add_ry_param(int q, int param_id, double scale) {
  check_qubit(q);
  check_param(param_id);
  Gate g;
  g.kind = GateKind::RY;
  g.q0 = q;
  g.param_id = param_id;
  g.param_scale = scale;
  gates.push_back(g);
}

void Circuit::add_rz_param(int q, int param_id, double scale) {
  check_qubit(q);
  check_param(param_id);
  Gate g;
  g.kind = GateKind::RZ;
  g.q0 = q;
  g.param_id = param_id;
  g.param_scale = scale;
  gates.push_back(g);
}

void Circuit::add_pauli_evolution(const PauliString& p, double angle) {
  if (p.width() > n_qubits) {
    throw IndexOutOfRange("evolution string spans " +
                          std::to_string(p.width()) +
                          " qubits but the register has " +
                          std::to_string(n_qubits));
  }
  Gate g;
  g.kind = GateKind::PauliEvolution;
  g.q0 = 0;
  g.angles[0] = angle;
  g.pauli = p;
  gates.push_back(g);
}

void Circuit::add_pauli_evolution_param(const PauliString& p, int param_id,
                                        double scale) {
  if (p.width() > n_qubits) {
    throw IndexOutOfRange("evolution string spans " +
                          std::to_string(p.width()) +
                          " qubits but the register has " +
                          std::to_string(n_qubits));
  }
  check_param(param_id);
  Gate g;
  g.kind = GateKind::PauliEvolution;
  g.q0 = 0;
  g.param_id = param_id;
  g.param_scale = scale;
  g.pauli = p;
  gates.push_back(g);
}

Circuit transpile_to_native(const Circuit& c) {
  Circuit out(c.n_qubits);
  out.param_names = c.param_names;
  auto push = [&out](GateKind kind, int q0, int q1, double a0, double a1,
                     double a2, int param_id, double scale) {
    Gate g;
    g.kind = kind;
    g.q0 = q0;
    g.q1 = q1;
    g.angles[0] = a0;
    g.angles[1] = a1;
    g.angles[2] = a2;
    g.param_id = param_id;
    g.param_scale = scale;
    out.gates.push_back(g);
  };

  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::U1:
      case GateKind::U2:
      case GateKind::U3:
      case GateKind::CNOT:
        out.gates.push_back(g);
        break;
      case GateKind::RZ:
        // Same diagonal up to the global phase e^{-i a/2}, which is dropped.
        push(GateKind::U1, g.q0, -1, g.angles[0], 0.0, 0.0, g.param_id,
             g.param_scale);
        break;
      case GateKind::RX:
        push(GateKind::U3, g.q0, -1, g.angles[0], -kPi / 2.0, kPi / 2.0,
             g.param_id, g.param_scale);
        break;
      case GateKind::RY:
        push(GateKind::U3, g.q0, -1, g.angles[0], 0.0, 0.0, g.param_id,
             g.param_scale);
        break;
      case GateKind::X:
        push(GateKind::U3, g.q0, -1, kPi, 0.0, kPi, -1, 1.0);
        break;
      case GateKind::H:
        push(GateKind::U2, g.q0, -1, 0.0, kPi, 0.0, -1, 1.0);
        break;
      case GateKind::SWAP:
        push(GateKind::CNOT, g.q0, g.q1, 0.0, 0.0, 0.0, -1, 1.0);
        push(GateKind::CNOT, g.q1, g.q0, 0.0, 0.0, 0.0, -1, 1.0);
        push(GateKind::CNOT, g.q0, g.q1, 0.0, 0.0, 0.0, -1, 1.0);
        break;
      case GateKind::PauliEvolution: {
        // exp(-i a/2 P): rotate each factor into Z, fold parity down a CNOT
        // ladder, phase the last qubit, then unwind. Identity strings are a
        // global phase and produce no gates.
        std::vector<int> support;
        std::vector<int> axis;  // 0=X, 1=Y, 2=Z per support qubit
        for (const auto& [q, ax] : g.pauli.factors()) {
          support.push_back(q);
          axis.push_back(ax == Axis::X ? 0 : (ax == Axis::Y ? 1 : 2));
        }
        if (support.empty()) break;
        for (size_t k = 0; k < support.size(); ++k) {
          if (axis[k] == 0) {
            push(GateKind::U2, support[k], -1, 0.0, kPi, 0.0, -1, 1.0);  // H
          } else if (axis[k] == 1) {
            push(GateKind::U1, support[k], -1, -kPi / 2.0, 0.0, 0.0, -1, 1.0);  // S^H
            push(GateKind::U2, support[k], -1, 0.0, kPi, 0.0, -1, 1.0);  // H
          }
        }
        for (size_t k = 0; k + 1 < support.size(); ++k) {
          push(GateKind::CNOT, support[k], support[k + 1], 0.0, 0.0, 0.0, -1, 1.0);
        }
        push(GateKind::U1, support.back(), -1, g.angles[0], 0.0, 0.0,
             g.param_id, g.param_scale);
        for (size_t k = support.size() - 1; k-- > 0;) {
          push(GateKind::CNOT, support[k], support[k + 1], 0.0, 0.0, 0.0, -1, 1.0);
        }
        for (size_t k = support.size(); k-- > 0;) {
          if (axis[k] == 0) {
            push(GateKind::U2, support[k], -1, 0.0, kPi, 0.0, -1, 1.0);
          } else if (axis[k] == 1) {
            push(GateKind::U2, support[k], -1, 0.0, kPi, 0.0, -1, 1.0);
            push(GateKind::U1, support[k], -1, kPi / 2.0, 0.0, 0.0, -1, 1.0);  // S
          }
        }
        break;
      }
    }
  }
  return out;
}

std::map<std::string, long> count_gates(const Circuit& c) {
  const Circuit native = transpile_to_native(c);
  std::map<std::string, long> counts;
  for (const Gate& g : native.gates) {
    ++counts[gate_kind_name(g.kind)];
  }
  return counts;
}

StateVector run_statevector(const Circuit& c,
                            const std::vector<double>& bindings) {
  check_bindings(c, bindings);
  StateVector psi;
  psi.n_qubits = c.n_qubits;
  psi.amplitudes.assign(std::uint64_t{1} << c.n_qubits, Complex(0.0, 0.0));
  psi.amplitudes[0] = Complex(1.0, 0.0);
  for (const Gate& g : c.gates) {
    check_gate_width(g, c.n_qubits);
    apply_gate_span(std::span<Complex>(psi.amplitudes), g, bindings);
  }
  return psi;
}

DensityMatrix run_density(const Circuit& c, const std::vector<double>& bindings,
                          const NoiseModel* noise) {
  if (c.n_qubits > 10) {
    throw TooWide("density backend supports at most 10 qubits, got " +
                  std::to_string(c.n_qubits));
  }
  check_bindings(c, bindings);
  const Circuit* run = &c;
  Circuit native(0);
  if (noise != nullptr) {
    native = transpile_to_native(c);
    run = &native;
  }
  const Eigen::Index dim = Eigen::Index(1) << c.n_qubits;
  DensityMatrix rho;
  rho.n_qubits = c.n_qubits;
  rho.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  rho.matrix(0, 0) = Complex(1.0, 0.0);
  for (const Gate& g : run->gates) {
    check_gate_width(g, c.n_qubits);
    conjugate_gate(rho.matrix, g, bindings);
    if (noise != nullptr) {
      apply_noise_after_gate(rho, g, *noise);
    }
  }
  if (noise != nullptr && noise->terminal_depolarizing > 0.0) {
    for (int q : noise->targets) {
      apply_channel(rho, depolarizing_channel(noise->terminal_depolarizing, 1),
                    {q});
    }
  }
  return rho;
}

void apply_channel(DensityMatrix& rho, const KrausChannel& channel,
                   const std::vector<int>& targets) {
  if (int(targets.size()) != channel.n_qubits ||
      (channel.n_qubits != 1 && channel.n_qubits != 2)) {
    throw InvalidChannel("channel acts on " +
                         std::to_string(channel.n_qubits) +
                         " qubits but " + std::to_string(targets.size()) +
                         " targets were given");
  }
  if (targets.size() == 2 && targets[0] == targets[1]) {
    throw InvalidChannel("channel targets must be distinct");
  }
  const int dim = 1 << channel.n_qubits;
  for (int q : targets) {
    if (q < 0 || q >= rho.n_qubits) {
      throw IndexOutOfRange("channel target qubit " + std::to_string(q) +
                            " outside register of " +
                            std::to_string(rho.n_qubits));
    }
  }
  for (const auto& k : channel.operators) {
    if (k.rows() != dim || k.cols() != dim) {
      throw InvalidChannel("Kraus operator dimension does not match channel "
                           "arity");
    }
  }
  Eigen::MatrixXcd acc =
      Eigen::MatrixXcd::Zero(rho.matrix.rows(), rho.matrix.cols());
  for (const auto& k : channel.operators) {
    Eigen::MatrixXcd term = rho.matrix;  // Hermitian on entry
    left_apply_kraus(term, k, targets);  // K rho
    term.adjointInPlace();               // rho K^H
    left_apply_kraus(term, k, targets);  // K rho K^H
    acc += term;
  }
  rho.matrix = std::move(acc);
}

std::map<std::string, long> sample_counts(const StateVector& state, long shots,
                                          std::uint64_t seed) {
  const auto hist = sample_histogram(state, shots, Rng(seed));
  std::map<std::string, long> counts;
  for (const auto& [index, n] : hist) {
    counts[bitstring_of(index, state.n_qubits)] = n;
  }
  return counts;
}

double estimate_expectation_sampled(const QubitOperator& op, const Circuit& c,
                                    const std::vector<double>& bindings,
                                    long shots, std::uint64_t seed) {
  if (shots < 1) {
    throw NonPositiveValue("shot count must be at least 1, got " +
                           std::to_string(shots));
  }
  if (op.num_qubits() > c.n_qubits) {
    throw WidthMismatch("operator spans " + std::to_string(op.num_qubits()) +
                        " qubits but the circuit has " +
                        std::to_string(c.n_qubits));
  }

  // Greedy first-fit packing into qubit-wise commuting groups: a term joins
  // the first group whose fixed per-qubit axes agree with its own on every
  // shared qubit.
  struct Group {
    std::uint64_t gx = 0, gz = 0;
    std::vector<const Term*> terms;
  };
  std::vector<Group> groups;
  double exact_part = 0.0;
  for (const Term& t : op.terms()) {
    if (t.string.is_identity()) {
      exact_part += t.coefficient.real();
      continue;
    }
    const std::uint64_t support = t.string.x | t.string.z;
    bool placed = false;
    for (Group& grp : groups) {
      const std::uint64_t overlap = support & (grp.gx | grp.gz);
      if (((t.string.x ^ grp.gx) & overlap) == 0 &&
          ((t.string.z ^ grp.gz) & overlap) == 0) {
        grp.gx |= t.string.x;
        grp.gz |= t.string.z;
        grp.terms.push_back(&t);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Group grp;
      grp.gx = t.string.x;
      grp.gz = t.string.z;
      grp.terms.push_back(&t);
      groups.push_back(std::move(grp));
    }
  }
  if (groups.empty()) return exact_part;
  if (shots < long(groups.size())) {
    throw NonPositiveValue("need at least one shot per measurement group (" +
                           std::to_string(groups.size()) + " groups, " +
                           std::to_string(shots) + " shots)");
  }

  const long base = shots / long(groups.size());
  const long remainder = shots % long(groups.size());
  double total = exact_part;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& grp = groups[gi];
    const long group_shots = base + (long(gi) < remainder ? 1 : 0);

    // Rotate every measured axis into Z: H for X, S^H then H for Y.
    Circuit measured = c;
    for (int q = 0; q < c.n_qubits; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << q;
      const bool x = (grp.gx & bit) != 0, z = (grp.gz & bit) != 0;
      if (x && !z) {
        measured.add_h(q);
      } else if (x && z) {
        measured.add_u1(q, -kPi / 2.0);
        measured.add_h(q);
      }
    }
    const StateVector state = run_statevector(measured, bindings);
    const auto hist = sample_histogram(state, group_shots,
                                       Rng::stream(seed, std::uint64_t(gi)));
    for (const Term* t : grp.terms) {
      const std::uint64_t mask = t->string.x | t->string.z;
      long signed_sum = 0;
      for (const auto& [index, n] : hist) {
        signed_sum += (std::popcount(index & mask) & 1) ? -n : n;
      }
      total += t->coefficient.real() *
               (double(signed_sum) / double(group_shots));
    }
  }
  return total;
}

}  // namespace aimvqe
