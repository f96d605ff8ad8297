#include "aimvqe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>

#include "aimvqe/errors.hpp"

namespace aimvqe {

namespace {

constexpr Complex kIPow[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                              Complex(0, -1)};

inline int parity64(std::uint64_t v) { return std::popcount(v) & 1; }

// Phase picked up when applying P = i^{y_count} X(x) Z(z) to basis state |i>:
// P|i> = i^{y_count} (-1)^{parity(i & z)} |i ^ x>.
inline Complex basis_phase(const PauliString& p, std::uint64_t i, Complex y_phase) {
  return parity64(i & p.z) ? -y_phase : y_phase;
}

inline Complex y_phase_of(const PauliString& p) {
  return kIPow[std::popcount(p.x & p.z) & 3];
}

}  // namespace

char axis_letter(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    default: return 'Z';
  }
}

PauliString PauliString::from_factors(
    const std::vector<std::pair<int, Axis>>& factors) {
  PauliString p;
  for (const auto& [q, a] : factors) p.set(q, a);
  return p;
}

PauliString PauliString::single(int qubit, Axis axis) {
  PauliString p;
  p.set(qubit, axis);
  return p;
}

void PauliString::set(int qubit, Axis axis) {
  if (qubit < 0 || qubit > 63) {
    throw IndexOutOfRange("qubit index " + std::to_string(qubit) +
                          " outside the supported range 0..63");
  }
  const std::uint64_t bit = 1ULL << qubit;
  x &= ~bit;
  z &= ~bit;
  if (axis == Axis::X || axis == Axis::Y) x |= bit;
  if (axis == Axis::Z || axis == Axis::Y) z |= bit;
}

std::optional<Axis> PauliString::axis_at(int qubit) const {
  const std::uint64_t bit = 1ULL << qubit;
  const bool has_x = x & bit, has_z = z & bit;
  if (has_x && has_z) return Axis::Y;
  if (has_x) return Axis::X;
  if (has_z) return Axis::Z;
  return std::nullopt;
}

int PauliString::width() const {
  const std::uint64_t all = x | z;
  return all == 0 ? 0 : 64 - std::countl_zero(all);
}

int PauliString::support_size() const { return std::popcount(x | z); }

int PauliString::y_count() const { return std::popcount(x & z); }

std::vector<std::pair<int, Axis>> PauliString::factors() const {
  std::vector<std::pair<int, Axis>> out;
  std::uint64_t all = x | z;
  while (all) {
    const int q = std::countr_zero(all);
    out.emplace_back(q, *axis_at(q));
    all &= all - 1;
  }
  return out;
}

std::string PauliString::str() const {
  std::string s;
  for (const auto& [q, a] : factors()) {
    if (!s.empty()) s += ' ';
    s += axis_letter(a);
    s += std::to_string(q);
  }
  return s;
}

PauliString PauliString::relabeled(const std::vector<int>& permutation) const {
  PauliString out;
  for (const auto& [q, a] : factors()) {
    if (q >= static_cast<int>(permutation.size())) {
      throw IndexOutOfRange("relabeling permutation shorter than string width");
    }
    out.set(permutation[q], a);
  }
  return out;
}

std::pair<Complex, PauliString> multiply_strings(const PauliString& a,
                                                 const PauliString& b) {
  PauliString prod;
  prod.x = a.x ^ b.x;
  prod.z = a.z ^ b.z;
  // With P = i^{nY} X(x) Z(z):  a·b = i^{na+nb-nprod} (-1)^{parity(a.z & b.x)} prod.
  int ipow = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) -
             std::popcount(prod.x & prod.z);
  if (parity64(a.z & b.x)) ipow += 2;
  ipow = ((ipow % 4) + 4) % 4;
  return {kIPow[ipow], prod};
}

void QubitOperator::add_term(Complex coefficient, PauliString string) {
  terms_.push_back(Term{coefficient, string});
}

int QubitOperator::num_qubits() const {
  int w = declared_qubits_;
  for (const auto& t : terms_) w = std::max(w, t.string.width());
  return w;
}

void QubitOperator::declare_qubits(int n) { declared_qubits_ = n; }

QubitOperator QubitOperator::simplified(double tol) const {
  QubitOperator out(declared_qubits_);
  // Preserve first-occurrence order while merging duplicates.
  std::map<PauliString, std::size_t> index;
  for (const auto& t : terms_) {
    auto it = index.find(t.string);
    if (it == index.end()) {
      index.emplace(t.string, out.terms_.size());
      out.terms_.push_back(t);
    } else {
      out.terms_[it->second].coefficient += t.coefficient;
    }
  }
  if (tol > 0.0) {
    std::erase_if(out.terms_,
                  [tol](const Term& t) { return std::abs(t.coefficient) < tol; });
  }
  return out;
}

bool QubitOperator::is_hermitian(double tol) const {
  return max_imag_coefficient() <= tol;
}

double QubitOperator::max_imag_coefficient() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coefficient.imag()));
  return m;
}

QubitOperator QubitOperator::adjoint() const {
  QubitOperator out(declared_qubits_);
  for (const auto& t : terms_) out.add_term(std::conj(t.coefficient), t.string);
  return out;
}

QubitOperator QubitOperator::scaled(Complex factor) const {
  QubitOperator out(declared_qubits_);
  for (const auto& t : terms_) out.add_term(factor * t.coefficient, t.string);
  return out;
}

QubitOperator QubitOperator::operator+(const QubitOperator& o) const {
  QubitOperator out(std::max(declared_qubits_, o.declared_qubits_));
  out.terms_ = terms_;
  out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
  return out;
}

QubitOperator QubitOperator::operator-(const QubitOperator& o) const {
  return *this + o.scaled(Complex(-1.0, 0.0));
}

QubitOperator QubitOperator::operator*(const QubitOperator& o) const {
  QubitOperator out(std::max(declared_qubits_, o.declared_qubits_));
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      auto [phase, prod] = multiply_strings(a.string, b.string);
      out.add_term(a.coefficient * b.coefficient * phase, prod);
    }
  }
  return out;
}

QubitOperator& QubitOperator::operator+=(const QubitOperator& o) {
  declared_qubits_ = std::max(declared_qubits_, o.declared_qubits_);
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

QubitOperator QubitOperator::relabeled(const std::vector<int>& permutation) const {
  QubitOperator out(declared_qubits_);
  for (const auto& t : terms_) {
    out.add_term(t.coefficient, t.string.relabeled(permutation));
  }
  return out;
}

bool QubitOperator::structurally_equal(const QubitOperator& o) const {
  if (terms_.size() != o.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].string != o.terms_[i].string) return false;
    if (terms_[i].coefficient != o.terms_[i].coefficient) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  void advance() {
    if (eof()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_whitespace() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' ||
                      peek() == '\n')) {
      advance();
    }
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(message, line_, col_, pos_);
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    advance();
  }

  double parse_real(bool allow_sign) {
    const char c = peek();
    if (!allow_sign && (c == '+' || c == '-')) {
      fail("malformed coefficient: unexpected sign");
    }
    if (allow_sign && c == '+') {
      // std::from_chars rejects an explicit leading '+'; consume it here.
      advance();
      const char next = peek();
      if (!(next >= '0' && next <= '9') && next != '.') {
        fail("malformed coefficient");
      }
    }
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("malformed coefficient");
    const std::size_t consumed = static_cast<std::size_t>(ptr - begin);
    for (std::size_t i = 0; i < consumed; ++i) advance();
    return value;
  }

  unsigned parse_unsigned() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("expected qubit index");
    const std::size_t consumed = static_cast<std::size_t>(ptr - begin);
    for (std::size_t i = 0; i < consumed; ++i) advance();
    return value;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

Term parse_term(Cursor& cur) {
  cur.expect('(', "'('");
  const double re = cur.parse_real(/*allow_sign=*/true);
  const char sign = cur.peek();
  if (sign != '+' && sign != '-') {
    cur.fail("malformed coefficient: expected sign before imaginary part");
  }
  cur.advance();
  double im = cur.parse_real(/*allow_sign=*/false);
  if (sign == '-') im = -im;
  cur.expect('j', "'j'");
  cur.expect(')', "')'");
  cur.skip_spaces();
  cur.expect('[', "'['");
  PauliString string;
  std::uint64_t seen = 0;
  while (true) {
    cur.skip_spaces();
    if (cur.peek() == ']') {
      cur.advance();
      break;
    }
    const char axis_char = cur.peek();
    Axis axis;
    switch (axis_char) {
      case 'X': axis = Axis::X; break;
      case 'Y': axis = Axis::Y; break;
      case 'Z': axis = Axis::Z; break;
      default:
        cur.fail(std::string("unknown axis letter '") + axis_char + "'");
    }
    cur.advance();
    const unsigned q = cur.parse_unsigned();
    if (q > 63) cur.fail("qubit index exceeds the supported range 0..63");
    const std::uint64_t bit = 1ULL << q;
    if (seen & bit) {
      cur.fail("duplicate qubit index " + std::to_string(q) + " within one term");
    }
    seen |= bit;
    string.set(static_cast<int>(q), axis);
  }
  return Term{Complex(re, im), string};
}

}  // namespace

QubitOperator parse_operator(std::string_view text) {
  Cursor cur(text);
  cur.skip_whitespace();
  if (cur.eof()) throw EmptyInput();
  QubitOperator op;
  while (true) {
    const Term term = parse_term(cur);
    op.add_term(term.coefficient, term.string);
    cur.skip_spaces();
    if (cur.peek() == '+') {
      cur.advance();
      cur.skip_whitespace();
      if (cur.eof()) cur.fail("dangling '+' with no following term");
      continue;
    }
    cur.skip_whitespace();
    if (cur.eof()) break;
    cur.fail("expected ' +' continuation or end of input");
  }
  op.declare_qubits(op.num_qubits());
  return op;
}

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // normalize -0.0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string serialize_operator(const QubitOperator& op) {
  std::string out;
  bool first = true;
  for (const auto& t : op.terms()) {
    if (!first) out += " +\n";
    first = false;
    double re = t.coefficient.real();
    double im = t.coefficient.imag();
    if (im == 0.0) im = 0.0;
    out += '(';
    out += format_double(re);
    if (im < 0.0) {
      out += '-';
      out += format_double(-im);
    } else {
      out += '+';
      out += format_double(im);
    }
    out += "j) [";
    out += t.string.str();
    out += ']';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense realization and expectations
// ---------------------------------------------------------------------------

Eigen::MatrixXcd to_matrix(const PauliString& p, int n_qubits) {
  QubitOperator op;
  op.add_term(Complex(1.0, 0.0), p);
  return to_matrix(op, n_qubits);
}

Eigen::MatrixXcd to_matrix(const QubitOperator& op, int n_qubits) {
  if (n_qubits > 12) {
    throw TooWide("dense realization limited to 12 qubits, requested " +
                  std::to_string(n_qubits));
  }
  if (n_qubits < op.num_qubits()) {
    throw WidthMismatch("operator acts on " + std::to_string(op.num_qubits()) +
                        " qubits but the requested width is " +
                        std::to_string(n_qubits));
  }
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : op.terms()) {
    const Complex yp = y_phase_of(t.string);
    for (std::uint64_t col = 0; col < static_cast<std::uint64_t>(dim); ++col) {
      const std::uint64_t row = col ^ t.string.x;
      m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
          t.coefficient * basis_phase(t.string, col, yp);
    }
  }
  return m;
}

Complex expectation(const PauliString& p, const StateVector& state) {
  const Complex yp = y_phase_of(p);
  const std::uint64_t n = state.amplitudes.size();
  Complex acc(0.0, 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    acc += std::conj(state.amplitudes[i ^ p.x]) * basis_phase(p, i, yp) *
           state.amplitudes[i];
  }
  return acc;
}

Complex expectation(const PauliString& p, const DensityMatrix& state) {
  // tr(rho P): (rho P)(k,k) = rho(k, k^x) * phase(k).
  const Complex yp = y_phase_of(p);
  const std::uint64_t n = static_cast<std::uint64_t>(state.dim());
  Complex acc(0.0, 0.0);
  for (std::uint64_t k = 0; k < n; ++k) {
    acc += state.matrix(static_cast<Eigen::Index>(k),
                        static_cast<Eigen::Index>(k ^ p.x)) *
           basis_phase(p, k, yp);
  }
  return acc;
}

namespace {

template <typename State>
Complex expectation_impl(const QubitOperator& op, const State& state,
                         int state_qubits) {
  if (op.num_qubits() > state_qubits) {
    throw WidthMismatch("operator acts on " + std::to_string(op.num_qubits()) +
                        " qubits but the state has " +
                        std::to_string(state_qubits));
  }
  Complex acc(0.0, 0.0);
  for (const auto& t : op.terms()) {
    acc += t.coefficient * expectation(t.string, state);
  }
  return acc;
}

}  // namespace

Complex expectation(const QubitOperator& op, const StateVector& state) {
  return expectation_impl(op, state, state.n_qubits);
}

Complex expectation(const QubitOperator& op, const DensityMatrix& state) {
  return expectation_impl(op, state, state.n_qubits);
}

void accumulate_pauli_apply(const PauliString& p, Complex coefficient,
                            const std::vector<Complex>& psi,
                            std::vector<Complex>& out) {
  const Complex yp = y_phase_of(p);
  const std::uint64_t n = psi.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i ^ p.x] += coefficient * basis_phase(p, i, yp) * psi[i];
  }
}

void apply_pauli_evolution(const PauliString& p, double angle,
                           std::span<Complex> amp) {
  // exp(-i a/2 P) = cos(a/2) I - i sin(a/2) P.
  const double c = std::cos(angle / 2.0);
  const Complex s(0.0, -std::sin(angle / 2.0));
  const Complex yp = y_phase_of(p);
  const std::uint64_t n = amp.size();
  if (p.x == 0) {
    // Diagonal action: amplitude-wise phase.
    for (std::uint64_t i = 0; i < n; ++i) {
      amp[i] = (c + s * basis_phase(p, i, yp)) * amp[i];
    }
    return;
  }
  // Off-diagonal: process each {i, i^x} pair once.
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t j = i ^ p.x;
    if (j < i) continue;
    const Complex phase_i = basis_phase(p, i, yp);  // P|i> = phase_i |j>
    const Complex phase_j = basis_phase(p, j, yp);  // P|j> = phase_j |i>
    const Complex ai = amp[i], aj = amp[j];
    amp[j] = c * aj + s * phase_i * ai;
    amp[i] = c * ai + s * phase_j * aj;
  }
}

void apply_pauli_evolution(const PauliString& p, double angle,
                           StateVector& psi) {
  apply_pauli_evolution(p, angle, std::span<Complex>(psi.amplitudes));
}

double StateVector::norm() const {
  double s = 0.0;
  for (const Complex& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  DensityMatrix rho;
  rho.n_qubits = psi.n_qubits;
  const Eigen::Index d = static_cast<Eigen::Index>(psi.amplitudes.size());
  Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes.data(), d);
  rho.matrix = v * v.adjoint();
  return rho;
}

}  // namespace aimvqe
