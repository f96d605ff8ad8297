#include "aimvqe/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <bit>
#include <complex>
#include <cstddef>
#include <limits>

#include "aimvqe/errors.hpp"
#include "aimvqe/fermion.hpp"
#include "aimvqe/rng.hpp"

namespace aimvqe {

namespace {

constexpr double kDegeneracyTol = 1e-10;

// Fixes the global phase so the largest-magnitude amplitude (first such index
// on ties) is real and positive. Makes degenerate representatives
// reproducible across runs.
void canonicalize_phase(StateVector& psi) {
  std::size_t best = 0;
  double best_mag = 0.0;
  for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) {
    const double mag = std::abs(psi.amplitudes[i]);
    if (mag > best_mag + 1e-12) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag <= 0.0) return;
  const Complex phase = psi.amplitudes[best] / best_mag;
  for (Complex& a : psi.amplitudes) a /= phase;
}

int occupation_sector(const StateVector& psi) {
  // <N> = sum_q (1 - <Z_q>)/2 evaluated directly from basis-state weights.
  double total = 0.0;
  for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) {
    const double w = std::norm(psi.amplitudes[i]);
    if (w > 0.0) total += w * double(std::popcount(i));
  }
  return int(std::lround(total));
}

GroundStateResult dense_ground_state(const QubitOperator& op, int n) {
  const Eigen::MatrixXcd h = to_matrix(op, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("dense eigensolver failed");

  GroundStateResult result;
  result.energy = solver.eigenvalues()(0);
  result.gap = h.rows() > 1 ? solver.eigenvalues()(1) - result.energy : 0.0;
  result.degenerate = h.rows() > 1 && result.gap < kDegeneracyTol;
  result.state = StateVector(n);
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    result.state.amplitudes[std::size_t(i)] = solver.eigenvectors()(i, 0);
  canonicalize_phase(result.state);
  result.sector = occupation_sector(result.state);
  return result;
}

void apply_operator(const std::vector<Term>& terms,
                    const std::vector<Complex>& in, std::vector<Complex>& out) {
  std::fill(out.begin(), out.end(), Complex(0.0, 0.0));
  for (const Term& term : terms)
    accumulate_pauli_apply(term.string, term.coefficient, in, out);
}

double vec_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& a : v) s += std::norm(a);
  return std::sqrt(s);
}

Complex vec_dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

GroundStateResult lanczos_ground_state(const QubitOperator& op, int n,
                                       const LanczosOptions& options) {
  if (options.max_iterations < 1)
    throw NonPositiveValue("Lanczos iteration budget must be positive");
  if (options.residual_tol <= 0.0)
    throw NonPositiveValue("Lanczos residual tolerance must be positive");

  const std::vector<Term> terms = op.terms();
  const std::size_t dim = std::size_t(1) << n;
  const int max_basis = int(std::min<std::size_t>(
      std::size_t(options.max_iterations), dim));

  // Random normalized starting vector; a generic start overlaps every
  // eigenspace almost surely.
  Rng rng(options.seed);
  std::vector<std::vector<Complex>> basis;
  basis.emplace_back(dim);
  for (Complex& a : basis[0]) a = Complex(rng.normal(), rng.normal());
  {
    const double nrm = vec_norm(basis[0]);
    for (Complex& a : basis[0]) a /= nrm;
  }

  std::vector<double> alpha, beta;  // tridiagonal coefficients
  std::vector<Complex> w(dim);
  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_vectors;
  double best_residual_estimate = std::numeric_limits<double>::infinity();
  bool exhausted = false;

  auto solve_tridiagonal = [&](int m) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[std::size_t(i)];
      if (i + 1 < m) {
        t(i, i + 1) = beta[std::size_t(i)];
        t(i + 1, i) = beta[std::size_t(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    ritz_values = solver.eigenvalues();
    ritz_vectors = solver.eigenvectors();
  };

  for (int j = 0; j < max_basis; ++j) {
    apply_operator(terms, basis[std::size_t(j)], w);
    const Complex a_j = vec_dot(basis[std::size_t(j)], w);
    alpha.push_back(a_j.real());
    // Full reorthogonalization, applied twice for numerical stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const std::vector<Complex>& v : basis) {
        const Complex overlap = vec_dot(v, w);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= overlap * v[i];
      }
    }
    const double b_j = vec_norm(w);

    const int m = j + 1;
    // The Ritz residual estimate is |beta_j| times the last component of the
    // ground Ritz vector; solve the small system on a thinning stride once
    // the basis grows.
    const bool check = m <= 40 || m % 5 == 0 || b_j < 1e-12 ||
                       m == max_basis;
    if (check) {
      solve_tridiagonal(m);
      const double estimate = std::abs(b_j * ritz_vectors(m - 1, 0));
      best_residual_estimate = std::min(best_residual_estimate, estimate);
      if (estimate <= options.residual_tol || b_j < 1e-12) {
        // Assemble the Ritz vector and verify the true residual.
        GroundStateResult result;
        result.energy = ritz_values(0);
        result.gap = m > 1 ? ritz_values(1) - ritz_values(0) : 0.0;
        result.degenerate = m > 1 && result.gap < kDegeneracyTol;
        result.state = StateVector(n);
        std::vector<Complex>& x = result.state.amplitudes;
        std::fill(x.begin(), x.end(), Complex(0.0, 0.0));
        for (int i = 0; i < m; ++i) {
          const double weight = ritz_vectors(i, 0);
          const std::vector<Complex>& v = basis[std::size_t(i)];
          for (std::size_t k = 0; k < dim; ++k) x[k] += weight * v[k];
        }
        const double nrm = vec_norm(x);
        for (Complex& a : x) a /= nrm;
        std::vector<Complex> hx(dim);
        apply_operator(terms, x, hx);
        double residual = 0.0;
        for (std::size_t k = 0; k < dim; ++k)
          residual += std::norm(hx[k] - result.energy * x[k]);
        residual = std::sqrt(residual);
        if (residual <= options.residual_tol) {
          canonicalize_phase(result.state);
          result.sector = occupation_sector(result.state);
          return result;
        }
        if (b_j < 1e-12) {
          // Invariant subspace exhausted without meeting the tolerance.
          exhausted = true;
          best_residual_estimate = std::min(best_residual_estimate, residual);
          break;
        }
      }
    }
    if (exhausted || j + 1 >= max_basis) break;
    beta.push_back(b_j);
    basis.emplace_back(dim);
    for (std::size_t i = 0; i < dim; ++i) basis.back()[i] = w[i] / b_j;
  }

  throw NoConvergence("Lanczos iteration did not reach the residual tolerance",
                      best_residual_estimate);
}

}  // namespace

GroundStateResult exact_ground_state(const QubitOperator& op, EigMethod method,
                                     const LanczosOptions& options) {
  const int n = op.num_qubits();
  if (n < 1) throw EmptyInput();
  if (method == EigMethod::Auto)
    method = n <= 10 ? EigMethod::Dense : EigMethod::Iterative;
  if (method == EigMethod::Dense && n > 12)
    throw TooWide("dense eigensolver supports at most 12 qubits");
  return method == EigMethod::Dense ? dense_ground_state(op, n)
                                    : lanczos_ground_state(op, n, options);
}

namespace {

double correlation_with(const QubitOperator& observable,
                        const StateVector& state) {
  return expectation(observable, state).real();
}

SpinOrbitalIndexing indexing_for(const StateVector& state, int site_i,
                                 int site_j) {
  if (state.n_qubits < 2 || state.n_qubits % 2 != 0)
    throw OddWidth("spin correlations need an even qubit count");
  SpinOrbitalIndexing indexing;
  indexing.n_sites = state.n_qubits / 2;
  if (site_i < 0 || site_j < 0 || site_i >= indexing.n_sites ||
      site_j >= indexing.n_sites)
    throw IndexOutOfRange("site index outside the register");
  if (site_i == site_j) throw SameSite("correlation needs two distinct sites");
  return indexing;
}

}  // namespace

double measure_correlation(const StateVector& state, int site_i, int site_j) {
  const SpinOrbitalIndexing indexing = indexing_for(state, site_i, site_j);
  return correlation_with(szsz_operator(site_i, site_j, indexing), state);
}

double measure_vector_correlation(const StateVector& state, int site_i,
                                  int site_j) {
  const SpinOrbitalIndexing indexing = indexing_for(state, site_i, site_j);
  return correlation_with(spin_spin_operator(site_i, site_j, indexing), state);
}

double fit_loglog_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw DimensionMismatch("slope fit needs matching coordinate counts");
  if (xs.size() < 2)
    throw InsufficientData("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0.0 || ys[i] <= 0.0)
      throw NonPositiveValue("slope fit needs strictly positive coordinates");
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double count = double(xs.size());
  const double var = sxx - sx * sx / count;
  if (var <= 0.0)
    throw InsufficientData("slope fit needs at least two distinct x values");
  return (sxy - sx * sy / count) / var;
}

Deviation deviation_metrics(double value, double reference) {
  if (reference == 0.0) throw ZeroReference();
  Deviation d;
  d.absolute = std::abs(value - reference);
  d.percent = 100.0 * d.absolute / std::abs(reference);
  return d;
}

}  // namespace aimvqe
