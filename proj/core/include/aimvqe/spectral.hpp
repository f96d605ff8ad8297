#pragma once

#include <cstdint>
#include <vector>

#include "aimvqe/pauli.hpp"
#include "aimvqe/state.hpp"

namespace aimvqe {

// Eigensolver selection. Auto uses the dense solver up to 10 qubits and the
// matrix-free Lanczos iteration above that.
enum class EigMethod { Auto, Dense, Iterative };

struct LanczosOptions {
  int max_iterations = 300;     // Krylov basis size cap
  double residual_tol = 1e-8;
  std::uint64_t seed = 1;       // seeds the random starting vector
};

struct GroundStateResult {
  double energy = 0.0;   // lowest eigenvalue
  double gap = 0.0;      // distance to the next computed eigenvalue
  int sector = 0;        // nearest-integer total occupation of the ground state
  bool degenerate = false;  // gap below 1e-10
  StateVector state;     // ground eigenvector, phase-fixed so the largest
                         // amplitude is real positive
};

// Lowest eigenpair of a Hermitian qubit operator. The dense path also yields
// the exact first excited energy; the iterative path reports the gap within
// the converged Krylov spectrum and guarantees a true residual
// ||H x - E x|| <= residual_tol (NoConvergence otherwise). Deterministic for
// fixed inputs, including the degenerate case.
GroundStateResult exact_ground_state(const QubitOperator& op,
                                     EigMethod method = EigMethod::Auto,
                                     const LanczosOptions& options = {});

// <S_z(i) S_z(j)> between two sites of the site-major spin-orbital register
// (site s on qubits 2s, 2s+1). Bounded by 1/4 in magnitude.
double measure_correlation(const StateVector& state, int site_i, int site_j);

// Full vector product <S(i) . S(j)>; range [-3/4, +1/4] on physical states.
double measure_vector_correlation(const StateVector& state, int site_i,
                                  int site_j);

// Least-squares slope of log(y) against log(x). Throws InsufficientData for
// fewer than two points or coincident x values, NonPositiveValue when any
// coordinate is not strictly positive, DimensionMismatch on unequal lengths.
double fit_loglog_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys);

struct Deviation {
  double absolute = 0.0;  // |value - reference|
  double percent = 0.0;   // 100 * absolute / |reference|
};

// Absolute and percent deviation of a value from a reference. Throws
// ZeroReference when the reference is exactly zero.
Deviation deviation_metrics(double value, double reference);

}  // namespace aimvqe
