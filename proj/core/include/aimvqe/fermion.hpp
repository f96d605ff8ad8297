#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "aimvqe/pauli.hpp"

namespace aimvqe {

enum class Spin { Up, Down };

// Site-major spin-orbital layout: site s maps to qubits (2s, 2s+1) with the
// up orbital on the even qubit. Impurity sites occupy the lowest site
// indices, bath sites follow.
struct SpinOrbitalIndexing {
  int n_sites = 0;

  int qubit(int site, Spin spin) const {
    return 2 * site + (spin == Spin::Down ? 1 : 0);
  }
  int n_qubits() const { return 2 * n_sites; }
};

// Parameters of the impurity model:
//   H = sum_{mn,s} eps_n(m,n) b+_{m,s} b_{n,s}                (bath hopping)
//     + sum_{mn,s} eps_a(m,n) b+_{m,s} b+_{n,-s} + h.c.       (pairing)
//     + sum_{mi,s} v(m,i) (b+_{m,s} c_{i,s} + h.c.)           (hybridization)
//     + mu * sum_{i,s} c+_{i,s} c_{i,s}                       (impurity onsite)
//     + U  * sum_i  n_{i,down} n_{i,up}                       (onsite repulsion)
// with b acting on bath orbitals and c on impurity orbitals. eps_n must be
// Hermitian (real symmetric here), eps_a antisymmetric. j_hund is stored as
// metadata only and enters no equation.
struct AimParameters {
  Eigen::MatrixXd eps_n;  // n_bath x n_bath
  Eigen::MatrixXd eps_a;  // n_bath x n_bath (defaults to zero when empty)
  Eigen::MatrixXd v;      // n_bath x n_impurity
  double mu = 0.0;
  double u = 0.0;
  int n_impurity = 0;
  int n_bath = 0;
  double j_hund = 0.0;
};

// Annihilation operator a_j = Z_0...Z_{j-1} (X_j + i Y_j)/2 on an n-qubit
// register; the creation operator is its adjoint.
QubitOperator jw_annihilation(int j, int n);
QubitOperator jw_creation(int j, int n);

// Number operator for one qubit, (I - Z_q)/2, on an n-qubit register.
QubitOperator jw_number(int q, int n);

// Total number operator sum_q (I - Z_q)/2.
QubitOperator total_number_operator(int n);

// Assembles the impurity-model Hamiltonian above. Impurity sites come first
// (sites 0..n_impurity-1), bath sites follow. Result is simplified and has
// real coefficients.
QubitOperator build_aim_hamiltonian(const AimParameters& params,
                                    const SpinOrbitalIndexing& indexing);

// h + delta_u/4 * sum over pairs (a,b) of (I - Z_a - Z_b + Z_a Z_b),
// simplified. Shifts the onsite repulsion on the listed qubit pairs.
QubitOperator shift_onsite_u(const QubitOperator& h,
                             const std::vector<std::pair<int, int>>& impurity_pairs,
                             double delta_u);

// S_z for one site: (n_up - n_down)/2 = (Z_down - Z_up)/4.
QubitOperator spin_z_operator(int site, const SpinOrbitalIndexing& indexing);

// Product S_z[i] * S_z[j]; four ZZ terms with coefficients +-1/16.
QubitOperator szsz_operator(int i, int j, const SpinOrbitalIndexing& indexing);

// Full vector spin-spin product S[i] . S[j] = SxSx + SySy + SzSz, built from
// the fermionic ladder operators. Range on physical states: [-3/4, +1/4].
QubitOperator spin_spin_operator(int i, int j, const SpinOrbitalIndexing& indexing);

}  // namespace aimvqe
