#pragma once

#include <string>
#include <vector>

#include "aimvqe/circuit.hpp"
#include "aimvqe/fermion.hpp"
#include "aimvqe/pauli.hpp"

namespace aimvqe {

// One anti-Hermitian cluster-operator building block T - T^H. Singles move an
// electron p -> q; doubles move the pair {p, q} -> {r, s}. Index invariants:
// p < q, r < s, (p, q) < (r, s) lexicographically, and the pairs disjoint.
struct Excitation {
  bool is_double = false;
  int p = 0, q = 0;
  int r = 0, s = 0;

  bool operator==(const Excitation&) const = default;
};

Excitation make_single(int p, int q);
Excitation make_double(int p, int q, int r, int s);

enum class AnsatzFamily {
  GeneralizedUCCS,     // all singles, no occupied/virtual restriction
  GeneralizedUCCSD,    // all singles + all ordered disjoint doubles
  SpinConservedUCCSD,  // singles within one spin species, doubles with net-zero
                       // spin change (site-major indexing: even=up, odd=down)
  EfficientSU2,        // hardware-efficient RY/RZ layers with CNOT chains
};

const char* ansatz_family_name(AnsatzFamily family);

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::GeneralizedUCCSD;
  int n_qubits = 0;
  int reps = 1;                // EfficientSU2 only
  std::vector<int> reference;  // occupied qubit indices
};

// Excitation pool in deterministic order: singles before doubles, each block
// lexicographic. Empty for EfficientSU2. Throws OddWidth when the
// spin-labelled (SpinConserved) pool is requested on an odd register.
std::vector<Excitation> build_pool(const AnsatzSpec& spec);

// Jordan-Wigner image of T - T^H; anti-Hermitian, so every coefficient is
// purely imaginary.
QubitOperator excitation_to_generator(const Excitation& e, int n_qubits);

// X gates preparing the reference occupation, then one first-order product of
// Pauli-evolution factors per excitation in pool order; each excitation's
// factors share a single parameter.
Circuit synthesize_ucc_circuit(const std::vector<Excitation>& pool,
                               int n_qubits,
                               const std::vector<int>& reference);

// (reps+1) layers of per-qubit RY then RZ rotations separated by linear CNOT
// chains; 2*n*(reps+1) parameters, all zeros acting as the identity on |0...0>.
Circuit efficient_su2_circuit(int n_qubits, int reps);

// Dispatch on spec.family. For EfficientSU2 a non-empty reference is prepared
// with X gates before the rotation layers.
Circuit build_ansatz_circuit(const AnsatzSpec& spec);

// Occupies the n_electrons orbitals of lowest onsite energy; ties broken by
// ascending qubit index. Throws ElectronCountOutOfRange outside [0, n].
std::vector<int> hartree_fock_reference(const std::vector<double>& onsite,
                                        int n_electrons);

// Per-qubit onsite energies of the impurity model under site-major indexing:
// impurity orbitals sit at the chemical-potential offset, bath orbitals at
// their diagonal one-body energy (both spins alike).
std::vector<double> onsite_energies(const AimParameters& params);

std::uint64_t occupation_mask(const std::vector<int>& occupied);

}  // namespace aimvqe
