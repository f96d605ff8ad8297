#include "aimvqe/ansatz.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "aimvqe/errors.hpp"

namespace aimvqe {

namespace {

void check_index(int value, int n, const char* what) {
  if (value < 0 || value >= n) {
    throw IndexOutOfRange(std::string(what) + " index " +
                          std::to_string(value) + " outside register of " +
                          std::to_string(n) + " qubits");
  }
}

void check_excitation(const Excitation& e, int n_qubits) {
  check_index(e.p, n_qubits, "excitation");
  check_index(e.q, n_qubits, "excitation");
  if (e.is_double) {
    check_index(e.r, n_qubits, "excitation");
    check_index(e.s, n_qubits, "excitation");
  }
}

int spin_parity(int qubit) { return qubit & 1; }

}  // namespace

Excitation make_single(int p, int q) {
  if (p < 0 || q < 0 || p >= q) {
    throw IndexOutOfRange("single excitation requires 0 <= p < q, got (" +
                          std::to_string(p) + ", " + std::to_string(q) + ")");
  }
  Excitation e;
  e.p = p;
  e.q = q;
  return e;
}

Excitation make_double(int p, int q, int r, int s) {
  const bool ordered = p >= 0 && p < q && r >= 0 && r < s &&
                       (p < r || (p == r && q < s));
  const bool disjoint = p != r && p != s && q != r && q != s;
  if (!ordered || !disjoint) {
    throw IndexOutOfRange(
        "double excitation requires p<q, r<s, (p,q)<(r,s), disjoint pairs; "
        "got (" + std::to_string(p) + ", " + std::to_string(q) + ", " +
        std::to_string(r) + ", " + std::to_string(s) + ")");
  }
  Excitation e;
  e.is_double = true;
  e.p = p;
  e.q = q;
  e.r = r;
  e.s = s;
  return e;
}

const char* ansatz_family_name(AnsatzFamily family) {
  switch (family) {
    case AnsatzFamily::GeneralizedUCCS: return "generalized-uccs";
    case AnsatzFamily::GeneralizedUCCSD: return "generalized-uccsd";
    case AnsatzFamily::SpinConservedUCCSD: return "spin-conserved-uccsd";
    case AnsatzFamily::EfficientSU2: return "efficient-su2";
  }
  return "?";
}

std::vector<Excitation> build_pool(const AnsatzSpec& spec) {
  const int n = spec.n_qubits;
  if (n < 0) {
    throw IndexOutOfRange("qubit count must be non-negative, got " +
                          std::to_string(n));
  }
  std::vector<Excitation> pool;
  switch (spec.family) {
    case AnsatzFamily::EfficientSU2:
      return pool;
    case AnsatzFamily::GeneralizedUCCS:
    case AnsatzFamily::GeneralizedUCCSD: {
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          pool.push_back(make_single(p, q));
        }
      }
      if (spec.family == AnsatzFamily::GeneralizedUCCS) return pool;
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          for (int r = p; r < n; ++r) {
            for (int s = r + 1; s < n; ++s) {
              if (r < p || (r == p && s <= q)) continue;
              if (r == p || r == q || s == p || s == q) continue;
              pool.push_back(make_double(p, q, r, s));
            }
          }
        }
      }
      return pool;
    }
    case AnsatzFamily::SpinConservedUCCSD: {
      if (n % 2 != 0) {
        throw OddWidth("spin-labelled pools need an even qubit count, got " +
                       std::to_string(n));
      }
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          if (spin_parity(p) == spin_parity(q)) {
            pool.push_back(make_single(p, q));
          }
        }
      }
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          for (int r = p; r < n; ++r) {
            for (int s = r + 1; s < n; ++s) {
              if (r < p || (r == p && s <= q)) continue;
              if (r == p || r == q || s == p || s == q) continue;
              const int spin_from = spin_parity(p) + spin_parity(q);
              const int spin_to = spin_parity(r) + spin_parity(s);
              if (spin_from != spin_to) continue;
              pool.push_back(make_double(p, q, r, s));
            }
          }
        }
      }
      return pool;
    }
  }
  return pool;
}

QubitOperator excitation_to_generator(const Excitation& e, int n_qubits) {
  check_excitation(e, n_qubits);
  QubitOperator t;
  if (!e.is_double) {
    t = jw_creation(e.q, n_qubits) * jw_annihilation(e.p, n_qubits);
  } else {
    t = jw_creation(e.r, n_qubits) * jw_creation(e.s, n_qubits) *
        jw_annihilation(e.q, n_qubits) * jw_annihilation(e.p, n_qubits);
  }
  return (t - t.adjoint()).simplified();
}

Circuit synthesize_ucc_circuit(const std::vector<Excitation>& pool,
                               int n_qubits,
                               const std::vector<int>& reference) {
  Circuit c(n_qubits);
  std::vector<int> occupied = reference;
  std::sort(occupied.begin(), occupied.end());
  for (int q : occupied) {
    check_index(q, n_qubits, "reference occupation");
    c.add_x(q);
  }
  for (size_t k = 0; k < pool.size(); ++k) {
    const int param = c.add_parameter("t" + std::to_string(k));
    const QubitOperator g = excitation_to_generator(pool[k], n_qubits);
    for (const Term& term : g.terms()) {
      // Coefficient i*m with real m; exp(theta * i*m*P) is the evolution gate
      // exp(-i a/2 P) at a = -2 m theta.
      c.add_pauli_evolution_param(term.string, param,
                                  -2.0 * term.coefficient.imag());
    }
  }
  return c;
}

Circuit efficient_su2_circuit(int n_qubits, int reps) {
  if (n_qubits < 0 || reps < 0) {
    throw IndexOutOfRange("width and repetitions must be non-negative");
  }
  Circuit c(n_qubits);
  for (int layer = 0; layer <= reps; ++layer) {
    for (int q = 0; q < n_qubits; ++q) {
      const int id =
          c.add_parameter("l" + std::to_string(layer) + "_ry" +
                          std::to_string(q));
      c.add_ry_param(q, id);
    }
    for (int q = 0; q < n_qubits; ++q) {
      const int id =
          c.add_parameter("l" + std::to_string(layer) + "_rz" +
                          std::to_string(q));
      c.add_rz_param(q, id);
    }
    if (layer < reps) {
      for (int q = 0; q + 1 < n_qubits; ++q) {
        c.add_cnot(q, q + 1);
      }
    }
  }
  return c;
}

Circuit build_ansatz_circuit(const AnsatzSpec& spec) {
  for (int q : spec.reference) {
    check_index(q, spec.n_qubits, "reference occupation");
  }
  if (spec.family == AnsatzFamily::EfficientSU2) {
    Circuit c(spec.n_qubits);
    std::vector<int> occupied = spec.reference;
    std::sort(occupied.begin(), occupied.end());
    for (int q : occupied) c.add_x(q);
    const Circuit layers = efficient_su2_circuit(spec.n_qubits, spec.reps);
    c.param_names = layers.param_names;
    c.gates.insert(c.gates.end(), layers.gates.begin(), layers.gates.end());
    return c;
  }
  return synthesize_ucc_circuit(build_pool(spec), spec.n_qubits,
                                spec.reference);
}

std::vector<int> hartree_fock_reference(const std::vector<double>& onsite,
                                        int n_electrons) {
  const int n = int(onsite.size());
  if (n_electrons < 0 || n_electrons > n) {
    throw ElectronCountOutOfRange("electron count " +
                                  std::to_string(n_electrons) +
                                  " outside [0, " + std::to_string(n) + "]");
  }
  std::vector<int> order;
  order.resize(size_t(n));
  for (int q = 0; q < n; ++q) order[size_t(q)] = q;
  std::stable_sort(order.begin(), order.end(), [&onsite](int a, int b) {
    return onsite[size_t(a)] < onsite[size_t(b)];
  });
  std::vector<int> occupied(order.begin(), order.begin() + n_electrons);
  std::sort(occupied.begin(), occupied.end());
  return occupied;
}

std::vector<double> onsite_energies(const AimParameters& params) {
  const SpinOrbitalIndexing indexing{params.n_impurity + params.n_bath};
  std::vector<double> onsite(size_t(indexing.n_qubits()), 0.0);
  for (int site = 0; site < indexing.n_sites; ++site) {
    const double e =
        site < params.n_impurity
            ? params.mu
            : params.eps_n(site - params.n_impurity, site - params.n_impurity);
    onsite[size_t(indexing.qubit(site, Spin::Up))] = e;
    onsite[size_t(indexing.qubit(site, Spin::Down))] = e;
  }
  return onsite;
}

std::uint64_t occupation_mask(const std::vector<int>& occupied) {
  std::uint64_t mask = 0;
  for (int q : occupied) {
    mask |= std::uint64_t{1} << q;
  }
  return mask;
}

}  // namespace aimvqe
