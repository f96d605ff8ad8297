#include "aimvqe/fermion.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "aimvqe/errors.hpp"

namespace aimvqe {

namespace {

void check_qubit(int j, int n, const char* what) {
  if (j < 0 || j >= n) {
    throw IndexOutOfRange(std::string(what) + " index " + std::to_string(j) +
                          " out of range for " + std::to_string(n) + " qubits");
  }
}

void check_site(int site, const SpinOrbitalIndexing& indexing) {
  if (site < 0 || site >= indexing.n_sites) {
    throw IndexOutOfRange("site index " + std::to_string(site) +
                          " out of range for " + std::to_string(indexing.n_sites) +
                          " sites");
  }
}

// Drops sub-tolerance imaginary parts left over from ladder-operator algebra.
QubitOperator realified(const QubitOperator& op, double tol = 1e-12) {
  QubitOperator out;
  out.declare_qubits(op.num_qubits());
  for (const Term& t : op.terms()) {
    Complex c = t.coefficient;
    if (std::abs(c.imag()) < tol) c = Complex(c.real(), 0.0);
    out.add_term(c, t.string);
  }
  return out;
}

}  // namespace

QubitOperator jw_annihilation(int j, int n) {
  check_qubit(j, n, "orbital");
  const std::uint64_t bit = std::uint64_t{1} << j;
  const std::uint64_t chain = bit - 1;
  PauliString x_part;
  x_part.x = bit;
  x_part.z = chain;
  PauliString y_part;
  y_part.x = bit;
  y_part.z = chain | bit;
  QubitOperator op;
  op.declare_qubits(n);
  op.add_term(Complex(0.5, 0.0), x_part);
  op.add_term(Complex(0.0, 0.5), y_part);
  return op;
}

QubitOperator jw_creation(int j, int n) { return jw_annihilation(j, n).adjoint(); }

QubitOperator jw_number(int q, int n) {
  check_qubit(q, n, "orbital");
  QubitOperator op;
  op.declare_qubits(n);
  op.add_term(Complex(0.5, 0.0), PauliString{});
  op.add_term(Complex(-0.5, 0.0), PauliString::single(q, Axis::Z));
  return op;
}

QubitOperator total_number_operator(int n) {
  QubitOperator op;
  op.declare_qubits(n);
  op.add_term(Complex(0.5 * n, 0.0), PauliString{});
  for (int q = 0; q < n; ++q) {
    op.add_term(Complex(-0.5, 0.0), PauliString::single(q, Axis::Z));
  }
  return op;
}

QubitOperator build_aim_hamiltonian(const AimParameters& params,
                                    const SpinOrbitalIndexing& indexing) {
  const int ni = params.n_impurity;
  const int nb = params.n_bath;
  if (ni < 1 || nb < 0) {
    throw DimensionMismatch("model needs at least one impurity site");
  }
  if (indexing.n_sites != ni + nb) {
    throw DimensionMismatch(
        "indexing covers " + std::to_string(indexing.n_sites) +
        " sites but parameters describe " + std::to_string(ni + nb));
  }
  if (indexing.n_qubits() > 63) {
    throw TooWide("register of " + std::to_string(indexing.n_qubits()) +
                  " qubits exceeds the 63-qubit limit");
  }
  if (params.eps_n.rows() != nb || params.eps_n.cols() != nb) {
    throw DimensionMismatch("eps_n must be n_bath x n_bath");
  }
  if (!params.eps_n.isApprox(params.eps_n.transpose(), 1e-12)) {
    throw DimensionMismatch("eps_n must be symmetric");
  }
  const bool has_pairing = params.eps_a.size() != 0;
  if (has_pairing) {
    if (params.eps_a.rows() != nb || params.eps_a.cols() != nb) {
      throw DimensionMismatch("eps_a must be n_bath x n_bath");
    }
    if (!(params.eps_a + params.eps_a.transpose()).isZero(1e-12)) {
      throw DimensionMismatch("eps_a must be antisymmetric");
    }
  }
  if (params.v.rows() != nb || params.v.cols() != ni) {
    throw DimensionMismatch("v must be n_bath x n_impurity");
  }

  const int n = indexing.n_qubits();
  const Spin spins[2] = {Spin::Up, Spin::Down};
  QubitOperator h;
  h.declare_qubits(n);

  auto bath_site = [&](int m) { return ni + m; };

  // Bath one-body terms (eps_n Hermitian, so no extra conjugate is added).
  for (int m = 0; m < nb; ++m) {
    for (int nn = 0; nn < nb; ++nn) {
      const double e = params.eps_n(m, nn);
      if (e == 0.0) continue;
      for (Spin s : spins) {
        const int qm = indexing.qubit(bath_site(m), s);
        const int qn = indexing.qubit(bath_site(nn), s);
        h += (jw_creation(qm, n) * jw_annihilation(qn, n)).scaled(Complex(e, 0.0));
      }
    }
  }

  // Anomalous bath terms: eps_a(m,n) b+_{m,s} b+_{n,-s} plus conjugate.
  if (has_pairing) {
    for (int m = 0; m < nb; ++m) {
      for (int nn = 0; nn < nb; ++nn) {
        const double e = params.eps_a(m, nn);
        if (e == 0.0) continue;
        for (Spin s : spins) {
          const Spin other = (s == Spin::Up) ? Spin::Down : Spin::Up;
          const int qm = indexing.qubit(bath_site(m), s);
          const int qn = indexing.qubit(bath_site(nn), other);
          QubitOperator pair =
              (jw_creation(qm, n) * jw_creation(qn, n)).scaled(Complex(e, 0.0));
          h += pair;
          h += pair.adjoint();
        }
      }
    }
  }

  // Hybridization between bath and impurity orbitals.
  for (int m = 0; m < nb; ++m) {
    for (int i = 0; i < ni; ++i) {
      const double vv = params.v(m, i);
      if (vv == 0.0) continue;
      for (Spin s : spins) {
        const int qm = indexing.qubit(bath_site(m), s);
        const int qi = indexing.qubit(i, s);
        QubitOperator hop =
            (jw_creation(qm, n) * jw_annihilation(qi, n)).scaled(Complex(vv, 0.0));
        h += hop;
        h += hop.adjoint();
      }
    }
  }

  // Impurity onsite energy.
  if (params.mu != 0.0) {
    for (int i = 0; i < ni; ++i) {
      for (Spin s : spins) {
        h += jw_number(indexing.qubit(i, s), n).scaled(Complex(params.mu, 0.0));
      }
    }
  }

  // Onsite repulsion n_down * n_up per impurity site.
  if (params.u != 0.0) {
    for (int i = 0; i < ni; ++i) {
      const int qd = indexing.qubit(i, Spin::Down);
      const int qu = indexing.qubit(i, Spin::Up);
      h += (jw_number(qd, n) * jw_number(qu, n)).scaled(Complex(params.u, 0.0));
    }
  }

  return realified(h.simplified());
}

QubitOperator shift_onsite_u(const QubitOperator& h,
                             const std::vector<std::pair<int, int>>& impurity_pairs,
                             double delta_u) {
  const int n = h.num_qubits();
  QubitOperator out = h;
  for (const auto& [a, b] : impurity_pairs) {
    check_qubit(a, n, "qubit");
    check_qubit(b, n, "qubit");
    const double q = delta_u / 4.0;
    out.add_term(Complex(q, 0.0), PauliString{});
    out.add_term(Complex(-q, 0.0), PauliString::single(a, Axis::Z));
    out.add_term(Complex(-q, 0.0), PauliString::single(b, Axis::Z));
    PauliString zz;
    zz.set(a, Axis::Z);
    zz.set(b, Axis::Z);
    out.add_term(Complex(q, 0.0), zz);
  }
  return out.simplified();
}

QubitOperator spin_z_operator(int site, const SpinOrbitalIndexing& indexing) {
  check_site(site, indexing);
  const int qu = indexing.qubit(site, Spin::Up);
  const int qd = indexing.qubit(site, Spin::Down);
  QubitOperator op;
  op.declare_qubits(indexing.n_qubits());
  op.add_term(Complex(0.25, 0.0), PauliString::single(qd, Axis::Z));
  op.add_term(Complex(-0.25, 0.0), PauliString::single(qu, Axis::Z));
  return op;
}

QubitOperator szsz_operator(int i, int j, const SpinOrbitalIndexing& indexing) {
  check_site(i, indexing);
  check_site(j, indexing);
  if (i == j) {
    throw SameSite("correlation requires two distinct sites, got site " +
                   std::to_string(i) + " twice");
  }
  QubitOperator op = spin_z_operator(i, indexing) * spin_z_operator(j, indexing);
  return realified(op.simplified());
}

QubitOperator spin_spin_operator(int i, int j, const SpinOrbitalIndexing& indexing) {
  check_site(i, indexing);
  check_site(j, indexing);
  if (i == j) {
    throw SameSite("correlation requires two distinct sites, got site " +
                   std::to_string(i) + " twice");
  }
  const int n = indexing.n_qubits();
  auto ladder = [&](int site) {
    const int qu = indexing.qubit(site, Spin::Up);
    const int qd = indexing.qubit(site, Spin::Down);
    // S+ = a+_up a_down, S- = a+_down a_up, Sz = (n_up - n_down)/2.
    QubitOperator sp = jw_creation(qu, n) * jw_annihilation(qd, n);
    QubitOperator sm = jw_creation(qd, n) * jw_annihilation(qu, n);
    QubitOperator sz = (jw_number(qu, n) - jw_number(qd, n)).scaled(Complex(0.5, 0.0));
    return std::tuple<QubitOperator, QubitOperator, QubitOperator>(sp, sm, sz);
  };
  auto [sp_i, sm_i, sz_i] = ladder(i);
  auto [sp_j, sm_j, sz_j] = ladder(j);
  // S_i . S_j = (S+_i S-_j + S-_i S+_j)/2 + Sz_i Sz_j.
  QubitOperator op = (sp_i * sm_j + sm_i * sp_j).scaled(Complex(0.5, 0.0));
  op += sz_i * sz_j;
  return realified(op.simplified());
}

}  // namespace aimvqe
