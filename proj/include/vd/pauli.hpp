#pragma once
// Pauli-string algebra: dense realizations, Hamiltonian sums, basis-change
// circuits, diagonal eigenvalue tables, exact diagonalization, and the Pauli
// decomposition of arbitrary Hermitian observables.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vd/sim.hpp"

namespace vd {

// --------------------------------------------------------------- types
struct PauliTerm {
  std::string pauli;  // letters over {I,X,Y,Z}, big-endian (index 0 = qubit 0)
  double coeff = 0.0;
};

struct PauliSum {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;
  double constant = 0.0;  // identity offset (e.g. nuclear repulsion)
  std::string meta;       // free-form description
};

inline void validate_pauli(const std::string& p) {
  if (p.empty()) throw InputError("empty Pauli string");
  for (char c : p)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw InputError("Pauli letters must be in {I,X,Y,Z}");
}

inline void validate_sum(const PauliSum& h) {
  std::set<std::string> seen;
  for (const auto& t : h.terms) {
    validate_pauli(t.pauli);
    if (static_cast<int>(t.pauli.size()) != h.n_qubits)
      throw DimensionError("Pauli term width mismatch");
    if (!seen.insert(t.pauli).second)
      throw InputError("duplicate Pauli string in sum");
  }
}

// ------------------------------------------------------------ dense forms
inline std::vector<cplx> string_matrix(const std::string& p) {
  validate_pauli(p);
  auto single = [](char c) -> std::array<cplx, 4> {
    switch (c) {
      case 'I': return {cplx(1), cplx(0), cplx(0), cplx(1)};
      case 'X': return {cplx(0), cplx(1), cplx(1), cplx(0)};
      case 'Y': return {cplx(0), cplx(0, -1), cplx(0, 1), cplx(0)};
      default: return {cplx(1), cplx(0), cplx(0), cplx(-1)};
    }
  };
  std::vector<cplx> M{cplx(1)};
  std::size_t d = 1;
  for (char c : p) {
    const auto s = single(c);
    std::vector<cplx> out(4 * d * d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t cc = 0; cc < d; ++cc)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            out[(r * 2 + i) * (d * 2) + (cc * 2 + j)] =
                M[r * d + cc] * s[i * 2 + j];
    M = std::move(out);
    d *= 2;
  }
  return M;
}

inline std::vector<cplx> dense_hamiltonian(const PauliSum& h) {
  validate_sum(h);
  const std::size_t d = dim_of(h.n_qubits);
  std::vector<cplx> M(d * d, cplx(0));
  for (std::size_t i = 0; i < d; ++i) M[i * d + i] = h.constant;
  for (const auto& t : h.terms) {
    const auto P = string_matrix(t.pauli);
    for (std::size_t i = 0; i < d * d; ++i) M[i] += t.coeff * P[i];
  }
  return M;
}

// -------------------------------------------------------- basis rotations
// Per-qubit measurement basis of a string: '-' for I/Z, else 'X'/'Y'.
// Measurement-group key: X/Y positions kept, I/Z collapsed to '-'.  Accepts
// either a Pauli string or an existing key (idempotent).
inline std::string rotation_key(const std::string& p) {
  if (p.empty()) throw DimensionError("empty Pauli string");
  std::string k(p.size(), '-');
  for (std::size_t q = 0; q < p.size(); ++q) {
    const char c = p[q];
    if (c == 'X' || c == 'Y')
      k[q] = c;
    else if (c != 'I' && c != 'Z' && c != '-')
      throw DomainError("Pauli letters must be in {I,X,Y,Z}");
  }
  return k;
}

// Circuit R with R P R^dag diagonal (X -> H; Y -> Sdag then H).
inline Circuit basis_rotation_circuit(const std::string& key_or_pauli) {
  const std::string key = rotation_key(key_or_pauli);
  Circuit c;
  c.n_qubits = static_cast<int>(key.size());
  c.label = "rotate:" + key;
  for (int q = 0; q < c.n_qubits; ++q) {
    if (key[q] == 'X') {
      c.gates.push_back(gH(q));
    } else if (key[q] == 'Y') {
      c.gates.push_back(gSdag(q));
      c.gates.push_back(gH(q));
    }
  }
  return c;
}

// Eigenvalue table of the diagonalized pattern: X/Y/Z positions act as Z,
// I positions as identity. Entry x is the eigenvalue on basis state |x>.
inline std::vector<double> diag_eigs(const std::string& p) {
  validate_pauli(p);
  const int n = static_cast<int>(p.size());
  std::vector<double> o(dim_of(n), 1.0);
  for (int q = 0; q < n; ++q)
    if (p[q] != 'I')
      for (std::size_t x = 0; x < o.size(); ++x)
        if (bit_at(x, n, q)) o[x] = -o[x];
  return o;
}

inline int eigenvalue_of_outcome(const std::string& p, std::size_t outcome) {
  validate_pauli(p);
  for (char c : p)
    if (c == 'X' || c == 'Y')
      throw DomainError("eigenvalue_of_outcome requires a diagonal string");
  int v = 1;
  const int n = static_cast<int>(p.size());
  for (int q = 0; q < n; ++q)
    if (p[q] == 'Z' && bit_at(outcome, n, q)) v = -v;
  return v;
}

// ------------------------------------------------------- decomposition
inline PauliSum pauli_decompose(const std::vector<cplx>& O, int k) {
  const std::size_t d = dim_of(k);
  if (O.size() != d * d) throw DomainError("matrix dimension is not 2^k");
  PauliSum out;
  out.n_qubits = k;
  std::string p(k, 'I');
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const std::size_t n_strings = std::size_t{1} << (2 * k);
  for (std::size_t code = 0; code < n_strings; ++code) {
    std::size_t c = code;
    for (int q = k - 1; q >= 0; --q) {
      p[q] = letters[c & 3];
      c >>= 2;
    }
    const auto P = string_matrix(p);
    cplx tr(0);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t cc = 0; cc < d; ++cc)
        tr += P[r * d + cc] * O[cc * d + r];
    const cplx a = tr / static_cast<double>(d);
    if (std::abs(a.imag()) > 1e-10)
      throw NumericError("non-Hermitian observable in pauli_decompose");
    if (std::abs(a.real()) >= 1e-12)
      out.terms.push_back({p, a.real()});
  }
  return out;
}

// ---------------------------------------------------------- eigensolve
struct DiagonalizationResult {
  std::vector<double> eigenvalues;  // ascending
  double ground_energy = 0.0;
};

inline DiagonalizationResult exact_diagonalize(const PauliSum& h) {
  if (h.n_qubits > 10) throw CapacityError("exact_diagonalize supports n <= 10");
  const std::size_t d = dim_of(h.n_qubits);
  const auto M = dense_hamiltonian(h);
  Eigen::MatrixXcd E(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      E(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M[r * d + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(E,
                                                         Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigensolver failed to converge");
  DiagonalizationResult out;
  out.eigenvalues.resize(d);
  for (std::size_t i = 0; i < d; ++i)
    out.eigenvalues[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  out.ground_energy = out.eigenvalues.front();
  return out;
}

// Smallest eigenvalue of a dense Hermitian matrix (helper for tests).
inline double min_eigenvalue(const std::vector<cplx>& M, std::size_t d) {
  Eigen::MatrixXcd E(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      E(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M[r * d + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(E,
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace vd
