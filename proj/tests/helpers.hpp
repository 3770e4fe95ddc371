#pragma once
// Shared helpers for the test binaries: portable random states, dense
// linear-algebra oracles, and fixture paths.  Everything here is written
// independently of the library's estimation path so it can serve as an
// oracle for it.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "vd/pauli.hpp"
#include "vd/sim.hpp"

namespace vdtest {

using vd::cplx;

inline std::string fixture_path(const std::string& name) {
  return std::string(VD_FIXTURE_DIR) + "/" + name;
}

// --------------------------------------------------- portable random states
inline double gauss(std::mt19937_64& rng) {
  // Box-Muller on the portable uniform; deterministic across platforms.
  double u1 = vd::portable_u01(rng);
  const double u2 = vd::portable_u01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::acos(-1.0) * u2);
}

// Ginibre construction: A A^dag normalized to unit trace (full-rank mixed).
inline vd::DensityMatrix random_density(int n, std::mt19937_64& rng) {
  const std::size_t d = vd::dim_of(n);
  std::vector<cplx> A(d * d);
  for (cplx& v : A) v = cplx(gauss(rng), gauss(rng));
  vd::DensityMatrix rho;
  rho.n_qubits = n;
  rho.m.assign(d * d, cplx(0));
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cplx s = 0;
      for (std::size_t k = 0; k < d; ++k)
        s += A[r * d + k] * std::conj(A[c * d + k]);
      rho.m[r * d + c] = s;
    }
  double tr = 0;
  for (std::size_t i = 0; i < d; ++i) tr += rho.m[i * d + i].real();
  for (cplx& v : rho.m) v /= tr;
  return rho;
}

inline vd::DensityMatrix random_pure(int n, std::mt19937_64& rng) {
  const std::size_t d = vd::dim_of(n);
  std::vector<cplx> v(d);
  double nrm = 0;
  for (cplx& a : v) {
    a = cplx(gauss(rng), gauss(rng));
    nrm += std::norm(a);
  }
  nrm = std::sqrt(nrm);
  vd::DensityMatrix rho;
  rho.n_qubits = n;
  rho.m.assign(d * d, cplx(0));
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      rho.m[r * d + c] = (v[r] / nrm) * std::conj(v[c] / nrm);
  return rho;
}

// --------------------------------------------------------- dense utilities
inline std::vector<cplx> matmul(const std::vector<cplx>& A,
                                const std::vector<cplx>& B, std::size_t d) {
  std::vector<cplx> C(d * d, cplx(0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const cplx a = A[i * d + k];
      if (a == cplx(0)) continue;
      for (std::size_t j = 0; j < d; ++j) C[i * d + j] += a * B[k * d + j];
    }
  return C;
}

inline cplx trace_product(const std::vector<cplx>& A,
                          const std::vector<cplx>& B, std::size_t d) {
  cplx t = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) t += A[i * d + k] * B[k * d + i];
  return t;
}

// Dense swap-permutation matrix exchanging the two n-qubit halves.
inline std::vector<cplx> dense_swap_halves(int n) {
  const std::size_t d = vd::dim_of(2 * n), half = vd::dim_of(n);
  std::vector<cplx> M(d * d, cplx(0));
  for (std::size_t x = 0; x < d; ++x) {
    const std::size_t a = x >> n, b = x & (half - 1);
    M[((b << n) | a) * d + x] = 1;
  }
  return M;
}

inline std::vector<cplx> dense_kron(const vd::DensityMatrix& p,
                                    const vd::DensityMatrix& q) {
  const std::size_t dp = p.dim(), dq = q.dim(), d = dp * dq;
  std::vector<cplx> M(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      M[r * d + c] = p.m[(r / dq) * dp + c / dq] * q.m[(r % dq) * dq + c % dq];
  return M;
}

// Ratio Tr(O_diag * SWAP * rho x rho) / Tr(SWAP * rho x rho) for a diagonal
// observable given by its 2^n eigenvalue table, computed densely.
inline double dense_corrected_ratio(const vd::DensityMatrix& rho,
                                    const std::vector<double>& eigs) {
  const int n = rho.n_qubits;
  const std::size_t half = rho.dim(), d = half * half;
  const std::vector<cplx> rr = dense_kron(rho, rho);
  const std::vector<cplx> S = dense_swap_halves(n);
  // O acts on the first copy: O x I, diagonal.
  std::vector<cplx> OS = S;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) OS[r * d + c] *= eigs[r >> n];
  const double num = trace_product(OS, rr, d).real();
  const double den = trace_product(S, rr, d).real();
  return num / den;
}

inline double dense_purity(const vd::DensityMatrix& rho) {
  double t = 0;
  for (const cplx& v : rho.m) t += std::norm(v);
  return t;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const std::vector<cplx>& a,
                           const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Tr(O_diag * SWAP * rho x rho): the unnormalized distilled numerator.
inline double dense_corrected_numerator(const vd::DensityMatrix& rho,
                                        const std::vector<double>& eigs) {
  const int n = rho.n_qubits;
  const std::size_t d = rho.dim() * rho.dim();
  const std::vector<cplx> rr = dense_kron(rho, rho);
  std::vector<cplx> OS = dense_swap_halves(n);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) OS[r * d + c] *= eigs[r >> n];
  return trace_product(OS, rr, d).real();
}

// Tr(SWAP * sigma) for an arbitrary state on 2n qubits.
inline double dense_swap_expectation(const vd::DensityMatrix& sigma) {
  const int n2 = sigma.n_qubits;
  const std::size_t d = sigma.dim();
  const std::vector<cplx> S = dense_swap_halves(n2 / 2);
  return trace_product(S, sigma.m, d).real();
}

// Tr((P x I) SWAP rho x rho) / Tr(SWAP rho x rho) for a full Pauli string
// (not necessarily diagonal), computed densely.
inline double dense_pauli_ratio(const vd::DensityMatrix& rho,
                                const std::string& pauli) {
  const std::size_t half = rho.dim(), d = half * half;
  const auto rr = dense_kron(rho, rho);
  const auto S = dense_swap_halves(rho.n_qubits);
  const auto P = vd::string_matrix(pauli);
  std::vector<cplx> PS(d * d, cplx(0));
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t ra = r / half, rb = r % half;
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t ap = 0; ap < half; ++ap)
        PS[r * d + c] += P[ra * half + ap] * S[(ap * half + rb) * d + c];
  }
  const double num = trace_product(PS, rr, d).real();
  const double den = trace_product(S, rr, d).real();
  return num / den;
}

}  // namespace vdtest
