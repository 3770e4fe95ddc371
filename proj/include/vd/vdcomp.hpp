#pragma once
// The virtual-distillation compiler: circuit duplication, swap-operator
// machinery, basis classification into invariant states and mask orbits,
// CNOT+H projection plans, the B-gate circuit, and signed reconstruction
// recipes for <S2> and single-circuit Pauli expectations.
//
// Conventions (frozen numerically by the tests, not assumed from prose):
//   - pair i couples qubit i with qubit i+n; no physical reordering
//   - S2-plan outcome pair bits (control qubit i, target qubit i+n):
//     00 -> S+, 01 -> A+, 10 -> S-, 11 -> A-
//   - mask plans use the ascending support chain with H on its first qubit;
//     a plan outcome decodes to the canonical orbit member (first-support bit
//     0) plus a sign read from the H qubit.

#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vd/pauli.hpp"
#include "vd/sim.hpp"

namespace vd {

// ----------------------------------------------------------- swap operator
// S2 |a b> = |b a| where a, b are the two n-bit halves of a 2n-bit label.
inline std::size_t s2_partner(int n, std::size_t x) {
  const std::size_t lo = x & (dim_of(n) - 1);
  const std::size_t hi = x >> n;
  return (lo << n) | hi;
}

inline std::vector<std::size_t> s2_permutation(int n) {
  std::vector<std::size_t> p(dim_of(2 * n));
  for (std::size_t x = 0; x < p.size(); ++x) p[x] = s2_partner(n, x);
  return p;
}

inline std::vector<cplx> s2_matrix(int n) {
  const std::size_t d = dim_of(2 * n);
  std::vector<cplx> M(d * d, cplx(0));
  for (std::size_t x = 0; x < d; ++x) M[s2_partner(n, x) * d + x] = 1.0;
  return M;
}

// ------------------------------------------------------- classification
inline std::uint32_t mask_of(int n, std::size_t x) {
  const std::size_t lo = x & (dim_of(n) - 1);
  const std::size_t hi = x >> n;
  return static_cast<std::uint32_t>(hi ^ lo);
}

struct BasisClassification {
  int n = 0;
  std::vector<std::uint32_t> mask;     // per 2n-bit basis state
  std::vector<std::size_t> partner;    // S2 x
  std::vector<std::size_t> invariant_states;          // mask == 0, ascending
  std::map<std::uint32_t, std::vector<std::size_t>> orbits_by_mask;
  // canonical orbit members (bit at the mask's first support qubit is 0)
};

inline std::vector<int> mask_support(int n, std::uint32_t d) {
  std::vector<int> s;
  for (int i = 0; i < n; ++i)
    if ((d >> (n - 1 - i)) & 1u) s.push_back(i);
  const std::size_t firsts = s.size();
  for (std::size_t k = 0; k < firsts; ++k) s.push_back(s[k] + n);
  std::sort(s.begin(), s.end());
  return s;
}

inline BasisClassification classify_basis(int n) {
  if (n < 1) throw DomainError("classify_basis requires n >= 1");
  BasisClassification bc;
  bc.n = n;
  const std::size_t d = dim_of(2 * n);
  bc.mask.resize(d);
  bc.partner.resize(d);
  for (std::size_t x = 0; x < d; ++x) {
    bc.mask[x] = mask_of(n, x);
    bc.partner[x] = s2_partner(n, x);
    if (bc.mask[x] == 0) bc.invariant_states.push_back(x);
  }
  for (std::uint32_t m = 1; m < dim_of(n); ++m) {
    const int s0 = mask_support(n, m).front();
    std::vector<std::size_t> canon;
    for (std::size_t a = 0; a < dim_of(n); ++a) {
      if (bit_at(a, n, s0)) continue;
      const std::size_t b = a ^ m;
      canon.push_back((a << n) | b);
    }
    bc.orbits_by_mask[m] = std::move(canon);
  }
  return bc;
}

// ------------------------------------------------------------- duplication
struct DuplicatedCircuit {
  Circuit base;
  Circuit doubled;  // base on qubits 0..n-1 then the same gates shifted by n
};

inline DuplicatedCircuit duplicate(const Circuit& base) {
  DuplicatedCircuit dc;
  dc.base = base;
  dc.doubled.n_qubits = 2 * base.n_qubits;
  dc.doubled.label = base.label.empty() ? "doubled" : base.label + " x2";
  dc.doubled.gates = base.gates;
  for (const Gate& g : base.gates) {
    Gate shifted = g;
    for (int& q : shifted.qubits) q += base.n_qubits;
    dc.doubled.gates.push_back(shifted);
  }
  return dc;
}

// -------------------------------------------------------- projection plans
struct ProjectionPlan {
  int n = 0;
  std::uint32_t mask = 0;  // 0 marks the distinguished S2 plan
  Circuit circuit;         // CNOT and H gates only, on 2n qubits
};

inline ProjectionPlan build_s2_projection(int n) {
  if (n < 1) throw DomainError("build_s2_projection requires n >= 1");
  ProjectionPlan plan;
  plan.n = n;
  plan.mask = 0;
  plan.circuit.n_qubits = 2 * n;
  plan.circuit.label = "s2-plan";
  for (int i = 0; i < n; ++i) plan.circuit.gates.push_back(gCNOT(i, i + n));
  for (int i = 0; i < n; ++i) plan.circuit.gates.push_back(gH(i));
  return plan;
}

inline ProjectionPlan build_mask_projection(int n, std::uint32_t mask) {
  if (mask == 0 || mask >= dim_of(n))
    throw DomainError("mask must be a nonzero n-bit pattern");
  ProjectionPlan plan;
  plan.n = n;
  plan.mask = mask;
  plan.circuit.n_qubits = 2 * n;
  std::string bits(n, '0');
  for (int i = 0; i < n; ++i)
    if ((mask >> (n - 1 - i)) & 1u) bits[i] = '1';
  plan.circuit.label = "mask-plan:" + bits;
  const auto s = mask_support(n, mask);
  for (int k = static_cast<int>(s.size()) - 2; k >= 0; --k)
    plan.circuit.gates.push_back(gCNOT(s[k], s[k + 1]));
  plan.circuit.gates.push_back(gH(s[0]));
  return plan;
}

// Pair-bit value of plan outcome y for pair i: (bit of qubit i)<<1 | bit of
// qubit i+n.
inline int pair_bits(std::size_t y, int n, int i) {
  const int N = 2 * n;
  return (bit_at(y, N, i) << 1) | bit_at(y, N, i + n);
}

// Outcome encoding for a mask plan: canonical orbit member u (bit at the
// first support qubit 0) and sign s map to the measured bitstring whose
// post-circuit state is (|u> + s |S2 u>)/sqrt(2).
inline std::size_t mask_outcome_encode(int n, std::uint32_t mask, std::size_t u,
                                       int sign) {
  const int N = 2 * n;
  const auto s = mask_support(n, mask);
  std::size_t y = u;
  int prev = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const int zk = bit_at(u, N, s[k]);
    y = with_bit(y, N, s[k], zk ^ prev);
    prev = zk;
  }
  return with_bit(y, N, s[0], sign > 0 ? 0 : 1);
}

struct MaskOutcome {
  std::size_t u = 0;  // canonical orbit member
  int sign = 0;       // +1 or -1
};

inline MaskOutcome mask_outcome_decode(int n, std::uint32_t mask,
                                       std::size_t y) {
  const int N = 2 * n;
  const auto s = mask_support(n, mask);
  MaskOutcome out;
  out.sign = bit_at(y, N, s[0]) ? -1 : +1;
  std::size_t u = with_bit(y, N, s[0], 0);
  int z = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    z ^= bit_at(y, N, s[k]);
    u = with_bit(u, N, s[k], z);
  }
  out.u = u;
  return out;
}

// --------------------------------------------------------------- recipes
struct ReconstructionRecipe {
  int n = 0;
  std::vector<std::size_t> computational_part;  // invariant basis states
  std::vector<int> signed_part;  // per plan outcome, in {-1, 0, +1}
};

// Split recipe: invariant states from the computational measurement; each
// S2-plan outcome containing at least one A-type pair contributes
// (-1)^{# A- pairs}; all-S outcomes carry coefficient 0.
inline ReconstructionRecipe solve_s2_recipe(int n) {
  if (n < 1) throw DomainError("solve_s2_recipe requires n >= 1");
  ReconstructionRecipe r;
  r.n = n;
  const std::size_t d = dim_of(2 * n);
  for (std::size_t x = 0; x < d; ++x)
    if (mask_of(n, x) == 0) r.computational_part.push_back(x);
  r.signed_part.assign(d, 0);
  for (std::size_t y = 0; y < d; ++y) {
    int n_a = 0, n_aminus = 0;
    for (int i = 0; i < n; ++i) {
      const int pb = pair_bits(y, n, i);
      if (pb & 1) {  // target bit set: A-type pair
        ++n_a;
        if (pb & 2) ++n_aminus;  // control bit too: A-
      }
    }
    if (n_a > 0) r.signed_part[y] = (n_aminus % 2) ? -1 : +1;
  }
  return r;
}

// Alternative full-sum coefficients: (-1)^{# A- pairs} on every outcome,
// with no computational part. Kept as an internal cross-check.
inline std::vector<int> full_sum_coefficients(int n) {
  const std::size_t d = dim_of(2 * n);
  std::vector<int> coeff(d, +1);
  for (std::size_t y = 0; y < d; ++y) {
    int n_aminus = 0;
    for (int i = 0; i < n; ++i)
      if (pair_bits(y, n, i) == 0b11) ++n_aminus;
    coeff[y] = (n_aminus % 2) ? -1 : +1;
  }
  return coeff;
}

// --------------------------------------------------------------- B gate
inline Circuit build_b_gate(int n) {
  if (n < 1) throw DomainError("build_b_gate requires n >= 1");
  Circuit c;
  c.n_qubits = 2 * n;
  c.label = "b-gate";
  const double q = std::acos(-1.0) / 2;  // pi/2
  for (int i = 0; i < n; ++i) {
    const int j = i + n;
    c.gates.push_back(gRx(i, -q));
    c.gates.push_back(gRx(j, q));
    c.gates.push_back(gH(i));
    c.gates.push_back(gCNOT(i, j));
    c.gates.push_back(gRx(i, q / 2));
    c.gates.push_back(gRz(j, q / 2));
    c.gates.push_back(gCNOT(i, j));
    c.gates.push_back(gH(i));
    c.gates.push_back(gRx(j, -q));
    c.gates.push_back(gRx(i, q));
  }
  return c;
}

// Per-pair eigenvalue tables of the B gate, indexed by pair bits. Derived by
// dense conjugation of the 2-qubit building block at call time so the
// outcome convention is fixed by arithmetic, not transcription.
struct BGateTables {
  std::array<double, 4> swap_eig{};  // diag of B SWAP B^dag
  std::array<double, 4> zsym_eig{};  // diag of B ((Z1+Z2)/2 SWAP) B^dag
};

inline const BGateTables& b_gate_tables() {
  static const BGateTables tables = [] {
    const Circuit b1 = build_b_gate(1);
    const auto B = circuit_unitary(b1);
    const auto SW = s2_matrix(1);
    auto conj_diag = [&](const std::vector<cplx>& M) {
      std::array<double, 4> diag{};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          cplx acc(0);
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
              acc += B[r * 4 + k] * M[k * 4 + l] * std::conj(B[c * 4 + l]);
          if (r == c) {
            if (std::abs(acc.imag()) > 1e-10)
              throw NumericError("B-gate conjugation not real on diagonal");
            diag[r] = std::round(acc.real());
            if (std::abs(acc.real() - diag[r]) > 1e-10)
              throw NumericError("B-gate eigenvalue not an integer");
          } else if (std::abs(acc) > 1e-10) {
            throw NumericError("B-gate conjugation not diagonal");
          }
        }
      return diag;
    };
    BGateTables t;
    t.swap_eig = conj_diag(SW);
    std::vector<cplx> zs(16, cplx(0));
    const auto z1 = string_matrix("ZI"), z2 = string_matrix("IZ");
    for (int i = 0; i < 16; ++i) zs[i] = 0.5 * (z1[i] + z2[i]);
    std::vector<cplx> zsym_swap(16, cplx(0));
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        for (int k = 0; k < 4; ++k)
          zsym_swap[r * 4 + c] += zs[r * 4 + k] * SW[k * 4 + c];
    t.zsym_eig = conj_diag(zsym_swap);
    return t;
  }();
  return tables;
}

// ---------------------------------------------------------- required masks
// Masks whose orbits carry a nonzero symmetrized eigenvalue for the string:
// exactly the nonzero d with |d AND support| even.
inline std::set<std::uint32_t> required_masks(const std::string& pauli) {
  validate_pauli(pauli);
  const int n = static_cast<int>(pauli.size());
  if (n > 6) throw CapacityError("required_masks supports n <= 6");
  std::uint32_t supp = 0;
  for (int q = 0; q < n; ++q)
    if (pauli[q] != 'I') supp |= 1u << (n - 1 - q);
  std::set<std::uint32_t> masks;
  if (supp == 0) return masks;
  for (std::uint32_t d = 1; d < dim_of(n); ++d)
    if (std::popcount(d & supp) % 2 == 0) masks.insert(d);
  return masks;
}

inline std::set<std::uint32_t> required_masks(const PauliSum& h) {
  validate_sum(h);
  std::set<std::uint32_t> masks;
  for (const auto& t : h.terms) {
    const auto m = required_masks(t.pauli);
    masks.insert(m.begin(), m.end());
  }
  return masks;
}

// ----------------------------------------- single-circuit Pauli plan
// Measures Tr(O S2 rho^(x)2) for a diagonal O with one projection circuit:
// a dense diagonal phase stage in front of the S2 plan. A plain -1 phase on
// O-negative states cannot weight mixed-sign orbit pairs by zero; the
// quarter-phase diagonal below can, and is validated against the dense
// oracle by the tests.
struct PauliExpectationPlan {
  int n = 0;
  std::string pauli;         // diagonal pattern (I/Z only)
  std::vector<cplx> phase;   // dense diagonal over 4^n doubled states
  Circuit circuit;           // the S2 plan circuit
  ReconstructionRecipe recipe;  // signed part as in solve_s2_recipe
};

inline PauliExpectationPlan build_pauli_expectation_plan(
    const std::string& pauli, int n) {
  validate_pauli(pauli);
  if (static_cast<int>(pauli.size()) != n)
    throw DimensionError("Pauli width mismatch");
  for (char c : pauli)
    if (c == 'X' || c == 'Y')
      throw DomainError("plan requires a diagonal string; rotate first");
  PauliExpectationPlan plan;
  plan.n = n;
  plan.pauli = pauli;
  plan.circuit = build_s2_projection(n).circuit;
  plan.recipe = solve_s2_recipe(n);
  const auto o = diag_eigs(pauli);
  const std::size_t dn = dim_of(n);
  plan.phase.assign(dim_of(2 * n), cplx(1));
  const cplx i_unit(0, 1);
  for (std::size_t x = 0; x < plan.phase.size(); ++x) {
    const std::size_t a = x >> n, b = x & (dn - 1);
    if (a < b) {
      const int neg = (o[a] < 0 ? 1 : 0) + (o[b] < 0 ? 1 : 0);
      cplx ph(1);
      for (int k = 0; k < neg; ++k) ph *= i_unit;
      plan.phase[x] = ph;
    }
  }
  return plan;
}

// Exact-probability evaluation of a Pauli expectation plan on an n-qubit
// density matrix (already rotated to the plan's diagonal basis).
inline double evaluate_pauli_plan(const PauliExpectationPlan& plan,
                                  const DensityMatrix& rho) {
  if (rho.n_qubits != plan.n) throw DimensionError("state width mismatch");
  const auto o = diag_eigs(plan.pauli);
  DensityMatrix rho2 = kron(rho, rho);
  const auto pcomp = measurement_probabilities(rho2);
  apply_diagonal(rho2, plan.phase);
  const NoiseSpec noiseless;
  rho2 = apply_circuit_noisy(plan.circuit, std::move(rho2), noiseless);
  const auto pproj = measurement_probabilities(rho2);
  double val = 0;
  for (std::size_t x : plan.recipe.computational_part)
    val += o[x >> plan.n] * pcomp[x];
  for (std::size_t y = 0; y < pproj.size(); ++y)
    if (plan.recipe.signed_part[y] != 0)
      val += plan.recipe.signed_part[y] * pproj[y];
  return val;
}

}  // namespace vd
