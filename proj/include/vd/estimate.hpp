#pragma once
// Turns measurement probabilities (exact or sampled) from a compiled plan set
// into corrected expectation values: reconstructed statistics, <S2>, Pauli
// numerators, and the purification ratio.
//
// Estimator layout per rotation group:
//   - the reconstructed measurement vector spans the full swap eigenbasis
//     (all invariant states plus both eigenvectors of every orbit of every
//     nonzero mask) and is renormalized to sum 1;
//   - the denominator <S2> comes from the dedicated split recipe, measured on
//     its own computational + projection circuits;
//   - value = (sum over eigenvectors of entry * eigenvalue) / <S2>.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vd/pauli.hpp"
#include "vd/sim.hpp"
#include "vd/vdcomp.hpp"

namespace vd {

// ------------------------------------------------------------- bundles
struct MeasurementBundle {
  int n = 0;  // base (undoubled) qubit count
  // rotation key -> probabilities (or sampled frequencies)
  std::map<std::string, std::vector<double>> raw;    // 2^n, undoubled circuit
  std::map<std::string, std::vector<double>> comp;   // 4^n, doubled circuit
  std::map<std::pair<std::string, std::uint32_t>, std::vector<double>> plan;
  std::vector<double> s2_comp;  // 4^n, unrotated doubled circuit
  std::vector<double> s2_proj;  // 4^n, after the S2 plan
  std::map<std::string, std::vector<double>> bgate;  // rotated, after B gates
  std::vector<double> bgate_id;  // unrotated, after B gates (may be empty)
  long long shots = -1;          // -1 means exact probabilities
  std::uint64_t seed = 0;
};

inline std::vector<std::string> group_keys(const PauliSum& h) {
  std::set<std::string> keys;
  for (const auto& t : h.terms) keys.insert(rotation_key(t.pauli));
  return {keys.begin(), keys.end()};
}

inline bool is_one_local(const std::string& pauli) {
  int nloc = 0;
  for (char c : pauli)
    if (c != 'I') ++nloc;
  return nloc == 1;
}

namespace detail {

inline Circuit shifted_rotation(const std::string& key, int n) {
  Circuit both = basis_rotation_circuit(key);
  both.n_qubits = 2 * n;
  const std::size_t base_count = both.gates.size();
  for (std::size_t i = 0; i < base_count; ++i) {
    Gate g = both.gates[i];
    for (int& q : g.qubits) q += n;
    both.gates.push_back(g);
  }
  return both;
}

}  // namespace detail

// Builds every probability vector needed to estimate the given Hamiltonian on
// the state prepared by `ansatz`, with two-qubit depolarization `lambda`
// applied inside both the preparation and the measurement circuits.
inline MeasurementBundle make_bundles(int n, const Circuit& ansatz,
                                      const PauliSum& h, double lambda,
                                      bool need_bgate = false,
                                      bool all_masks = true) {
  if (ansatz.n_qubits != n) throw DimensionError("ansatz width mismatch");
  NoiseSpec noise;
  noise.two_qubit_depolarization = lambda;
  noise.validate();
  const DensityMatrix rho_raw =
      apply_circuit_noisy(ansatz, DensityMatrix::zero_state(n), noise);
  const Circuit dbl = duplicate(ansatz).doubled;
  const DensityMatrix rho_dbl =
      apply_circuit_noisy(dbl, DensityMatrix::zero_state(2 * n), noise);

  MeasurementBundle bn;
  bn.n = n;
  for (const std::string& key : group_keys(h)) {
    const Circuit rot1 = basis_rotation_circuit(key);
    bn.raw[key] =
        measurement_probabilities(apply_circuit_noisy(rot1, rho_raw, noise));
    const Circuit rot2 = detail::shifted_rotation(key, n);
    const DensityMatrix r2 = apply_circuit_noisy(rot2, rho_dbl, noise);
    bn.comp[key] = measurement_probabilities(r2);

    std::set<std::uint32_t> masks;
    if (all_masks)
      for (std::uint32_t d = 1; d < dim_of(n); ++d) masks.insert(d);
    for (const auto& t : h.terms)
      if (rotation_key(t.pauli) == key) {
        const auto req = required_masks(t.pauli);
        masks.insert(req.begin(), req.end());
      }
    for (std::uint32_t d : masks) {
      const Circuit pc = build_mask_projection(n, d).circuit;
      bn.plan[{key, d}] =
          measurement_probabilities(apply_circuit_noisy(pc, r2, noise));
    }
    bool has_local = false;
    for (const auto& t : h.terms)
      has_local = has_local ||
                  (rotation_key(t.pauli) == key && is_one_local(t.pauli));
    if (need_bgate && has_local) {
      const Circuit bg = build_b_gate(n);
      bn.bgate[key] =
          measurement_probabilities(apply_circuit_noisy(bg, r2, noise));
    }
  }
  bn.s2_comp = measurement_probabilities(rho_dbl);
  const Circuit s2c = build_s2_projection(n).circuit;
  bn.s2_proj =
      measurement_probabilities(apply_circuit_noisy(s2c, rho_dbl, noise));
  if (need_bgate) {
    const Circuit bg = build_b_gate(n);
    bn.bgate_id =
        measurement_probabilities(apply_circuit_noisy(bg, rho_dbl, noise));
  }
  return bn;
}

// Bundle for an arbitrary (already prepared) base state; measurement circuits
// run with depolarization `lambda_meas` (0 gives the exact oracle regime).
inline MeasurementBundle make_bundles_from_state(const DensityMatrix& rho,
                                                 const PauliSum& h,
                                                 double lambda_meas = 0.0,
                                                 bool need_bgate = false,
                                                 bool all_masks = true) {
  const int n = rho.n_qubits;
  NoiseSpec noise;
  noise.two_qubit_depolarization = lambda_meas;
  noise.validate();
  const DensityMatrix rho_dbl = kron(rho, rho);

  MeasurementBundle bn;
  bn.n = n;
  for (const std::string& key : group_keys(h)) {
    const Circuit rot1 = basis_rotation_circuit(key);
    bn.raw[key] =
        measurement_probabilities(apply_circuit_noisy(rot1, rho, noise));
    const Circuit rot2 = detail::shifted_rotation(key, n);
    const DensityMatrix r2 = apply_circuit_noisy(rot2, rho_dbl, noise);
    bn.comp[key] = measurement_probabilities(r2);
    std::set<std::uint32_t> masks;
    if (all_masks)
      for (std::uint32_t d = 1; d < dim_of(n); ++d) masks.insert(d);
    for (const auto& t : h.terms)
      if (rotation_key(t.pauli) == key) {
        const auto req = required_masks(t.pauli);
        masks.insert(req.begin(), req.end());
      }
    for (std::uint32_t d : masks) {
      const Circuit pc = build_mask_projection(n, d).circuit;
      bn.plan[{key, d}] =
          measurement_probabilities(apply_circuit_noisy(pc, r2, noise));
    }
    bool has_local = false;
    for (const auto& t : h.terms)
      has_local = has_local ||
                  (rotation_key(t.pauli) == key && is_one_local(t.pauli));
    if (need_bgate && has_local) {
      const Circuit bg = build_b_gate(n);
      bn.bgate[key] =
          measurement_probabilities(apply_circuit_noisy(bg, r2, noise));
    }
  }
  bn.s2_comp = measurement_probabilities(rho_dbl);
  const Circuit s2c = build_s2_projection(n).circuit;
  bn.s2_proj =
      measurement_probabilities(apply_circuit_noisy(s2c, rho_dbl, noise));
  if (need_bgate) {
    const Circuit bg = build_b_gate(n);
    bn.bgate_id =
        measurement_probabilities(apply_circuit_noisy(bg, rho_dbl, noise));
  }
  return bn;
}

// ------------------------------------------------------------------ <S2>
inline double estimate_s2(const std::vector<double>& pcomp,
                          const std::vector<double>& pproj,
                          const ReconstructionRecipe& recipe) {
  const std::size_t d = dim_of(2 * recipe.n);
  if (pcomp.size() != d || pproj.size() != d)
    throw InputError("bundle missing computational or S2-plan data");
  double val = 0;
  for (std::size_t x : recipe.computational_part) val += pcomp[x];
  for (std::size_t y = 0; y < d; ++y)
    if (recipe.signed_part[y] != 0) val += recipe.signed_part[y] * pproj[y];
  return val;
}

inline double estimate_s2(const MeasurementBundle& bn,
                          const ReconstructionRecipe& recipe) {
  return estimate_s2(bn.s2_comp, bn.s2_proj, recipe);
}

inline double estimate_s2(const MeasurementBundle& bn) {
  return estimate_s2(bn, solve_s2_recipe(bn.n));
}

// Full-sum cross-check of the same quantity.
inline double estimate_s2_full(const MeasurementBundle& bn) {
  const auto coeff = full_sum_coefficients(bn.n);
  double val = 0;
  for (std::size_t y = 0; y < coeff.size(); ++y)
    val += coeff[y] * bn.s2_proj[y];
  return val;
}

// --------------------------------------------------- vector reconstruction
// Slot layout over the 4^n swap eigenbasis: an invariant state keeps its own
// index; an orbit {x, S2 x} stores its +1 eigenvector at the canonical index
// (first-support bit 0) and its -1 eigenvector at the partner index.
struct ReconstructedVector {
  int n = 0;
  std::vector<double> entries;  // 4^n slots
  std::vector<char> defined;    // per slot: statistics available
  double pre_norm_sum = 0.0;    // sum before renormalization
  double clamped_mass = 0.0;    // total negative mass clamped to 0
};

inline ReconstructedVector reconstruct_statistics(
    int n, const std::vector<double>& pcomp,
    const std::map<std::uint32_t, const std::vector<double>*>& plans,
    bool renormalize = true) {
  const std::size_t d = dim_of(2 * n);
  if (pcomp.size() != d) throw InputError("computational vector size mismatch");
  ReconstructedVector rv;
  rv.n = n;
  rv.entries.assign(d, 0.0);
  rv.defined.assign(d, 0);
  for (std::size_t x = 0; x < d; ++x)
    if (mask_of(n, x) == 0) {
      rv.entries[x] = pcomp[x];
      rv.defined[x] = 1;
    }
  for (const auto& [mask, probs] : plans) {
    if (probs == nullptr || probs->size() != d)
      throw InputError("plan vector size mismatch");
    const int s0 = mask_support(n, mask).front();
    for (std::size_t a = 0; a < dim_of(n); ++a) {
      if (bit_at(a, n, s0)) continue;
      const std::size_t b = a ^ mask;
      const std::size_t u = (a << n) | b;
      const std::size_t yp = mask_outcome_encode(n, mask, u, +1);
      const std::size_t ym = mask_outcome_encode(n, mask, u, -1);
      rv.entries[u] = (*probs)[yp];
      rv.entries[s2_partner(n, u)] = (*probs)[ym];
      rv.defined[u] = 1;
      rv.defined[s2_partner(n, u)] = 1;
    }
  }
  for (double& v : rv.entries)
    if (v < 0) {
      rv.clamped_mass += -v;
      v = 0;
    }
  double sum = 0;
  for (std::size_t x = 0; x < d; ++x) {
    // Orbits not covered by any supplied plan contribute their computational
    // pair mass to the normalization; the slots stay flagged undefined.
    sum += rv.defined[x] ? rv.entries[x] : pcomp[x];
  }
  rv.pre_norm_sum = sum;
  if (renormalize) {
    if (sum <= 0) throw NumericError("reconstructed vector has no mass");
    for (double& v : rv.entries) v /= sum;
  }
  return rv;
}

// Eigenvalue of O_sym * S2 on the eigenvector stored at slot x for the
// diagonal eigenvalue table o: o[a] on invariant states, +/-(o[a]+o[b])/2 on
// orbit eigenvectors (sign = the swap eigenvalue of the slot).
inline double slot_eigenvalue(int n, std::size_t x,
                              const std::vector<double>& o) {
  const std::size_t a = x >> n, b = x & (dim_of(n) - 1);
  if (a == b) return o[a];
  const std::uint32_t d = mask_of(n, x);
  const int s0 = mask_support(n, d).front();
  double lam = 0.5 * (o[a] + o[b]);
  if (bit_at(a, n, s0)) lam = -lam;  // partner slot holds the -1 eigenvector
  return lam;
}

// --------------------------------------------------------- corrected values
struct CorrectedEstimate {
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;
  double raw_value = 0.0;
  std::map<std::string, double> diagnostics;
};

inline CorrectedEstimate corrected_pauli_expectation(
    const std::string& pauli, const ReconstructedVector& rv, double s2_value) {
  if (std::abs(s2_value) < 1e-6)
    throw DegeneratePurityError("|<S2>| below 1e-6");
  const int n = rv.n;
  if (static_cast<int>(pauli.size()) != n)
    throw DimensionError("Pauli width mismatch");
  const auto o = diag_eigs(pauli);
  for (std::uint32_t d : required_masks(pauli)) {
    const int s0 = mask_support(n, d).front();
    for (std::size_t a = 0; a < dim_of(n); ++a) {
      if (bit_at(a, n, s0)) continue;
      const std::size_t u = (a << n) | (a ^ d);
      if (!rv.defined[u] || !rv.defined[s2_partner(n, u)])
        throw CoverageError("mask " + std::to_string(d) +
                            " needed but not measured");
    }
  }
  CorrectedEstimate ce;
  ce.denominator = s2_value;
  for (std::size_t x = 0; x < rv.entries.size(); ++x)
    if (rv.defined[x]) ce.numerator += rv.entries[x] * slot_eigenvalue(n, x, o);
  ce.value = ce.numerator / s2_value;
  ce.diagnostics["clamped_mass"] = rv.clamped_mass;
  ce.diagnostics["vector_sum"] = rv.pre_norm_sum;
  return ce;
}

inline double raw_energy(const PauliSum& h, const MeasurementBundle& bn) {
  double e = h.constant;
  for (const auto& t : h.terms) {
    const auto it = bn.raw.find(rotation_key(t.pauli));
    if (it == bn.raw.end()) throw InputError("bundle missing raw data");
    const auto o = diag_eigs(t.pauli);
    double v = 0;
    for (std::size_t x = 0; x < o.size(); ++x) v += o[x] * it->second[x];
    e += t.coeff * v;
  }
  return e;
}

namespace detail {

inline std::map<std::uint32_t, const std::vector<double>*> plans_for_key(
    const MeasurementBundle& bn, const std::string& key) {
  std::map<std::uint32_t, const std::vector<double>*> plans;
  for (const auto& [pk, probs] : bn.plan)
    if (pk.first == key) plans[pk.second] = &probs;
  return plans;
}

}  // namespace detail

inline CorrectedEstimate corrected_energy(const PauliSum& h,
                                          const MeasurementBundle& bn) {
  const int n = bn.n;
  const double s2 = estimate_s2(bn);
  if (std::abs(s2) < 1e-6) throw DegeneratePurityError("|<S2>| below 1e-6");
  CorrectedEstimate ce;
  ce.denominator = s2;
  ce.value = h.constant;
  std::map<std::string, ReconstructedVector> recon;
  for (const auto& t : h.terms) {
    const std::string key = rotation_key(t.pauli);
    auto it = recon.find(key);
    if (it == recon.end()) {
      const auto cit = bn.comp.find(key);
      if (cit == bn.comp.end())
        throw InputError("bundle missing computational data for group " + key);
      it = recon
               .emplace(key, reconstruct_statistics(
                                 n, cit->second, detail::plans_for_key(bn, key)))
               .first;
    }
    const CorrectedEstimate term =
        corrected_pauli_expectation(t.pauli, it->second, s2);
    ce.value += t.coeff * term.value;
    ce.diagnostics["term:" + t.pauli] = term.value;
  }
  ce.numerator = ce.value * s2;  // aggregate, reported for diagnostics
  ce.raw_value = raw_energy(h, bn);
  return ce;
}

// ----------------------------------------------------------- B-gate hybrid
inline double b_gate_s2(int n, const std::vector<double>& pb) {
  const auto& tables = b_gate_tables();
  double val = 0;
  for (std::size_t y = 0; y < pb.size(); ++y) {
    double w = 1;
    for (int i = 0; i < n; ++i) w *= tables.swap_eig[pair_bits(y, n, i)];
    val += w * pb[y];
  }
  return val;
}

inline double b_gate_local_numerator(int n, int qubit,
                                     const std::vector<double>& pb) {
  const auto& tables = b_gate_tables();
  double val = 0;
  for (std::size_t y = 0; y < pb.size(); ++y) {
    double w = tables.zsym_eig[pair_bits(y, n, qubit)];
    for (int i = 0; i < n; ++i)
      if (i != qubit) w *= tables.swap_eig[pair_bits(y, n, i)];
    val += w * pb[y];
  }
  return val;
}

// Hybrid estimate: <S2> and 1-local numerators from B-gate outcome
// eigenvalue products; multi-qubit terms from the reconstructed statistics.
inline CorrectedEstimate b_gate_estimate(const PauliSum& h,
                                         const MeasurementBundle& bn) {
  const int n = bn.n;
  if (bn.bgate_id.empty()) throw InputError("bundle missing B-gate data");
  const double s2 = b_gate_s2(n, bn.bgate_id);
  if (std::abs(s2) < 1e-6) throw DegeneratePurityError("|<S2>| below 1e-6");
  CorrectedEstimate ce;
  ce.denominator = s2;
  ce.value = h.constant;
  std::map<std::string, ReconstructedVector> recon;
  for (const auto& t : h.terms) {
    const std::string key = rotation_key(t.pauli);
    double num = 0;
    if (is_one_local(t.pauli)) {
      int q = 0;
      for (int i = 0; i < n; ++i)
        if (t.pauli[i] != 'I') q = i;
      const auto it = bn.bgate.find(key);
      if (it == bn.bgate.end())
        throw InputError("bundle missing B-gate data for group " + key);
      num = b_gate_local_numerator(n, q, it->second);
    } else {
      auto it = recon.find(key);
      if (it == recon.end()) {
        const auto cit = bn.comp.find(key);
        if (cit == bn.comp.end())
          throw InputError("bundle missing computational data for group " + key);
        it = recon
                 .emplace(key,
                          reconstruct_statistics(n, cit->second,
                                                 detail::plans_for_key(bn, key)))
                 .first;
      }
      const auto o = diag_eigs(t.pauli);
      for (std::size_t x = 0; x < it->second.entries.size(); ++x)
        if (it->second.defined[x])
          num += it->second.entries[x] * slot_eigenvalue(n, x, o);
    }
    ce.value += t.coeff * num / s2;
    ce.diagnostics["term:" + t.pauli] = num / s2;
  }
  ce.numerator = ce.value * s2;
  ce.raw_value = raw_energy(h, bn);
  return ce;
}

// ----------------------------------------------------------- shot sampling
namespace detail {

inline std::uint64_t stream_seed(std::uint64_t base, const std::string& id,
                                 long long rep) {
  return fnv1a64(std::to_string(base) + "|" + id + "|" + std::to_string(rep));
}

}  // namespace detail

// One multinomial dataset per distinct circuit: identical circuits share one
// draw (the unrotated computational circuit also serves the <S2> recipe's
// invariant part, and the unrotated B circuit the B-gate <S2>).
inline MeasurementBundle sampled_bundles(const MeasurementBundle& exact,
                                         long long shots, std::uint64_t seed,
                                         long long rep = 0) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  const std::string idkey(static_cast<std::size_t>(exact.n), '-');
  auto draw = [&](const std::vector<double>& p, const std::string& id) {
    std::mt19937_64 rng(detail::stream_seed(seed, id, rep));
    return sample_frequencies(p, shots, rng);
  };
  MeasurementBundle sb;
  sb.n = exact.n;
  sb.shots = shots;
  sb.seed = seed;
  for (const auto& [key, p] : exact.raw) sb.raw[key] = draw(p, "raw:" + key);
  for (const auto& [key, p] : exact.comp) sb.comp[key] = draw(p, "comp:" + key);
  for (const auto& [pk, p] : exact.plan)
    sb.plan[pk] = draw(p, "plan:" + pk.first + ":" + std::to_string(pk.second));
  const auto comp_id = sb.comp.find(idkey);
  sb.s2_comp = comp_id != sb.comp.end() ? comp_id->second
                                        : draw(exact.s2_comp, "comp:" + idkey);
  sb.s2_proj = draw(exact.s2_proj, "s2proj");
  for (const auto& [key, p] : exact.bgate)
    sb.bgate[key] = draw(p, "bgate:" + key);
  if (!exact.bgate_id.empty()) {
    const auto bg_id = sb.bgate.find(idkey);
    sb.bgate_id = bg_id != sb.bgate.end()
                      ? bg_id->second
                      : draw(exact.bgate_id, "bgate:" + idkey);
  }
  return sb;
}

}  // namespace vd
