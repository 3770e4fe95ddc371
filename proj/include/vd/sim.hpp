#pragma once
// Dense statevector / density-matrix simulation of few-qubit circuits with
// two-qubit depolarizing noise, measurement-probability extraction, and
// seeded multinomial shot sampling.
//
// Bit order is big-endian everywhere: qubit 0 is the most significant bit of
// a basis-state label.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vd {

using cplx = std::complex<double>;

// ----------------------------------------------------------------- errors
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Width/shape disagreements between operands.
struct DimensionError : Error { using Error::Error; };
// Argument outside its mathematical domain.
struct DomainError : Error { using Error::Error; };
// Malformed or inconsistent caller-supplied data (files, configs, params).
struct InputError : Error { using Error::Error; };
// A downstream computation needs statistics for a mask nobody measured.
struct CoverageError : Error { using Error::Error; };
// Problem size beyond the supported range.
struct CapacityError : Error { using Error::Error; };
// Float noise beyond tolerated bounds (likely a logic bug upstream).
struct NumericError : Error { using Error::Error; };
// |<S2>| too small to divide by.
struct DegeneratePurityError : Error { using Error::Error; };

// ------------------------------------------------------------- bit helpers
inline int bit_at(std::size_t x, int n_qubits, int qubit) {
  return static_cast<int>((x >> (n_qubits - 1 - qubit)) & 1u);
}

inline std::size_t with_bit(std::size_t x, int n_qubits, int qubit, int value) {
  const std::size_t m = std::size_t{1} << (n_qubits - 1 - qubit);
  return value ? (x | m) : (x & ~m);
}

inline std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

// ------------------------------------------------------------------- gates
enum class GateKind { X, H, S, Sdag, Rx, Ry, Rz, CNOT, CZ, MCZ };

struct Gate {
  GateKind kind;
  std::vector<int> qubits;  // ordered target list
  double angle = 0.0;       // radians; meaningful for Rx/Ry/Rz only
};

inline bool is_rotation(GateKind k) {
  return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz;
}

inline bool is_two_qubit(const Gate& g) { return g.qubits.size() == 2; }

inline Gate gX(int q) { return {GateKind::X, {q}}; }
inline Gate gH(int q) { return {GateKind::H, {q}}; }
inline Gate gS(int q) { return {GateKind::S, {q}}; }
inline Gate gSdag(int q) { return {GateKind::Sdag, {q}}; }
inline Gate gRx(int q, double t) { return {GateKind::Rx, {q}, t}; }
inline Gate gRy(int q, double t) { return {GateKind::Ry, {q}, t}; }
inline Gate gRz(int q, double t) { return {GateKind::Rz, {q}, t}; }
inline Gate gCNOT(int c, int t) { return {GateKind::CNOT, {c, t}}; }
inline Gate gCZ(int a, int b) { return {GateKind::CZ, {a, b}}; }
inline Gate gMCZ(std::vector<int> qs) { return {GateKind::MCZ, std::move(qs)}; }

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  std::string label;
};

inline void validate_gate(const Gate& g, int n_qubits) {
  if (g.qubits.empty()) throw DomainError("gate with no target qubits");
  for (std::size_t i = 0; i < g.qubits.size(); ++i) {
    if (g.qubits[i] < 0 || g.qubits[i] >= n_qubits)
      throw DimensionError("gate qubit index out of range");
    for (std::size_t j = i + 1; j < g.qubits.size(); ++j)
      if (g.qubits[i] == g.qubits[j])
        throw DomainError("gate qubit indices must be distinct");
  }
  const bool needs_two = g.kind == GateKind::CNOT || g.kind == GateKind::CZ;
  if (needs_two && g.qubits.size() != 2)
    throw DomainError("two-qubit gate needs exactly two qubits");
  if (!needs_two && g.kind != GateKind::MCZ && g.qubits.size() != 1)
    throw DomainError("single-qubit gate needs exactly one qubit");
}

// 2x2 matrix of a single-qubit gate, row-major.
inline std::array<cplx, 4> single_qubit_matrix(const Gate& g) {
  const double s2 = 1.0 / std::sqrt(2.0);
  const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
  switch (g.kind) {
    case GateKind::X: return {cplx(0), cplx(1), cplx(1), cplx(0)};
    case GateKind::H: return {cplx(s2), cplx(s2), cplx(s2), cplx(-s2)};
    case GateKind::S: return {cplx(1), cplx(0), cplx(0), cplx(0, 1)};
    case GateKind::Sdag: return {cplx(1), cplx(0), cplx(0), cplx(0, -1)};
    case GateKind::Rx: return {cplx(c), cplx(0, -s), cplx(0, -s), cplx(c)};
    case GateKind::Ry: return {cplx(c), cplx(-s), cplx(s), cplx(c)};
    case GateKind::Rz: return {cplx(c, -s), cplx(0), cplx(0), cplx(c, s)};
    default: throw DomainError("not a single-qubit gate");
  }
}

// ------------------------------------------------------------------ states
struct StateVector {
  int n_qubits = 0;
  std::vector<cplx> amp;

  static StateVector zero(int n) {
    StateVector s;
    s.n_qubits = n;
    s.amp.assign(dim_of(n), cplx(0));
    s.amp[0] = 1.0;
    return s;
  }
  static StateVector basis(int n, std::size_t x) {
    StateVector s;
    s.n_qubits = n;
    s.amp.assign(dim_of(n), cplx(0));
    s.amp.at(x) = 1.0;
    return s;
  }
  double norm() const {
    double t = 0;
    for (const cplx& a : amp) t += std::norm(a);
    return std::sqrt(t);
  }
};

struct DensityMatrix {
  int n_qubits = 0;
  std::vector<cplx> m;  // row-major dim x dim

  std::size_t dim() const { return dim_of(n_qubits); }
  cplx& at(std::size_t r, std::size_t c) { return m[r * dim() + c]; }
  const cplx& at(std::size_t r, std::size_t c) const { return m[r * dim() + c]; }

  static DensityMatrix zero_state(int n) {
    DensityMatrix rho;
    rho.n_qubits = n;
    rho.m.assign(dim_of(n) * dim_of(n), cplx(0));
    rho.m[0] = 1.0;
    return rho;
  }
  static DensityMatrix pure(const StateVector& s) {
    DensityMatrix rho;
    rho.n_qubits = s.n_qubits;
    const std::size_t d = s.amp.size();
    rho.m.resize(d * d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        rho.m[r * d + c] = s.amp[r] * std::conj(s.amp[c]);
    return rho;
  }
  double trace_real() const {
    double t = 0;
    for (std::size_t r = 0; r < dim(); ++r) t += at(r, r).real();
    return t;
  }
};

// rho_ab = rho_a (x) rho_b in big-endian layout (a's qubits first).
inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
  DensityMatrix out;
  out.n_qubits = a.n_qubits + b.n_qubits;
  const std::size_t da = a.dim(), db = b.dim();
  out.m.resize(da * db * da * db);
  for (std::size_t ra = 0; ra < da; ++ra)
    for (std::size_t ca = 0; ca < da; ++ca)
      for (std::size_t rb = 0; rb < db; ++rb)
        for (std::size_t cb = 0; cb < db; ++cb)
          out.at(ra * db + rb, ca * db + cb) = a.at(ra, ca) * b.at(rb, cb);
  return out;
}

// ------------------------------------------------------- gate application
inline void apply_gate(StateVector& s, const Gate& g) {
  validate_gate(g, s.n_qubits);
  const int N = s.n_qubits;
  const std::size_t d = dim_of(N);
  switch (g.kind) {
    case GateKind::CNOT: {
      const std::size_t tm = std::size_t{1} << (N - 1 - g.qubits[1]);
      for (std::size_t x = 0; x < d; ++x)
        if (bit_at(x, N, g.qubits[0]) && !(x & tm))
          std::swap(s.amp[x], s.amp[x | tm]);
      return;
    }
    case GateKind::CZ: {
      for (std::size_t x = 0; x < d; ++x)
        if (bit_at(x, N, g.qubits[0]) && bit_at(x, N, g.qubits[1]))
          s.amp[x] = -s.amp[x];
      return;
    }
    case GateKind::MCZ: {
      for (std::size_t x = 0; x < d; ++x) {
        bool all = true;
        for (int q : g.qubits) all = all && bit_at(x, N, q);
        if (all) s.amp[x] = -s.amp[x];
      }
      return;
    }
    default: {
      const auto M = single_qubit_matrix(g);
      const std::size_t qm = std::size_t{1} << (N - 1 - g.qubits[0]);
      for (std::size_t x = 0; x < d; ++x) {
        if (x & qm) continue;
        const cplx a0 = s.amp[x], a1 = s.amp[x | qm];
        s.amp[x] = M[0] * a0 + M[1] * a1;
        s.amp[x | qm] = M[2] * a0 + M[3] * a1;
      }
      return;
    }
  }
}

// Applies an arbitrary diagonal operator (used for projection-plan phase
// stages, which are simulated densely rather than decomposed).
inline void apply_diagonal(StateVector& s, const std::vector<cplx>& diag) {
  if (diag.size() != s.amp.size()) throw DimensionError("diagonal size mismatch");
  for (std::size_t x = 0; x < s.amp.size(); ++x) s.amp[x] *= diag[x];
}

inline void apply_gate(DensityMatrix& rho, const Gate& g) {
  validate_gate(g, rho.n_qubits);
  const int N = rho.n_qubits;
  const std::size_t d = rho.dim();
  switch (g.kind) {
    case GateKind::CNOT: {
      const std::size_t tm = std::size_t{1} << (N - 1 - g.qubits[1]);
      for (std::size_t r = 0; r < d; ++r)  // rows: rho -> U rho
        if (bit_at(r, N, g.qubits[0]) && !(r & tm))
          for (std::size_t c = 0; c < d; ++c)
            std::swap(rho.at(r, c), rho.at(r | tm, c));
      for (std::size_t c = 0; c < d; ++c)  // cols: -> (U rho) U^dag
        if (bit_at(c, N, g.qubits[0]) && !(c & tm))
          for (std::size_t r = 0; r < d; ++r)
            std::swap(rho.at(r, c), rho.at(r, c | tm));
      return;
    }
    case GateKind::CZ:
    case GateKind::MCZ: {
      std::vector<double> sign(d, 1.0);
      for (std::size_t x = 0; x < d; ++x) {
        bool all = true;
        for (int q : g.qubits) all = all && bit_at(x, N, q);
        if (all) sign[x] = -1.0;
      }
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
          rho.at(r, c) *= sign[r] * sign[c];
      return;
    }
    default: {
      const auto M = single_qubit_matrix(g);
      const std::size_t qm = std::size_t{1} << (N - 1 - g.qubits[0]);
      for (std::size_t r = 0; r < d; ++r) {  // rho -> U rho
        if (r & qm) continue;
        for (std::size_t c = 0; c < d; ++c) {
          const cplx a0 = rho.at(r, c), a1 = rho.at(r | qm, c);
          rho.at(r, c) = M[0] * a0 + M[1] * a1;
          rho.at(r | qm, c) = M[2] * a0 + M[3] * a1;
        }
      }
      for (std::size_t c = 0; c < d; ++c) {  // -> (U rho) U^dag
        if (c & qm) continue;
        for (std::size_t r = 0; r < d; ++r) {
          const cplx a0 = rho.at(r, c), a1 = rho.at(r, c | qm);
          rho.at(r, c) = a0 * std::conj(M[0]) + a1 * std::conj(M[1]);
          rho.at(r, c | qm) = a0 * std::conj(M[2]) + a1 * std::conj(M[3]);
        }
      }
      return;
    }
  }
}

inline void apply_diagonal(DensityMatrix& rho, const std::vector<cplx>& diag) {
  const std::size_t d = rho.dim();
  if (diag.size() != d) throw DimensionError("diagonal size mismatch");
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      rho.at(r, c) *= diag[r] * std::conj(diag[c]);
}

// --------------------------------------------------------------- noise
struct NoiseSpec {
  double two_qubit_depolarization = 0.0;          // lambda in [0, 1]
  std::map<std::size_t, double> per_gate_overrides;  // gate position -> lambda

  double lambda_for(std::size_t gate_index) const {
    auto it = per_gate_overrides.find(gate_index);
    return it == per_gate_overrides.end() ? two_qubit_depolarization
                                          : it->second;
  }
  void validate() const {
    auto ok = [](double l) { return l >= 0.0 && l <= 1.0; };
    if (!ok(two_qubit_depolarization))
      throw DomainError("depolarization parameter outside [0,1]");
    for (const auto& [idx, l] : per_gate_overrides)
      if (!ok(l)) throw DomainError("per-gate depolarization outside [0,1]");
  }
};

// rho -> (1-lambda) rho + lambda (I4/4 (x) Tr_pair rho) on qubits (a, b).
inline void depolarize_pair(DensityMatrix& rho, int a, int b, double lambda) {
  if (lambda == 0.0) return;
  const int N = rho.n_qubits;
  const std::size_t d = rho.dim();
  const std::size_t dr = d >> 2;  // dimension with the pair removed
  const int pa = N - 1 - a, pb = N - 1 - b;

  // rest(x): remove the two pair bits; pair(x): their 2-bit value (a high).
  auto split = [&](std::size_t x, std::size_t& rest, int& pair) {
    pair = (bit_at(x, N, a) << 1) | bit_at(x, N, b);
    std::size_t r = 0;
    int out = 0;
    for (int p = N - 1; p >= 0; --p) {
      if (p == pa || p == pb) continue;
      r |= ((x >> p) & 1u) << out;
      ++out;
    }
    rest = r;
  };
  std::vector<std::size_t> rest_of(d);
  std::vector<int> pair_of(d);
  for (std::size_t x = 0; x < d; ++x) split(x, rest_of[x], pair_of[x]);

  std::vector<cplx> T(dr * dr, cplx(0));  // Tr_pair rho
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (pair_of[r] == pair_of[c])
        T[rest_of[r] * dr + rest_of[c]] += rho.at(r, c);

  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cplx v = (1.0 - lambda) * rho.at(r, c);
      if (pair_of[r] == pair_of[c])
        v += (lambda / 4.0) * T[rest_of[r] * dr + rest_of[c]];
      rho.at(r, c) = v;
    }
}

// ------------------------------------------------------------ circuit runs
inline StateVector apply_circuit_pure(const Circuit& c, StateVector in) {
  if (c.n_qubits != in.n_qubits)
    throw DimensionError("circuit/state width mismatch");
  for (const Gate& g : c.gates) apply_gate(in, g);
  for (const cplx& a : in.amp)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw NumericError("non-finite amplitude");
  return in;
}

inline DensityMatrix apply_circuit_noisy(const Circuit& c, DensityMatrix in,
                                         const NoiseSpec& noise) {
  if (c.n_qubits != in.n_qubits)
    throw DimensionError("circuit/state width mismatch");
  noise.validate();
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    apply_gate(in, g);
    if (is_two_qubit(g))
      depolarize_pair(in, g.qubits[0], g.qubits[1], noise.lambda_for(i));
  }
  return in;
}

// ------------------------------------------------------------ measurement
// Probabilities clamp tiny negative float noise to 0; anything more negative
// than -1e-12 is treated as a logic bug.
inline std::vector<double> clamp_probabilities(std::vector<double> p) {
  for (double& v : p) {
    if (v < -1e-12) throw NumericError("probability below -1e-12");
    if (v < 0) v = 0;
  }
  return p;
}

inline std::vector<double> measurement_probabilities(const StateVector& s) {
  std::vector<double> p(s.amp.size());
  for (std::size_t x = 0; x < p.size(); ++x) p[x] = std::norm(s.amp[x]);
  return clamp_probabilities(std::move(p));
}

inline std::vector<double> measurement_probabilities(const DensityMatrix& rho) {
  std::vector<double> p(rho.dim());
  for (std::size_t x = 0; x < p.size(); ++x) p[x] = rho.at(x, x).real();
  return clamp_probabilities(std::move(p));
}

inline double purity(const DensityMatrix& rho) {
  double t = 0;
  for (const cplx& v : rho.m) t += std::norm(v);
  return t;
}

// ---------------------------------------------------------- shot sampling
// Portable uniform in [0, 1): fixed 53-bit construction on top of the
// standard-pinned mt19937_64 stream, so sampled outputs are identical across
// platforms and library versions.
inline double portable_u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// FNV-1a content hash; stable across platforms, used for content fingerprints
// and for deriving independent per-circuit sampling streams.
inline std::uint64_t fnv1a64(const std::string& bytes,
                             std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::vector<long long> multinomial_counts(const std::vector<double>& probs,
                                                 long long shots,
                                                 std::mt19937_64& rng) {
  std::vector<double> p = probs;
  double total = 0;
  for (double v : p) {
    if (v < -1e-8) throw DomainError("negative probability");
    if (v < 0) v = 0;
    total += std::max(v, 0.0);
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw InputError("probabilities do not sum to 1");
  std::vector<double> cdf(p.size());
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += std::max(p[i], 0.0) / total;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  std::vector<long long> counts(p.size(), 0);
  for (long long s = 0; s < shots; ++s) {
    const double u = portable_u01(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

inline std::map<std::size_t, long long> sample_counts(
    const std::vector<double>& probs, long long shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  std::mt19937_64 rng(seed);
  const auto counts = multinomial_counts(probs, shots, rng);
  std::map<std::size_t, long long> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) out[i] = counts[i];
  return out;
}

// Empirical frequencies from one multinomial draw.
inline std::vector<double> sample_frequencies(const std::vector<double>& probs,
                                              long long shots,
                                              std::mt19937_64& rng) {
  const auto counts = multinomial_counts(probs, shots, rng);
  std::vector<double> f(counts.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
  return f;
}

// ------------------------------------------------------------- dense views
// Dense unitary of a circuit, column by column (row-major, dim x dim).
inline std::vector<cplx> circuit_unitary(const Circuit& c) {
  const std::size_t d = dim_of(c.n_qubits);
  std::vector<cplx> U(d * d);
  for (std::size_t col = 0; col < d; ++col) {
    StateVector s = StateVector::basis(c.n_qubits, col);
    s = apply_circuit_pure(c, std::move(s));
    for (std::size_t row = 0; row < d; ++row) U[row * d + col] = s.amp[row];
  }
  return U;
}

// Largest |(U^dag U - I)_{rc}|; 0 for an exactly unitary matrix.
inline double unitarity_defect(const std::vector<cplx>& U, std::size_t d) {
  double worst = 0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cplx acc(0);
      for (std::size_t k = 0; k < d; ++k)
        acc += std::conj(U[k * d + r]) * U[k * d + c];
      if (r == c) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

}  // namespace vd
