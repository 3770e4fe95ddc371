#pragma once
// Ansatz construction, dense energy evaluation, 1-D sweeps, and multi-start
// derivative-free optimization (Nelder-Mead simplex with polish stages).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "vd/estimate.hpp"
#include "vd/pauli.hpp"
#include "vd/sim.hpp"

namespace vd {

// ------------------------------------------------------------- ansatz
enum class AnsatzKind { ReducedUcc2, HardwareEfficient };

struct AnsatzSpec {
  AnsatzKind kind = AnsatzKind::HardwareEfficient;
  int n_qubits = 0;
  int layers = 0;                  // entangling layers (rotation groups = layers+1)
  std::string initial_state;       // computational preparation bits, big-endian
};

inline void validate_ansatz_spec(const AnsatzSpec& s) {
  if (s.kind == AnsatzKind::ReducedUcc2) {
    if (s.n_qubits != 2) throw InputError("reduced-ucc-2q requires 2 qubits");
    return;
  }
  if (s.n_qubits < 1) throw InputError("ansatz qubit count must be positive");
  if (s.layers < 0) throw InputError("layers must be non-negative");
  if (static_cast<int>(s.initial_state.size()) != s.n_qubits)
    throw InputError("initial state length must equal qubit count");
  for (char c : s.initial_state)
    if (c != '0' && c != '1')
      throw InputError("initial state must be a bitstring");
}

inline int param_count(const AnsatzSpec& s) {
  validate_ansatz_spec(s);
  if (s.kind == AnsatzKind::ReducedUcc2) return 1;
  return 2 * s.n_qubits * (s.layers + 1);
}

inline AnsatzSpec default_ansatz_spec(int n) {
  AnsatzSpec s;
  s.n_qubits = n;
  switch (n) {
    case 2:
      s.kind = AnsatzKind::ReducedUcc2;
      s.initial_state = "01";
      break;
    case 3:
      s.layers = 2;
      s.initial_state = "010";
      break;
    case 4:
      s.layers = 2;
      s.initial_state = "1100";
      break;
    default:
      throw InputError("no default ansatz for n=" + std::to_string(n));
  }
  return s;
}

inline Circuit build_ansatz(const AnsatzSpec& s,
                            const std::vector<double>& params) {
  if (static_cast<int>(params.size()) != param_count(s))
    throw InputError("parameter count mismatch: expected " +
                     std::to_string(param_count(s)) + ", got " +
                     std::to_string(params.size()));
  Circuit c;
  c.n_qubits = s.n_qubits;
  if (s.kind == AnsatzKind::ReducedUcc2) {
    c.label = "ansatz:reduced-ucc-2q";
    c.gates = {gX(1), gRy(0, params[0]), gCNOT(0, 1)};
    return c;
  }
  const int n = s.n_qubits;
  c.label = "ansatz:he-" + std::to_string(s.layers) + "x" + std::to_string(n);
  for (int q = 0; q < n; ++q)
    if (s.initial_state[q] == '1') c.gates.push_back(gX(q));
  for (int layer = 0; layer <= s.layers; ++layer) {
    for (int q = 0; q < n; ++q)
      c.gates.push_back(gRy(q, params[2 * n * layer + q]));
    for (int q = 0; q < n; ++q)
      c.gates.push_back(gRz(q, params[2 * n * layer + n + q]));
    if (layer < s.layers)
      for (int q = n - 2; q >= 0; --q) c.gates.push_back(gCNOT(q, q + 1));
  }
  return c;
}

// ----------------------------------------------------- dense energy oracle
// <H> on the prepared state; statevector path when the circuit is noiseless,
// density-matrix path otherwise.  One-qubit basis rotations carry no noise,
// so this equals the measured raw energy exactly.
inline double dense_energy_with(const std::vector<cplx>& H,
                                const Circuit& ansatz,
                                const NoiseSpec& noise) {
  const std::size_t d = dim_of(ansatz.n_qubits);
  if (H.size() != d * d)
    throw DimensionError("Hamiltonian/ansatz width mismatch");
  bool noiseless = noise.two_qubit_depolarization == 0.0;
  for (const auto& [idx, lam] : noise.per_gate_overrides)
    noiseless = noiseless && lam == 0.0;
  if (noiseless) {
    const StateVector psi =
        apply_circuit_pure(ansatz, StateVector::zero(ansatz.n_qubits));
    cplx e = 0;
    for (std::size_t r = 0; r < d; ++r) {
      cplx row = 0;
      for (std::size_t cidx = 0; cidx < d; ++cidx)
        row += H[r * d + cidx] * psi.amp[cidx];
      e += std::conj(psi.amp[r]) * row;
    }
    return e.real();
  }
  const DensityMatrix rho =
      apply_circuit_noisy(ansatz, DensityMatrix::zero_state(ansatz.n_qubits),
                          noise);
  cplx tr = 0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t cidx = 0; cidx < d; ++cidx)
      tr += H[r * d + cidx] * rho.at(cidx, r);
  return tr.real();
}

inline double dense_energy(const PauliSum& h, const Circuit& ansatz,
                           const NoiseSpec& noise) {
  if (h.n_qubits != ansatz.n_qubits)
    throw DimensionError("Hamiltonian/ansatz width mismatch");
  return dense_energy_with(dense_hamiltonian(h), ansatz, noise);
}

inline double dense_energy(const PauliSum& h, const AnsatzSpec& spec,
                           const std::vector<double>& params,
                           const NoiseSpec& noise) {
  return dense_energy(h, build_ansatz(spec, params), noise);
}

// ------------------------------------------------------------- traces
struct TraceRow {
  std::vector<double> params;
  double raw_energy = std::numeric_limits<double>::quiet_NaN();
  double corrected_energy = std::numeric_limits<double>::quiet_NaN();
};

struct OptimizationTrace {
  std::vector<TraceRow> evaluations;
  std::size_t best = 0;
  std::uint64_t seed = 0;
  std::string settings;
};

inline double best_raw(const OptimizationTrace& t) {
  if (t.evaluations.empty()) throw InputError("empty optimization trace");
  return t.evaluations[t.best].raw_energy;
}

// --------------------------------------------------------------- sweep
inline OptimizationTrace sweep_1d(const PauliSum& h, const AnsatzSpec& spec,
                                  const std::vector<double>& grid,
                                  const NoiseSpec& noise,
                                  bool correct_at_argmin = true) {
  if (param_count(spec) != 1)
    throw InputError("1-D sweep requires a single-parameter ansatz");
  if (grid.empty()) throw InputError("sweep grid is empty");
  OptimizationTrace trace;
  trace.settings = "sweep-1d[" + std::to_string(grid.size()) + "]";
  for (double theta : grid) {
    TraceRow row;
    row.params = {theta};
    row.raw_energy = dense_energy(h, spec, row.params, noise);
    if (trace.evaluations.empty() ||
        row.raw_energy < trace.evaluations[trace.best].raw_energy)
      trace.best = trace.evaluations.size();
    trace.evaluations.push_back(std::move(row));
  }
  if (correct_at_argmin) {
    TraceRow& bestrow = trace.evaluations[trace.best];
    const Circuit ansatz = build_ansatz(spec, bestrow.params);
    const MeasurementBundle bn = make_bundles(
        spec.n_qubits, ansatz, h, noise.two_qubit_depolarization);
    const CorrectedEstimate ce = corrected_energy(h, bn);
    bestrow.corrected_energy = ce.value;
  }
  return trace;
}

// -------------------------------------------------------------- optimizer
struct SimplexResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  long long evaluations = 0;
  bool converged = false;
};

// Standard Nelder-Mead with adaptive restart handled by the caller.
inline SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& x0, double step, long long maxiter,
    double xatol = 1e-10, double fatol = 1e-12) {
  const std::size_t npar = x0.size();
  std::vector<std::vector<double>> pts(npar + 1, x0);
  for (std::size_t i = 0; i < npar; ++i) pts[i + 1][i] += step;
  std::vector<double> fv(npar + 1);
  SimplexResult out;
  for (std::size_t i = 0; i <= npar; ++i) {
    fv[i] = fn(pts[i]);
    ++out.evaluations;
  }
  std::vector<std::size_t> order(npar + 1);
  const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;
  for (long long iter = 0; iter < maxiter; ++iter) {
    for (std::size_t i = 0; i <= npar; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = order[0], hi = order[npar], nh = order[npar - 1];
    double fspread = std::abs(fv[hi] - fv[lo]);
    double xspread = 0;
    for (std::size_t i = 0; i <= npar; ++i)
      for (std::size_t j = 0; j < npar; ++j)
        xspread = std::max(xspread, std::abs(pts[i][j] - pts[lo][j]));
    if (fspread < fatol && xspread < xatol) {
      out.converged = true;
      break;
    }
    std::vector<double> centroid(npar, 0.0);
    for (std::size_t i = 0; i <= npar; ++i)
      if (i != hi)
        for (std::size_t j = 0; j < npar; ++j) centroid[j] += pts[i][j];
    for (double& v : centroid) v /= static_cast<double>(npar);
    auto blend = [&](double t) {
      std::vector<double> p(npar);
      for (std::size_t j = 0; j < npar; ++j)
        p[j] = centroid[j] + t * (pts[hi][j] - centroid[j]);
      return p;
    };
    const std::vector<double> xr = blend(-alpha);
    const double fr = fn(xr);
    ++out.evaluations;
    if (fr < fv[lo]) {
      const std::vector<double> xe = blend(-gamma);
      const double fe = fn(xe);
      ++out.evaluations;
      if (fe < fr) {
        pts[hi] = xe;
        fv[hi] = fe;
      } else {
        pts[hi] = xr;
        fv[hi] = fr;
      }
      continue;
    }
    if (fr < fv[nh]) {
      pts[hi] = xr;
      fv[hi] = fr;
      continue;
    }
    const bool outside = fr < fv[hi];
    const std::vector<double> xc = blend(outside ? -beta : beta);
    const double fc = fn(xc);
    ++out.evaluations;
    if (fc < std::min(fr, fv[hi])) {
      pts[hi] = xc;
      fv[hi] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= npar; ++i) {  // shrink toward the best point
      if (i == lo) continue;
      for (std::size_t j = 0; j < npar; ++j)
        pts[i][j] = pts[lo][j] + delta * (pts[i][j] - pts[lo][j]);
      fv[i] = fn(pts[i]);
      ++out.evaluations;
    }
  }
  std::size_t lo = 0;
  for (std::size_t i = 1; i <= npar; ++i)
    if (fv[i] < fv[lo]) lo = i;
  out.x = pts[lo];
  out.f = fv[lo];
  return out;
}

// Local descent with progressively finer polish stages from the stage-1 result.
inline SimplexResult simplex_descend(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& x0, long long maxiter) {
  SimplexResult r = nelder_mead(fn, x0, 0.6, maxiter);
  for (double step : {0.06, 0.006}) {
    SimplexResult p = nelder_mead(fn, r.x, step, maxiter);
    p.evaluations += r.evaluations;
    if (p.f <= r.f) r = p;
    r.evaluations = p.evaluations;
  }
  return r;
}

// Multi-start simplex descent.  Restart 0 starts from the zero vector,
// the rest from uniform draws in [-pi, pi); deterministic for a given seed.
inline OptimizationTrace optimize(const PauliSum& h, const AnsatzSpec& spec,
                                  const NoiseSpec& noise, int restarts,
                                  std::uint64_t seed,
                                  long long maxiter = 4000) {
  if (restarts < 1) throw InputError("restarts must be >= 1");
  const int npar = param_count(spec);
  if (h.n_qubits != spec.n_qubits)
    throw DimensionError("Hamiltonian/ansatz width mismatch");
  const std::vector<cplx> H = dense_hamiltonian(h);
  auto objective = [&](const std::vector<double>& th) {
    return dense_energy_with(H, build_ansatz(spec, th), noise);
  };
  std::mt19937_64 rng(seed);
  const double pi = std::acos(-1.0);
  OptimizationTrace trace;
  trace.seed = seed;
  trace.settings = "nelder-mead x" + std::to_string(restarts) +
                   " maxiter=" + std::to_string(maxiter);
  for (int k = 0; k < restarts; ++k) {
    std::vector<double> x0(npar, 0.0);
    if (k > 0)
      for (double& v : x0) v = -pi + 2 * pi * portable_u01(rng);
    const SimplexResult r = simplex_descend(objective, x0, maxiter);
    TraceRow row;
    row.params = r.x;
    row.raw_energy = r.f;
    if (trace.evaluations.empty() ||
        row.raw_energy < trace.evaluations[trace.best].raw_energy)
      trace.best = trace.evaluations.size();
    trace.evaluations.push_back(std::move(row));
  }
  return trace;
}

}  // namespace vd
