#pragma once
// Experiment runners shared by the CLI and the test binaries: depolarization
// sweep, dissociation curve, shot-noise study, VQE trace, and plan
// compilation.  Runners are pure (no I/O); CSV/file emission sits beside them
// so reruns with identical configs are byte-identical.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vd/estimate.hpp"
#include "vd/io.hpp"
#include "vd/vqe.hpp"

namespace vd {

inline std::vector<double> linspace(double a, double b, int k) {
  if (k < 2) throw InputError("linspace needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    v[static_cast<std::size_t>(i)] = a + (b - a) * i / (k - 1);
  return v;
}

inline double reference_sigma(int n) {
  switch (n) {
    case 2: return 1.296e-3;
    case 3: return 1.386e-3;
    case 4: return 2.038e-3;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

inline AnsatzSpec ansatz_for(const ExperimentConfig& cfg, const Fixture& fx) {
  if (!cfg.has_ansatz) return default_ansatz_spec(fx.sum.n_qubits);
  AnsatzSpec s = cfg.ansatz;
  if (s.n_qubits == 0) s.n_qubits = fx.sum.n_qubits;
  if (s.n_qubits != fx.sum.n_qubits)
    throw InputError("ansatz width does not match fixture");
  validate_ansatz_spec(s);
  return s;
}

// Noiseless raw optimum: dense 1-D grid scan for single-parameter ansaetze,
// multi-start simplex descent otherwise.
struct OptimumResult {
  std::vector<double> params;
  double energy = 0.0;
};

inline OptimumResult noiseless_optimum(const PauliSum& h,
                                       const AnsatzSpec& spec,
                                       const ExperimentConfig& cfg) {
  NoiseSpec off;
  OptimumResult opt;
  if (param_count(spec) == 1) {
    const double pi = std::acos(-1.0);
    const OptimizationTrace t =
        sweep_1d(h, spec, linspace(-pi, pi, cfg.grid_points), off, false);
    opt.params = t.evaluations[t.best].params;
    opt.energy = t.evaluations[t.best].raw_energy;
  } else {
    const OptimizationTrace t =
        optimize(h, spec, off, cfg.restarts, cfg.seed, cfg.maxiter);
    opt.params = t.evaluations[t.best].params;
    opt.energy = t.evaluations[t.best].raw_energy;
  }
  return opt;
}

inline std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const DegeneratePurityError*>(&e))
    return "degenerate-purity";
  if (dynamic_cast<const CoverageError*>(&e)) return "coverage";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  return "input";
}

// ------------------------------------------------------------ depol sweep
struct DepolRow {
  double lambda = 0.0;
  double raw = std::numeric_limits<double>::quiet_NaN();
  double corrected = std::numeric_limits<double>::quiet_NaN();
  double ideal = std::numeric_limits<double>::quiet_NaN();
  double s2 = std::numeric_limits<double>::quiet_NaN();
  double bgate = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct DepolResult {
  OptimumResult opt;
  std::vector<DepolRow> rows;
};

inline DepolResult run_depol_sweep(const ExperimentConfig& cfg,
                                   const Fixture& fx) {
  const AnsatzSpec spec = ansatz_for(cfg, fx);
  const int n = fx.sum.n_qubits;
  DepolResult res;
  res.opt = noiseless_optimum(fx.sum, spec, cfg);
  const Circuit ansatz = build_ansatz(spec, res.opt.params);
  std::vector<double> grid = cfg.lambda_grid;
  if (!cfg.has_lambda_grid) grid = linspace(0.0, 0.1, 11);
  const bool hybrid = cfg.method == "bgate-hybrid";
  for (double lam : grid) {
    DepolRow row;
    row.lambda = lam;
    row.ideal = res.opt.energy;
    try {
      if (cfg.method == "raw") {
        NoiseSpec ns;
        ns.two_qubit_depolarization = lam;
        row.raw = dense_energy(fx.sum, ansatz, ns);
      } else {
        MeasurementBundle bn = make_bundles(n, ansatz, fx.sum, lam, hybrid);
        if (cfg.shots > 0) bn = sampled_bundles(bn, cfg.shots, cfg.seed);
        const CorrectedEstimate ce = corrected_energy(fx.sum, bn);
        row.raw = ce.raw_value;
        row.corrected = ce.value;
        row.s2 = ce.denominator;
        if (hybrid) row.bgate = b_gate_estimate(fx.sum, bn).value;
      }
    } catch (const Error& e) {
      row.error = error_tag(e);
    }
    res.rows.push_back(row);
  }
  return res;
}

inline CsvDocument depol_csv(const ExperimentConfig& cfg, const Fixture& fx,
                             const DepolResult& res) {
  CsvDocument doc;
  doc.meta("tool", std::string("vdq ") + kToolVersion);
  doc.meta("experiment", "depol-sweep");
  doc.meta("fixture", fx.path + " (hash " + hash_hex(fx.content_hash) + ")");
  doc.meta("seed", std::to_string(cfg.seed));
  doc.meta("shots", cfg.shots < 0 ? "exact" : std::to_string(cfg.shots));
  std::string grid;
  for (const DepolRow& r : res.rows)
    grid += (grid.empty() ? "" : " ") + fmt_g(r.lambda);
  doc.meta("lambda", grid);
  doc.meta("method", cfg.method);
  std::vector<std::string> cols = {"lambda", "raw_energy", "corrected_energy",
                                   "ideal_energy", "s2_value"};
  const bool hybrid = cfg.method == "bgate-hybrid";
  if (hybrid) cols.push_back("bgate_energy");
  cols.push_back("error");
  doc.header(cols);
  for (const DepolRow& r : res.rows) {
    std::vector<std::string> cells = {fmt_g(r.lambda), fmt_g(r.raw),
                                      fmt_g(r.corrected), fmt_g(r.ideal),
                                      fmt_g(r.s2)};
    if (hybrid) cells.push_back(fmt_g(r.bgate));
    cells.push_back(r.error);
    doc.row(cells);
  }
  return doc;
}

// ------------------------------------------------------------ dissociation
struct DissociationRow {
  std::string fixture;
  double distance = 0.0;
  double exact = std::numeric_limits<double>::quiet_NaN();
  double raw = std::numeric_limits<double>::quiet_NaN();
  double corrected = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline std::vector<DissociationRow> run_dissociation(
    const ExperimentConfig& cfg, const std::vector<Fixture>& fixtures) {
  std::vector<DissociationRow> rows;
  for (const Fixture& fx : fixtures) {
    if (cfg.has_distances) {  // explicit empty list selects nothing
      bool keep = false;
      for (double d : cfg.distances)
        keep = keep || std::abs(d - fx.distance_angstrom) < 1e-9;
      if (!keep) continue;
    }
    DissociationRow row;
    row.fixture = fx.path;
    row.distance = fx.distance_angstrom;
    row.exact = fx.exact_energy;
    try {
      const AnsatzSpec spec = ansatz_for(cfg, fx);
      const OptimumResult opt = noiseless_optimum(fx.sum, spec, cfg);
      const Circuit ansatz = build_ansatz(spec, opt.params);
      const int n = fx.sum.n_qubits;
      if (cfg.method == "raw") {
        NoiseSpec ns;
        ns.two_qubit_depolarization = cfg.lambda;
        row.raw = dense_energy(fx.sum, ansatz, ns);
      } else {
        MeasurementBundle bn = make_bundles(n, ansatz, fx.sum, cfg.lambda,
                                            cfg.method == "bgate-hybrid");
        if (cfg.shots > 0) bn = sampled_bundles(bn, cfg.shots, cfg.seed);
        const CorrectedEstimate ce = cfg.method == "bgate-hybrid"
                                         ? b_gate_estimate(fx.sum, bn)
                                         : corrected_energy(fx.sum, bn);
        row.raw = ce.raw_value;
        row.corrected = ce.value;
      }
    } catch (const Error& e) {
      row.error = error_tag(e);
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const DissociationRow& a, const DissociationRow& b) {
              return a.distance < b.distance;
            });
  return rows;
}

inline CsvDocument dissociation_csv(const ExperimentConfig& cfg,
                                    const std::vector<Fixture>& fixtures,
                                    const std::vector<DissociationRow>& rows) {
  CsvDocument doc;
  doc.meta("tool", std::string("vdq ") + kToolVersion);
  doc.meta("experiment", "dissociation");
  for (const Fixture& fx : fixtures)
    doc.meta("fixture", fx.path + " (hash " + hash_hex(fx.content_hash) + ")");
  doc.meta("seed", std::to_string(cfg.seed));
  doc.meta("shots", cfg.shots < 0 ? "exact" : std::to_string(cfg.shots));
  doc.meta("lambda", fmt_g(cfg.lambda));
  doc.meta("method", cfg.method);
  doc.header({"distance_angstrom", "exact_energy", "raw_energy",
              "corrected_energy", "error"});
  for (const DissociationRow& r : rows)
    doc.row({fmt_g(r.distance), fmt_g(r.exact), fmt_g(r.raw),
             fmt_g(r.corrected), r.error});
  return doc;
}

// -------------------------------------------------------------- shot noise
struct ShotNoiseRow {
  std::string fixture;
  int n_qubits = 0;
  double exact_value = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
};

inline ShotNoiseRow run_shot_noise(const ExperimentConfig& cfg,
                                   const Fixture& fx) {
  const AnsatzSpec spec = ansatz_for(cfg, fx);
  const int n = fx.sum.n_qubits;
  ShotNoiseRow row;
  row.fixture = fx.path;
  row.n_qubits = n;
  row.reference = reference_sigma(n);
  const OptimumResult opt = noiseless_optimum(fx.sum, spec, cfg);
  const Circuit ansatz = build_ansatz(spec, opt.params);
  const MeasurementBundle exact = make_bundles(n, ansatz, fx.sum, 0.0);
  row.exact_value = corrected_energy(fx.sum, exact).value;
  if (cfg.shots < 0) {  // exact probabilities: zero spread by definition
    row.mean = row.exact_value;
    row.stddev = 0.0;
    return row;
  }
  const std::uint64_t base =
      cfg.seed + static_cast<std::uint64_t>(n);  // decorrelate fixtures
  std::vector<double> vals;
  for (long long rep = 0; rep < cfg.repetitions; ++rep) {
    const MeasurementBundle sb = sampled_bundles(exact, cfg.shots, base, rep);
    vals.push_back(corrected_energy(fx.sum, sb).value);
  }
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double ss = 0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  row.mean = mean;
  row.stddev = vals.size() > 1
                   ? std::sqrt(ss / static_cast<double>(vals.size() - 1))
                   : 0.0;
  return row;
}

inline CsvDocument shot_noise_csv(const ExperimentConfig& cfg,
                                  const std::vector<Fixture>& fixtures,
                                  const std::vector<ShotNoiseRow>& rows) {
  CsvDocument doc;
  doc.meta("tool", std::string("vdq ") + kToolVersion);
  doc.meta("experiment", "shot-noise");
  for (const Fixture& fx : fixtures)
    doc.meta("fixture", fx.path + " (hash " + hash_hex(fx.content_hash) + ")");
  doc.meta("seed", std::to_string(cfg.seed));
  doc.meta("shots", cfg.shots < 0 ? "exact" : std::to_string(cfg.shots));
  doc.meta("lambda", "0");
  doc.meta("repetitions", std::to_string(cfg.repetitions));
  doc.header({"fixture", "n_qubits", "shots", "repetitions", "mean_corrected",
              "std_corrected", "reference_std"});
  for (const ShotNoiseRow& r : rows)
    doc.row({r.fixture, std::to_string(r.n_qubits),
             cfg.shots < 0 ? "exact" : std::to_string(cfg.shots),
             std::to_string(cfg.repetitions), fmt_g(r.mean), fmt_g(r.stddev),
             fmt_g(r.reference)});
  return doc;
}

// -------------------------------------------------------------------- vqe
struct VqeResult {
  OptimizationTrace trace;
  double corrected_at_best = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline VqeResult run_vqe(const ExperimentConfig& cfg, const Fixture& fx) {
  const AnsatzSpec spec = ansatz_for(cfg, fx);
  NoiseSpec noise;
  noise.two_qubit_depolarization = cfg.lambda;
  noise.validate();
  VqeResult res;
  if (param_count(spec) == 1) {
    const double pi = std::acos(-1.0);
    res.trace =
        sweep_1d(fx.sum, spec, linspace(-pi, pi, cfg.grid_points), noise, false);
  } else {
    res.trace =
        optimize(fx.sum, spec, noise, cfg.restarts, cfg.seed, cfg.maxiter);
  }
  try {
    const Circuit ansatz =
        build_ansatz(spec, res.trace.evaluations[res.trace.best].params);
    const MeasurementBundle bn =
        make_bundles(fx.sum.n_qubits, ansatz, fx.sum, cfg.lambda);
    res.corrected_at_best = corrected_energy(fx.sum, bn).value;
  } catch (const Error& e) {
    res.error = error_tag(e);
  }
  return res;
}

inline CsvDocument vqe_csv(const ExperimentConfig& cfg, const Fixture& fx,
                           const VqeResult& res) {
  CsvDocument doc;
  doc.meta("tool", std::string("vdq ") + kToolVersion);
  doc.meta("experiment", "vqe");
  doc.meta("fixture", fx.path + " (hash " + hash_hex(fx.content_hash) + ")");
  doc.meta("seed", std::to_string(cfg.seed));
  doc.meta("shots", "exact");
  doc.meta("lambda", fmt_g(cfg.lambda));
  doc.meta("settings", res.trace.settings);
  const std::size_t npar = res.trace.evaluations.front().params.size();
  std::vector<std::string> cols = {"row", "best"};
  for (std::size_t i = 0; i < npar; ++i)
    cols.push_back("theta" + std::to_string(i));
  cols.push_back("raw_energy");
  cols.push_back("corrected_energy");
  cols.push_back("error");
  doc.header(cols);
  for (std::size_t i = 0; i < res.trace.evaluations.size(); ++i) {
    const TraceRow& tr = res.trace.evaluations[i];
    std::vector<std::string> cells = {std::to_string(i),
                                      i == res.trace.best ? "1" : "0"};
    for (double p : tr.params) cells.push_back(fmt_g(p, 17));
    cells.push_back(fmt_g(tr.raw_energy));
    cells.push_back("");
    cells.push_back("");
    doc.row(cells);
  }
  const TraceRow& bt = res.trace.evaluations[res.trace.best];
  std::vector<std::string> cells = {"best", "1"};
  for (double p : bt.params) cells.push_back(fmt_g(p, 17));
  cells.push_back(fmt_g(bt.raw_energy));
  cells.push_back(fmt_g(res.corrected_at_best));
  cells.push_back(res.error);
  doc.row(cells);
  return doc;
}

// ------------------------------------------------------------------ compile
struct CompiledFile {
  std::string name;
  std::string content;
};

inline std::vector<CompiledFile> compile_outputs(const Fixture& fx) {
  const int n = fx.sum.n_qubits;
  std::vector<CompiledFile> files;
  const ProjectionPlan s2 = build_s2_projection(n);
  files.push_back({"s2_plan.txt", circuit_to_text(s2.circuit)});
  files.push_back(
      {"s2_recipe.json", s2_recipe_json(solve_s2_recipe(n)).dump(1) + "\n"});
  files.push_back(
      {"s2_full_recipe.json", full_sum_recipe_json(n).dump(1) + "\n"});
  files.push_back({"b_gate.txt", circuit_to_text(build_b_gate(n))});
  const auto masks = required_masks(fx.sum);
  nlohmann::json manifest;
  manifest["fixture"] = fx.path;
  manifest["fixture_hash"] = hash_hex(fx.content_hash);
  manifest["n_qubits"] = n;
  manifest["tool"] = std::string("vdq ") + kToolVersion;
  manifest["masks"] = nlohmann::json::array();
  for (std::uint32_t d : masks) {
    const std::string bits = bitstring(d, n);
    manifest["masks"].push_back(bits);
    files.push_back(
        {"mask_" + bits + ".txt",
         circuit_to_text(build_mask_projection(n, d).circuit)});
    files.push_back(
        {"mask_" + bits + "_recipe.json", mask_recipe_json(n, d).dump(1) + "\n"});
  }
  files.push_back({"manifest.json", manifest.dump(1) + "\n"});
  return files;
}

}  // namespace vd
