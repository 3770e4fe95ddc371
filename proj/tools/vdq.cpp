// vdq: duplicate-circuit virtual distillation toolkit.
//
// Subcommands: compile, depol-sweep, dissociation, shot-noise, vqe.
// Configuration comes from a strict JSON file (--config) and/or flags; flags
// override file values.  Output directory resolution: --output-dir flag,
// then config, then $VDQ_OUTPUT_DIR, then the current directory.
//
// Exit codes: 0 success, 2 config/fixture error, 3 estimation degeneracy.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vd/experiments.hpp"

namespace {

struct FlagOverrides {
  std::string config_path;
  std::vector<std::string> fixtures;
  std::optional<std::uint64_t> seed;
  std::string shots;  // integer or "exact"
  std::string lambda_grid;
  std::optional<double> lambda;
  std::string distances;
  std::optional<long long> repetitions;
  std::optional<int> restarts;
  std::optional<long long> maxiter;
  std::optional<int> grid_points;
  std::string method;
  std::string output_dir;
  bool svg = false;
};

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw vd::InputError("cannot parse number: " + tok);
    }
  }
  if (out.empty()) throw vd::InputError("empty number list");
  return out;
}

vd::ExperimentConfig resolve_config(const std::string& experiment,
                                    const FlagOverrides& fl) {
  vd::ExperimentConfig cfg;
  if (!fl.config_path.empty()) {
    cfg = vd::load_config(fl.config_path);
    if (cfg.experiment != experiment)
      throw vd::InputError("config experiment '" + cfg.experiment +
                           "' does not match subcommand '" + experiment + "'");
  } else {
    cfg.experiment = experiment;
  }
  if (!fl.fixtures.empty()) cfg.fixtures = fl.fixtures;
  if (fl.seed) cfg.seed = *fl.seed;
  if (!fl.shots.empty()) {
    if (fl.shots == "exact") {
      cfg.shots = -1;
    } else {
      try {
        cfg.shots = std::stoll(fl.shots);
      } catch (const std::exception&) {
        throw vd::InputError("--shots must be an integer or 'exact'");
      }
      if (cfg.shots < 1)
        throw vd::InputError("--shots must be an integer or 'exact'");
    }
  }
  if (!fl.lambda_grid.empty()) {
    cfg.lambda_grid = parse_double_list(fl.lambda_grid);
    cfg.has_lambda_grid = true;
  }
  if (fl.lambda) cfg.lambda = *fl.lambda;
  if (!fl.distances.empty()) {
    cfg.distances = parse_double_list(fl.distances);
    cfg.has_distances = true;
  }
  if (fl.repetitions) cfg.repetitions = *fl.repetitions;
  if (fl.restarts) cfg.restarts = *fl.restarts;
  if (fl.maxiter) cfg.maxiter = *fl.maxiter;
  if (fl.grid_points) cfg.grid_points = *fl.grid_points;
  if (!fl.method.empty()) {
    if (fl.method != "raw" && fl.method != "vd" && fl.method != "bgate-hybrid")
      throw vd::InputError("unknown method: " + fl.method);
    cfg.method = fl.method;
  }
  if (!fl.output_dir.empty()) cfg.output_dir = fl.output_dir;
  if (fl.svg) cfg.svg = true;
  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("VDQ_OUTPUT_DIR");
    cfg.output_dir = env != nullptr && *env != '\0' ? env : ".";
  }
  if (cfg.fixtures.empty()) throw vd::InputError("no fixture given");
  return cfg;
}

std::string out_path(const vd::ExperimentConfig& cfg,
                     const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::string fixture_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int cmd_compile(const vd::ExperimentConfig& cfg) {
  for (const std::string& path : cfg.fixtures) {
    const vd::Fixture fx = vd::load_fixture(path);
    const auto files = vd::compile_outputs(fx);
    const std::string dir = out_path(cfg, fixture_stem(path));
    int mask_plans = 0;
    for (const auto& f : files) {
      vd::write_text_file((std::filesystem::path(dir) / f.name).string(),
                          f.content);
      if (f.name.rfind("mask_", 0) == 0 &&
          f.name.size() > 4 && f.name.substr(f.name.size() - 4) == ".txt")
        ++mask_plans;
    }
    std::cout << "compiled " << path << ": " << mask_plans
              << " mask plans + S2 plan + B gate -> " << dir << "\n";
  }
  return 0;
}

int cmd_depol_sweep(const vd::ExperimentConfig& cfg) {
  const vd::Fixture fx = vd::load_fixture(cfg.fixtures.at(0));
  const vd::DepolResult res = vd::run_depol_sweep(cfg, fx);
  const std::string csv_path = out_path(cfg, "depol_sweep.csv");
  vd::depol_csv(cfg, fx, res).save(csv_path);
  std::cout << "wrote " << csv_path << "\n";
  if (cfg.svg) {
    std::vector<vd::PlotSeries> series(cfg.method == "bgate-hybrid" ? 4 : 3);
    series[0].label = "raw";
    series[1].label = "corrected";
    series[2].label = "ideal";
    if (series.size() == 4) series[3].label = "b-gate";
    for (const vd::DepolRow& r : res.rows) {
      series[0].x.push_back(r.lambda);
      series[0].y.push_back(r.raw);
      series[1].x.push_back(r.lambda);
      series[1].y.push_back(r.corrected);
      series[2].x.push_back(r.lambda);
      series[2].y.push_back(r.ideal);
      if (series.size() == 4) {
        series[3].x.push_back(r.lambda);
        series[3].y.push_back(r.bgate);
      }
    }
    const std::string svg_path = out_path(cfg, "depol_sweep.svg");
    vd::write_text_file(
        svg_path, vd::svg_line_plot(series, "Depolarization sweep: " +
                                                fixture_stem(fx.path),
                                    "lambda", "energy (Ha)"));
    std::cout << "wrote " << svg_path << "\n";
  }
  return 0;
}

int cmd_dissociation(const vd::ExperimentConfig& cfg) {
  std::vector<vd::Fixture> fixtures;
  for (const std::string& path : cfg.fixtures)
    fixtures.push_back(vd::load_fixture(path));
  const auto rows = vd::run_dissociation(cfg, fixtures);
  const std::string csv_path = out_path(cfg, "dissociation.csv");
  vd::dissociation_csv(cfg, fixtures, rows).save(csv_path);
  std::cout << "wrote " << csv_path << "\n";
  if (cfg.svg) {
    std::vector<vd::PlotSeries> series(3);
    series[0].label = "exact";
    series[1].label = "raw";
    series[2].label = "corrected";
    for (const auto& r : rows) {
      series[0].x.push_back(r.distance);
      series[0].y.push_back(r.exact);
      series[1].x.push_back(r.distance);
      series[1].y.push_back(r.raw);
      series[2].x.push_back(r.distance);
      series[2].y.push_back(r.corrected);
    }
    const std::string svg_path = out_path(cfg, "dissociation.svg");
    vd::write_text_file(svg_path,
                        vd::svg_line_plot(series, "Dissociation curve",
                                          "distance (A)", "energy (Ha)"));
    std::cout << "wrote " << svg_path << "\n";
  }
  return 0;
}

int cmd_shot_noise(const vd::ExperimentConfig& cfg) {
  std::vector<vd::Fixture> fixtures;
  std::vector<vd::ShotNoiseRow> rows;
  for (const std::string& path : cfg.fixtures) {
    fixtures.push_back(vd::load_fixture(path));
    rows.push_back(vd::run_shot_noise(cfg, fixtures.back()));
  }
  const std::string csv_path = out_path(cfg, "shot_noise.csv");
  vd::shot_noise_csv(cfg, fixtures, rows).save(csv_path);
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

int cmd_vqe(const vd::ExperimentConfig& cfg) {
  const vd::Fixture fx = vd::load_fixture(cfg.fixtures.at(0));
  const vd::VqeResult res = vd::run_vqe(cfg, fx);
  const std::string csv_path = out_path(cfg, "vqe_trace.csv");
  vd::vqe_csv(cfg, fx, res).save(csv_path);
  std::cout << "wrote " << csv_path << "\n";
  const vd::TraceRow& best = res.trace.evaluations[res.trace.best];
  std::cout << "best raw energy " << vd::fmt_g(best.raw_energy)
            << ", corrected " << vd::fmt_g(res.corrected_at_best) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vdq: duplicate-circuit virtual distillation toolkit"};
  app.set_version_flag("--version", std::string("vdq ") + vd::kToolVersion);
  app.require_subcommand(1);

  FlagOverrides fl;
  std::vector<CLI::App*> subs;
  for (const char* name :
       {"compile", "depol-sweep", "dissociation", "shot-noise", "vqe"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", fl.config_path, "JSON config file");
    sub->add_option("--fixture", fl.fixtures,
                    "Hamiltonian fixture path (repeatable)");
    sub->add_option("--output-dir", fl.output_dir, "output directory");
    subs.push_back(sub);
  }
  CLI::App* depol = subs[1];
  CLI::App* diss = subs[2];
  CLI::App* shot = subs[3];
  CLI::App* vqe = subs[4];
  for (CLI::App* sub : {depol, diss, shot, vqe}) {
    sub->add_option("--seed", fl.seed, "RNG seed");
    sub->add_option("--restarts", fl.restarts, "optimizer restarts");
    sub->add_option("--maxiter", fl.maxiter, "simplex iteration cap");
    sub->add_option("--grid-points", fl.grid_points, "1-D sweep grid size");
  }
  for (CLI::App* sub : {depol, diss, shot})
    sub->add_option("--shots", fl.shots, "shots per circuit or 'exact'");
  for (CLI::App* sub : {depol, diss}) {
    sub->add_option("--method", fl.method, "raw | vd | bgate-hybrid");
    sub->add_flag("--svg", fl.svg, "also write an SVG plot");
  }
  depol->add_option("--lambda-grid", fl.lambda_grid,
                    "comma-separated depolarization grid");
  for (CLI::App* sub : {diss, vqe})
    sub->add_option("--lambda", fl.lambda, "two-qubit depolarization");
  diss->add_option("--distances", fl.distances,
                   "comma-separated distance filter");
  shot->add_option("--repetitions", fl.repetitions, "seeded repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().at(0)->get_name();
    const vd::ExperimentConfig cfg = resolve_config(name, fl);
    if (name == "compile") return cmd_compile(cfg);
    if (name == "depol-sweep") return cmd_depol_sweep(cfg);
    if (name == "dissociation") return cmd_dissociation(cfg);
    if (name == "shot-noise") return cmd_shot_noise(cfg);
    return cmd_vqe(cfg);
  } catch (const vd::DegeneratePurityError& e) {
    std::cerr << "estimation degeneracy: " << e.what() << "\n";
    return 3;
  } catch (const vd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
