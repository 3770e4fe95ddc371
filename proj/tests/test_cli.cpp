// End-to-end tests for the vdq command-line tool.  Each test launches the
// real binary (path injected via the VDQ_BIN compile definition) in a fresh
// temporary directory and inspects exit codes, stdout/stderr, and the files
// it writes.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "vd/experiments.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string vdq_bin() { return VDQ_BIN; }

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Scratch directory wiped on construction and destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("vdqcli_" + std::to_string(::getpid()) + "_" + tag + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path file(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Runs `vdq <args>` through the shell, capturing exit code and both streams.
RunResult run_vdq(const std::string& args, const TempDir& scratch,
                  const std::string& env_prefix = "") {
  const fs::path out = scratch.file("stdout.txt");
  const fs::path err = scratch.file("stderr.txt");
  const std::string cmd = env_prefix + "'" + vdq_bin() + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

struct Csv {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return "";
  }
  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

Csv parse_csv(const std::string& text) {
  Csv doc;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const std::string body = line.substr(2);
      const std::size_t sep = body.find(": ");
      if (sep != std::string::npos)
        doc.meta.emplace_back(body.substr(0, sep), body.substr(sep + 2));
      continue;
    }
    if (!header_seen) {
      doc.header = split_commas(line);
      header_seen = true;
    } else {
      doc.rows.push_back(split_commas(line));
    }
  }
  return doc;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string fx2q() { return vdtest::fixture_path("h2_2q_2.00A.json"); }
std::string fx3q() { return vdtest::fixture_path("h3_3q_2.00A.json"); }
std::string fx4q() { return vdtest::fixture_path("h2_4q_2.00A.json"); }

TEST(CliBasics, VersionExitsZero) {
  TempDir tmp("version");
  const RunResult r = run_vdq("--version", tmp);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("vdq 0.1.0"), std::string::npos) << r.out;
}

TEST(CliBasics, MissingSubcommandIsConfigError) {
  TempDir tmp("nosub");
  EXPECT_EQ(run_vdq("", tmp).exit_code, 2);
  EXPECT_EQ(run_vdq("frobnicate", tmp).exit_code, 2);
}

TEST(CliBasics, NoFixtureGiven) {
  TempDir tmp("nofix");
  const RunResult r = run_vdq("compile", tmp);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("no fixture given"), std::string::npos) << r.err;
}

TEST(CliBasics, MissingFixtureFileIsConfigError) {
  TempDir tmp("badfix");
  const RunResult r =
      run_vdq("compile --fixture /nonexistent/nope.json", tmp);
  EXPECT_EQ(r.exit_code, 2);
}

TEST(CliBasics, BadMethodRejected) {
  TempDir tmp("badmethod");
  const RunResult r = run_vdq(
      "depol-sweep --fixture " + q(fx2q()) + " --method sorcery", tmp);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown method"), std::string::npos) << r.err;
}

TEST(CliBasics, BadShotsRejected) {
  TempDir tmp("badshots");
  EXPECT_EQ(run_vdq("depol-sweep --fixture " + q(fx2q()) +
                        " --shots frequently",
                    tmp)
                .exit_code,
            2);
  EXPECT_EQ(
      run_vdq("depol-sweep --fixture " + q(fx2q()) + " --shots 0", tmp)
          .exit_code,
      2);
}

TEST(CliCompile, ThreeQubitFixtureEmitsAllPlans) {
  TempDir tmp("compile3");
  const RunResult r = run_vdq(
      "compile --fixture " + q(fx3q()) + " --output-dir " + q(tmp.path()),
      tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("7 mask plans"), std::string::npos) << r.out;

  const fs::path dir = tmp.file("h3_3q_2.00A");
  ASSERT_TRUE(fs::is_directory(dir));
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    names.insert(entry.path().filename().string());

  for (const char* fixed : {"s2_plan.txt", "s2_recipe.json",
                            "s2_full_recipe.json", "b_gate.txt",
                            "manifest.json"})
    EXPECT_TRUE(names.count(fixed)) << "missing " << fixed;
  int mask_txt = 0, mask_json = 0;
  for (const std::string& name : names) {
    if (name.rfind("mask_", 0) != 0) continue;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".txt") ++mask_txt;
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
      ++mask_json;
  }
  EXPECT_EQ(mask_txt, 7);
  EXPECT_EQ(mask_json, 7);
  EXPECT_EQ(names.size(), 19u);

  // Plan files must match the library's serialization byte for byte.
  EXPECT_EQ(read_file(dir / "s2_plan.txt"),
            vd::circuit_to_text(vd::build_s2_projection(3).circuit));
  EXPECT_EQ(read_file(dir / "b_gate.txt"),
            vd::circuit_to_text(vd::build_b_gate(3)));
  EXPECT_EQ(read_file(dir / "mask_011.txt"),
            vd::circuit_to_text(vd::build_mask_projection(3, 0b011).circuit));

  const vd::Fixture fx = vd::load_fixture(fx3q());
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("n_qubits").get<int>(), 3);
  EXPECT_EQ(manifest.at("fixture_hash").get<std::string>(),
            vd::hash_hex(fx.content_hash));
  EXPECT_EQ(manifest.at("masks").size(), 7u);
  const auto want = vd::required_masks(fx.sum);
  std::set<std::string> want_bits;
  for (std::uint32_t d : want) want_bits.insert(vd::bitstring(d, 3));
  std::set<std::string> got_bits;
  for (const auto& m : manifest.at("masks"))
    got_bits.insert(m.get<std::string>());
  EXPECT_EQ(got_bits, want_bits);
}

TEST(CliCompile, FourQubitFixtureEmitsFifteenMaskPlans) {
  TempDir tmp("compile4");
  const RunResult r = run_vdq(
      "compile --fixture " + q(fx4q()) + " --output-dir " + q(tmp.path()),
      tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("15 mask plans"), std::string::npos) << r.out;
  const fs::path dir = tmp.file("h2_4q_2.00A");
  int mask_txt = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("mask_", 0) == 0 && name.substr(name.size() - 4) == ".txt")
      ++mask_txt;
  }
  EXPECT_EQ(mask_txt, 15);
}

TEST(CliDepolSweep, CleanRowAndByteIdenticalRerun) {
  TempDir tmp1("depol_a");
  TempDir tmp2("depol_b");
  const std::string args = "depol-sweep --fixture " + q(fx2q()) +
                           " --lambda-grid 0,0.05,0.1 --output-dir ";
  const RunResult r1 = run_vdq(args + q(tmp1.path()), tmp1);
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  const std::string text1 = read_file(tmp1.file("depol_sweep.csv"));
  ASSERT_FALSE(text1.empty());

  const Csv doc = parse_csv(text1);
  EXPECT_EQ(doc.meta_value("experiment"), "depol-sweep");
  EXPECT_EQ(doc.meta_value("method"), "vd");
  EXPECT_EQ(doc.meta_value("shots"), "exact");
  ASSERT_EQ(doc.header,
            (std::vector<std::string>{"lambda", "raw_energy",
                                      "corrected_energy", "ideal_energy",
                                      "s2_value", "error"}));
  ASSERT_EQ(doc.rows.size(), 3u);
  for (const auto& row : doc.rows) EXPECT_EQ(row.back(), "");

  // Without noise the raw, corrected, and ideal energies all coincide and
  // the purity witness is 1.
  const auto& r0 = doc.rows[0];
  const double raw = std::stod(r0[1]);
  const double corrected = std::stod(r0[2]);
  const double ideal = std::stod(r0[3]);
  EXPECT_NEAR(raw, ideal, 1e-9);
  EXPECT_NEAR(corrected, ideal, 1e-9);
  EXPECT_NEAR(std::stod(r0[4]), 1.0, 1e-9);

  // With noise the corrected estimate stays between ideal and raw.
  const auto& r2 = doc.rows[2];
  EXPECT_GE(std::stod(r2[2]), ideal - 1e-9);
  EXPECT_LE(std::stod(r2[2]), std::stod(r2[1]) + 1e-12);

  const RunResult rr = run_vdq(args + q(tmp2.path()), tmp2);
  ASSERT_EQ(rr.exit_code, 0) << rr.err;
  EXPECT_EQ(text1, read_file(tmp2.file("depol_sweep.csv")));
}

TEST(CliDepolSweep, HybridMethodAddsBgateColumn) {
  TempDir tmp("depol_hybrid");
  const RunResult r = run_vdq("depol-sweep --fixture " + q(fx2q()) +
                                  " --lambda-grid 0,0.1 --method" +
                                  " bgate-hybrid --output-dir " +
                                  q(tmp.path()),
                              tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("depol_sweep.csv")));
  ASSERT_EQ(doc.header.size(), 7u);
  EXPECT_EQ(doc.header[5], "bgate_energy");
  ASSERT_EQ(doc.rows.size(), 2u);
  // Clean circuit: the mitigated single-copy estimate matches the ideal.
  EXPECT_NEAR(std::stod(doc.rows[0][5]), std::stod(doc.rows[0][3]), 1e-9);
  // Noisy circuit: it undershoots the ideal energy.
  EXPECT_LT(std::stod(doc.rows[1][5]), std::stod(doc.rows[1][3]));
}

TEST(CliDepolSweep, OutOfRangeLambdaMarksRowButRunSucceeds) {
  TempDir tmp("depol_err");
  const RunResult r = run_vdq("depol-sweep --fixture " + q(fx2q()) +
                                  " --lambda-grid 0.05,2 --output-dir " +
                                  q(tmp.path()),
                              tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("depol_sweep.csv")));
  ASSERT_EQ(doc.rows.size(), 2u);
  EXPECT_EQ(doc.rows[0].back(), "");
  EXPECT_EQ(doc.rows[1].back(), "input");
  EXPECT_EQ(doc.rows[1][1], "nan");
}

TEST(CliDepolSweep, SvgFlagWritesPlot) {
  TempDir tmp("depol_svg");
  const RunResult r = run_vdq("depol-sweep --fixture " + q(fx2q()) +
                                  " --lambda-grid 0,0.1 --svg --output-dir " +
                                  q(tmp.path()),
                              tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string svg = read_file(tmp.file("depol_sweep.svg"));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(CliOutputDir, EnvironmentVariableIsHonored) {
  TempDir tmp("envdir");
  const fs::path dest = tmp.file("from_env");
  fs::create_directories(dest);
  const RunResult r =
      run_vdq("depol-sweep --fixture " + q(fx2q()) + " --lambda-grid 0", tmp,
              "VDQ_OUTPUT_DIR=" + q(dest) + " ");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dest / "depol_sweep.csv"));
}

TEST(CliOutputDir, FlagOverridesEnvironment) {
  TempDir tmp("flagdir");
  const fs::path env_dest = tmp.file("from_env");
  const fs::path flag_dest = tmp.file("from_flag");
  fs::create_directories(env_dest);
  fs::create_directories(flag_dest);
  const RunResult r = run_vdq(
      "depol-sweep --fixture " + q(fx2q()) +
          " --lambda-grid 0 --output-dir " + q(flag_dest),
      tmp, "VDQ_OUTPUT_DIR=" + q(env_dest) + " ");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(flag_dest / "depol_sweep.csv"));
  EXPECT_FALSE(fs::exists(env_dest / "depol_sweep.csv"));
}

TEST(CliConfig, ExperimentMismatchRejected) {
  TempDir tmp("mismatch");
  const fs::path cfg = tmp.file("cfg.json");
  write_file(cfg, json{{"experiment", "vqe"}, {"fixture", fx2q()}}.dump());
  const RunResult r =
      run_vdq("depol-sweep --config " + q(cfg), tmp);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("does not match"), std::string::npos) << r.err;
}

TEST(CliConfig, UnknownKeyRejected) {
  TempDir tmp("badkey");
  const fs::path cfg = tmp.file("cfg.json");
  write_file(cfg, json{{"experiment", "depol-sweep"},
                       {"fixture", fx2q()},
                       {"distances", json::array({1.0})}}
                      .dump());
  const RunResult r = run_vdq("depol-sweep --config " + q(cfg), tmp);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("distances"), std::string::npos) << r.err;
}

TEST(CliConfig, FlagOverridesConfigValue) {
  TempDir tmp("override");
  const fs::path cfg = tmp.file("cfg.json");
  write_file(cfg, json{{"experiment", "depol-sweep"},
                       {"fixture", fx2q()},
                       {"lambda_grid", json::array({0.0, 0.02, 0.04})}}
                      .dump());
  const RunResult r =
      run_vdq("depol-sweep --config " + q(cfg) +
                  " --lambda-grid 0,0.1 --output-dir " + q(tmp.path()),
              tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("depol_sweep.csv")));
  ASSERT_EQ(doc.rows.size(), 2u);
  EXPECT_EQ(doc.rows[1][0], "0.1");
}

TEST(CliDissociation, EmptyDistancesGivesHeaderOnlyCsv) {
  TempDir tmp("diss_empty");
  const fs::path cfg = tmp.file("cfg.json");
  write_file(cfg, json{{"experiment", "dissociation"},
                       {"fixture", fx2q()},
                       {"distances", json::array()}}
                      .dump());
  const RunResult r = run_vdq(
      "dissociation --config " + q(cfg) + " --output-dir " + q(tmp.path()),
      tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("dissociation.csv")));
  ASSERT_EQ(doc.header,
            (std::vector<std::string>{"distance_angstrom", "exact_energy",
                                      "raw_energy", "corrected_energy",
                                      "error"}));
  EXPECT_TRUE(doc.rows.empty());
}

TEST(CliDissociation, RowsAreFilteredAndSortedByDistance) {
  TempDir tmp("diss_sort");
  const std::string fx_a = vdtest::fixture_path("h2_2q_2.50A.json");
  const std::string fx_b = vdtest::fixture_path("h2_2q_0.50A.json");
  const std::string fx_c = vdtest::fixture_path("h2_2q_1.00A.json");
  const RunResult r = run_vdq(
      "dissociation --fixture " + q(fx_a) + " --fixture " + q(fx_b) +
          " --fixture " + q(fx_c) + " --distances 2.5,0.5 --output-dir " +
          q(tmp.path()),
      tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("dissociation.csv")));
  ASSERT_EQ(doc.rows.size(), 2u);
  EXPECT_EQ(doc.rows[0][0], "0.5");
  EXPECT_EQ(doc.rows[1][0], "2.5");
  for (const auto& row : doc.rows) {
    EXPECT_EQ(row.back(), "");
    // Noiseless default: the optimized raw energy tracks the exact energy.
    EXPECT_NEAR(std::stod(row[2]), std::stod(row[1]), 5e-3);
    EXPECT_NEAR(std::stod(row[3]), std::stod(row[2]), 1e-9);
  }
}

TEST(CliShotNoise, ExactModeHasZeroSpread) {
  TempDir tmp("shot_exact");
  const RunResult r = run_vdq("shot-noise --fixture " + q(fx2q()) +
                                  " --shots exact --output-dir " +
                                  q(tmp.path()),
                              tmp);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Csv doc = parse_csv(read_file(tmp.file("shot_noise.csv")));
  ASSERT_EQ(doc.rows.size(), 1u);
  EXPECT_EQ(doc.rows[0][doc.col("shots")], "exact");
  EXPECT_EQ(std::stod(doc.rows[0][doc.col("std_corrected")]), 0.0);
  EXPECT_NEAR(std::stod(doc.rows[0][doc.col("mean_corrected")]),
              -0.9486404473873864, 1e-9);
}

TEST(CliShotNoise, SampledRunIsDeterministicPerSeed) {
  TempDir tmp1("shot_a");
  TempDir tmp2("shot_b");
  const std::string args = "shot-noise --fixture " + q(fx2q()) +
                           " --shots 64 --repetitions 5 --seed 4321" +
                           " --output-dir ";
  const RunResult r1 = run_vdq(args + q(tmp1.path()), tmp1);
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  const RunResult r2 = run_vdq(args + q(tmp2.path()), tmp2);
  ASSERT_EQ(r2.exit_code, 0) << r2.err;
  const std::string text = read_file(tmp1.file("shot_noise.csv"));
  EXPECT_EQ(text, read_file(tmp2.file("shot_noise.csv")));
  const Csv doc = parse_csv(text);
  ASSERT_EQ(doc.rows.size(), 1u);
  EXPECT_GT(std::stod(doc.rows[0][doc.col("std_corrected")]), 0.0);
}

// A single shot per circuit occasionally yields a zero purity witness, which
// must abort the run with the dedicated exit code.  The seed is mined with
// the library so the subprocess check stays deterministic.
TEST(CliShotNoise, DegenerateSingleShotSeedExitsThree) {
  const vd::Fixture fx = vd::load_fixture(fx2q());
  vd::ExperimentConfig cfg;
  cfg.experiment = "shot-noise";
  cfg.fixtures = {fx2q()};
  cfg.shots = 1;
  cfg.repetitions = 1;
  std::uint64_t found = 0;
  bool ok = false;
  for (std::uint64_t seed = 9000; seed < 9400 && !ok; ++seed) {
    cfg.seed = seed;
    try {
      vd::run_shot_noise(cfg, fx);
    } catch (const vd::DegeneratePurityError&) {
      found = seed;
      ok = true;
    } catch (const vd::Error&) {
      // Single-shot draws can fail in other ways (for example an empty
      // reconstructed vector); keep looking for the degenerate-purity case.
    }
  }
  ASSERT_TRUE(ok) << "no degenerate single-shot seed in probe range";

  TempDir tmp("shot_degenerate");
  const RunResult r = run_vdq(
      "shot-noise --fixture " + q(fx2q()) + " --shots 1 --repetitions 1" +
          " --seed " + std::to_string(found) + " --output-dir " +
          q(tmp.path()),
      tmp);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("estimation degeneracy"), std::string::npos) << r.err;
}

TEST(CliVqe, TraceIsDeterministicAndMarksBestRow) {
  TempDir tmp1("vqe_a");
  TempDir tmp2("vqe_b");
  const std::string args = "vqe --fixture " + q(fx3q()) +
                           " --restarts 2 --maxiter 300 --seed 99" +
                           " --output-dir ";
  const RunResult r1 = run_vdq(args + q(tmp1.path()), tmp1);
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  EXPECT_NE(r1.out.find("best raw energy"), std::string::npos) << r1.out;
  const RunResult r2 = run_vdq(args + q(tmp2.path()), tmp2);
  ASSERT_EQ(r2.exit_code, 0) << r2.err;
  const std::string text = read_file(tmp1.file("vqe_trace.csv"));
  EXPECT_EQ(text, read_file(tmp2.file("vqe_trace.csv")));

  const Csv doc = parse_csv(text);
  EXPECT_EQ(doc.meta_value("settings"), "nelder-mead x2 maxiter=300");
  ASSERT_EQ(doc.rows.size(), 3u);  // one row per restart plus the best row
  EXPECT_EQ(doc.rows.back()[0], "best");
  EXPECT_EQ(doc.rows.back()[1], "1");
  // Noiseless run: the corrected energy at the optimum matches the raw one.
  const int ce = doc.col("corrected_energy");
  const int re = doc.col("raw_energy");
  EXPECT_NEAR(std::stod(doc.rows.back()[ce]), std::stod(doc.rows.back()[re]),
              1e-9);
}

}  // namespace
