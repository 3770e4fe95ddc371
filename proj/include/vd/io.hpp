#pragma once
// File formats: Hamiltonian fixture JSON, experiment config JSON (strict),
// circuit text emit/parse, recipe JSON, deterministic CSV with a metadata
// header block, and a minimal single-plot SVG writer.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vd/pauli.hpp"
#include "vd/sim.hpp"
#include "vd/vdcomp.hpp"
#include "vd/vqe.hpp"

namespace vd {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------- files
inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
}

// ------------------------------------------------------------- formatting
inline std::string fmt_g(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

inline std::string bitstring(std::size_t x, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i)
    if (bit_at(x, width, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

// ---------------------------------------------------------------- fixture
struct Fixture {
  PauliSum sum;
  double exact_energy = 0.0;
  std::string molecule;
  double distance_angstrom = 0.0;
  std::string mapping;
  std::string basis;
  std::string path;
  std::uint64_t content_hash = 0;
};

inline Fixture load_fixture(const std::string& path, bool check_exact = true) {
  const std::string raw = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("fixture " + path + ": " + e.what());
  }
  Fixture fx;
  fx.path = path;
  fx.content_hash = fnv1a64(raw);
  try {
    fx.sum.n_qubits = j.at("n_qubits").get<int>();
    for (const auto& t : j.at("terms"))
      fx.sum.terms.push_back(
          {t.at("pauli").get<std::string>(), t.at("coeff").get<double>()});
    fx.sum.constant = j.at("constant").get<double>();
    fx.exact_energy = j.at("exact_energy").get<double>();
    const auto& meta = j.at("meta");
    fx.molecule = meta.at("molecule").get<std::string>();
    fx.distance_angstrom = meta.at("distance_angstrom").get<double>();
    fx.mapping = meta.at("mapping").get<std::string>();
    fx.basis = meta.at("basis").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("fixture " + path + ": " + e.what());
  }
  fx.sum.meta = fx.molecule + " @ " + fmt_g(fx.distance_angstrom) + " A (" +
                fx.mapping + ", " + fx.basis + ")";
  validate_sum(fx.sum);
  if (check_exact) {
    const double ground = exact_diagonalize(fx.sum).ground_energy;
    if (std::abs(ground - fx.exact_energy) > 1e-8)
      throw InputError("fixture " + path +
                       ": embedded exact_energy disagrees with "
                       "diagonalization by " +
                       fmt_g(std::abs(ground - fx.exact_energy)));
  }
  return fx;
}

// ------------------------------------------------------------ circuit text
inline std::string gate_name(GateKind k) {
  switch (k) {
    case GateKind::X: return "X";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdag: return "SDAG";
    case GateKind::Rx: return "RX";
    case GateKind::Ry: return "RY";
    case GateKind::Rz: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::MCZ: return "MCZ";
  }
  throw InputError("unknown gate kind");
}

inline bool gate_has_angle(GateKind k) {
  return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz;
}

inline GateKind gate_kind_from(const std::string& name) {
  static const std::map<std::string, GateKind> table = {
      {"X", GateKind::X},       {"H", GateKind::H},
      {"S", GateKind::S},       {"SDAG", GateKind::Sdag},
      {"RX", GateKind::Rx},     {"RY", GateKind::Ry},
      {"RZ", GateKind::Rz},     {"CNOT", GateKind::CNOT},
      {"CZ", GateKind::CZ},     {"MCZ", GateKind::MCZ}};
  const auto it = table.find(name);
  if (it == table.end()) throw InputError("unknown gate name: " + name);
  return it->second;
}

inline std::string circuit_to_text(const Circuit& c) {
  std::ostringstream out;
  out << "# qubits: " << c.n_qubits << ", convention: big-endian\n";
  if (!c.label.empty()) out << "# label: " << c.label << "\n";
  for (const Gate& g : c.gates) {
    out << gate_name(g.kind) << " ";
    for (std::size_t i = 0; i < g.qubits.size(); ++i) {
      if (i) out << ",";
      out << g.qubits[i];
    }
    if (gate_has_angle(g.kind)) out << " " << fmt_g(g.angle, 17);
    out << "\n";
  }
  return out.str();
}

inline Circuit circuit_from_text(const std::string& text) {
  Circuit c;
  c.n_qubits = -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto qpos = line.find("qubits:");
      if (qpos != std::string::npos)
        c.n_qubits = std::stoi(line.substr(qpos + 7));
      const auto lpos = line.find("label:");
      if (lpos != std::string::npos) {
        std::size_t s = lpos + 6;
        while (s < line.size() && line[s] == ' ') ++s;
        c.label = line.substr(s);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string name, qubits, angle;
    ls >> name >> qubits;
    if (name.empty() || qubits.empty())
      throw InputError("malformed gate line: " + line);
    Gate g;
    g.kind = gate_kind_from(name);
    std::istringstream qs(qubits);
    std::string tok;
    while (std::getline(qs, tok, ',')) {
      try {
        g.qubits.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw InputError("malformed qubit list: " + line);
      }
    }
    if (ls >> angle) {
      if (!gate_has_angle(g.kind))
        throw InputError("unexpected angle on " + name + ": " + line);
      g.angle = std::stod(angle);
    } else if (gate_has_angle(g.kind)) {
      throw InputError("missing angle on " + name + ": " + line);
    }
    c.gates.push_back(std::move(g));
  }
  if (c.n_qubits < 1)
    throw InputError("circuit text missing '# qubits: N' header");
  for (const Gate& g : c.gates) validate_gate(g, c.n_qubits);
  return c;
}

// ------------------------------------------------------------ recipe JSON
// Purity recipe: computational part (invariant states, weight +1 on the
// plain computational measurement) and the signed projection part.
inline nlohmann::json s2_recipe_json(const ReconstructionRecipe& r) {
  nlohmann::json comp = nlohmann::json::object();
  for (std::size_t x : r.computational_part) comp[bitstring(x, 2 * r.n)] = 1.0;
  nlohmann::json proj = nlohmann::json::object();
  for (std::size_t y = 0; y < r.signed_part.size(); ++y)
    if (r.signed_part[y] != 0)
      proj[bitstring(y, 2 * r.n)] = static_cast<double>(r.signed_part[y]);
  return {{"computational", comp}, {"projection", proj}};
}

inline nlohmann::json full_sum_recipe_json(int n) {
  const auto coeff = full_sum_coefficients(n);
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t y = 0; y < coeff.size(); ++y)
    out[bitstring(y, 2 * n)] = coeff[y];
  return out;
}

// Mask-plan recipe: outcome -> swap eigenvalue of the orbit eigenvector that
// outcome measures (+1 for the symmetric slot, -1 for the antisymmetric one).
inline nlohmann::json mask_recipe_json(int n, std::uint32_t mask) {
  const int s0 = mask_support(n, mask).front();
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t a = 0; a < dim_of(n); ++a) {
    if (bit_at(a, n, s0)) continue;
    const std::size_t u = (a << n) | (a ^ mask);
    out[bitstring(mask_outcome_encode(n, mask, u, +1), 2 * n)] = 1.0;
    out[bitstring(mask_outcome_encode(n, mask, u, -1), 2 * n)] = -1.0;
  }
  return out;
}

// ----------------------------------------------------------------- CSV
class CsvDocument {
 public:
  void meta(const std::string& key, const std::string& value) {
    meta_.emplace_back(key, value);
  }
  void header(const std::vector<std::string>& cols) { header_ = cols; }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
      throw InputError("CSV row width mismatch");
    rows_.push_back(cells);
  }
  std::string str() const {
    std::ostringstream out;
    for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < header_.size(); ++i)
      out << (i ? "," : "") << header_[i];
    out << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\n";
    }
    return out.str();
  }
  void save(const std::string& path) const { write_text_file(path, str()); }

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- config
struct ExperimentConfig {
  std::string experiment;
  std::vector<std::string> fixtures;
  bool has_ansatz = false;
  AnsatzSpec ansatz;
  std::vector<double> lambda_grid;
  bool has_lambda_grid = false;
  double lambda = 0.0;
  std::vector<double> distances;  // optional dissociation filter
  bool has_distances = false;
  long long shots = -1;           // -1 = exact probabilities
  long long repetitions = 100;
  std::uint64_t seed = 1234;
  std::string method = "vd";  // raw | vd | bgate-hybrid
  std::string output_dir;
  bool svg = false;
  int restarts = 12;
  long long maxiter = 4000;
  int grid_points = 51;
};

namespace detail {

inline AnsatzSpec parse_ansatz(const nlohmann::json& j) {
  AnsatzSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      const std::string k = value.get<std::string>();
      if (k == "reduced-ucc-2q")
        s.kind = AnsatzKind::ReducedUcc2;
      else if (k == "hardware-efficient")
        s.kind = AnsatzKind::HardwareEfficient;
      else
        throw InputError("unknown ansatz kind: " + k);
    } else if (key == "n_qubits") {
      s.n_qubits = value.get<int>();
    } else if (key == "layers") {
      s.layers = value.get<int>();
    } else if (key == "initial_state") {
      s.initial_state = value.get<std::string>();
    } else {
      throw InputError("unknown ansatz key: " + key);
    }
  }
  return s;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (!j.contains("experiment"))
    throw InputError("config missing 'experiment'");
  cfg.experiment = j.at("experiment").get<std::string>();
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"compile", {"fixture", "fixtures", "output_dir"}},
      {"depol-sweep",
       {"fixture", "fixtures", "ansatz", "lambda_grid", "shots", "seed",
        "method", "output_dir", "svg", "restarts", "maxiter", "grid_points"}},
      {"dissociation",
       {"fixture", "fixtures", "distances", "lambda", "shots", "seed",
        "method", "output_dir", "svg", "restarts", "maxiter", "grid_points"}},
      {"shot-noise",
       {"fixture", "fixtures", "shots", "repetitions", "seed", "output_dir",
        "restarts", "maxiter", "grid_points", "method"}},
      {"vqe",
       {"fixture", "fixtures", "ansatz", "lambda", "seed", "restarts",
        "maxiter", "grid_points", "output_dir"}}};
  const auto ait = allowed.find(cfg.experiment);
  if (ait == allowed.end())
    throw InputError("unknown experiment: " + cfg.experiment);
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    bool ok = false;
    for (const std::string& k : ait->second) ok = ok || k == key;
    if (!ok)
      throw InputError("unknown config key for " + cfg.experiment + ": " +
                       key);
    if (key == "fixture") {
      cfg.fixtures.push_back(value.get<std::string>());
    } else if (key == "fixtures") {
      for (const auto& f : value)
        cfg.fixtures.push_back(f.get<std::string>());
    } else if (key == "ansatz") {
      cfg.ansatz = detail::parse_ansatz(value);
      cfg.has_ansatz = true;
    } else if (key == "lambda_grid") {
      cfg.lambda_grid = value.get<std::vector<double>>();
      cfg.has_lambda_grid = true;
    } else if (key == "lambda") {
      cfg.lambda = value.get<double>();
    } else if (key == "distances") {
      cfg.distances = value.get<std::vector<double>>();
      cfg.has_distances = true;
    } else if (key == "shots") {
      if (value.is_string()) {
        if (value.get<std::string>() != "exact")
          throw InputError("shots must be a positive integer or \"exact\"");
        cfg.shots = -1;
      } else {
        cfg.shots = value.get<long long>();
        if (cfg.shots < 1)
          throw InputError("shots must be a positive integer or \"exact\"");
      }
    } else if (key == "repetitions") {
      cfg.repetitions = value.get<long long>();
      if (cfg.repetitions < 1) throw InputError("repetitions must be >= 1");
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "method") {
      cfg.method = value.get<std::string>();
      if (cfg.method != "raw" && cfg.method != "vd" &&
          cfg.method != "bgate-hybrid")
        throw InputError("unknown method: " + cfg.method);
    } else if (key == "output_dir") {
      cfg.output_dir = value.get<std::string>();
    } else if (key == "svg") {
      cfg.svg = value.get<bool>();
    } else if (key == "restarts") {
      cfg.restarts = value.get<int>();
      if (cfg.restarts < 1) throw InputError("restarts must be >= 1");
    } else if (key == "maxiter") {
      cfg.maxiter = value.get<long long>();
    } else if (key == "grid_points") {
      cfg.grid_points = value.get<int>();
      if (cfg.grid_points < 2) throw InputError("grid_points must be >= 2");
    }
  }
  if (cfg.fixtures.empty() && cfg.experiment != "dissociation")
    throw InputError("config missing 'fixture'");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

// ------------------------------------------------------------------ SVG
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// Minimal standalone line plot; presentational only.
inline std::string svg_line_plot(const std::vector<PlotSeries>& series,
                                 const std::string& title,
                                 const std::string& xlabel,
                                 const std::string& ylabel) {
  const double W = 640, Hh = 440, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;
  auto px = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double v) {
    return Hh - mb - (v - ymin) / (ymax - ymin) * (Hh - mt - mb);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W << " " << Hh
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title
      << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << Hh - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << Hh - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << Hh - mb << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << Hh - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_g(xv, 4) << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_g(yv, 4) << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << Hh - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << Hh / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << Hh / 2 << ")\">" << ylabel << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 4];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 16 * ci
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\""
        << " fill=\"" << color << "\">" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace vd
