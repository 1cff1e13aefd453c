#include "mondyn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mondyn/errors.hpp"
#include "mondyn/frame_potential.hpp"
#include "mondyn/monitored_protocol.hpp"
#include "mondyn/propagator.hpp"
#include "mondyn/rng.hpp"

namespace mondyn {

namespace {

using nlohmann::json;

constexpr int kMaxTotalQubits = 14;      // dense joint-space pipeline
constexpr int kFullTreeBits = 15;        // enumerate whole trees up to 2^15 leaves
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

const std::set<std::string> kEmitKinds = {"frame_potential", "theory", "revival",
                                          "classify", "derivation_check"};

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& origin, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    fail(origin, line, "expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& origin, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    fail(origin, line, "expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& origin, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    fail(origin, line, "expected an unsigned integer, got '" + value + "'");
  }
}

// Comma-separated integers, where each item may be a:b or a:b:step.
std::vector<int> parse_int_list(const std::string& origin, int line, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) fail(origin, line, "empty list item");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(static_cast<int>(parse_int(origin, line, parts[0])));
    } else if (parts.size() == 2 || parts.size() == 3) {
      const int a = static_cast<int>(parse_int(origin, line, parts[0]));
      const int b = static_cast<int>(parse_int(origin, line, parts[1]));
      const int step =
          parts.size() == 3 ? static_cast<int>(parse_int(origin, line, parts[2])) : 1;
      if (step < 1) fail(origin, line, "range step must be positive");
      if (b < a) fail(origin, line, "descending range " + item);
      for (int v = a; v <= b; v += step) out.push_back(v);
    } else {
      fail(origin, line, "cannot parse range '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& origin, int line,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) fail(origin, line, "empty list item");
    out.push_back(parse_double(origin, line, item));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void apply_key(ExperimentConfig& cfg, const std::string& origin, int line,
               const std::string& section, const std::string& key, const std::string& value) {
  auto unknown = [&]() { fail(origin, line, "unknown key '" + key + "' in [" + section + "]"); };
  if (section == "model") {
    if (key == "variant") {
      try {
        cfg.model.variant = variant_from_name(value);
      } catch (const std::invalid_argument& e) {
        fail(origin, line, e.what());
      }
    } else if (key == "n_s") {
      cfg.model.n_s = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "n_b") {
      cfg.model.n_b = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "j_x") {
      cfg.model.j_x = parse_double(origin, line, value);
    } else if (key == "j_z") {
      cfg.model.j_z = parse_double(origin, line, value);
    } else if (key == "j_zz") {
      cfg.model.j_zz = parse_double(origin, line, value);
    } else if (key == "j_yy") {
      cfg.model.j_yy = parse_double(origin, line, value);
    } else if (key == "j_xxx") {
      cfg.model.j_xxx = parse_double(origin, line, value);
    } else {
      unknown();
    }
  } else if (section == "protocol") {
    if (key == "total_time") {
      cfg.total_time = parse_double(origin, line, value);
    } else if (key == "prune_threshold") {
      cfg.prune_threshold = parse_double(origin, line, value);
    } else if (key == "branch_cap") {
      cfg.branch_cap = static_cast<std::size_t>(parse_u64(origin, line, value));
    } else {
      unknown();
    }
  } else if (section == "sweep") {
    if (key == "n_list") {
      cfg.n_list = parse_int_list(origin, line, value);
    } else if (key == "k_list") {
      cfg.k_list = parse_int_list(origin, line, value);
    } else {
      unknown();
    }
  } else if (section == "run") {
    if (key == "method") {
      if (value == "enumerate") {
        cfg.method = Method::kEnumerate;
      } else if (value == "sample") {
        cfg.method = Method::kSample;
      } else {
        fail(origin, line, "method must be enumerate or sample");
      }
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(parse_int(origin, line, value));
    } else if (key == "seed") {
      cfg.seed = parse_u64(origin, line, value);
    } else if (key == "r") {
      cfg.r = parse_double(origin, line, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "emit") {
      cfg.emit.clear();
      for (const std::string& kind : split(value, ',')) {
        if (!kEmitKinds.count(kind)) fail(origin, line, "unknown emit kind '" + kind + "'");
        cfg.emit.push_back(kind);
      }
    } else {
      unknown();
    }
  } else if (section == "revival") {
    if (key == "t_max") {
      cfg.revival_t_max = parse_double(origin, line, value);
    } else if (key == "points") {
      cfg.revival_points = static_cast<int>(parse_int(origin, line, value));
    } else {
      unknown();
    }
  } else if (section == "derivation") {
    if (key == "dt_list") {
      cfg.derivation_dt_list = parse_double_list(origin, line, value);
    } else {
      unknown();
    }
  } else {
    fail(origin, line, "unknown section [" + section + "]");
  }
}

// Builds the fully shifted and split operator set used everywhere downstream.
HamiltonianSet prepared_hamiltonian(const ExperimentConfig& cfg) {
  HamiltonianSet hs = build(cfg.model);
  mean_field_shift(hs, zero_state(cfg.model.n_b));
  bath_split(hs);
  return hs;
}

ClassificationReport classify_prepared(const HamiltonianSet& hs,
                                       const ExperimentConfig& cfg) {
  ClassificationReport report;
  report.variant = variant_name(cfg.model.variant);
  report.alpha = classify_alpha(hs);
  if (cfg.model.variant == Variant::kIsing) {
    report.integrable = is_integrable(cfg.model);
  }
  report.c_low_haar =
      theory::decay_coefficient_alpha1(hs, theory::CoefficientAveraging::kHaar).value;
  report.c_low_evolved =
      theory::decay_coefficient_alpha1(hs, theory::CoefficientAveraging::kEvolved).value;
  if (report.alpha == 3) {
    report.c_alpha3_k1 = theory::decay_coefficient_alpha3(hs, 1);
    report.c_used = *report.c_alpha3_k1;
  } else {
    report.c_used = report.c_low_haar;
  }
  return report;
}

struct Thresholds {
  double saturation = 0.0;
  std::optional<double> zeno_onset;
  std::optional<double> crossover;
  std::optional<double> threshold_time;
};

Thresholds compute_thresholds(const ExperimentConfig& cfg, const ClassificationReport& cls) {
  Thresholds out;
  out.saturation = theory::saturation_cycles(cfg.model.n_s, cfg.model.n_b, cfg.r);
  try {
    out.zeno_onset =
        theory::zeno_onset_cycles(cfg.total_time, cfg.model.n_s, cls.alpha, cls.c_used);
    out.crossover =
        theory::crossover_cycles(cfg.total_time, cfg.model.n_b, cls.alpha, cls.c_used);
    out.threshold_time =
        theory::threshold_time(cfg.model.n_s, cfg.model.n_b, cfg.r, cls.alpha, cls.c_used);
  } catch (const UndefinedThresholdError&) {
    // Vanishing coefficient: leave the optional thresholds empty.
  }
  return out;
}

json config_echo(const ExperimentConfig& cfg) {
  json model = {
      {"variant", variant_name(cfg.model.variant)}, {"n_s", cfg.model.n_s},
      {"n_b", cfg.model.n_b},                       {"j_x", cfg.model.j_x},
      {"j_z", cfg.model.j_z},                       {"j_zz", cfg.model.j_zz},
      {"j_yy", cfg.model.j_yy},                     {"j_xxx", cfg.model.j_xxx},
  };
  json out = {
      {"label", cfg.label},
      {"model", model},
      {"protocol",
       {{"total_time", cfg.total_time},
        {"prune_threshold", cfg.prune_threshold},
        {"branch_cap", cfg.branch_cap}}},
      {"sweep", {{"n_list", cfg.n_list}, {"k_list", cfg.k_list}}},
      {"run",
       {{"method", method_name(cfg.method)},
        {"samples", cfg.samples},
        {"seed", cfg.seed},
        {"r", cfg.r},
        {"out_dir", cfg.out_dir},
        {"emit", cfg.emit}}},
  };
  if (cfg.emits("revival")) {
    out["revival"] = {{"t_max", cfg.revival_t_max}, {"points", cfg.revival_points}};
  }
  if (cfg.emits("derivation_check") && !cfg.derivation_dt_list.empty()) {
    out["derivation"] = {{"dt_list", cfg.derivation_dt_list}};
  }
  return out;
}

json optional_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string rows_csv_header() {
  std::string text = "# schema mondyn.rows.v1\n";
  text +=
      "n,k,delta_t,f,f_err,truncated_mass,theory_expected,theory_expected_alt,"
      "theory_zeno,haar,method,samples,seed\n";
  return text;
}

}  // namespace

std::string method_name(Method m) {
  return m == Method::kEnumerate ? "enumerate" : "sample";
}

bool ExperimentConfig::emits(const std::string& what) const {
  return std::find(emit.begin(), emit.end(), what) != emit.end();
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.label = origin;
  std::stringstream stream(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail(origin, line, "unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) fail(origin, line, "empty section name");
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(origin, line, "empty key");
    if (section.empty()) fail(origin, line, "key outside of any [section]");
    apply_key(cfg, origin, line, section, key, value);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig2c", "fig3", "fig3int", "fig4a", "fig4b", "fig4c", "fig6"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.label = name;
  cfg.out_dir = "out/" + name;
  auto range = [](int a, int b) {
    std::vector<int> out;
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  };
  // Roughly half-octave spacing through the Zeno crossover.
  const std::vector<int> zeno_grid = {8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256, 362, 512};

  if (name == "fig2a") {
    cfg.model = CouplingSpec{.n_s = 5, .n_b = 3};
    cfg.total_time = 15.0;
    cfg.n_list = range(1, 40);
  } else if (name == "fig2b") {
    cfg.model = CouplingSpec{.n_s = 7, .n_b = 1};
    cfg.total_time = 15.0;
    cfg.n_list = range(1, 60);
  } else if (name == "fig2c") {
    cfg.model = CouplingSpec{.n_s = 7, .n_b = 1};
    cfg.total_time = 5.0;
    cfg.n_list = range(1, 60);
  } else if (name == "fig3" || name == "fig3int") {
    cfg.model = CouplingSpec{.n_s = 7, .n_b = 1};
    if (name == "fig3int") cfg.model.j_z = 0.0;
    cfg.total_time = 15.0;
    cfg.n_list = range(1, 40);
    cfg.k_list = {1, 3, 10};
    cfg.method = Method::kSample;
    cfg.samples = 3000;
  } else if (name == "fig4a" || name == "fig4b" || name == "fig4c") {
    cfg.model = CouplingSpec{.n_s = 5, .n_b = 3};
    if (name == "fig4b") cfg.model.variant = Variant::kYY;
    if (name == "fig4c") cfg.model.variant = Variant::kXXX;
    cfg.total_time = 15.0;
    cfg.n_list = zeno_grid;
  } else if (name == "fig6") {
    cfg.model = CouplingSpec{.n_s = 7, .n_b = 1};
    cfg.total_time = 15.0;
    cfg.emit = {"revival"};
    cfg.revival_t_max = 10.0;
    cfg.revival_points = 2001;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return cfg;
}

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& m) {
    out.push_back({Diagnostic::Severity::kError, m});
  };
  auto warning = [&](const std::string& m) {
    out.push_back({Diagnostic::Severity::kWarning, m});
  };
  auto note = [&](const std::string& m) {
    out.push_back({Diagnostic::Severity::kNote, m});
  };

  if (cfg.model.n_s < 1) error("model: need at least one system qubit");
  if (cfg.model.n_b < 1) error("model: need at least one bath qubit");
  if (cfg.model.total_sites() > kMaxTotalQubits) {
    error("model: dense pipeline capped at " + std::to_string(kMaxTotalQubits) +
          " qubits total");
  }
  if (!(cfg.total_time > 0.0) || !std::isfinite(cfg.total_time)) {
    error("protocol: total_time must be positive and finite");
  }
  if (!(cfg.prune_threshold >= 0.0) || cfg.prune_threshold >= 1.0) {
    error("protocol: prune_threshold must lie in [0, 1)");
  }
  if (cfg.branch_cap < 2) error("protocol: branch_cap too small");
  if (!(cfg.r > 0.0) || cfg.r > 1.0) error("run: r must lie in (0, 1]");

  for (const std::string& kind : cfg.emit) {
    if (!kEmitKinds.count(kind)) error("run: unknown emit kind '" + kind + "'");
  }

  const bool sweeps = cfg.emits("frame_potential");
  if (sweeps) {
    if (cfg.n_list.empty()) error("sweep: n_list is empty");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      if (cfg.n_list[i] < 1) {
        error("sweep: cycle counts must be positive");
        break;
      }
      if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) {
        error("sweep: n_list must be strictly increasing");
        break;
      }
    }
    if (cfg.k_list.empty()) error("sweep: k_list is empty");
    for (int k : cfg.k_list) {
      if (k < 1 || k > 64) {
        error("sweep: K values must lie in [1, 64]");
        break;
      }
    }
    if (cfg.method == Method::kSample && cfg.samples < 2) {
      error("run: sampling needs at least 2 samples");
    }
    if (cfg.method == Method::kSample && cfg.samples < 100) {
      warning("run: fewer than 100 samples; jackknife errors will be unreliable");
    }
    if (cfg.method == Method::kEnumerate && !cfg.n_list.empty()) {
      const bool higher_k =
          std::any_of(cfg.k_list.begin(), cfg.k_list.end(), [](int k) { return k >= 2; });
      const long long bits =
          static_cast<long long>(cfg.n_list.back()) * cfg.model.n_b;
      if (higher_k && bits > kFullTreeBits) {
        warning("sweep: K >= 2 rows at n = " + std::to_string(cfg.n_list.back()) +
                " enumerate up to 2^" + std::to_string(bits) +
                " records; expect the branch cap unless pruning bites, or use method=sample");
      }
    }
    if (cfg.prune_threshold > 1e-6) {
      warning("protocol: prune_threshold above 1e-6; the pruning bias bound " \
              "2*truncated_mass may dominate small frame potentials");
    }
    const bool only_k1 =
        std::all_of(cfg.k_list.begin(), cfg.k_list.end(), [](int k) { return k == 1; });
    if (only_k1) {
      note("theory: analytic lower-bound columns apply to K >= 2 only; " \
           "K = 1 rows carry the expected decay curve");
    }
  }
  if (cfg.emits("revival")) {
    if (cfg.revival_points < 3) error("revival: need at least 3 grid points");
    if (!(cfg.revival_t_max > 0.0)) error("revival: t_max must be positive");
  }
  if (cfg.emits("derivation_check") && cfg.model.total_sites() > 6) {
    error("derivation_check: instance capped at 6 qubits total");
  }
  note("all times are dimensionless (hbar = 1, couplings of order one)");
  return out;
}

ClassificationReport classify(const ExperimentConfig& cfg) {
  const HamiltonianSet hs = prepared_hamiltonian(cfg);
  return classify_prepared(hs, cfg);
}

namespace {

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::optional<int> f1_argmin_n;
  std::optional<double> f1_min;
};

SweepOutput run_sweep(const ExperimentConfig& cfg, const HamiltonianSet& hs,
                      const ClassificationReport& cls) {
  SweepOutput out;
  const Spectral spectral = hermitian_eig(hs.h);
  const QubitPartition part = cfg.model.partition();

  // alpha = 3 coefficients depend on K; cache them per requested K.
  std::map<int, double> c_alpha3;
  if (cls.alpha == 3) {
    for (int k : cfg.k_list) {
      if (!c_alpha3.count(k)) c_alpha3[k] = theory::decay_coefficient_alpha3(hs, k);
    }
  }

  const bool needs_ensemble_for_higher_k =
      std::any_of(cfg.k_list.begin(), cfg.k_list.end(), [](int k) { return k >= 2; });

  for (int n : cfg.n_list) {
    ProtocolConfig pcfg = make_protocol(cfg.total_time, n, part);
    pcfg.prune_threshold = cfg.prune_threshold;
    pcfg.branch_cap = cfg.branch_cap;
    const Matrix u = propagator(spectral, pcfg.dt());

    std::vector<FramePotentialEstimate> estimates;
    std::string method_tag;
    if (cfg.method == Method::kSample) {
      const std::uint64_t row_seed =
          splitmix64(cfg.seed + static_cast<std::uint64_t>(n) * kGolden);
      const Ensemble ensemble = sample_ensemble(u, pcfg, cfg.samples, row_seed);
      estimates = sampled_frame_potentials(ensemble, cfg.k_list);
      method_tag = "sampled";
    } else if (needs_ensemble_for_higher_k) {
      const Ensemble ensemble = enumerate_ensemble(u, pcfg);
      estimates = exact_frame_potentials(ensemble, cfg.k_list);
      method_tag = "exact";
    } else {
      // K = 1 only: the record-averaged state gives the same number as full
      // enumeration, exactly and in polynomial time, with no pruning bias.
      const double f1 = purity(averaged_system_state(u, pcfg));
      FramePotentialEstimate e;
      e.k = 1;
      e.value = f1;
      estimates.assign(cfg.k_list.size(), e);
      method_tag = "exact";
    }

    for (std::size_t t = 0; t < cfg.k_list.size(); ++t) {
      const int k = cfg.k_list[t];
      const FramePotentialEstimate& est = estimates[t];
      SweepRow row;
      row.n = n;
      row.k = k;
      row.delta_t = pcfg.dt();
      row.f_value = est.value;
      row.f_err = est.std_error;
      row.truncated_mass = est.truncated_mass;
      if (k == 1) {
        row.theory_expected = theory::f1_expected(part.n_s, part.n_b, n);
        row.theory_expected_alt = std::numeric_limits<double>::quiet_NaN();
      } else {
        row.theory_expected = theory::fk_lower_bound(part.n_s, part.n_b, n, k);
        row.theory_expected_alt =
            theory::fk_lower_bound_saturating(part.n_s, part.n_b, n, k);
      }
      const double c_h = cls.alpha == 3 ? c_alpha3.at(k) : cls.c_low_haar;
      row.theory_zeno = theory::zeno_lower_bound(cfg.total_time, n, cls.alpha, c_h);
      row.haar = haar_frame_potential(part.n_s, k);
      row.method = method_tag;
      row.samples = cfg.method == Method::kSample ? cfg.samples : 0;
      out.rows.push_back(row);

      if (k == 1 && (!out.f1_min || row.f_value < *out.f1_min)) {
        out.f1_min = row.f_value;
        out.f1_argmin_n = n;
      }
    }
  }
  return out;
}

}  // namespace

RunArtifacts run(const ExperimentConfig& cfg) {
  std::string errors;
  for (const Diagnostic& d : validate(cfg)) {
    if (d.severity == Diagnostic::Severity::kError) {
      if (!errors.empty()) errors += "; ";
      errors += d.message;
    }
  }
  if (!errors.empty()) throw ConfigError(errors);

  const HamiltonianSet hs = prepared_hamiltonian(cfg);
  const ClassificationReport cls = classify_prepared(hs, cfg);
  const Thresholds thresholds = compute_thresholds(cfg, cls);

  RunArtifacts artifacts;
  artifacts.classification = cls;
  artifacts.saturation_cycles = thresholds.saturation;
  artifacts.zeno_onset_cycles = thresholds.zeno_onset;
  artifacts.crossover_cycles = thresholds.crossover;
  artifacts.threshold_time = thresholds.threshold_time;

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path base(cfg.out_dir);

  double truncated_max = 0.0;
  if (cfg.emits("frame_potential")) {
    SweepOutput sweep = run_sweep(cfg, hs, cls);
    artifacts.rows = std::move(sweep.rows);
    artifacts.f1_argmin_n = sweep.f1_argmin_n;
    artifacts.f1_min = sweep.f1_min;

    std::string text = rows_csv_header();
    for (const SweepRow& row : artifacts.rows) {
      truncated_max = std::max(truncated_max, row.truncated_mass);
      text += std::to_string(row.n) + "," + std::to_string(row.k) + "," +
              format_double(row.delta_t) + "," + format_double(row.f_value) + "," +
              format_double(row.f_err) + "," + format_double(row.truncated_mass) + "," +
              format_double(row.theory_expected) + "," +
              format_double(row.theory_expected_alt) + "," +
              format_double(row.theory_zeno) + "," + format_double(row.haar) + "," +
              row.method + "," + std::to_string(row.samples) + "," +
              std::to_string(cfg.seed) + "\n";
    }
    artifacts.rows_path = base / "rows.csv";
    write_text_file(artifacts.rows_path, text);
  }

  if (cfg.emits("revival")) {
    std::vector<double> times(static_cast<std::size_t>(cfg.revival_points));
    for (int j = 0; j < cfg.revival_points; ++j) {
      times[static_cast<std::size_t>(j)] =
          cfg.revival_t_max * static_cast<double>(j) / (cfg.revival_points - 1.0);
    }
    const StateVector psi0 = zero_state(cfg.model.total_sites());
    const RevivalCurve curve = revival_curve(hs, psi0, times);
    artifacts.first_revival_time = curve.first_revival_time;

    std::string text = "# schema mondyn.revival.v1\nt,xi\n";
    for (const auto& [t, xi] : curve.points) {
      text += format_double(t) + "," + format_double(xi) + "\n";
    }
    artifacts.revival_path = base / "revival.csv";
    write_text_file(artifacts.revival_path, text);
  }

  std::optional<theory::StepErrorReport> derivation;
  if (cfg.emits("derivation_check")) {
    derivation = theory::step_error_scaling(hs, cfg.derivation_dt_list);
    std::string text = "# schema mondyn.derivation.v1\ndt,trotter_err,pm_exact,pm_perturbative\n";
    for (const auto& row : derivation->rows) {
      text += format_double(row.dt) + "," + format_double(row.split_error) + "," +
              format_double(row.leak_exact) + "," + format_double(row.leak_perturbative) +
              "\n";
    }
    artifacts.derivation_path = base / "derivation.csv";
    write_text_file(artifacts.derivation_path, text);
  }

  json summary = {
      {"schema", "mondyn.summary.v1"},
      {"version", kVersion},
      {"time_units", "dimensionless (hbar = 1)"},
      {"config", config_echo(cfg)},
      {"classification",
       {{"variant", cls.variant},
        {"alpha", cls.alpha},
        {"integrable", cls.integrable ? json(*cls.integrable) : json(nullptr)},
        {"c_low_haar", cls.c_low_haar},
        {"c_low_evolved", cls.c_low_evolved},
        {"c_alpha3_k1", optional_json(cls.c_alpha3_k1)},
        {"c_used", cls.c_used}}},
      {"thresholds",
       {{"saturation_cycles", thresholds.saturation},
        {"zeno_onset_cycles", optional_json(thresholds.zeno_onset)},
        {"crossover_cycles", optional_json(thresholds.crossover)},
        {"threshold_time", optional_json(thresholds.threshold_time)}}},
  };
  if (cfg.emits("frame_potential")) {
    summary["sweep"] = {
        {"rows", artifacts.rows.size()},
        {"f1_argmin_n", artifacts.f1_argmin_n ? json(*artifacts.f1_argmin_n) : json(nullptr)},
        {"f1_min", optional_json(artifacts.f1_min)},
        {"f1_floor_expected", theory::f1_floor(cfg.model.n_s, cfg.model.n_b)},
        {"truncated_mass_max", truncated_max},
    };
  }
  if (cfg.emits("revival")) {
    summary["revival"] = {
        {"first_revival_time", optional_json(artifacts.first_revival_time)},
        {"t_max", cfg.revival_t_max},
        {"points", cfg.revival_points},
    };
  }
  if (derivation) {
    summary["derivation"] = {
        {"trotter_exponent", derivation->split_exponent},
        {"leak_exponent", derivation->leak_exponent},
    };
  }
  artifacts.summary_path = base / "summary.json";
  write_text_file(artifacts.summary_path, summary.dump(2) + "\n");
  return artifacts;
}

RunArtifacts theory_only(const ExperimentConfig& cfg) {
  std::string errors;
  for (const Diagnostic& d : validate(cfg)) {
    if (d.severity == Diagnostic::Severity::kError) {
      if (!errors.empty()) errors += "; ";
      errors += d.message;
    }
  }
  if (!errors.empty()) throw ConfigError(errors);

  const HamiltonianSet hs = prepared_hamiltonian(cfg);
  const ClassificationReport cls = classify_prepared(hs, cfg);
  const Thresholds thresholds = compute_thresholds(cfg, cls);

  RunArtifacts artifacts;
  artifacts.classification = cls;
  artifacts.saturation_cycles = thresholds.saturation;
  artifacts.zeno_onset_cycles = thresholds.zeno_onset;
  artifacts.crossover_cycles = thresholds.crossover;
  artifacts.threshold_time = thresholds.threshold_time;

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path base(cfg.out_dir);

  std::map<int, double> c_alpha3;
  if (cls.alpha == 3) {
    for (int k : cfg.k_list) {
      if (!c_alpha3.count(k)) c_alpha3[k] = theory::decay_coefficient_alpha3(hs, k);
    }
  }

  std::string text = "# schema mondyn.theory.v1\n";
  text += "n,k,delta_t,theory_expected,theory_expected_alt,theory_zeno,haar\n";
  for (int n : cfg.n_list) {
    for (int k : cfg.k_list) {
      const double expected =
          k == 1 ? theory::f1_expected(cfg.model.n_s, cfg.model.n_b, n)
                 : theory::fk_lower_bound(cfg.model.n_s, cfg.model.n_b, n, k);
      const double alt =
          k == 1 ? std::numeric_limits<double>::quiet_NaN()
                 : theory::fk_lower_bound_saturating(cfg.model.n_s, cfg.model.n_b, n, k);
      const double c_h = cls.alpha == 3 ? c_alpha3.at(k) : cls.c_low_haar;
      const double zeno = theory::zeno_lower_bound(cfg.total_time, n, cls.alpha, c_h);
      text += std::to_string(n) + "," + std::to_string(k) + "," +
              format_double(cfg.total_time / n) + "," + format_double(expected) + "," +
              format_double(alt) + "," + format_double(zeno) + "," +
              format_double(haar_frame_potential(cfg.model.n_s, k)) + "\n";
    }
  }
  artifacts.rows_path = base / "theory.csv";
  write_text_file(artifacts.rows_path, text);

  json summary = {
      {"schema", "mondyn.summary.v1"},
      {"version", kVersion},
      {"time_units", "dimensionless (hbar = 1)"},
      {"config", config_echo(cfg)},
      {"classification",
       {{"variant", cls.variant},
        {"alpha", cls.alpha},
        {"integrable", cls.integrable ? json(*cls.integrable) : json(nullptr)},
        {"c_low_haar", cls.c_low_haar},
        {"c_low_evolved", cls.c_low_evolved},
        {"c_alpha3_k1", optional_json(cls.c_alpha3_k1)},
        {"c_used", cls.c_used}}},
      {"thresholds",
       {{"saturation_cycles", thresholds.saturation},
        {"zeno_onset_cycles", optional_json(thresholds.zeno_onset)},
        {"crossover_cycles", optional_json(thresholds.crossover)},
        {"threshold_time", optional_json(thresholds.threshold_time)}}},
  };
  artifacts.summary_path = base / "summary.json";
  write_text_file(artifacts.summary_path, summary.dump(2) + "\n");
  return artifacts;
}

}  // namespace mondyn
