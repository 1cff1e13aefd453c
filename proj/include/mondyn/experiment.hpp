#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mondyn/hamiltonian.hpp"
#include "mondyn/theory.hpp"

namespace mondyn {

enum class Method { kEnumerate, kSample };

std::string method_name(Method m);

// Full description of one experiment: model, protocol, sweep grids and output
// selection. Parsed from a flat key = value config file with [sections], or
// produced by a named preset; command-line flags override individual fields.
struct ExperimentConfig {
  CouplingSpec model;

  double total_time = 15.0;
  double prune_threshold = 1e-10;
  std::size_t branch_cap = 2'000'000;

  std::vector<int> n_list;
  std::vector<int> k_list{1};

  Method method = Method::kEnumerate;
  int samples = 3000;
  std::uint64_t seed = 17;
  double r = 0.1;
  std::string out_dir = "out";
  std::vector<std::string> emit{"frame_potential", "theory"};

  double revival_t_max = 10.0;
  int revival_points = 2001;
  std::vector<double> derivation_dt_list;  // empty selects the default sweep

  std::string label = "custom";

  bool emits(const std::string& what) const;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

// fig2a, fig2b, fig2c, fig3, fig3int, fig4a, fig4b, fig4c, fig6.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct Diagnostic {
  enum class Severity { kNote, kWarning, kError };
  Severity severity = Severity::kNote;
  std::string message;
};

// Static feasibility and consistency checks; run() refuses configs that
// produce any kError entry.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

struct SweepRow {
  int n = 0;
  int k = 1;
  double delta_t = 0.0;
  double f_value = 0.0;
  double f_err = 0.0;
  double truncated_mass = 0.0;
  double theory_expected = 0.0;      // K=1 expected curve; K>=2 decaying bound
  double theory_expected_alt = 0.0;  // K>=2 only: saturating-tail variant (else NaN)
  double theory_zeno = 0.0;
  double haar = 0.0;
  std::string method = "exact";
  int samples = 0;
};

struct ClassificationReport {
  std::string variant;
  int alpha = 1;
  std::optional<bool> integrable;  // ising only
  double c_low_haar = 0.0;
  double c_low_evolved = 0.0;
  std::optional<double> c_alpha3_k1;
  double c_used = 0.0;  // alpha-matched coefficient feeding the thresholds
};

struct RunArtifacts {
  std::vector<SweepRow> rows;
  ClassificationReport classification;
  double saturation_cycles = 0.0;
  std::optional<double> zeno_onset_cycles;
  std::optional<double> crossover_cycles;
  std::optional<double> threshold_time;
  std::optional<int> f1_argmin_n;
  std::optional<double> f1_min;
  std::optional<double> first_revival_time;
  std::filesystem::path rows_path;
  std::filesystem::path summary_path;
  std::filesystem::path revival_path;     // empty unless revival was emitted
  std::filesystem::path derivation_path;  // empty unless the check was emitted
};

// Runs the configured sweep and writes rows.csv plus summary.json (and
// revival.csv / derivation.csv when selected) under cfg.out_dir. Identical
// config and seed give byte-identical rows.csv.
RunArtifacts run(const ExperimentConfig& cfg);

// Theory curves and thresholds only; writes theory.csv and summary.json.
RunArtifacts theory_only(const ExperimentConfig& cfg);

ClassificationReport classify(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "mondyn 0.1.0";

}  // namespace mondyn
