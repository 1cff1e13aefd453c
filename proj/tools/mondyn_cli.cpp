// Command-line front end: presets or config files in, CSV/JSON artifacts out.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mondyn/errors.hpp"
#include "mondyn/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> method;
  std::optional<int> samples;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  auto* config = cmd->add_option("-c,--config", args.config_path,
                                 "experiment config file (key = value sections)");
  auto* preset = cmd->add_option("-p,--preset", args.preset_name,
                                 "named preset configuration");
  preset->check(CLI::IsMember(mondyn::preset_names()));
  config->excludes(preset);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.seed = v; }, "base RNG seed");
  cmd->add_option_function<std::string>(
      "--out", [&args](const std::string& v) { args.out_dir = v; }, "output directory");
  cmd->add_option_function<std::string>(
          "--method", [&args](const std::string& v) { args.method = v; },
          "ensemble construction method")
      ->check(CLI::IsMember({"enumerate", "sample"}));
  cmd->add_option_function<int>(
      "--samples", [&args](int v) { args.samples = v; },
      "trajectories per cycle count in sample mode");
}

mondyn::ExperimentConfig load_config(const CommonArgs& args) {
  mondyn::ExperimentConfig cfg;
  if (!args.preset_name.empty()) {
    cfg = mondyn::preset(args.preset_name);
  } else if (!args.config_path.empty()) {
    cfg = mondyn::parse_config_file(args.config_path);
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.method) {
    cfg.method = *args.method == "sample" ? mondyn::Method::kSample
                                          : mondyn::Method::kEnumerate;
  }
  if (args.samples) cfg.samples = *args.samples;
  return cfg;
}

void print_classification(const mondyn::ClassificationReport& cls) {
  std::printf("model            %s\n", cls.variant.c_str());
  std::printf("alpha            %d\n", cls.alpha);
  if (cls.integrable) {
    std::printf("integrable       %s\n", *cls.integrable ? "yes" : "no");
  }
  std::printf("c_low (haar)     %.6g\n", cls.c_low_haar);
  std::printf("c_low (evolved)  %.6g\n", cls.c_low_evolved);
  if (cls.c_alpha3_k1) {
    std::printf("c_high (K=1)     %.6g\n", *cls.c_alpha3_k1);
  }
  std::printf("c_used           %.6g\n", cls.c_used);
}

void print_thresholds(const mondyn::RunArtifacts& artifacts) {
  std::printf("saturation cycles  %.6g\n", artifacts.saturation_cycles);
  auto line = [](const char* name, const std::optional<double>& v) {
    if (v) {
      std::printf("%s  %.6g\n", name, *v);
    } else {
      std::printf("%s  undefined (vanishing decay coefficient)\n", name);
    }
  };
  line("zeno onset cycles ", artifacts.zeno_onset_cycles);
  line("crossover cycles  ", artifacts.crossover_cycles);
  line("threshold time    ", artifacts.threshold_time);
}

int dispatch(const std::string& command, const CommonArgs& args) {
  mondyn::ExperimentConfig cfg = load_config(args);

  if (command == "validate") {
    int errors = 0;
    for (const mondyn::Diagnostic& d : mondyn::validate(cfg)) {
      const char* tag = "note";
      if (d.severity == mondyn::Diagnostic::Severity::kWarning) tag = "warning";
      if (d.severity == mondyn::Diagnostic::Severity::kError) {
        tag = "error";
        ++errors;
      }
      std::printf("%s: %s\n", tag, d.message.c_str());
    }
    std::printf("%d error(s)\n", errors);
    return errors == 0 ? 0 : 1;
  }

  if (command == "classify") {
    print_classification(mondyn::classify(cfg));
    return 0;
  }

  if (command == "theory") {
    const mondyn::RunArtifacts artifacts = mondyn::theory_only(cfg);
    print_classification(artifacts.classification);
    print_thresholds(artifacts);
    std::printf("wrote %s\n", artifacts.rows_path.string().c_str());
    std::printf("wrote %s\n", artifacts.summary_path.string().c_str());
    return 0;
  }

  if (command == "revival") {
    cfg.emit = {"revival"};
    const mondyn::RunArtifacts artifacts = mondyn::run(cfg);
    if (artifacts.first_revival_time) {
      std::printf("first revival at t = %.6g\n", *artifacts.first_revival_time);
    } else {
      std::printf("no revival found up to t = %.6g\n", cfg.revival_t_max);
    }
    std::printf("wrote %s\n", artifacts.revival_path.string().c_str());
    std::printf("wrote %s\n", artifacts.summary_path.string().c_str());
    return 0;
  }

  if (command == "check-derivation") {
    cfg.emit = {"derivation_check"};
    const mondyn::RunArtifacts artifacts = mondyn::run(cfg);
    std::printf("wrote %s\n", artifacts.derivation_path.string().c_str());
    std::printf("wrote %s\n", artifacts.summary_path.string().c_str());
    return 0;
  }

  // run
  const mondyn::RunArtifacts artifacts = mondyn::run(cfg);
  print_classification(artifacts.classification);
  print_thresholds(artifacts);
  if (artifacts.f1_argmin_n) {
    std::printf("K=1 minimum %.6g at n = %d\n", *artifacts.f1_min, *artifacts.f1_argmin_n);
  }
  std::printf("%zu sweep rows\n", artifacts.rows.size());
  std::printf("wrote %s\n", artifacts.rows_path.string().c_str());
  std::printf("wrote %s\n", artifacts.summary_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monitored-dynamics simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(mondyn::kVersion));
  app.require_subcommand(1);

  CommonArgs args;
  const char* descriptions[][2] = {
      {"run", "run a sweep and write rows.csv + summary.json"},
      {"theory", "write analytic curves and thresholds only"},
      {"validate", "check a config and report diagnostics"},
      {"revival", "trace the unmonitored return probability"},
      {"classify", "report decay class and coefficients"},
      {"check-derivation", "verify small-step error scaling"},
  };
  for (const auto& d : descriptions) {
    add_common(app.add_subcommand(d[0], d[1]), args);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, args);
  } catch (const mondyn::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 2;
  } catch (const mondyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
