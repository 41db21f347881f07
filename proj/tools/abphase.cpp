#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "abphase/errors.hpp"
#include "abphase/version.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTolerance = 3;

int run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
        const std::string& out_dir, const std::string& profile) {
  using namespace abphase;
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "abphase: cannot read " << config_path << '\n';
    return kExitConfig;
  }
  std::ostringstream text;
  text << in.rdbuf();

  runner::Config cfg;
  try {
    cfg = runner::parse_config(text.str());
  } catch (const ParseError& e) {
    std::cerr << config_path << ':' << e.line() << ':' << e.column() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) cfg.set_seed(*seed);
  if (profile == "fast") cfg.override_real("tolerance", "rel", 1e-6);
  if (profile == "accurate") cfg.override_real("tolerance", "rel", 1e-9);

  runner::RunReport report;
  try {
    report = runner::run_experiment(cfg);
  } catch (const ToleranceError& e) {
    std::cerr << cfg.experiment() << ": " << e.what() << " (residual "
              << runner::format_number(e.residual()) << ")\n";
    return kExitTolerance;
  } catch (const std::exception& e) {
    std::cerr << cfg.experiment() << ": " << e.what() << '\n';
    return kExitFailure;
  }

  try {
    for (const auto& p : runner::write_report(report, cfg, out_dir)) std::cout << p.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "abphase: " << e.what() << '\n';
    return kExitFailure;
  }
  for (const auto& l : report.summary) std::cout << "  " << l << '\n';
  if (!report.failures.empty()) {
    for (const auto& f : report.failures) std::cerr << cfg.experiment() << ": FAILED " << f << '\n';
    return kExitTolerance;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aharonov-Bohm phase experiments: local-field and potential formulations"};
  app.set_version_flag("--version", std::string(abphase::kVersion));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out_dir = "abphase-out";
  std::string profile;
  std::string config_path;
  std::string template_name;

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "Experiment config file")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out-dir", out_dir, "Directory for datasets and manifest.txt")
      ->capture_default_str();
  run_cmd->add_option("--tolerance-profile", profile, "Quadrature profile (fast: 1e-6, accurate: 1e-9)")
      ->check(CLI::IsMember({"fast", "accurate"}));

  auto* list_cmd = app.add_subcommand("list", "List the experiments and their parameters");
  auto* tmpl_cmd = app.add_subcommand("template", "Print a config with every key at its default");
  tmpl_cmd->add_option("experiment", template_name, "Experiment name")->required();

  CLI11_PARSE(app, argc, argv);

  if (*list_cmd) {
    for (const auto& d : abphase::runner::list_experiments()) {
      std::cout << d.name << "\n  " << d.summary << "\n  " << d.relation << '\n';
      for (const auto& s : d.sections) {
        std::cout << "  [" << s.name << (s.repeatable ? ".N" : "") << "]";
        for (const auto& k : s.keys) std::cout << ' ' << k.key;
        std::cout << '\n';
      }
    }
    return 0;
  }
  if (*tmpl_cmd) {
    const auto* d = abphase::runner::find_experiment(template_name);
    if (!d) {
      std::cerr << "abphase: unknown experiment " << template_name << '\n';
      return kExitConfig;
    }
    std::cout << abphase::runner::config_template(*d);
    return 0;
  }
  return run(config_path, seed, out_dir, profile);
}
