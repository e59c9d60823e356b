// Command-line front end: spectrum, gate-fidelity, estimate, validate.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "holosense/config.hpp"
#include "holosense/errors.hpp"
#include "holosense/experiments.hpp"
#include "holosense/kernels.hpp"
#include "holosense/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitComputation = 2;
constexpr int kExitValidation = 3;

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
  std::optional<std::string> format;
  double tolerance_scale = 1.0;
};

holosense::ExperimentConfig resolve_config(const GlobalOptions& g) {
  holosense::ExperimentConfig cfg = g.config ? holosense::load_config(*g.config) : holosense::parse_config("");
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.output) cfg.output.path = *g.output;
  if (g.format) cfg.output.format = holosense::parse_output_format(*g.format);
  holosense::validate_config(cfg);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  if (cfg.threads > 0) holosense::kernels::set_threads(cfg.threads);
  return cfg;
}

void emit(const holosense::ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output.path)
    holosense::write_output_atomic(*cfg.output.path, text);
  else
    std::cout << text << std::flush;
}

int run_command(const std::string& name, const GlobalOptions& g) {
  using namespace holosense;
  if (name == "validate") {
    const ValidationReport report = run_validation(g.tolerance_scale);
    std::cout << report.render();
    return report.all_passed() ? kExitOk : kExitValidation;
  }
  const ExperimentConfig cfg = resolve_config(g);
  if (name == "spectrum") {
    emit(cfg, render_spectrum(run_spectrum(cfg), cfg.output.format.value_or(OutputFormat::Json)));
  } else if (name == "gate-fidelity") {
    const auto cells = run_gate_sweep(cfg, &std::cerr);
    emit(cfg, render_gate_cells(cfg, cells, cfg.output.format.value_or(OutputFormat::Csv)));
  } else if (name == "estimate") {
    emit(cfg, render_estimate(run_estimate(cfg), cfg.output.format.value_or(OutputFormat::Json)));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holonomic edge-mode field sensing on spin-1 chains"};
  app.require_subcommand(1);
  GlobalOptions g;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", g.config, "Configuration file");
    sub->add_option("--seed", g.seed, "Root seed (unsigned 64-bit)");
    sub->add_option("--threads", g.threads, "Worker threads")->check(CLI::NonNegativeNumber);
    sub->add_option("--output", g.output, "Output file (default: stdout)");
    sub->add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  for (const char* name : {"spectrum", "gate-fidelity", "estimate"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
  }
  auto* validate = app.add_subcommand("validate", "Run the invariant checklist on small chains");
  add_common(validate);
  validate->add_option("--tolerance-scale", g.tolerance_scale, "Multiply every tolerance by this factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_command(name, g);
  } catch (const holosense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const holosense::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << '\n';
    return kExitComputation;
  }
}
