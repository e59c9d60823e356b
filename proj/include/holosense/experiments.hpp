#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "holosense/config.hpp"
#include "holosense/evolution.hpp"
#include "holosense/metrology.hpp"

namespace holosense {

inline constexpr const char* kGateCsvHeader = "gamma,operator,n,T,dt,fidelity,leakage,seed,walltime_s";

// Fixed-precision number text used by every emitter ("nan" for NaN).
std::string format_number(double v);

// Low spectrum of the configured chain: the quartet on a bare chain, the
// doublet on a partner-terminated one.
struct SpectrumReport {
  int n = 0;
  double J = 1.0;
  bool edge_partner = false;
  std::vector<double> ground_energies;  // quartet (4) or doublet (2)
  std::vector<double> levels;
  double splitting = 0.0;
  double gap = 0.0;
  double max_residual = 0.0;
  std::uint64_t seed = 0;
};
SpectrumReport run_spectrum(const ExperimentConfig& cfg);
std::string render_spectrum(const SpectrumReport& r, OutputFormat format);

struct GateCell {
  int index = 0;
  OperatorLabel label = OperatorLabel::Sz;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::optional<GateFidelityResult> result;
  std::optional<std::string> error;
  double walltime_s = 0.0;
};
GateFidelityParams gate_params(const ExperimentConfig& cfg, OperatorLabel label, double gamma, std::uint64_t seed);
// Cells are operator-major (all gammas of the first operator, then the next);
// cell seeds are derive_seed(root, index). Failed cells carry the error.
std::vector<GateCell> run_gate_sweep(const ExperimentConfig& cfg, std::ostream* log = nullptr);
std::string render_gate_cells(const ExperimentConfig& cfg, const std::vector<GateCell>& cells, OutputFormat format);

struct EstimateRow {
  SamplerMode mode = SamplerMode::Abstract;
  int N = 0;
  int trials = 0;
  Direction axis_estimate = Direction::z_axis();
  double mean_angular_error = 0.0;
  double var_angular_error = 0.0;
  double rms_angular_error = 0.0;
  std::optional<double> E_f_estimate;
  std::optional<double> residual;
  std::optional<double> mean_infidelity;
  std::optional<double> median_infidelity;
  int failed_trials = 0;
  int flagged_trials = 0;
  int degenerate_trials = 0;
  std::uint64_t seed = 0;
};
FullChainOptions full_chain_options(const ExperimentConfig& cfg);
std::vector<EstimateRow> run_estimate(const ExperimentConfig& cfg);
std::string render_estimate(const std::vector<EstimateRow>& rows, OutputFormat format);

// Writes via a temporary file and rename so no partial file is left behind.
void write_output_atomic(const std::string& path, const std::string& text);

}  // namespace holosense
