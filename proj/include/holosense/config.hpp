#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "holosense/chain_model.hpp"
#include "holosense/metrology.hpp"

namespace holosense {

// Malformed or out-of-range configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };
OutputFormat parse_output_format(const std::string& text);

struct ChainSection {
  int n = 8;
  double J = 1.0;
  double J_R = 2.0;
  std::optional<bool> edge_partner;  // unset: command default
};

struct ScheduleSection {
  double T = 10.0;
  double dt = 0.01;
  int splitting_order = 2;
  double readout_T = 10.0;
};

struct FieldSection {
  Direction direction = Direction::x_axis();
  double J_f = 1.0;
  double E_f = 0.1;  // true field strength for background reconstruction
  std::optional<Direction> frame_direction;
};

struct PerturbationSection {
  std::vector<OperatorLabel> operators{OperatorLabel::Sx2, OperatorLabel::Sz};
  std::vector<double> gamma_list{0.0};
  std::optional<Direction> axis;  // for Sd2
  int first_site = 1;
  int last_site = 0;
  bool include_partner = true;
};

struct EstimationSection {
  std::vector<int> N_list{256, 1024, 4096};
  int trials = 100;
  SamplerMode mode = SamplerMode::Abstract;
  Vec3 psi0 = default_probe_state().vec();
  bool reorient = true;
  bool noiseless = false;
};

struct BackgroundSection {
  Background first;
  Background second;
};

struct OutputSection {
  std::optional<std::string> path;
  std::optional<OutputFormat> format;
};

struct ExperimentConfig {
  ChainSection chain;
  ScheduleSection schedule;
  FieldSection field;
  PerturbationSection perturbation;
  EstimationSection estimation;
  std::optional<BackgroundSection> background;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default
  OutputSection output;
  std::vector<std::string> warnings;

  CouplingConstants couplings() const;
};

// Parses sectioned key = value text. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

// Comma-separated list helpers; brackets around the list are optional.
std::vector<std::string> split_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace holosense
