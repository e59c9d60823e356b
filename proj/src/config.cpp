#include "holosense/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "holosense/errors.hpp"

namespace holosense {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  if (pos != t.size() || !std::isfinite(v)) throw ConfigError(key + ": not a finite number: '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + text + "'");
  }
  if (pos != t.size()) throw ConfigError(key + ": not an integer: '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-') throw ConfigError(key + ": expected an unsigned integer");
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(t, &pos, 0);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: '" + text + "'");
  }
  if (pos != t.size()) throw ConfigError(key + ": not an unsigned integer: '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(key + ": expected a boolean: '" + text + "'");
}

Vec3 to_vec3(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  static const std::map<std::string, Vec3> named{{"x", Vec3::UnitX()},  {"+x", Vec3::UnitX()}, {"-x", -Vec3::UnitX()},
                                                 {"y", Vec3::UnitY()},  {"+y", Vec3::UnitY()}, {"-y", -Vec3::UnitY()},
                                                 {"z", Vec3::UnitZ()},  {"+z", Vec3::UnitZ()}, {"-z", -Vec3::UnitZ()}};
  if (auto it = named.find(t); it != named.end()) return it->second;
  const auto parts = split_list(text);
  if (parts.size() != 3) throw ConfigError(key + ": expected three comma-separated components");
  return Vec3(to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]));
}

Direction to_direction(const std::string& key, const std::string& text, std::vector<std::string>& warnings) {
  const Vec3 v = to_vec3(key, text);
  const double n = v.norm();
  if (!(n > 1e-12)) throw ConfigError(key + ": zero direction");
  if (std::abs(n * n - 1.0) > 1e-12) warnings.push_back(key + ": direction renormalized to unit length");
  return Direction::normalized(v);
}

using Handler = std::function<void(const std::string& key, const std::string& value)>;

}  // namespace

OutputFormat parse_output_format(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "csv") return OutputFormat::Csv;
  if (t == "json") return OutputFormat::Json;
  throw ConfigError("format must be csv or json, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::string t = trim(text);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  std::vector<std::string> out;
  if (trim(t).empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!t.empty() && t.back() == ',') out.push_back("");
  for (const auto& s : out)
    if (s.empty()) throw ConfigError("empty list element in '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(to_double("list", s));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) out.push_back(to_int("list", s));
  return out;
}

CouplingConstants ExperimentConfig::couplings() const {
  CouplingConstants c;
  c.J = chain.J;
  c.J_f = field.J_f;
  c.J_R = chain.J_R;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree pt;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }

  ExperimentConfig cfg;
  auto& w = cfg.warnings;
  std::optional<Background> bg1, bg2;
  std::optional<double> bg1_E, bg2_E;
  std::optional<Direction> bg1_m, bg2_m;

  const std::map<std::string, std::map<std::string, Handler>> sections{
      {"chain",
       {{"n", [&](auto& k, auto& v) { cfg.chain.n = to_int(k, v); }},
        {"J", [&](auto& k, auto& v) { cfg.chain.J = to_double(k, v); }},
        {"J_R", [&](auto& k, auto& v) { cfg.chain.J_R = to_double(k, v); }},
        {"edge_partner", [&](auto& k, auto& v) { cfg.chain.edge_partner = to_bool(k, v); }}}},
      {"schedule",
       {{"T", [&](auto& k, auto& v) { cfg.schedule.T = to_double(k, v); }},
        {"dt", [&](auto& k, auto& v) { cfg.schedule.dt = to_double(k, v); }},
        {"splitting_order", [&](auto& k, auto& v) { cfg.schedule.splitting_order = to_int(k, v); }},
        {"readout_T", [&](auto& k, auto& v) { cfg.schedule.readout_T = to_double(k, v); }}}},
      {"field",
       {{"direction", [&](auto& k, auto& v) { cfg.field.direction = to_direction(k, v, w); }},
        {"J_f", [&](auto& k, auto& v) { cfg.field.J_f = to_double(k, v); }},
        {"E_f", [&](auto& k, auto& v) { cfg.field.E_f = to_double(k, v); }},
        {"frame_direction", [&](auto& k, auto& v) { cfg.field.frame_direction = to_direction(k, v, w); }}}},
      {"perturbation",
       {{"operator_label",
         [&](auto& k, auto& v) {
           cfg.perturbation.operators.clear();
           for (const auto& s : split_list(v)) {
             try {
               cfg.perturbation.operators.push_back(parse_operator_label(s));
             } catch (const InvalidArgument& e) {
               throw ConfigError(k + ": " + e.what());
             }
           }
         }},
        {"gamma_list",
         [&](auto& k, auto& v) {
           cfg.perturbation.gamma_list.clear();
           for (const auto& s : split_list(v)) cfg.perturbation.gamma_list.push_back(to_double(k, s));
         }},
        {"axis", [&](auto& k, auto& v) { cfg.perturbation.axis = to_direction(k, v, w); }},
        {"first_site", [&](auto& k, auto& v) { cfg.perturbation.first_site = to_int(k, v); }},
        {"last_site", [&](auto& k, auto& v) { cfg.perturbation.last_site = to_int(k, v); }},
        {"include_partner", [&](auto& k, auto& v) { cfg.perturbation.include_partner = to_bool(k, v); }}}},
      {"estimation",
       {{"N_list",
         [&](auto& k, auto& v) {
           cfg.estimation.N_list.clear();
           for (const auto& s : split_list(v)) cfg.estimation.N_list.push_back(to_int(k, s));
         }},
        {"trials", [&](auto& k, auto& v) { cfg.estimation.trials = to_int(k, v); }},
        {"mode",
         [&](auto& k, auto& v) {
           try {
             cfg.estimation.mode = parse_sampler_mode(lower(trim(v)));
           } catch (const InvalidArgument& e) {
             throw ConfigError(k + ": " + e.what());
           }
         }},
        {"psi0", [&](auto& k, auto& v) { cfg.estimation.psi0 = to_direction(k, v, w).vec(); }},
        {"reorient", [&](auto& k, auto& v) { cfg.estimation.reorient = to_bool(k, v); }},
        {"noiseless", [&](auto& k, auto& v) { cfg.estimation.noiseless = to_bool(k, v); }}}},
      {"background",
       {{"E_b1", [&](auto& k, auto& v) { bg1_E = to_double(k, v); }},
        {"m_b1", [&](auto& k, auto& v) { bg1_m = to_direction(k, v, w); }},
        {"E_b2", [&](auto& k, auto& v) { bg2_E = to_double(k, v); }},
        {"m_b2", [&](auto& k, auto& v) { bg2_m = to_direction(k, v, w); }}}},
      {"output",
       {{"path", [&](auto&, auto& v) { cfg.output.path = trim(v); }},
        {"format", [&](auto&, auto& v) { cfg.output.format = parse_output_format(v); }}}},
      {"run",
       {{"seed", [&](auto& k, auto& v) { cfg.seed = to_u64(k, v); }},
        {"threads", [&](auto& k, auto& v) { cfg.threads = to_int(k, v); }}}},
  };

  for (const auto& [name, node] : pt) {
    if (node.empty()) {
      // Top-level key outside any section.
      const auto& run = sections.at("run");
      auto it = run.find(name);
      if (it == run.end()) throw ConfigError("unknown top-level key '" + name + "'");
      it->second(name, node.data());
      continue;
    }
    auto sec = sections.find(name);
    if (sec == sections.end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : node) {
      auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      if (!value.empty()) throw ConfigError("nested key under '" + key + "'");
      it->second(name + "." + key, value.data());
    }
  }

  const bool any_bg = bg1_E || bg1_m || bg2_E || bg2_m;
  if (any_bg) {
    if (!(bg1_E && bg1_m && bg2_E && bg2_m))
      throw ConfigError("[background] needs E_b1, m_b1, E_b2 and m_b2 together");
    cfg.background = BackgroundSection{{*bg1_E, *bg1_m}, {*bg2_E, *bg2_m}};
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& c = cfg.chain;
  if (c.n < 2 || c.n > 12) throw ConfigError("chain.n must be in [2, 12]");
  if (!(c.J > 0.0)) throw ConfigError("chain.J must be positive");
  if (!(c.J_R > 0.0)) throw ConfigError("chain.J_R must be positive");
  const auto& s = cfg.schedule;
  if (!(s.T > 0.0)) throw ConfigError("schedule.T must be positive");
  if (!(s.dt > 0.0)) throw ConfigError("schedule.dt must be positive");
  const double ratio = s.T / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("schedule.T / schedule.dt must be an integer");
  if (s.splitting_order != 1 && s.splitting_order != 2) throw ConfigError("schedule.splitting_order must be 1 or 2");
  if (!(s.readout_T > 0.0)) throw ConfigError("schedule.readout_T must be positive");
  const double rr = s.readout_T / s.dt;
  if (std::abs(rr - std::round(rr)) > 1e-9 * std::max(1.0, rr))
    throw ConfigError("schedule.readout_T / schedule.dt must be an integer");
  if (!(cfg.field.J_f >= 0.0)) throw ConfigError("field.J_f must be nonnegative");
  if (!(cfg.field.E_f >= 0.0)) throw ConfigError("field.E_f must be nonnegative");
  const auto& p = cfg.perturbation;
  if (p.operators.empty()) throw ConfigError("perturbation.operator_label must list at least one operator");
  if (p.gamma_list.empty()) throw ConfigError("perturbation.gamma_list must not be empty");
  for (double g : p.gamma_list)
    if (!(g >= 0.0)) throw ConfigError("perturbation.gamma_list entries must be nonnegative");
  for (auto l : p.operators)
    if (l == OperatorLabel::Sd2 && !p.axis) throw ConfigError("perturbation.axis is required for Sd2");
  if (p.first_site < 1 || p.first_site > c.n) throw ConfigError("perturbation.first_site out of range");
  if (p.last_site != 0 && (p.last_site < p.first_site || p.last_site > c.n))
    throw ConfigError("perturbation.last_site out of range");
  const auto& e = cfg.estimation;
  if (e.trials < 1) throw ConfigError("estimation.trials must be positive");
  if (e.N_list.empty()) throw ConfigError("estimation.N_list must not be empty");
  for (int N : e.N_list)
    if (N < 6) throw ConfigError("estimation.N_list entries must be at least 6");
  if (cfg.background) {
    if (!(cfg.background->first.E_b > 0.0) || !(cfg.background->second.E_b > 0.0))
      throw ConfigError("background strengths must be positive");
  }
  if (cfg.threads < 0) throw ConfigError("threads must be nonnegative");
}

}  // namespace holosense
