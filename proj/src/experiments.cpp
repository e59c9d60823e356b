#include "holosense/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "holosense/errors.hpp"

namespace holosense {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string u64_text(std::uint64_t v) { return std::to_string(v); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

SpectrumReport run_spectrum(const ExperimentConfig& cfg) {
  SpectrumReport r;
  r.n = cfg.chain.n;
  r.J = cfg.chain.J;
  r.edge_partner = cfg.chain.edge_partner.value_or(false);
  r.seed = cfg.seed;
  const CouplingConstants c = cfg.couplings();
  if (r.edge_partner) {
    const Lattice lattice(r.n, true);
    const SpectrumSlice s = lowest_eigenpairs(chain_hamiltonian(1, lattice, c), 4, 1e-9, cfg.seed);
    r.levels = s.eigenvalues;
    r.ground_energies = {s.eigenvalues[0], s.eigenvalues[1]};
    r.splitting = s.eigenvalues[1] - s.eigenvalues[0];
    r.gap = s.eigenvalues[2] - s.eigenvalues[1];
    r.max_residual = *std::max_element(s.residual_norms.begin(), s.residual_norms.end());
    if (!(r.splitting < 0.5 * r.gap)) throw AmbiguousQuartet("no isolated ground doublet");
  } else {
    const GroundSpaceReport g = ground_space(heisenberg(1, r.n, r.J), cfg.seed);
    r.levels = g.levels;
    r.ground_energies.assign(g.quartet_energies.begin(), g.quartet_energies.end());
    r.splitting = g.splitting;
    r.gap = g.gap;
    r.max_residual = *std::max_element(g.residual_norms.begin(), g.residual_norms.end());
  }
  return r;
}

std::string render_spectrum(const SpectrumReport& r, OutputFormat format) {
  if (format == OutputFormat::Json) {
    ordered_json j;
    j["n"] = r.n;
    j["J"] = r.J;
    j["edge_partner"] = r.edge_partner;
    j["ground_energies"] = r.ground_energies;
    j["levels"] = r.levels;
    j["splitting"] = r.splitting;
    j["gap"] = r.gap;
    j["max_residual"] = r.max_residual;
    j["seed"] = r.seed;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "n,J,edge_partner,level,energy,splitting,gap,seed\n";
  for (std::size_t i = 0; i < r.levels.size(); ++i)
    os << r.n << ',' << format_number(r.J) << ',' << (r.edge_partner ? 1 : 0) << ',' << i << ','
       << format_number(r.levels[i]) << ',' << format_number(r.splitting) << ',' << format_number(r.gap) << ','
       << u64_text(r.seed) << '\n';
  return os.str();
}

GateFidelityParams gate_params(const ExperimentConfig& cfg, OperatorLabel label, double gamma, std::uint64_t seed) {
  GateFidelityParams p;
  p.n = cfg.chain.n;
  p.T = cfg.schedule.T;
  p.dt = cfg.schedule.dt;
  p.field_dir = cfg.field.direction;
  p.couplings = cfg.couplings();
  p.frame_dir = cfg.field.frame_direction;
  p.seed = seed;
  p.trotter.order = cfg.schedule.splitting_order;
  PerturbationSpec spec;
  spec.label = label;
  spec.gamma = gamma;
  spec.axis = cfg.perturbation.axis;
  spec.first_site = cfg.perturbation.first_site;
  spec.last_site = cfg.perturbation.last_site;
  spec.include_partner = cfg.perturbation.include_partner;
  p.perturbation = spec;
  return p;
}

std::vector<GateCell> run_gate_sweep(const ExperimentConfig& cfg, std::ostream* log) {
  std::vector<GateCell> cells;
  for (OperatorLabel label : cfg.perturbation.operators)
    for (double gamma : cfg.perturbation.gamma_list) {
      GateCell c;
      c.index = static_cast<int>(cells.size());
      c.label = label;
      c.gamma = gamma;
      c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c.index));
      cells.push_back(c);
    }
  const int count = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    GateCell& c = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.result = gate_fidelity_experiment(gate_params(cfg, c.label, c.gamma, c.seed));
    } catch (const std::exception& e) {
      c.error = e.what();
    }
    c.walltime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  if (log)
    for (const auto& c : cells)
      if (c.error) *log << "cell " << c.index << " (" << to_string(c.label) << ", gamma=" << format_number(c.gamma)
                        << ") failed: " << *c.error << '\n';
  return cells;
}

std::string render_gate_cells(const ExperimentConfig& cfg, const std::vector<GateCell>& cells, OutputFormat format) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (format == OutputFormat::Json) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cells) {
      ordered_json j;
      j["gamma"] = c.gamma;
      j["operator"] = to_string(c.label);
      j["n"] = cfg.chain.n;
      j["T"] = cfg.schedule.T;
      j["dt"] = cfg.schedule.dt;
      j["fidelity"] = finite_or_null(c.result ? c.result->fidelity : nan);
      j["leakage"] = finite_or_null(c.result ? c.result->leakage : nan);
      j["seed"] = c.seed;
      j["walltime_s"] = c.walltime_s;
      if (c.error) j["error"] = *c.error;
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  os << kGateCsvHeader << '\n';
  for (const auto& c : cells) {
    os << format_number(c.gamma) << ',' << to_string(c.label) << ',' << cfg.chain.n << ','
       << format_number(cfg.schedule.T) << ',' << format_number(cfg.schedule.dt) << ','
       << format_number(c.result ? c.result->fidelity : nan) << ','
       << format_number(c.result ? c.result->leakage : nan) << ',' << u64_text(c.seed) << ','
       << format_number(c.walltime_s) << '\n';
  }
  return os.str();
}

FullChainOptions full_chain_options(const ExperimentConfig& cfg) {
  FullChainOptions o;
  o.n = cfg.chain.n;
  o.couplings = cfg.couplings();
  o.T = cfg.schedule.T;
  o.dt = cfg.schedule.dt;
  o.readout_T = cfg.schedule.readout_T;
  o.readout_dt = cfg.schedule.dt;
  o.frame_dir = cfg.field.frame_direction.value_or(Direction::z_axis());
  o.seed = cfg.seed;
  o.trotter.order = cfg.schedule.splitting_order;
  return o;
}

std::vector<EstimateRow> run_estimate(const ExperimentConfig& cfg) {
  const auto& est = cfg.estimation;
  if (est.trials < 1) throw ConfigError("estimation.trials must be positive");
  const BlochVector psi0(est.psi0);
  const FullChainOptions fc = full_chain_options(cfg);
  std::vector<EstimateRow> rows;

  if (!cfg.background) {
    const auto sampler = make_sampler(est.mode, cfg.field.direction, fc);
    for (std::size_t i = 0; i < est.N_list.size(); ++i) {
      DirectionExperiment e;
      e.N = est.N_list[i];
      e.true_axis = cfg.field.direction;
      e.psi0 = psi0;
      e.trials = est.trials;
      e.seed = derive_seed(cfg.seed, i);
      e.reorient = est.reorient;
      e.noiseless = est.noiseless;
      const DirectionSummary s = summarize(direction_experiment(e, *sampler));
      EstimateRow r;
      r.mode = est.mode;
      r.N = e.N;
      r.trials = e.trials;
      r.axis_estimate = s.mean_axis;
      r.mean_angular_error = s.mean_angular_error;
      r.var_angular_error = s.var_angular_error;
      r.rms_angular_error = s.rms_angular_error;
      r.mean_infidelity = s.mean_infidelity;
      r.median_infidelity = s.median_infidelity;
      r.failed_trials = s.failed;
      r.flagged_trials = s.flagged;
      r.degenerate_trials = s.degenerate;
      r.seed = e.seed;
      rows.push_back(r);
    }
    return rows;
  }

  const SamplerFactory factory = [&](const Direction& axis) { return make_sampler(est.mode, axis, fc); };
  for (std::size_t i = 0; i < est.N_list.size(); ++i) {
    BackgroundExperiment b;
    b.E_f = cfg.field.E_f;
    b.m_f = cfg.field.direction;
    b.bg1 = cfg.background->first;
    b.bg2 = cfg.background->second;
    b.N = est.N_list[i];
    b.psi0 = psi0;
    b.trials = est.trials;
    b.seed = derive_seed(cfg.seed, i);
    b.reorient = est.reorient;
    b.noiseless = est.noiseless;
    const auto recs = background_experiment(b, factory);
    EstimateRow r;
    r.mode = est.mode;
    r.N = b.N;
    r.trials = b.trials;
    r.seed = b.seed;
    Vec3 axis_sum = Vec3::Zero();
    double e_sum = 0.0, res_sum = 0.0, a_sum = 0.0, a_sq = 0.0;
    int ok = 0, with_axis = 0;
    for (const auto& rec : recs) {
      if (rec.error || !rec.reconstruction) {
        ++r.failed_trials;
        continue;
      }
      ++ok;
      e_sum += rec.reconstruction->E_f;
      res_sum += rec.reconstruction->residual;
      if (rec.reconstruction->weak_background) ++r.flagged_trials;
      if (rec.reconstruction->m_f && rec.angular_error) {
        ++with_axis;
        axis_sum += rec.reconstruction->m_f->vec();
        a_sum += *rec.angular_error;
        a_sq += *rec.angular_error * *rec.angular_error;
      }
    }
    if (ok > 0) {
      r.E_f_estimate = e_sum / ok;
      r.residual = res_sum / ok;
    }
    if (with_axis > 0) {
      if (axis_sum.norm() > 0.0) r.axis_estimate = Direction::normalized(axis_sum);
      r.mean_angular_error = a_sum / with_axis;
      r.var_angular_error = a_sq / with_axis;
      r.rms_angular_error = std::sqrt(r.var_angular_error);
    } else {
      r.mean_angular_error = r.var_angular_error = r.rms_angular_error = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(r);
  }
  return rows;
}

std::string render_estimate(const std::vector<EstimateRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json j;
      j["mode"] = to_string(r.mode);
      j["N"] = r.N;
      j["trials"] = r.trials;
      j["axis_estimate"] = {r.axis_estimate.x(), r.axis_estimate.y(), r.axis_estimate.z()};
      j["mean_angular_error"] = finite_or_null(r.mean_angular_error);
      j["var_angular_error"] = finite_or_null(r.var_angular_error);
      j["E_f_estimate"] = number_or_null(r.E_f_estimate);
      j["residual"] = number_or_null(r.residual);
      j["seed"] = r.seed;
      j["rms_angular_error"] = finite_or_null(r.rms_angular_error);
      j["mean_infidelity"] = number_or_null(r.mean_infidelity);
      j["median_infidelity"] = number_or_null(r.median_infidelity);
      j["failed_trials"] = r.failed_trials;
      j["flagged_trials"] = r.flagged_trials;
      j["degenerate_trials"] = r.degenerate_trials;
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "mode,N,trials,axis_x,axis_y,axis_z,mean_angular_error,var_angular_error,E_f_estimate,residual,seed\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows)
    os << to_string(r.mode) << ',' << r.N << ',' << r.trials << ',' << format_number(r.axis_estimate.x()) << ','
       << format_number(r.axis_estimate.y()) << ',' << format_number(r.axis_estimate.z()) << ','
       << format_number(r.mean_angular_error) << ',' << format_number(r.var_angular_error) << ','
       << format_number(r.E_f_estimate.value_or(nan)) << ',' << format_number(r.residual.value_or(nan)) << ','
       << u64_text(r.seed) << '\n';
  return os.str();
}

void write_output_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ComputationError("cannot write output file '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw ComputationError("failed writing output file '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ComputationError("cannot move output into place: " + ec.message());
  }
}

}  // namespace holosense
