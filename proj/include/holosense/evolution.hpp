#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "holosense/chain_model.hpp"
#include "holosense/edge_logic.hpp"

namespace holosense {

class DensityMatrix {
 public:
  explicit DensityMatrix(DenseMatrix rho);  // checks Hermitian, unit trace, PSD
  static DensityMatrix pure(const Vector& psi);
  const DenseMatrix& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }

 private:
  DenseMatrix rho_;
};

struct TrotterOptions {
  int order = 2;                  // 1: Lie splitting, 2: Strang splitting
  bool log_energy = false;        // record <H(t)> after every step
  double drift_tolerance = 1e-6;  // per-step norm drift that aborts the run
};

struct EvolutionResult {
  ChainState final_state{Lattice(1), spin1_basis(1)};
  int step_count = 0;
  std::vector<double> energy_log;
  double max_step_drift = 0.0;
  double accumulated_drift = 0.0;  // |1 - product of per-step norms|
  std::optional<double> leakage_estimate;
};

// Local-term decomposition of the gate Hamiltonian, grouped for splitting:
// A = boundary bond + field, B/C = alternating bulk bonds (each carries the
// perturbation of the sites assigned to it), P = single-site terms on idle sites.
class TrotterPropagator {
 public:
  TrotterPropagator(const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                    const std::optional<PerturbationSpec>& pert = {}, TrotterOptions options = {});

  EvolutionResult evolve(const ChainState& s0) const;
  const Lattice& lattice() const { return lattice_; }
  const GateSchedule& schedule() const { return sched_; }

 private:
  struct Term {
    int first_site = 1;
    DenseMatrix fixed, field, bond;  // H_term(t) = fixed + f(t) field + g(t) bond
    int group = 0;
  };
  struct Layer {
    std::vector<std::pair<int, kernels::LocalGate>> gates;  // (first site, gate)
  };
  Layer static_layer(int group, double tau) const;
  void apply_layer(const Layer& layer, Vector& psi) const;

  GateSchedule sched_;
  CouplingConstants c_;
  Lattice lattice_;
  std::optional<PerturbationSpec> pert_;
  TrotterOptions opt_;
  std::vector<Term> terms_;
  std::optional<GateHamiltonian> energy_h_;
};

EvolutionResult trotter_evolve(const ChainState& s0, const GateSchedule& sched, const CouplingConstants& c,
                               const std::optional<PerturbationSpec>& pert = {}, TrotterOptions options = {});

// Fixed-step RK4 integration of the time-dependent gate Hamiltonian;
// a reference for small lattices.
Vector reference_evolve(const Vector& psi0, const GateHamiltonian& h, double dt_ref);

struct SensingResult {
  EvolutionResult evolution;
  double decoupled_spin_sq = 0.0;  // <(S^d_k)^2> of the boundary spin at t = T
  std::optional<BlochReport> bloch;  // edge qubit in the shortened chain's frame
};

SensingResult run_sensing_gate(const ChainState& initial, const GateSchedule& sched, const CouplingConstants& c,
                               const std::optional<PerturbationSpec>& pert = {},
                               const LogicalFrame* shortened_frame = nullptr, TrotterOptions options = {});

// Ramp the bond between site k and k+1 from J to zero with no field.
EvolutionResult run_decoupling(const ChainState& initial, int k, const CouplingConstants& c, double T, double dt,
                               const std::optional<PerturbationSpec>& pert = {}, TrotterOptions options = {});

DensityMatrix partial_trace(const Vector& psi, const Lattice& lattice, const std::vector<int>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const Lattice& lattice, const std::vector<int>& keep);
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

struct GateFidelityParams {
  int n = 8;
  double T = 10.0;
  double dt = 0.01;
  Direction field_dir = Direction::x_axis();
  CouplingConstants couplings{};
  std::optional<PerturbationSpec> perturbation;
  std::optional<Direction> frame_dir;  // default: orthogonal_direction(field_dir)
  std::uint64_t seed = kDefaultSolverSeed;
  TrotterOptions trotter{};
};

struct GateFidelityResult {
  double fidelity = 0.0;
  double leakage = 0.0;
  double decoupled_spin_sq = 0.0;
  Vec3 initial_bloch = Vec3::Zero();  // long chain frame
  Vec3 final_bloch = Vec3::Zero();    // shortened chain frame
  int steps = 0;
  double max_step_drift = 0.0;
};

// Frames of the long (sites 1..n) and shortened (2..n) partner-terminated chains.
struct GateFrames {
  LogicalFrame long_frame;
  LogicalFrame short_frame;
};
GateFrames gate_frames(int n, const Direction& frame_dir, const CouplingConstants& c, std::uint64_t seed);

GateFidelityResult gate_fidelity_experiment(const GateFidelityParams& p);

}  // namespace holosense
