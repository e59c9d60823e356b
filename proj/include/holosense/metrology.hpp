#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "holosense/evolution.hpp"

namespace holosense {

// Qubit Bloch vector in world coordinates; norm <= 1 + 1e-10.
class BlochVector {
 public:
  BlochVector() = default;
  BlochVector(double x, double y, double z);
  explicit BlochVector(const Vec3& v);
  // Scales v back into the unit ball if needed.
  static BlochVector clamped(const Vec3& v);

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Vec3& vec() const { return v_; }
  double norm() const { return v_.norm(); }

 private:
  Vec3 v_ = Vec3::Zero();
};

enum class SamplerMode { Abstract, FullChain };
SamplerMode parse_sampler_mode(const std::string& text);
std::string to_string(SamplerMode mode);

// pi-rotation of psi0 about axis: 2 (axis . psi0) axis - psi0.
BlochVector reflect_bloch(const BlochVector& psi0, const Direction& axis);

struct AxisEstimate {
  Direction axis = Direction::z_axis();
  double conditioning = 0.0;  // |psi0 + psi1|
};
// Bisector of psi0 and psi1; DegenerateGeometry when |psi0 + psi1| < 1e-6.
AxisEstimate axis_from_pair(const BlochVector& psi0, const BlochVector& psi1);

// Sign representative of an axis: z >= 0, and x >= 0 when z is ~0.
Direction canonicalize_axis(const Direction& d);
// Angle between two axes, ignoring sign.
double axis_angle(const Direction& a, const Direction& b);

// Edge-qubit channel seen by tomography: prepare psi0, apply the field
// gate, read out along a basis. Outcomes are +1/-1.
class EdgeSampler {
 public:
  virtual ~EdgeSampler() = default;
  virtual SamplerMode mode() const = 0;
  virtual int sample(const BlochVector& psi0, const Direction& basis, Rng& rng) const = 0;
  // Exact P(+1) - P(-1), used by the noiseless limit.
  virtual double expectation(const BlochVector& psi0, const Direction& basis) const = 0;
};

class AbstractSampler final : public EdgeSampler {
 public:
  explicit AbstractSampler(const Direction& true_axis) : axis_(true_axis) {}
  SamplerMode mode() const override { return SamplerMode::Abstract; }
  int sample(const BlochVector& psi0, const Direction& basis, Rng& rng) const override;
  double expectation(const BlochVector& psi0, const Direction& basis) const override;

 private:
  Direction axis_;
};

struct FullChainOptions {
  int n = 8;
  CouplingConstants couplings{};
  double T = 10.0;
  double dt = 0.01;
  double readout_T = 10.0;
  double readout_dt = 0.01;
  Direction frame_dir = Direction::z_axis();  // frame used to prepare psi0
  std::uint64_t seed = kDefaultSolverSeed;
  TrotterOptions trotter{};
};

// Simulates the whole chain: psi0 is prepared in the partner-terminated
// doublet, the sensing gate runs with the true field axis, and readout
// decouples boundary spins one at a time, measuring S^basis on each. An
// m=0 result moves on to the next spin; the partner spin ends the chain.
// The pipeline is linear in the prepared state, so the gate and each readout
// depth are simulated once per basis and reused for every shot.
class FullChainSampler final : public EdgeSampler {
 public:
  FullChainSampler(const Direction& true_axis, FullChainOptions options = {});
  SamplerMode mode() const override { return SamplerMode::FullChain; }
  int sample(const BlochVector& psi0, const Direction& basis, Rng& rng) const override;
  double expectation(const BlochVector& psi0, const Direction& basis) const override;

  // Mean number of spins measured per shot (1 = first spin read +/-1).
  double mean_depth(const BlochVector& psi0, const Direction& basis) const;
  const LogicalFrame& frame() const { return frame_; }

 private:
  struct Depth {
    Eigen::Matrix2cd reach, plus, minus;  // Gram matrices in the logical basis
  };
  struct Tree {
    std::vector<Depth> depths;
    std::array<Vector, 2> frontier;  // unnormalized branch states for |0>, |1>
    int next_site = 2;
    bool complete = false;
  };
  Eigen::Matrix2cd density(const BlochVector& psi0) const;
  const Depth& depth(const Direction& basis, int d) const;
  int depth_count() const;
  void extend(Tree& tree, const Direction& basis) const;

  Direction axis_;
  FullChainOptions opt_;
  LogicalFrame frame_;
  Lattice lattice_;
  mutable std::mutex mutex_;
  mutable std::map<std::array<double, 3>, Tree> trees_;
  std::array<Vector, 2> gate_out_;
};

std::unique_ptr<EdgeSampler> make_sampler(SamplerMode mode, const Direction& true_axis,
                                          const FullChainOptions& full_chain = {});

int sample_edge_readout(const EdgeSampler& sampler, const BlochVector& psi0, const Direction& basis, Rng& rng);

// Counts per measurement basis. Counts are real so the noiseless limit can
// use exact expectation values.
struct TomographyCounts {
  std::vector<Vec3> bases;
  std::vector<double> plus, minus;
  void add(const Vec3& basis, double n_plus, double n_minus);
  double total() const;
};

// Maximum-likelihood Bloch vector constrained to the unit ball.
BlochVector ml_bloch(const TomographyCounts& counts);

// Phase-2 bases: along the predicted direction and two orthogonal ones.
std::array<Direction, 3> adapted_bases(const Vec3& predicted);

// Measurement access to one prepared qubit.
struct QubitSource {
  std::function<int(const Direction&, Rng&)> sample;
  std::function<double(const Direction&)> expectation;
};

// Spreads shots evenly over the bases (remainder to the first ones).
void measure_bases(const QubitSource& source, const std::vector<Direction>& bases, int shots, Rng& rng,
                   bool noiseless, TomographyCounts& counts);

// Two-phase tomography: N/2 shots on x, y, z, then the rest on bases
// adapted to the crude estimate; ML over all counts.
BlochVector adaptive_tomography(int N, const QubitSource& source, Rng& rng, bool noiseless = false);

struct EstimationRecord {
  int trial = 0;
  int sample_count = 0;
  SamplerMode mode = SamplerMode::Abstract;
  std::uint64_t seed = 0;
  Direction axis_estimate = Direction::z_axis();  // canonicalized
  std::optional<double> angular_error;
  BlochVector psi0_used;       // state prepared for the second phase
  BlochVector psi1_estimate;  // ML estimate of the reflected state
  double infidelity = 0.0;     // of psi1_estimate vs the true reflected state
  double first_phase_conditioning = 0.0;
  bool conditioning_flagged = false;
  bool first_phase_degenerate = false;
  bool reoriented = false;
  std::optional<std::string> error;
};

// Default probe state. It is oblique to every coordinate axis, so fields
// along an axis never start in the perpendicular (uninformative) geometry.
inline BlochVector default_probe_state() { return BlochVector(Vec3(1.0, 1.0, 1.0).normalized()); }

struct DirectionExperiment {
  int N = 1024;
  Direction true_axis = Direction::x_axis();
  BlochVector psi0 = default_probe_state();
  int trials = 100;
  std::uint64_t seed = 1;
  bool reorient = true;   // re-prepare psi0 along the crude axis for phase 2
  bool noiseless = false;
};

inline constexpr double kConditioningFlag = 0.5;

// Per-trial seeds derive_seed(seed, trial); trials run in parallel and the
// result is ordered by trial index.
std::vector<EstimationRecord> direction_experiment(const DirectionExperiment& exp, const EdgeSampler& sampler);

struct DirectionSummary {
  int trials = 0;
  int failed = 0;
  int flagged = 0;
  int degenerate = 0;
  Direction mean_axis = Direction::z_axis();
  double mean_angular_error = 0.0;
  double var_angular_error = 0.0;  // mean squared angular error about the truth
  double rms_angular_error = 0.0;
  double sem_angular_error = 0.0;  // standard error of the mean
  double mean_infidelity = 0.0;
  double median_infidelity = 0.0;
};
DirectionSummary summarize(const std::vector<EstimationRecord>& records);

struct Background {
  double E_b = 1.0;
  Direction m_b = Direction::z_axis();
};

struct TotalField {
  Direction direction = Direction::z_axis();
  bool weak_background = false;  // E_b < 10 E_f
};
TotalField total_field_direction(double E_f, const Direction& m_f, double E_b, const Direction& m_b);

struct FieldReconstruction {
  double E_f = 0.0;
  std::optional<Direction> m_f;  // undefined when E_f is zero
  double residual = 0.0;
  std::array<double, 2> total_strengths{};
  bool weak_background = false;
};
FieldReconstruction reconstruct_field(const Direction& obs1, const Direction& obs2, const Background& bg1,
                                      const Background& bg2);

struct BackgroundExperiment {
  double E_f = 0.1;
  Direction m_f = Direction::x_axis();
  Background bg1{1.0, Direction::z_axis()};
  Background bg2{1.0, Direction::y_axis()};
  int N = 4096;  // shots per round
  BlochVector psi0 = default_probe_state();
  int trials = 50;
  std::uint64_t seed = 1;
  bool reorient = true;
  bool noiseless = false;
};

struct BackgroundRecord {
  int trial = 0;
  std::optional<FieldReconstruction> reconstruction;
  std::optional<double> angular_error;    // of m_f
  std::optional<double> relative_error;   // of E_f
  std::optional<std::string> error;
};

// Two estimation rounds (one per background), then reconstruct_field. The
// sampler factory builds the channel for a given total-field axis.
using SamplerFactory = std::function<std::unique_ptr<EdgeSampler>(const Direction&)>;
std::vector<BackgroundRecord> background_experiment(const BackgroundExperiment& exp, const SamplerFactory& factory);

}  // namespace holosense
