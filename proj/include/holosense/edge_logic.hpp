#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "holosense/chain_model.hpp"
#include "holosense/eigensolver.hpp"
#include "holosense/random.hpp"

namespace holosense {

using LinearMap = std::function<Vector(const Vector&)>;

// Sign of the eigenphase (+i * sign) labeled as the logical zero. Fixed from
// the unperturbed n=8 chain, where it makes |0> the state with 2<S^d_tot> = +1.
inline constexpr double kZeroEigenphaseSign = 1.0;

// Product of single-site pi-rotations exp(i pi S^d_j) over sites first..last,
// stored as local factors and applied site by site.
class StringOperator {
 public:
  StringOperator(const Direction& d, int first, int last, const Lattice& lattice);

  const Direction& direction() const { return dir_; }
  int first() const { return first_; }
  int last() const { return last_; }
  const Lattice& lattice() const { return lattice_; }

  Vector apply(const Vector& v) const;
  LinearMap as_map() const;
  SpinOperator to_sparse() const;

 private:
  Direction dir_;
  int first_, last_;
  Lattice lattice_;
  std::vector<kernels::LocalGate> factors_;
};

// Bulk string on spin-1 sites k..n.
StringOperator string_operator(const Direction& d, int k, int n, const Lattice& lattice);
StringOperator string_operator(const Direction& d, int k, int n);
// Bulk string from site k including the edge-partner factor when present.
StringOperator full_string_operator(const Direction& d, int k, const Lattice& lattice);

// max over random unit vectors v of ||(H U - U H) v||.
double commutator_norm(const SpinOperator& h, const LinearMap& u, int samples = 20,
                       std::uint64_t seed = 0x5eedc0de);

struct LogicalFrame {
  Lattice lattice{1};
  Vector zero_state;
  Vector one_state;
  Direction field_dir = Direction::z_axis();
  Direction perp_dir = Direction::x_axis();
  Eigen::Matrix2cd m_field;  // restrictions in the {|0>,|1>} basis
  Eigen::Matrix2cd m_perp;
  double phase_convention_residual = 0.0;
  double anticommutator_norm = 0.0;
  double invariance_residual = 0.0;
  double square_residual = 0.0;  // max ||M^2 + I|| over both restrictions

  // World direction of each frame Bloch axis: x = perp x field, y = perp, z = field.
  Vec3 world_axis(int a) const;
  Vec3 to_world(const Vec3& frame_bloch) const;
  Vec3 to_frame(const Vec3& world_bloch) const;
  // Pure qubit state with the given frame Bloch vector (unit).
  Vector state(const Vec3& frame_bloch) const;
  Vector plus_state() const { return state(Vec3::UnitX()); }
  Vector minus_state() const { return state(-Vec3::UnitX()); }
};

// Frame from an orthonormal basis (dim x 2) and the two string maps.
LogicalFrame logical_frame(const DenseMatrix& basis, const LinearMap& sigma_field, const LinearMap& sigma_perp,
                           const Direction& field_dir, const Direction& perp_dir, const Lattice& lattice);
// Frame on a lattice with the full string operators from site k.
LogicalFrame logical_frame(const DenseMatrix& basis, const Direction& field_dir, const Lattice& lattice,
                           std::optional<Direction> perp_dir = {}, int k = 1);

// Exactly degenerate S=1/2 ground doublet of an edge-partner terminated chain.
struct EdgeDoublet {
  Lattice lattice{1};
  DenseMatrix basis;  // dim x 2
  double splitting = 0.0;
  double gap = 0.0;
  std::vector<double> residual_norms;
};

EdgeDoublet edge_doublet(const Lattice& lattice, const CouplingConstants& c, std::uint64_t seed = kDefaultSolverSeed);

struct MeasurementOutcome {
  int m = 0;
  double probability = 0.0;
  std::array<double, 3> probabilities{};  // for m = +1, 0, -1
  ChainState post_state{Lattice(1), spin1_basis(1)};
};

// Projective measurement of S^axis on one site (m = +1/0/-1; a spin-1/2
// site reports +1/-1 for up/down along the axis).
MeasurementOutcome measure_site(const ChainState& s, int site, const Direction& axis, Rng& rng);
MeasurementOutcome measure_site_forced(const ChainState& s, int site, const Direction& axis, int m);
std::array<double, 3> site_probabilities(const Vector& psi, const Lattice& lattice, int site, const Direction& axis);

MeasurementOutcome project_right_edge(const ChainState& s, int n, int outcome_m);
MeasurementOutcome project_right_edge(const ChainState& s, int n, Rng& rng);

// Readout measurement on an already decoupled boundary spin.
MeasurementOutcome measure_edge_qubit(const ChainState& s, const Direction& axis, int boundary_site, Rng& rng);

struct BlochReport {
  Vec3 vector = Vec3::Zero();  // frame coordinates, weighted by the qubit population
  double leakage = 0.0;
};

// 2x2 reduced qubit density in the frame basis. The state may carry extra
// leading sites (already decoupled); they are traced out.
Eigen::Matrix2cd qubit_density(const Vector& psi, const LogicalFrame& frame);
BlochReport bloch_vector(const Vector& psi, const LogicalFrame& frame);
BlochReport bloch_vector(const ChainState& s, const LogicalFrame& frame);

// <phi| Tr_leading(|psi><psi|) |phi> for phi on the trailing sites.
double reduced_overlap(const Vector& psi, const Vector& phi);

}  // namespace holosense
