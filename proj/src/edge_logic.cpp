#include "holosense/edge_logic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "holosense/errors.hpp"

namespace holosense {

StringOperator::StringOperator(const Direction& d, int first, int last, const Lattice& lattice)
    : dir_(d), first_(first), last_(last), lattice_(lattice) {
  if (first < 1 || last > lattice.site_count() || first > last) throw InvalidArgument("invalid string site range");
  for (int j = first; j <= last; ++j) factors_.emplace_back(pi_rotation(d, lattice.local_dim(j)), 1e-15);
}

Vector StringOperator::apply(const Vector& v) const {
  Vector out = v;
  for (int j = first_; j <= last_; ++j) holosense::apply_local(factors_[j - first_], lattice_, j, out);
  return out;
}

LinearMap StringOperator::as_map() const {
  return [op = *this](const Vector& v) { return op.apply(v); };
}

SpinOperator StringOperator::to_sparse() const {
  SpinOperator u = SpinOperator::identity(lattice_);
  for (int j = first_; j <= last_; ++j) u = u * embed_site(factors_[j - first_].matrix(), j, lattice_);
  return u;
}

StringOperator string_operator(const Direction& d, int k, int n, const Lattice& lattice) {
  if (k < 1 || k > n || n > lattice.spin1_sites()) throw InvalidArgument("invalid string range k..n");
  return {d, k, n, lattice};
}

StringOperator string_operator(const Direction& d, int k, int n) { return string_operator(d, k, n, Lattice(n)); }

StringOperator full_string_operator(const Direction& d, int k, const Lattice& lattice) {
  return {d, k, lattice.site_count(), lattice};
}

double commutator_norm(const SpinOperator& h, const LinearMap& u, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector v(h.dim());
    for (Index i = 0; i < v.size(); ++i) v(i) = Complex(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
    v.normalize();
    const Vector huv = h.apply(u(v));
    const Vector uhv = u(h.apply(v));
    worst = std::max(worst, (huv - uhv).norm());
  }
  return worst;
}

namespace {
double spectral_norm(const Eigen::Matrix2cd& m) {
  return Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues()(0);
}
}  // namespace

Vec3 LogicalFrame::world_axis(int a) const {
  if (a == 2) return field_dir.vec();
  if (a == 1) return perp_dir.vec();
  return perp_dir.vec().cross(field_dir.vec());
}

Vec3 LogicalFrame::to_world(const Vec3& b) const {
  return b.x() * world_axis(0) + b.y() * world_axis(1) + b.z() * world_axis(2);
}

Vec3 LogicalFrame::to_frame(const Vec3& w) const {
  return {w.dot(world_axis(0)), w.dot(world_axis(1)), w.dot(world_axis(2))};
}

Vector LogicalFrame::state(const Vec3& b) const {
  const double n = b.norm();
  if (std::abs(n - 1.0) > 1e-9) throw InvalidArgument("qubit state needs a unit Bloch vector");
  const double theta = std::acos(std::clamp(b.z() / n, -1.0, 1.0));
  const double phi = std::atan2(b.y(), b.x());
  return std::cos(theta / 2) * zero_state + std::polar(std::sin(theta / 2), phi) * one_state;
}

LogicalFrame logical_frame(const DenseMatrix& basis, const LinearMap& sigma_field, const LinearMap& sigma_perp,
                           const Direction& field_dir, const Direction& perp_dir, const Lattice& lattice) {
  if (basis.cols() != 2) throw InvalidArgument("logical frame needs a two-dimensional subspace");
  if (basis.rows() != lattice.dim()) throw InvalidArgument("subspace basis does not match lattice");
  if (std::abs(field_dir.dot(perp_dir)) > 1e-10) throw InvalidArgument("perp direction must be orthogonal");
  if ((basis.adjoint() * basis - Eigen::Matrix2cd::Identity()).norm() > 1e-8)
    throw InvalidArgument("subspace basis is not orthonormal");

  DenseMatrix uf(basis.rows(), 2), up(basis.rows(), 2);
  for (int c = 0; c < 2; ++c) {
    uf.col(c) = sigma_field(basis.col(c));
    up.col(c) = sigma_perp(basis.col(c));
  }
  const Eigen::Matrix2cd mf = basis.adjoint() * uf;
  const Eigen::Matrix2cd mp = basis.adjoint() * up;

  LogicalFrame fr;
  fr.lattice = lattice;
  fr.field_dir = field_dir;
  fr.perp_dir = perp_dir;
  fr.invariance_residual = std::max((uf - basis * mf).norm(), (up - basis * mp).norm());
  if (fr.invariance_residual > 1e-3)
    throw FrameExtractionError("subspace not invariant under the string operators (residual " +
                               std::to_string(fr.invariance_residual) + ")");
  const double unitarity = std::max((mf.adjoint() * mf - Eigen::Matrix2cd::Identity()).norm(),
                                    (mp.adjoint() * mp - Eigen::Matrix2cd::Identity()).norm());
  if (unitarity > 1e-3)
    throw FrameExtractionError("string restriction is not unitary (residual " + std::to_string(unitarity) + ")");

  Eigen::Matrix2cd k = Complex(0.0, -1.0) * mf;
  k = 0.5 * (k + k.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(k);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
  if (!(lo < -0.5 && hi > 0.5))
    throw FrameExtractionError("field string restriction lacks opposite eigenphases");
  const int zero_idx = kZeroEigenphaseSign > 0 ? 1 : 0;
  const Eigen::Vector2cd c0 = es.eigenvectors().col(zero_idx);
  Eigen::Vector2cd c1 = es.eigenvectors().col(1 - zero_idx);
  const Complex off = c0.adjoint() * mp * c1;
  if (std::abs(off) < 1e-6) throw FrameExtractionError("perp string does not connect the frame states");
  c1 *= std::conj(off) / std::abs(off);

  Eigen::Matrix2cd cm;
  cm.col(0) = c0;
  cm.col(1) = c1;
  fr.zero_state = basis * c0;
  fr.one_state = basis * c1;
  fr.m_field = cm.adjoint() * mf * cm;
  fr.m_perp = cm.adjoint() * mp * cm;
  fr.anticommutator_norm = spectral_norm(fr.m_field * fr.m_perp + fr.m_perp * fr.m_field);
  fr.square_residual = std::max(spectral_norm(fr.m_field * fr.m_field + Eigen::Matrix2cd::Identity()),
                                spectral_norm(fr.m_perp * fr.m_perp + Eigen::Matrix2cd::Identity()));
  fr.phase_convention_residual = std::max(unitarity, fr.anticommutator_norm);
  return fr;
}

LogicalFrame logical_frame(const DenseMatrix& basis, const Direction& field_dir, const Lattice& lattice,
                           std::optional<Direction> perp_dir, int k) {
  const Direction perp = perp_dir ? *perp_dir : orthogonal_direction(field_dir);
  const StringOperator sf = full_string_operator(field_dir, k, lattice);
  const StringOperator sp = full_string_operator(perp, k, lattice);
  return logical_frame(basis, sf.as_map(), sp.as_map(), field_dir, perp, lattice);
}

EdgeDoublet edge_doublet(const Lattice& lattice, const CouplingConstants& c, std::uint64_t seed) {
  if (!lattice.has_partner()) throw InvalidArgument("edge doublet needs an edge-partner terminated lattice");
  const SpinOperator h = chain_hamiltonian(1, lattice, c);
  const SpectrumSlice s = lowest_eigenpairs(h, 3, 1e-10, seed);
  EdgeDoublet d;
  d.lattice = lattice;
  d.basis = s.eigenvectors.leftCols(2);
  d.splitting = s.eigenvalues[1] - s.eigenvalues[0];
  d.gap = s.eigenvalues[2] - s.eigenvalues[1];
  d.residual_norms = s.residual_norms;
  if (!(d.splitting < 1e-7) || !(d.gap > 1e-3))
    throw FrameExtractionError("ground doublet is not isolated: splitting " + std::to_string(d.splitting) +
                               ", gap " + std::to_string(d.gap));
  return d;
}

namespace {

// Projectors onto the S^axis eigenspaces of one site, in outcome order +1, 0, -1.
std::array<DenseMatrix, 3> site_projectors(int local_dim, const Direction& axis) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(spin_along(axis, local_dim));
  std::array<DenseMatrix, 3> p;
  for (auto& m : p) m = DenseMatrix::Zero(local_dim, local_dim);
  for (int i = 0; i < local_dim; ++i) {
    const double lam = es.eigenvalues()(i);
    const int slot = lam > 0.25 ? 0 : (lam < -0.25 ? 2 : 1);
    p[slot] += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  }
  return p;
}

int slot_of(int m) {
  if (m == 1) return 0;
  if (m == 0) return 1;
  if (m == -1) return 2;
  throw InvalidArgument("measurement outcome must be +1, 0 or -1");
}

MeasurementOutcome collapse(const ChainState& s, int site, const Direction& axis, int m) {
  const Lattice& lat = s.lattice();
  const auto proj = site_projectors(lat.local_dim(site), axis);
  MeasurementOutcome out;
  out.probabilities = site_probabilities(s.amplitudes(), lat, site, axis);
  out.m = m;
  out.probability = out.probabilities[slot_of(m)];
  if (out.probability < 1e-12)
    throw ImpossibleOutcome("outcome m=" + std::to_string(m) + " has probability " + std::to_string(out.probability));
  Vector v = s.amplitudes();
  holosense::apply_local(kernels::LocalGate(proj[slot_of(m)]), lat, site, v);
  out.post_state = ChainState::normalized(lat, std::move(v));
  return out;
}

}  // namespace

std::array<double, 3> site_probabilities(const Vector& psi, const Lattice& lattice, int site, const Direction& axis) {
  const auto proj = site_projectors(lattice.local_dim(site), axis);
  std::array<double, 3> p{};
  for (int k = 0; k < 3; ++k) {
    if (proj[k].norm() == 0.0) continue;
    Vector v = psi;
    holosense::apply_local(kernels::LocalGate(proj[k]), lattice, site, v);
    p[k] = v.squaredNorm();
  }
  return p;
}

MeasurementOutcome measure_site_forced(const ChainState& s, int site, const Direction& axis, int m) {
  return collapse(s, site, axis, m);
}

MeasurementOutcome measure_site(const ChainState& s, int site, const Direction& axis, Rng& rng) {
  const auto p = site_probabilities(s.amplitudes(), s.lattice(), site, axis);
  const double total = p[0] + p[1] + p[2];
  const double u = uniform01(rng) * total;
  int m = -1;
  if (u < p[0])
    m = 1;
  else if (u < p[0] + p[1])
    m = 0;
  if (m == -1 && p[2] <= 0.0) m = p[1] > 0.0 ? 0 : 1;  // guard against rounding at the top edge
  return collapse(s, site, axis, m);
}

MeasurementOutcome project_right_edge(const ChainState& s, int n, int outcome_m) {
  if (n < 1 || n > s.lattice().spin1_sites()) throw InvalidArgument("right edge site outside the chain");
  return measure_site_forced(s, n, Direction::z_axis(), outcome_m);
}

MeasurementOutcome project_right_edge(const ChainState& s, int n, Rng& rng) {
  if (n < 1 || n > s.lattice().spin1_sites()) throw InvalidArgument("right edge site outside the chain");
  return measure_site(s, n, Direction::z_axis(), rng);
}

MeasurementOutcome measure_edge_qubit(const ChainState& s, const Direction& axis, int boundary_site, Rng& rng) {
  return measure_site(s, boundary_site, axis, rng);
}

namespace {
Eigen::Map<const DenseMatrix> as_blocks(const Vector& psi, Index frame_dim) {
  if (frame_dim <= 0 || psi.size() % frame_dim != 0)
    throw InvalidArgument("state does not factor over the frame lattice");
  return Eigen::Map<const DenseMatrix>(psi.data(), frame_dim, psi.size() / frame_dim);
}
}  // namespace

Eigen::Matrix2cd qubit_density(const Vector& psi, const LogicalFrame& frame) {
  const auto blocks = as_blocks(psi, frame.zero_state.size());
  DenseMatrix c(2, blocks.cols());
  c.row(0) = frame.zero_state.adjoint() * blocks;
  c.row(1) = frame.one_state.adjoint() * blocks;
  return c * c.adjoint();
}

BlochReport bloch_vector(const Vector& psi, const LogicalFrame& frame) {
  const Eigen::Matrix2cd rho = qubit_density(psi, frame);
  BlochReport r;
  r.leakage = std::max(0.0, psi.squaredNorm() - rho.trace().real());
  if (r.leakage > 0.5) throw NotAQubitState("state leaks out of the qubit subspace: " + std::to_string(r.leakage));
  r.vector = Vec3(2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real());
  return r;
}

BlochReport bloch_vector(const ChainState& s, const LogicalFrame& frame) { return bloch_vector(s.amplitudes(), frame); }

double reduced_overlap(const Vector& psi, const Vector& phi) {
  const auto blocks = as_blocks(psi, phi.size());
  return (phi.adjoint() * blocks).squaredNorm();
}

}  // namespace holosense
