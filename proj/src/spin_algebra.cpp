#include "holosense/spin_algebra.hpp"

#include <cmath>
#include <string>

#include "holosense/errors.hpp"
#include "holosense/kernels.hpp"

namespace holosense {

Direction::Direction(double x, double y, double z) : v_(x, y, z) {
  const double n2 = v_.squaredNorm();
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > 1e-12)
    throw InvalidArgument("invalid direction: norm^2 = " + std::to_string(n2));
}

Direction Direction::normalized(double x, double y, double z) { return normalized(Vec3(x, y, z)); }

Direction Direction::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) throw InvalidArgument("invalid direction: zero vector");
  const Vec3 u = v / n;
  return {u.x(), u.y(), u.z()};
}

Lattice::Lattice(int spin1_sites, bool edge_partner) : n_(spin1_sites), partner_(edge_partner) {
  if (spin1_sites < 1 || spin1_sites > 14) throw InvalidArgument("lattice needs 1..14 spin-1 sites");
  dim_ = 1;
  for (int i = 0; i < n_; ++i) dim_ *= 3;
  if (partner_) dim_ *= 2;
}

void Lattice::check_site(int site) const {
  if (site < 1 || site > site_count())
    throw InvalidArgument("site " + std::to_string(site) + " outside 1.." + std::to_string(site_count()));
}

int Lattice::local_dim(int site) const {
  check_site(site);
  return site <= n_ ? 3 : 2;
}

Index Lattice::outer(int site) const {
  check_site(site);
  Index o = 1;
  for (int s = 1; s < site; ++s) o *= local_dim(s);
  return o;
}

Index Lattice::inner(int site) const {
  check_site(site);
  Index r = 1;
  for (int s = site + 1; s <= site_count(); ++s) r *= local_dim(s);
  return r;
}

Lattice Lattice::without_leading(int count) const {
  if (count < 0 || count >= n_) throw InvalidArgument("cannot remove that many leading sites");
  return Lattice(n_ - count, partner_);
}

SpinOperator::SpinOperator(Lattice lattice, SparseMatrix matrix) : lattice_(lattice), m_(std::move(matrix)) {
  if (m_.rows() != lattice_.dim() || m_.cols() != lattice_.dim())
    throw InvalidArgument("operator dimension does not match lattice");
  m_.makeCompressed();
}

SpinOperator SpinOperator::zero(const Lattice& lattice) {
  return {lattice, SparseMatrix(lattice.dim(), lattice.dim())};
}

SpinOperator SpinOperator::identity(const Lattice& lattice) {
  SparseMatrix m(lattice.dim(), lattice.dim());
  m.setIdentity();
  return {lattice, std::move(m)};
}

Vector SpinOperator::apply(const Vector& v) const {
  if (v.size() != dim()) throw InvalidArgument("dimension mismatch in operator application");
  Vector out(dim());
  kernels::spmv(m_, v.data(), out.data());
  return out;
}

SpinOperator SpinOperator::adjoint() const { return {lattice_, SparseMatrix(m_.adjoint())}; }

double SpinOperator::hermiticity_error() const {
  SparseMatrix diff = m_ - SparseMatrix(m_.adjoint());
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

SpinOperator SpinOperator::operator+(const SpinOperator& o) const {
  if (o.lattice_ != lattice_) throw InvalidArgument("lattice mismatch");
  return {lattice_, SparseMatrix(m_ + o.m_)};
}

SpinOperator SpinOperator::operator-(const SpinOperator& o) const {
  if (o.lattice_ != lattice_) throw InvalidArgument("lattice mismatch");
  return {lattice_, SparseMatrix(m_ - o.m_)};
}

SpinOperator SpinOperator::operator*(const SpinOperator& o) const {
  if (o.lattice_ != lattice_) throw InvalidArgument("lattice mismatch");
  return {lattice_, SparseMatrix(m_ * o.m_)};
}

SpinOperator SpinOperator::operator*(Complex c) const { return {lattice_, SparseMatrix(m_ * c)}; }

SpinOperator& SpinOperator::operator+=(const SpinOperator& o) {
  if (o.lattice_ != lattice_) throw InvalidArgument("lattice mismatch");
  m_ += o.m_;
  m_.makeCompressed();
  return *this;
}

ChainState::ChainState(Lattice lattice, Vector amplitudes) : lattice_(lattice), amp_(std::move(amplitudes)) {
  if (amp_.size() != lattice_.dim()) throw InvalidArgument("state dimension does not match lattice");
  const double n = amp_.norm();
  if (std::abs(n - 1.0) > 1e-10) throw InvalidArgument("state is not normalized: norm " + std::to_string(n));
}

ChainState ChainState::normalized(Lattice lattice, Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 1e-300)) throw InvalidArgument("cannot normalize a zero vector");
  amplitudes /= n;
  return {lattice, std::move(amplitudes)};
}

ChainState ChainState::product(const Lattice& lattice, const std::vector<Vector>& locals) {
  if (static_cast<int>(locals.size()) != lattice.site_count())
    throw InvalidArgument("need one local vector per site");
  Vector v = Vector::Ones(1);
  for (int s = 1; s <= lattice.site_count(); ++s) {
    const Vector& l = locals[s - 1];
    if (l.size() != lattice.local_dim(s)) throw InvalidArgument("local vector has wrong dimension");
    Vector next(v.size() * l.size());
    for (Index i = 0; i < v.size(); ++i)
      for (Index a = 0; a < l.size(); ++a) next(i * l.size() + a) = v(i) * l(a);
    v = std::move(next);
  }
  return normalized(lattice, std::move(v));
}

SpinComponents spin1_components() {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  DenseMatrix sx = DenseMatrix::Zero(3, 3), sy = DenseMatrix::Zero(3, 3), sz = DenseMatrix::Zero(3, 3);
  sx(0, 1) = sx(1, 0) = sx(1, 2) = sx(2, 1) = r;
  sy(0, 1) = -i * r;
  sy(1, 0) = i * r;
  sy(1, 2) = -i * r;
  sy(2, 1) = i * r;
  sz(0, 0) = 1.0;
  sz(2, 2) = -1.0;
  return {sx, sy, sz};
}

SpinComponents spin_half_components() {
  const Complex i(0.0, 1.0);
  DenseMatrix sx = DenseMatrix::Zero(2, 2), sy = DenseMatrix::Zero(2, 2), sz = DenseMatrix::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 0.5;
  sy(0, 1) = -0.5 * i;
  sy(1, 0) = 0.5 * i;
  sz(0, 0) = 0.5;
  sz(1, 1) = -0.5;
  return {sx, sy, sz};
}

SpinComponents spin_components(int local_dim) {
  if (local_dim == 3) return spin1_components();
  if (local_dim == 2) return spin_half_components();
  throw InvalidArgument("only spin-1 and spin-1/2 sites are supported");
}

DenseMatrix spin_along(const Direction& d, int local_dim) {
  const SpinComponents s = spin_components(local_dim);
  return d.x() * s.x + d.y() * s.y + d.z() * s.z;
}

DenseMatrix hermitian_exp(const DenseMatrix& h, Complex factor) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  const Eigen::VectorXcd phases = (factor * es.eigenvalues().cast<Complex>().array()).exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DenseMatrix rotation(const Direction& d, double angle, int local_dim) {
  return hermitian_exp(spin_along(d, local_dim), Complex(0.0, angle));
}

DenseMatrix pi_rotation(const Direction& d, int local_dim) { return rotation(d, kPi, local_dim); }

Direction orthogonal_direction(const Direction& d) {
  if (std::abs(d.z()) < 0.9) return Direction::normalized(d.vec().cross(Vec3::UnitZ()));
  return Direction::normalized(Vec3::UnitY().cross(d.vec()));
}

Vector spin1_basis(int m) {
  if (m < -1 || m > 1) throw InvalidArgument("spin-1 projection must be -1, 0 or +1");
  Vector v = Vector::Zero(3);
  v(1 - m) = 1.0;
  return v;
}

SpinOperator embed_block(const DenseMatrix& op, int first_site, int span, const Lattice& lattice) {
  if (span < 1) throw InvalidArgument("block span must be positive");
  lattice.check_site(first_site);
  lattice.check_site(first_site + span - 1);
  Index block = 1;
  for (int s = first_site; s < first_site + span; ++s) block *= lattice.local_dim(s);
  if (op.rows() != block || op.cols() != block) throw InvalidArgument("local operator has wrong dimension");
  const Index outer = lattice.outer(first_site);
  const Index inner = lattice.inner(first_site + span - 1);

  std::vector<Eigen::Triplet<Complex, std::int64_t>> trips;
  Index nnz = 0;
  for (Index a = 0; a < block; ++a)
    for (Index b = 0; b < block; ++b)
      if (op(a, b) != Complex(0.0)) ++nnz;
  trips.reserve(static_cast<size_t>(nnz * outer * inner));
  for (Index o = 0; o < outer; ++o)
    for (Index a = 0; a < block; ++a)
      for (Index b = 0; b < block; ++b) {
        const Complex v = op(a, b);
        if (v == Complex(0.0)) continue;
        const Index row0 = (o * block + a) * inner;
        const Index col0 = (o * block + b) * inner;
        for (Index r = 0; r < inner; ++r) trips.emplace_back(row0 + r, col0 + r, v);
      }
  SparseMatrix m(lattice.dim(), lattice.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return {lattice, std::move(m)};
}

SpinOperator embed_site(const DenseMatrix& op, int site, const Lattice& lattice) {
  return embed_block(op, site, 1, lattice);
}

SpinOperator embed_bond(const DenseMatrix& op, int site, const Lattice& lattice) {
  return embed_block(op, site, 2, lattice);
}

kernels::GateLayout gate_layout(const Lattice& lattice, int first_site, int span) {
  lattice.check_site(first_site);
  lattice.check_site(first_site + span - 1);
  return {lattice.outer(first_site), lattice.inner(first_site + span - 1)};
}

void apply_local(const kernels::LocalGate& gate, const Lattice& lattice, int first_site, Vector& psi) {
  if (psi.size() != lattice.dim()) throw InvalidArgument("state dimension does not match lattice");
  int span = 0;
  Index block = 1;
  while (block < gate.block()) block *= lattice.local_dim(first_site + span++);
  if (block != gate.block()) throw InvalidArgument("gate does not match the local dimensions");
  kernels::apply_local(gate, gate_layout(lattice, first_site, span), psi.data());
}

Vector apply(const SpinOperator& op, const ChainState& s) {
  if (op.lattice() != s.lattice()) throw InvalidArgument("dimension mismatch in apply");
  return op.apply(s.amplitudes());
}

}  // namespace holosense
