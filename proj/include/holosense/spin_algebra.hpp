#pragma once

#include <array>
#include <vector>

#include "holosense/kernels.hpp"
#include "holosense/types.hpp"

namespace holosense {

// Unit 3-vector. Construction checks the norm; use normalized() to rescale.
class Direction {
 public:
  Direction(double x, double y, double z);
  static Direction normalized(double x, double y, double z);
  static Direction normalized(const Vec3& v);
  static Direction x_axis() { return {1.0, 0.0, 0.0}; }
  static Direction y_axis() { return {0.0, 1.0, 0.0}; }
  static Direction z_axis() { return {0.0, 0.0, 1.0}; }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Vec3& vec() const { return v_; }
  double dot(const Direction& o) const { return v_.dot(o.v_); }
  Direction operator-() const { return Direction(-v_.x(), -v_.y(), -v_.z()); }

 private:
  Vec3 v_;
};

// Open chain of spin-1 sites 1..n, optionally terminated by a spin-1/2
// partner at site n+1. Site 1 is the most significant digit of the basis
// index; per-site basis order is m = +1, 0, -1 (and +1/2, -1/2 for the partner).
class Lattice {
 public:
  explicit Lattice(int spin1_sites, bool edge_partner = false);

  int spin1_sites() const { return n_; }
  bool has_partner() const { return partner_; }
  int site_count() const { return n_ + (partner_ ? 1 : 0); }
  int partner_site() const { return n_ + 1; }
  int local_dim(int site) const;
  Index dim() const { return dim_; }
  // Product of local dimensions of the sites before / after `site`.
  Index outer(int site) const;
  Index inner(int site) const;
  // Same lattice with the first `count` spin-1 sites removed.
  Lattice without_leading(int count) const;
  void check_site(int site) const;

  bool operator==(const Lattice& o) const { return n_ == o.n_ && partner_ == o.partner_; }
  bool operator!=(const Lattice& o) const { return !(*this == o); }

 private:
  int n_;
  bool partner_;
  Index dim_;
};

class SpinOperator {
 public:
  SpinOperator(Lattice lattice, SparseMatrix matrix);
  static SpinOperator zero(const Lattice& lattice);
  static SpinOperator identity(const Lattice& lattice);

  const Lattice& lattice() const { return lattice_; }
  const SparseMatrix& matrix() const { return m_; }
  Index dim() const { return lattice_.dim(); }

  Vector apply(const Vector& v) const;
  SpinOperator adjoint() const;
  DenseMatrix dense() const { return DenseMatrix(m_); }
  // Largest elementwise deviation from A = A^dagger.
  double hermiticity_error() const;

  SpinOperator operator+(const SpinOperator& o) const;
  SpinOperator operator-(const SpinOperator& o) const;
  SpinOperator operator*(const SpinOperator& o) const;
  SpinOperator operator*(Complex c) const;
  SpinOperator& operator+=(const SpinOperator& o);

 private:
  Lattice lattice_;
  SparseMatrix m_;
};

inline SpinOperator operator*(Complex c, const SpinOperator& a) { return a * c; }

// Normalized amplitude vector on a lattice.
class ChainState {
 public:
  ChainState(Lattice lattice, Vector amplitudes);  // norm must be 1 within 1e-10
  static ChainState normalized(Lattice lattice, Vector amplitudes);
  // Product state from one local vector per site (normalized on return).
  static ChainState product(const Lattice& lattice, const std::vector<Vector>& locals);

  const Lattice& lattice() const { return lattice_; }
  const Vector& amplitudes() const { return amp_; }
  Index dim() const { return amp_.size(); }

 private:
  Lattice lattice_;
  Vector amp_;
};

// Spin-1 matrices (3x3) or spin-1/2 matrices sigma/2 (2x2) in the S^z basis.
struct SpinComponents {
  DenseMatrix x, y, z;
  const DenseMatrix& operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
};

SpinComponents spin1_components();
SpinComponents spin_half_components();
SpinComponents spin_components(int local_dim);

DenseMatrix spin_along(const Direction& d, int local_dim = 3);
// exp(i * angle * S^d) by spectral decomposition.
DenseMatrix rotation(const Direction& d, double angle, int local_dim = 3);
DenseMatrix pi_rotation(const Direction& d, int local_dim = 3);
Direction orthogonal_direction(const Direction& d);

// Single-site vectors along the S^z basis.
Vector spin1_basis(int m);

// I x ... x op x ... x I, with op acting on `span` consecutive sites from `site`.
SpinOperator embed_site(const DenseMatrix& op, int site, const Lattice& lattice);
SpinOperator embed_bond(const DenseMatrix& op, int site, const Lattice& lattice);
SpinOperator embed_block(const DenseMatrix& op, int first_site, int span, const Lattice& lattice);

Vector apply(const SpinOperator& op, const ChainState& s);

// Index layout for a local gate on `span` sites starting at `first_site`.
kernels::GateLayout gate_layout(const Lattice& lattice, int first_site, int span);
// In-place application of a dense local operator to a state vector.
void apply_local(const kernels::LocalGate& gate, const Lattice& lattice, int first_site, Vector& psi);

// exp(factor * H) for Hermitian H via eigendecomposition.
DenseMatrix hermitian_exp(const DenseMatrix& h, Complex factor);

}  // namespace holosense
