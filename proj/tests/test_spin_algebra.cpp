#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "holosense/errors.hpp"
#include "holosense/spin_algebra.hpp"

using namespace holosense;

namespace {

Direction random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Direction::normalized(Vec3(g(rng), g(rng), g(rng)));
}

double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Direction, RejectsNonUnitInput) {
  EXPECT_THROW(Direction(1.0, 1.0, 0.0), InvalidArgument);
  EXPECT_NO_THROW(Direction(0.0, 0.0, 1.0));
  const Direction d = Direction::normalized(1.0, 1.0, 1.0);
  EXPECT_NEAR(d.vec().norm(), 1.0, 1e-15);
}

TEST(SpinComponents, SzIsDiagonalInTheOrderedBasis) {
  const auto s = spin1_components();
  DenseMatrix expect = DenseMatrix::Zero(3, 3);
  expect(0, 0) = 1.0;
  expect(2, 2) = -1.0;
  EXPECT_LT(max_abs(s.z - expect), 1e-15);
}

TEST(SpinComponents, SxOnZeroGivesSymmetricSuperposition) {
  const auto s = spin1_components();
  const Vector out = s.x * spin1_basis(0);
  const Vector expect = (spin1_basis(1) + spin1_basis(-1)) / std::sqrt(2.0);
  EXPECT_LT((out - expect).norm(), 1e-15);
}

TEST(SpinComponents, CommutationRelationsAndSpectrum) {
  const auto s = spin1_components();
  const Complex i(0.0, 1.0);
  EXPECT_LT(max_abs(s.x * s.y - s.y * s.x - i * s.z), 1e-14);
  EXPECT_LT(max_abs(s.y * s.z - s.z * s.y - i * s.x), 1e-14);
  EXPECT_LT(max_abs(s.z * s.x - s.x * s.z - i * s.y), 1e-14);
  for (int a = 0; a < 3; ++a) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s[a]);
    EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-14);
  }
}

TEST(SpinAlong, AxisDirectionsGiveComponents) {
  const auto s = spin1_components();
  EXPECT_LT(max_abs(spin_along(Direction::z_axis()) - s.z), 1e-15);
  EXPECT_LT(max_abs(spin_along(Direction::x_axis()) - s.x), 1e-15);
}

TEST(SpinAlong, DiagonalDirectionHasSpinOneSpectrum) {
  const DenseMatrix s = spin_along(Direction::normalized(1.0, 1.0, 1.0));
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s);
  EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-12);
}

TEST(SpinAlong, RandomDirectionsAreHermitianWithSpinOneSpectrum) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const DenseMatrix s = spin_along(random_direction(rng));
    EXPECT_LT(max_abs(s - s.adjoint()), 1e-12);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s);
    EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-10);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-10);
    EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-10);
  }
}

TEST(PiRotation, XRotationNegatesZeroState) {
  const Vector out = pi_rotation(Direction::x_axis()) * spin1_basis(0);
  EXPECT_LT((out + spin1_basis(0)).norm(), 1e-12);
}

TEST(PiRotation, ZRotationIsPhaseDiagonal) {
  DenseMatrix expect = DenseMatrix::Zero(3, 3);
  expect(0, 0) = -1.0;
  expect(1, 1) = 1.0;
  expect(2, 2) = -1.0;
  EXPECT_LT(max_abs(pi_rotation(Direction::z_axis()) - expect), 1e-12);
}

TEST(PiRotation, SquaresToIdentityAndActsOnSpins) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const Direction d = random_direction(rng);
    const DenseMatrix r = pi_rotation(d);
    EXPECT_LT(max_abs(r * r - DenseMatrix::Identity(3, 3)), 1e-10);
    EXPECT_LT(max_abs(r.adjoint() * r - DenseMatrix::Identity(3, 3)), 1e-10);
    EXPECT_LT(max_abs(r * spin_along(d) * r.adjoint() - spin_along(d)), 1e-10);
    const Direction v = orthogonal_direction(d);
    EXPECT_LT(max_abs(r * spin_along(v) * r.adjoint() + spin_along(v)), 1e-10);
  }
}

TEST(OrthogonalDirection, FixedConventionAndOrthogonality) {
  const Direction fz = orthogonal_direction(Direction::z_axis());
  EXPECT_NEAR(fz.x(), 1.0, 1e-15);
  EXPECT_NEAR(fz.y(), 0.0, 1e-15);
  EXPECT_NEAR(fz.z(), 0.0, 1e-15);
  const Direction fx = orthogonal_direction(Direction::x_axis());
  EXPECT_NEAR(fx.dot(Direction::x_axis()), 0.0, 1e-15);
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const Direction d = random_direction(rng);
    const Direction v = orthogonal_direction(d);
    EXPECT_NEAR(v.vec().norm(), 1.0, 1e-12);
    EXPECT_LT(std::abs(v.dot(d)), 1e-12);
    const Direction again = orthogonal_direction(d);
    EXPECT_EQ(v.vec(), again.vec());
  }
}

TEST(EmbedSite, MatchesKroneckerStructure) {
  const auto s = spin1_components();
  const SpinOperator a = embed_site(s.z, 1, Lattice(2));
  EXPECT_EQ(a.dim(), 9);
  DenseMatrix expect = DenseMatrix::Zero(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) expect(3 * i + j, 3 * i + j) = s.z(i, i);
  EXPECT_LT(max_abs(a.dense() - expect), 1e-15);

  const SpinOperator id = embed_site(DenseMatrix::Identity(3, 3), 2, Lattice(4));
  EXPECT_LT(max_abs(id.dense() - DenseMatrix::Identity(81, 81)), 1e-15);

  const SpinOperator x = embed_site(s.x, 2, Lattice(3));
  EXPECT_EQ(x.dim(), 27);
  EXPECT_LT(std::abs(x.dense().trace()), 1e-15);
}

TEST(EmbedSite, RejectsOutOfRangeSite) {
  const auto s = spin1_components();
  EXPECT_THROW(embed_site(s.z, 0, Lattice(3)), InvalidArgument);
  EXPECT_THROW(embed_site(s.z, 4, Lattice(3)), InvalidArgument);
}

TEST(EmbedSite, DistinctSitesCommuteExactly) {
  const auto s = spin1_components();
  const Lattice lattice(4);
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) {
      const SpinOperator x = embed_site(s.x, a, lattice), y = embed_site(s.y, b, lattice);
      EXPECT_EQ((x * y - y * x).dense().cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Apply, IdentityAndEigenstate) {
  const Lattice lattice(3);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  Vector v(lattice.dim());
  for (Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  const ChainState s = ChainState::normalized(lattice, v);
  EXPECT_LT((apply(SpinOperator::identity(lattice), s) - s.amplitudes()).norm(), 1e-15);

  const ChainState up = ChainState::product(lattice, {spin1_basis(1), spin1_basis(0), spin1_basis(-1)});
  const Vector out = apply(embed_site(spin1_components().z, 1, lattice), up);
  EXPECT_LT((out - up.amplitudes()).norm(), 1e-15);
}

TEST(Apply, HermitianExpectationIsReal) {
  const Lattice lattice(3);
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g;
  DenseMatrix m(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) m(i, j) = Complex(g(rng), g(rng));
  const SpinOperator h = embed_bond(m + m.adjoint(), 2, lattice);
  EXPECT_LT(h.hermiticity_error(), 1e-12);
  Vector v(lattice.dim());
  for (Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  const ChainState s = ChainState::normalized(lattice, v);
  const Complex e = s.amplitudes().dot(apply(h, s));
  EXPECT_LT(std::abs(e.imag()), 1e-12);
}

TEST(Apply, DimensionMismatchThrows) {
  const ChainState s = ChainState::product(Lattice(2), {spin1_basis(1), spin1_basis(1)});
  EXPECT_THROW(apply(SpinOperator::identity(Lattice(3)), s), InvalidArgument);
}

TEST(ChainState, RejectsUnnormalizedAmplitudes) {
  Vector v = Vector::Zero(9);
  v(0) = 2.0;
  EXPECT_THROW(ChainState(Lattice(2), v), InvalidArgument);
}

TEST(Lattice, PartnerSiteIsLeastSignificant) {
  const Lattice l(3, true);
  EXPECT_EQ(l.dim(), 54);
  EXPECT_EQ(l.local_dim(4), 2);
  EXPECT_EQ(l.inner(4), 1);
  EXPECT_EQ(l.inner(3), 2);
  EXPECT_EQ(l.outer(1), 1);
}
