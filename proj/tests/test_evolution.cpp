#include <gtest/gtest.h>

#include <cmath>

#include "holosense/errors.hpp"
#include "holosense/evolution.hpp"

using namespace holosense;

namespace {

double overlap_modulus(const Vector& a, const Vector& b) { return std::abs(a.dot(b)); }

ChainState polarized(const Lattice& lattice) {
  std::vector<Vector> locals(lattice.site_count(), spin1_basis(1));
  if (lattice.has_partner()) locals.back() = Vector::Unit(2, 0);
  return ChainState::product(lattice, locals);
}

ChainState doublet_state(const Lattice& lattice, const Direction& frame_dir, const Vec3& bloch) {
  const EdgeDoublet d = edge_doublet(lattice, CouplingConstants{});
  const LogicalFrame f = logical_frame(d.basis, frame_dir, lattice);
  return ChainState(lattice, f.state(bloch));
}

PerturbationSpec pert(OperatorLabel label, double gamma) {
  PerturbationSpec p;
  p.label = label;
  p.gamma = gamma;
  return p;
}

}  // namespace

TEST(DensityMatrix, ValidatesInput) {
  EXPECT_NO_THROW(DensityMatrix(DenseMatrix::Identity(3, 3) / 3.0));
  EXPECT_THROW(DensityMatrix(DenseMatrix::Identity(3, 3)), InvalidArgument);
  DenseMatrix bad = DenseMatrix::Zero(2, 2);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{bad}, InvalidArgument);
  DenseMatrix nonherm = DenseMatrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nonherm}, InvalidArgument);
}

TEST(TrotterEvolve, ZeroHamiltonianLeavesStateUnchanged) {
  const Lattice lattice(3, true);
  CouplingConstants c;
  c.J = 0.0;
  c.J_f = 0.0;
  c.J_R = 0.0;
  const ChainState s0 = doublet_state(lattice, Direction::z_axis(), Vec3(0.6, 0.0, 0.8));
  const EvolutionResult r = trotter_evolve(s0, GateSchedule(2.0, 0.01, Direction::x_axis(), 1), c);
  EXPECT_EQ(r.step_count, 200);
  EXPECT_LT((r.final_state.amplitudes() - s0.amplitudes()).norm(), 1e-13);
}

TEST(TrotterEvolve, InstantaneousEigenstateOnlyPicksUpPhase) {
  // The fully polarized state is an eigenstate of every bond and of (S^z)^2.
  const Lattice lattice(4, true);
  const ChainState s0 = polarized(lattice);
  for (int order : {1, 2}) {
    TrotterOptions opt;
    opt.order = order;
    const EvolutionResult r =
        trotter_evolve(s0, GateSchedule(3.0, 0.01, Direction::z_axis(), 1), CouplingConstants{}, {}, opt);
    EXPECT_GT(overlap_modulus(r.final_state.amplitudes(), s0.amplitudes()), 1.0 - 1e-8);
  }
}

TEST(TrotterEvolve, MatchesFineReferenceAndConvergesAtSecondOrder) {
  const Lattice lattice(4, true);
  const CouplingConstants c;
  const ChainState s0 = doublet_state(lattice, Direction::y_axis(), Vec3::UnitZ());
  const auto p = pert(OperatorLabel::Sz, 0.05);
  const double T = 4.0;
  const Vector ref =
      reference_evolve(s0.amplitudes(), GateHamiltonian(GateSchedule(T, 1e-4, Direction::x_axis(), 1), c, lattice, p), 1e-4);
  EXPECT_NEAR(ref.norm(), 1.0, 1e-8);
  const auto run = [&](double dt, int order) {
    TrotterOptions opt;
    opt.order = order;
    return trotter_evolve(s0, GateSchedule(T, dt, Direction::x_axis(), 1), c, p, opt).final_state.amplitudes();
  };
  const auto deviation = [&](const Vector& v) { return std::sqrt(std::max(0.0, 1.0 - overlap_modulus(v, ref))); };
  const Vector a = run(0.01, 2), b = run(0.02, 2);
  EXPECT_GT(overlap_modulus(a, ref), 1.0 - 1e-4);
  EXPECT_GE(deviation(b) / deviation(a), 3.5);
  // Lie splitting converges too, at first order.
  const double r1 = deviation(run(0.02, 1)) / deviation(run(0.01, 1));
  EXPECT_GT(r1, 1.6);
  EXPECT_LT(r1, 2.6);
}

TEST(TrotterEvolve, RejectsBadInput) {
  const Lattice lattice(3, true);
  const ChainState s0 = polarized(lattice);
  const GateSchedule sched(1.0, 0.01, Direction::x_axis(), 1);
  TrotterOptions opt;
  opt.order = 3;
  EXPECT_THROW(trotter_evolve(s0, sched, CouplingConstants{}, {}, opt), InvalidArgument);
  const ChainState other = polarized(Lattice(3));
  EXPECT_THROW(TrotterPropagator(sched, CouplingConstants{}, lattice).evolve(other), InvalidArgument);
}

TEST(TrotterEvolve, DriftAboveToleranceRaises) {
  const Lattice lattice(4, true);
  const ChainState s0 = doublet_state(lattice, Direction::z_axis(), Vec3::UnitX());
  TrotterOptions opt;
  opt.drift_tolerance = 0.0;
  opt.order = 2;
  // Any rounding drift at all exceeds a zero tolerance.
  EXPECT_THROW(trotter_evolve(s0, GateSchedule(10.0, 0.01, Direction::x_axis(), 1), CouplingConstants{}, {}, opt),
               StepSizeError);
}

TEST(TrotterEvolve, UnitarityOverFullGate) {
  const Lattice lattice(6, true);
  const ChainState s0 = doublet_state(lattice, Direction::y_axis(), Vec3::UnitZ());
  TrotterOptions opt;
  opt.log_energy = true;
  const EvolutionResult r = trotter_evolve(s0, GateSchedule(10.0, 0.01, Direction::x_axis(), 1),
                                           CouplingConstants{}, pert(OperatorLabel::Sz, 0.1), opt);
  EXPECT_EQ(r.step_count, 1000);
  EXPECT_LT(r.max_step_drift, 1e-6);
  EXPECT_LT(r.accumulated_drift, 1e-6);
  EXPECT_NEAR(r.final_state.amplitudes().norm(), 1.0, 1e-8);
  EXPECT_EQ(r.energy_log.size(), 1000u);
}

TEST(TrotterEvolve, SymmetricRunConservesStringExpectation) {
  const Lattice lattice(5, true);
  const Direction field = Direction::x_axis();
  const ChainState s0 = doublet_state(lattice, Direction::y_axis(), Vec3(0.6, 0.0, 0.8));
  const StringOperator u = full_string_operator(field, 1, lattice);
  const Complex before = s0.amplitudes().dot(u.apply(s0.amplitudes()));
  for (double T : {2.0, 6.0, 10.0}) {
    const EvolutionResult r = trotter_evolve(s0, GateSchedule(T, 0.01, field, 1), CouplingConstants{},
                                             pert(OperatorLabel::Sx2, 0.1));
    const Vector& v = r.final_state.amplitudes();
    EXPECT_LT(std::abs(v.dot(u.apply(v)) - before), 1e-3) << "T=" << T;
  }
}

TEST(SensingGate, LogicalZeroFlipsWithHighFidelity) {
  GateFidelityParams p;
  const GateFidelityResult r = gate_fidelity_experiment(p);
  EXPECT_GE(r.fidelity, 0.95);
  EXPECT_LE(r.decoupled_spin_sq, 0.05);
  EXPECT_GE(r.leakage, 0.0);
  EXPECT_LE(r.fidelity + r.leakage, 1.0 + 1e-12);
  EXPECT_NEAR(r.initial_bloch.z(), 1.0, 1e-8);
  EXPECT_LT(r.final_bloch.z(), -0.9);
}

TEST(SensingGate, PlusMapsToMinus) {
  const int n = 8;
  const Direction field = Direction::x_axis();
  const GateFrames frames = gate_frames(n, orthogonal_direction(field), CouplingConstants{}, kDefaultSolverSeed);
  const ChainState plus(frames.long_frame.lattice, frames.long_frame.plus_state());
  const SensingResult r =
      run_sensing_gate(plus, GateSchedule(10.0, 0.01, field, 1), CouplingConstants{}, {}, &frames.short_frame);
  ASSERT_TRUE(r.bloch.has_value());
  EXPECT_LE(r.bloch->vector.x(), -0.9);
  EXPECT_LE(r.decoupled_spin_sq, 0.05);
}

TEST(SensingGate, StateAlongFieldIsUnchanged) {
  const int n = 8;
  const Direction field = Direction::x_axis();
  const GateFrames frames = gate_frames(n, field, CouplingConstants{}, kDefaultSolverSeed);
  const ChainState zero(frames.long_frame.lattice, frames.long_frame.zero_state);
  const SensingResult r =
      run_sensing_gate(zero, GateSchedule(10.0, 0.01, field, 1), CouplingConstants{}, {}, &frames.short_frame);
  ASSERT_TRUE(r.bloch.has_value());
  // The direction is fixed by symmetry; the length carries the finite-T loss.
  EXPECT_LT((r.bloch->vector.normalized() - Vec3::UnitZ()).norm(), 1e-6);
  EXPECT_LT((r.bloch->vector - Vec3::UnitZ()).norm(), 0.05);
}

TEST(SensingGate, NeedsFieldSchedule) {
  const Lattice lattice(3, true);
  EXPECT_THROW(run_sensing_gate(polarized(lattice), GateSchedule::decoupling(1.0, 0.01, 1), CouplingConstants{}),
               InvalidArgument);
}

TEST(SensingGate, FidelityNondecreasingInGateTime) {
  double previous = 0.0;
  for (double T : {5.0, 10.0, 20.0}) {
    GateFidelityParams p;
    p.n = 6;
    p.T = T;
    const double f = gate_fidelity_experiment(p).fidelity;
    EXPECT_GE(f, previous - 1e-3) << "T=" << T;
    previous = f;
  }
}

TEST(Decoupling, UncoupledChainIsUnchangedAndNormPreserved) {
  const Lattice lattice(3, true);
  CouplingConstants zero;
  zero.J = 0.0;
  zero.J_R = 0.0;
  const ChainState s0 = doublet_state(lattice, Direction::z_axis(), Vec3(0.0, 0.6, 0.8));
  const EvolutionResult r = run_decoupling(s0, 1, zero, 5.0, 0.01);
  EXPECT_LT((r.final_state.amplitudes() - s0.amplitudes()).norm(), 1e-13);
  const EvolutionResult coupled = run_decoupling(s0, 1, CouplingConstants{}, 5.0, 0.01);
  EXPECT_NEAR(coupled.final_state.amplitudes().norm(), 1.0, 1e-8);
}

TEST(Decoupling, ReadoutStatisticsFollowTheEdgeBlochVector) {
  const int n = 6;
  const CouplingConstants c;
  const GateFrames frames = gate_frames(n, Direction::z_axis(), c, kDefaultSolverSeed);
  const LogicalFrame& f = frames.long_frame;
  const Vec3 bloch(0.6, 0.0, 0.8);  // frame coordinates
  const ChainState s0(f.lattice, f.state(bloch));
  const EvolutionResult r = run_decoupling(s0, 1, c, 10.0, 0.01);
  for (int a = 0; a < 3; ++a) {
    const Direction axis = Direction::normalized(f.world_axis(a));
    const auto p = site_probabilities(r.final_state.amplitudes(), f.lattice, 1, axis);
    const double conditional = (p[0] - p[2]) / (p[0] + p[2]);
    EXPECT_NEAR(conditional, bloch(a), 0.05) << "axis " << a;
  }
}

TEST(PartialTrace, ProductStateKeepsFactor) {
  const Lattice lattice(2);
  const Vector a = spin1_basis(1), b = (spin1_basis(0) - spin1_basis(-1)).normalized();
  const ChainState s = ChainState::product(lattice, {a, b});
  const DensityMatrix rho = partial_trace(s.amplitudes(), lattice, {2});
  EXPECT_LT((rho.matrix() - b * b.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, MaximallyEntangledGivesIdentityOverThree) {
  const Lattice lattice(2);
  Vector psi = Vector::Zero(9);
  for (int m = 0; m < 3; ++m) psi(4 * m) = 1.0 / std::sqrt(3.0);
  const DensityMatrix rho = partial_trace(psi, lattice, {1});
  EXPECT_LT((rho.matrix() - DenseMatrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, TraceOneAndDensityInputAgree) {
  const Lattice lattice(3, true);
  const ChainState s = doublet_state(lattice, Direction::x_axis(), Vec3(0.0, 0.0, -1.0));
  for (const std::vector<int>& keep : std::vector<std::vector<int>>{{1}, {2, 4}, {1, 2, 3}, {4}}) {
    const DensityMatrix a = partial_trace(s.amplitudes(), lattice, keep);
    const DensityMatrix b = partial_trace(DensityMatrix::pure(s.amplitudes()), lattice, keep);
    EXPECT_NEAR(a.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(partial_trace(s.amplitudes(), lattice, {}), InvalidArgument);
  EXPECT_THROW(partial_trace(s.amplitudes(), lattice, {5}), InvalidArgument);
}

TEST(UhlmannFidelity, StandardValues) {
  const Vector zero = Vector::Unit(2, 0), one = Vector::Unit(2, 1);
  const DensityMatrix r0 = DensityMatrix::pure(zero), r1 = DensityMatrix::pure(one);
  const DensityMatrix mixed(DenseMatrix::Identity(2, 2) / 2.0);
  EXPECT_NEAR(uhlmann_fidelity(r0, r0), 1.0, 1e-12);
  EXPECT_NEAR(uhlmann_fidelity(r0, r1), 0.0, 1e-12);
  EXPECT_NEAR(uhlmann_fidelity(r0, mixed), 0.5, 1e-12);
  DenseMatrix m(2, 2);
  m << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
  const DensityMatrix g(m);
  EXPECT_NEAR(uhlmann_fidelity(g, mixed), uhlmann_fidelity(mixed, g), 1e-10);
  EXPECT_THROW(uhlmann_fidelity(r0, DensityMatrix(DenseMatrix::Identity(3, 3) / 3.0)), InvalidArgument);
}

TEST(UhlmannFidelity, AgreesWithReducedOverlapForPureTargets) {
  const int n = 4;
  const GateFrames frames = gate_frames(n, Direction::y_axis(), CouplingConstants{}, kDefaultSolverSeed);
  const Lattice lattice(n, true);
  const EvolutionResult r = trotter_evolve(ChainState(lattice, frames.long_frame.zero_state),
                                           GateSchedule(10.0, 0.01, Direction::x_axis(), 1), CouplingConstants{},
                                           pert(OperatorLabel::Sz, 0.1));
  const Vector& psi = r.final_state.amplitudes();
  const DensityMatrix sigma = partial_trace(psi, lattice, {2, 3, 4, 5});
  const DensityMatrix rho = DensityMatrix::pure(frames.short_frame.one_state);
  EXPECT_NEAR(uhlmann_fidelity(rho, sigma), reduced_overlap(psi, frames.short_frame.one_state), 1e-10);
}
