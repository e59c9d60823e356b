#include "holosense/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "holosense/errors.hpp"

namespace holosense {

namespace {
constexpr int kGroupA = 0, kGroupB = 1, kGroupC = 2, kGroupP = 3;
constexpr double kGateDropTol = 1e-14;

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
}  // namespace

DensityMatrix::DensityMatrix(DenseMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) throw InvalidArgument("density matrix must be square");
  if (max_abs(rho_ - rho_.adjoint()) > 1e-10) throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-10) throw InvalidArgument("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw InvalidArgument("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const Vector v = psi / psi.norm();
  return DensityMatrix(v * v.adjoint());
}

TrotterPropagator::TrotterPropagator(const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                                     const std::optional<PerturbationSpec>& pert, TrotterOptions options)
    : sched_(sched), c_(c), lattice_(lattice), pert_(pert), opt_(options) {
  c.validate();
  if (opt_.order != 1 && opt_.order != 2) throw InvalidArgument("splitting order must be 1 or 2");
  const int n = lattice.spin1_sites();
  const int k = sched.boundary_site();
  if (k > n || (k == n && !lattice.has_partner())) throw InvalidArgument("boundary site has no right neighbor");
  const int last_bond = lattice.has_partner() ? n : n - 1;

  // One term per active bond; index by left site.
  std::vector<int> term_of(lattice.site_count() + 2, -1);
  for (int j = k; j <= last_bond; ++j) {
    const int d2 = lattice.local_dim(j + 1);
    const DenseMatrix ss = (j < n ? c.J : c.J_R) * bond_operator(3, d2);
    Term t;
    t.first_site = j;
    t.fixed = DenseMatrix::Zero(3 * d2, 3 * d2);
    t.field = DenseMatrix::Zero(3 * d2, 3 * d2);
    t.bond = DenseMatrix::Zero(3 * d2, 3 * d2);
    if (j == k) {
      t.bond = ss;
      if (sched.field_enabled()) {
        const DenseMatrix sd = spin_along(sched.field_dir(), 3);
        t.field = kron(c.J_f * sd * sd, DenseMatrix::Identity(d2, d2));
      }
      t.group = kGroupA;
    } else {
      t.fixed = ss;
      t.group = (j - k) % 2 == 1 ? kGroupB : kGroupC;
    }
    term_of[j] = static_cast<int>(terms_.size());
    terms_.push_back(std::move(t));
  }

  if (pert && pert->gamma != 0.0) {
    pert->validate(lattice);
    std::vector<int> sites;
    for (int j = pert->first_site; j <= pert->resolved_last(lattice); ++j) sites.push_back(j);
    if (lattice.has_partner() && pert->include_partner) sites.push_back(lattice.partner_site());
    for (int j : sites) {
      const int d = lattice.local_dim(j);
      const DenseMatrix o = pert->gamma * pert->local_operator(d);
      if (j < k) {
        Term t;
        t.first_site = j;
        t.fixed = o;
        t.field = DenseMatrix::Zero(d, d);
        t.bond = DenseMatrix::Zero(d, d);
        t.group = kGroupP;
        terms_.push_back(std::move(t));
      } else if (j <= last_bond && term_of[j] >= 0) {
        Term& t = terms_[term_of[j]];
        t.fixed += kron(o, DenseMatrix::Identity(lattice.local_dim(j + 1), lattice.local_dim(j + 1)));
      } else {
        // Rightmost site without a bond of its own: attach to the bond on its left.
        Term& t = terms_[term_of[j - 1]];
        t.fixed += kron(DenseMatrix::Identity(3, 3), o);
      }
    }
  }
  if (opt_.log_energy) energy_h_.emplace(sched, c, lattice, pert);
}

TrotterPropagator::Layer TrotterPropagator::static_layer(int group, double tau) const {
  Layer layer;
  for (const Term& t : terms_)
    if (t.group == group)
      layer.gates.emplace_back(t.first_site, kernels::LocalGate(hermitian_exp(t.fixed, Complex(0.0, -tau)), kGateDropTol));
  return layer;
}

void TrotterPropagator::apply_layer(const Layer& layer, Vector& psi) const {
  for (const auto& [site, gate] : layer.gates) holosense::apply_local(gate, lattice_, site, psi);
}

EvolutionResult TrotterPropagator::evolve(const ChainState& s0) const {
  if (s0.lattice() != lattice_) throw InvalidArgument("initial state lives on a different lattice");
  const int steps = sched_.steps();
  const double dt = sched_.dt();
  const double half = 0.5 * dt;
  auto boundary_layer = [&](double t, double tau) {
    Layer layer;
    for (const Term& term : terms_)
      if (term.group == kGroupA) {
        const DenseMatrix h = term.fixed + sched_.f(t) * term.field + sched_.g(t) * term.bond;
        layer.gates.emplace_back(term.first_site, kernels::LocalGate(hermitian_exp(h, Complex(0.0, -tau)), kGateDropTol));
      }
    return layer;
  };

  EvolutionResult res;
  res.step_count = steps;
  Vector psi = s0.amplitudes();
  double norm_product = 1.0;
  auto finish_step = [&](int s) {
    const double nrm = std::sqrt(kernels::norm_squared(psi.data(), psi.size()));
    const double drift = std::abs(nrm - 1.0);
    res.max_step_drift = std::max(res.max_step_drift, drift);
    if (drift > opt_.drift_tolerance)
      throw StepSizeError("norm drift " + std::to_string(drift) + " at step " + std::to_string(s));
    norm_product *= nrm;
    psi /= nrm;
    if (energy_h_) res.energy_log.push_back(expectation(energy_h_->at((s + 1) * dt), psi));
  };

  if (opt_.order == 2) {
    const Layer b_half = static_layer(kGroupB, half), b_full = static_layer(kGroupB, dt);
    const Layer c_half = static_layer(kGroupC, half), p_half = static_layer(kGroupP, half);
    apply_layer(b_half, psi);
    for (int s = 0; s < steps; ++s) {
      apply_layer(c_half, psi);
      apply_layer(p_half, psi);
      apply_layer(boundary_layer((s + 0.5) * dt, dt), psi);
      apply_layer(p_half, psi);
      apply_layer(c_half, psi);
      // Consecutive half steps of the static B group are fused.
      apply_layer(s + 1 < steps ? b_full : b_half, psi);
      finish_step(s);
    }
  } else {
    const Layer b = static_layer(kGroupB, dt), c = static_layer(kGroupC, dt), p = static_layer(kGroupP, dt);
    for (int s = 0; s < steps; ++s) {
      apply_layer(boundary_layer((s + 0.5) * dt, dt), psi);
      apply_layer(b, psi);
      apply_layer(c, psi);
      apply_layer(p, psi);
      finish_step(s);
    }
  }
  res.accumulated_drift = std::abs(1.0 - norm_product);
  res.final_state = ChainState::normalized(lattice_, std::move(psi));
  return res;
}

EvolutionResult trotter_evolve(const ChainState& s0, const GateSchedule& sched, const CouplingConstants& c,
                               const std::optional<PerturbationSpec>& pert, TrotterOptions options) {
  return TrotterPropagator(sched, c, s0.lattice(), pert, options).evolve(s0);
}

Vector reference_evolve(const Vector& psi0, const GateHamiltonian& h, double dt_ref) {
  const GateSchedule& sched = h.schedule();
  const double ratio = sched.T() / dt_ref;
  const int steps = static_cast<int>(std::round(ratio));
  if (steps < 1 || std::abs(ratio - steps) > 1e-9 * ratio) throw InvalidArgument("T/dt_ref must be an integer");
  if (h.static_part().dim() > 6561) throw InvalidArgument("dense reference limited to dimension 6561");
  const SparseMatrix& f = h.field_part().matrix();
  const SparseMatrix& b = h.bond_part().matrix();
  const SparseMatrix& r = h.static_part().matrix();
  const Complex mi(0.0, -1.0);
  auto deriv = [&](double t, const Vector& v) -> Vector {
    return mi * (sched.f(t) * (f * v) + sched.g(t) * (b * v) + (r * v));
  };
  Vector psi = psi0;
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt_ref;
    const Vector k1 = deriv(t, psi);
    const Vector k2 = deriv(t + 0.5 * dt_ref, psi + 0.5 * dt_ref * k1);
    const Vector k3 = deriv(t + 0.5 * dt_ref, psi + 0.5 * dt_ref * k2);
    const Vector k4 = deriv(t + dt_ref, psi + dt_ref * k3);
    psi += (dt_ref / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

SensingResult run_sensing_gate(const ChainState& initial, const GateSchedule& sched, const CouplingConstants& c,
                               const std::optional<PerturbationSpec>& pert, const LogicalFrame* shortened_frame,
                               TrotterOptions options) {
  if (!sched.field_enabled()) throw InvalidArgument("sensing gate needs a field schedule");
  SensingResult out;
  out.evolution = trotter_evolve(initial, sched, c, pert, options);
  const auto p = site_probabilities(out.evolution.final_state.amplitudes(), initial.lattice(), sched.boundary_site(),
                                    sched.field_dir());
  out.decoupled_spin_sq = p[0] + p[2];
  if (shortened_frame) out.bloch = bloch_vector(out.evolution.final_state, *shortened_frame);
  return out;
}

EvolutionResult run_decoupling(const ChainState& initial, int k, const CouplingConstants& c, double T, double dt,
                               const std::optional<PerturbationSpec>& pert, TrotterOptions options) {
  return trotter_evolve(initial, GateSchedule::decoupling(T, dt, k), c, pert, options);
}

namespace {

std::vector<int> checked_keep(const Lattice& lattice, const std::vector<int>& keep) {
  if (keep.empty()) throw InvalidArgument("partial trace needs at least one kept site");
  std::set<int> s(keep.begin(), keep.end());
  if (s.size() != keep.size()) throw InvalidArgument("duplicate site in partial trace");
  for (int j : s) lattice.check_site(j);
  return {s.begin(), s.end()};
}

// For every basis index, its index within the kept and traced factors.
void split_indices(const Lattice& lattice, const std::vector<int>& keep, std::vector<Index>& ki, std::vector<Index>& ti,
                   Index& kdim, Index& tdim) {
  std::vector<bool> kept(lattice.site_count() + 1, false);
  for (int j : keep) kept[j] = true;
  kdim = tdim = 1;
  for (int j = 1; j <= lattice.site_count(); ++j) (kept[j] ? kdim : tdim) *= lattice.local_dim(j);
  const Index dim = lattice.dim();
  ki.assign(dim, 0);
  ti.assign(dim, 0);
  for (Index i = 0; i < dim; ++i) {
    Index rem = i, kacc = 0, tacc = 0, kmul = 1, tmul = 1;
    for (int j = lattice.site_count(); j >= 1; --j) {
      const int d = lattice.local_dim(j);
      const Index digit = rem % d;
      rem /= d;
      if (kept[j]) {
        kacc += digit * kmul;
        kmul *= d;
      } else {
        tacc += digit * tmul;
        tmul *= d;
      }
    }
    ki[i] = kacc;
    ti[i] = tacc;
  }
}

}  // namespace

DensityMatrix partial_trace(const Vector& psi, const Lattice& lattice, const std::vector<int>& keep) {
  if (psi.size() != lattice.dim()) throw InvalidArgument("state does not match lattice");
  const auto ks = checked_keep(lattice, keep);
  std::vector<Index> ki, ti;
  Index kdim, tdim;
  split_indices(lattice, ks, ki, ti, kdim, tdim);
  DenseMatrix m = DenseMatrix::Zero(kdim, tdim);
  for (Index i = 0; i < psi.size(); ++i) m(ki[i], ti[i]) = psi(i);
  DenseMatrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const Lattice& lattice, const std::vector<int>& keep) {
  if (rho.dim() != lattice.dim()) throw InvalidArgument("density matrix does not match lattice");
  const auto ks = checked_keep(lattice, keep);
  std::vector<Index> ki, ti;
  Index kdim, tdim;
  split_indices(lattice, ks, ki, ti, kdim, tdim);
  DenseMatrix out = DenseMatrix::Zero(kdim, kdim);
  const DenseMatrix& r = rho.matrix();
  for (Index a = 0; a < r.rows(); ++a)
    for (Index b = 0; b < r.cols(); ++b)
      if (ti[a] == ti[b]) out(ki[a], ki[b]) += r(a, b);
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out));
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("density matrices have different dimensions");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> er(rho.matrix());
  if (er.eigenvalues().minCoeff() < -1e-8) throw InvalidArgument("negative eigenvalue in density matrix");
  // Eigenvalues at round-off level are zeroed before square roots; sqrt(1e-16)
  // per level would otherwise bias F by ~1e-8 times the dimension.
  constexpr double kRoundOff = 1e-13;
  const auto floor_small = [](Eigen::VectorXd v) {
    for (Index i = 0; i < v.size(); ++i)
      if (v(i) < kRoundOff) v(i) = 0.0;
    return v;
  };
  const Eigen::VectorXd sq = floor_small(er.eigenvalues()).cwiseSqrt();
  const DenseMatrix root = er.eigenvectors() * sq.cast<Complex>().asDiagonal() * er.eigenvectors().adjoint();
  DenseMatrix m = root * sigma.matrix() * root;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> em(m, Eigen::EigenvaluesOnly);
  const double tr = floor_small(em.eigenvalues()).cwiseSqrt().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

GateFrames gate_frames(int n, const Direction& frame_dir, const CouplingConstants& c, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("gate needs at least two spin-1 sites");
  const Lattice full(n, true), shortened(n - 1, true);
  const EdgeDoublet d_full = edge_doublet(full, c, seed);
  const EdgeDoublet d_short = edge_doublet(shortened, c, derive_seed(seed, 1));
  return {logical_frame(d_full.basis, frame_dir, full), logical_frame(d_short.basis, frame_dir, shortened)};
}

GateFidelityResult gate_fidelity_experiment(const GateFidelityParams& p) {
  const Direction frame_dir = p.frame_dir ? *p.frame_dir : orthogonal_direction(p.field_dir);
  const GateFrames frames = gate_frames(p.n, frame_dir, p.couplings, p.seed);
  const Lattice lattice(p.n, true);
  const GateSchedule sched(p.T, p.dt, p.field_dir, 1);
  const ChainState initial(lattice, frames.long_frame.zero_state);
  const SensingResult run = run_sensing_gate(initial, sched, p.couplings, p.perturbation, nullptr, p.trotter);

  const Vector& psi = run.evolution.final_state.amplitudes();
  GateFidelityResult r;
  r.fidelity = reduced_overlap(psi, frames.short_frame.one_state);
  r.leakage = std::max(0.0, 1.0 - r.fidelity - reduced_overlap(psi, frames.short_frame.zero_state));
  r.decoupled_spin_sq = run.decoupled_spin_sq;
  const Eigen::Matrix2cd q = qubit_density(psi, frames.short_frame);
  r.final_bloch = Vec3(2.0 * q(0, 1).real(), -2.0 * q(0, 1).imag(), (q(0, 0) - q(1, 1)).real());
  r.initial_bloch = bloch_vector(initial, frames.long_frame).vector;
  r.steps = run.evolution.step_count;
  r.max_step_drift = run.evolution.max_step_drift;
  return r;
}

}  // namespace holosense
