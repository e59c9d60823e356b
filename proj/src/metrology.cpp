#include "holosense/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "holosense/errors.hpp"

namespace holosense {

namespace {

Vec3 require_unit_or_zero(const Vec3& v) {
  if (!v.allFinite()) throw InvalidArgument("Bloch vector has non-finite components");
  if (v.norm() > 1.0 + 1e-10) throw InvalidArgument("Bloch vector norm exceeds 1");
  return v;
}

Direction direction_of(const Vec3& v) { return Direction::normalized(v.x(), v.y(), v.z()); }

Eigen::Matrix2cd gram(const std::array<Vector, 2>& v) {
  Eigen::Matrix2cd g;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g(a, b) = v[a].dot(v[b]);
  return g;
}

double trace_real(const Eigen::Matrix2cd& g, const Eigen::Matrix2cd& rho) { return (g * rho).trace().real(); }

}  // namespace

BlochVector::BlochVector(double x, double y, double z) : v_(require_unit_or_zero(Vec3(x, y, z))) {}
BlochVector::BlochVector(const Vec3& v) : v_(require_unit_or_zero(v)) {}

BlochVector BlochVector::clamped(const Vec3& v) {
  const double n = v.norm();
  return BlochVector(n > 1.0 ? Vec3(v / n) : v);
}

SamplerMode parse_sampler_mode(const std::string& text) {
  if (text == "abstract") return SamplerMode::Abstract;
  if (text == "full-chain" || text == "full_chain") return SamplerMode::FullChain;
  throw InvalidArgument("unknown sampler mode: " + text);
}

std::string to_string(SamplerMode mode) { return mode == SamplerMode::Abstract ? "abstract" : "full-chain"; }

BlochVector reflect_bloch(const BlochVector& psi0, const Direction& axis) {
  const Vec3& a = axis.vec();
  return BlochVector::clamped(2.0 * a.dot(psi0.vec()) * a - psi0.vec());
}

AxisEstimate axis_from_pair(const BlochVector& psi0, const BlochVector& psi1) {
  const Vec3 s = psi0.vec() + psi1.vec();
  const double c = s.norm();
  if (c < 1e-6) throw DegenerateGeometry("states are antipodal; axis lies anywhere in the orthogonal plane");
  return {direction_of(s), c};
}

Direction canonicalize_axis(const Direction& d) {
  constexpr double kTie = 1e-12;
  bool flip = d.z() < -kTie;
  if (std::abs(d.z()) <= kTie) flip = d.x() < -kTie || (std::abs(d.x()) <= kTie && d.y() < 0.0);
  return flip ? -d : d;
}

double axis_angle(const Direction& a, const Direction& b) {
  // atan2 form stays accurate for tiny angles.
  const Vec3& u = a.vec();
  const Vec3& v = b.vec();
  return std::atan2(u.cross(v).norm(), std::abs(u.dot(v)));
}

int AbstractSampler::sample(const BlochVector& psi0, const Direction& basis, Rng& rng) const {
  const double p_plus = 0.5 * (1.0 + expectation(psi0, basis));
  return uniform01(rng) < p_plus ? 1 : -1;
}

double AbstractSampler::expectation(const BlochVector& psi0, const Direction& basis) const {
  return basis.vec().dot(reflect_bloch(psi0, axis_).vec());
}

FullChainSampler::FullChainSampler(const Direction& true_axis, FullChainOptions options)
    : axis_(true_axis), opt_(std::move(options)), lattice_(opt_.n, true) {
  if (opt_.n < 2) throw InvalidArgument("full-chain sampler needs at least two spin-1 sites");
  const EdgeDoublet doublet = edge_doublet(lattice_, opt_.couplings, opt_.seed);
  frame_ = logical_frame(doublet.basis, opt_.frame_dir, lattice_);
  const GateSchedule sched(opt_.T, opt_.dt, axis_, 1);
  const TrotterPropagator gate(sched, opt_.couplings, lattice_, {}, opt_.trotter);
  gate_out_[0] = gate.evolve(ChainState(lattice_, frame_.zero_state)).final_state.amplitudes();
  gate_out_[1] = gate.evolve(ChainState(lattice_, frame_.one_state)).final_state.amplitudes();
}

Eigen::Matrix2cd FullChainSampler::density(const BlochVector& psi0) const {
  const Vec3 r = frame_.to_frame(psi0.vec());
  Eigen::Matrix2cd rho;
  rho(0, 0) = 0.5 * (1.0 + r.z());
  rho(1, 1) = 0.5 * (1.0 - r.z());
  rho(0, 1) = Complex(0.5 * r.x(), -0.5 * r.y());
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

int FullChainSampler::depth_count() const { return opt_.n; }  // spin-1 sites 2..n, then the partner

void FullChainSampler::extend(Tree& tree, const Direction& basis) const {
  Depth d;
  d.reach = gram(tree.frontier);
  const int site = tree.next_site;
  std::array<Vector, 2> x = tree.frontier;
  if (site <= opt_.n) {
    for (auto& v : x) {
      const double nrm = v.norm();
      if (nrm == 0.0) continue;
      const ChainState s = ChainState::normalized(lattice_, v);
      v = nrm * run_decoupling(s, site, opt_.couplings, opt_.readout_T, opt_.readout_dt, {}, opt_.trotter)
                    .final_state.amplitudes();
    }
  }
  const int ld = lattice_.local_dim(site);
  const DenseMatrix s = spin_along(basis, ld);
  const DenseMatrix id = DenseMatrix::Identity(ld, ld);
  DenseMatrix p_plus, p_minus, p_zero;
  if (ld == 3) {
    p_plus = 0.5 * (s * s + s);
    p_minus = 0.5 * (s * s - s);
    p_zero = id - s * s;
  } else {
    p_plus = 0.5 * id + s;
    p_minus = 0.5 * id - s;
  }
  auto project = [&](const DenseMatrix& p) {
    const kernels::LocalGate g(p, 1e-15);
    std::array<Vector, 2> out = x;
    for (auto& v : out) holosense::apply_local(g, lattice_, site, v);
    return out;
  };
  d.plus = gram(project(p_plus));
  d.minus = gram(project(p_minus));
  if (ld == 3) {
    tree.frontier = project(p_zero);
    ++tree.next_site;
  } else {
    tree.frontier = {};
    tree.complete = true;
  }
  tree.depths.push_back(d);
}

const FullChainSampler::Depth& FullChainSampler::depth(const Direction& basis, int d) const {
  // Caller holds mutex_.
  const std::array<double, 3> key{basis.x(), basis.y(), basis.z()};
  auto [it, inserted] = trees_.try_emplace(key);
  Tree& tree = it->second;
  if (inserted) tree.frontier = gate_out_;
  while (static_cast<int>(tree.depths.size()) <= d && !tree.complete) extend(tree, basis);
  if (d >= static_cast<int>(tree.depths.size())) throw ComputationError("readout depth out of range");
  return tree.depths[d];
}

int FullChainSampler::sample(const BlochVector& psi0, const Direction& basis, Rng& rng) const {
  const Eigen::Matrix2cd rho = density(psi0);
  const int last = depth_count() - 1;
  for (int k = 0; k <= last; ++k) {
    Depth dep;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      dep = depth(basis, k);
    }
    const double reach = trace_real(dep.reach, rho);
    const double pp = std::max(0.0, trace_real(dep.plus, rho)) / reach;
    const double pm = std::max(0.0, trace_real(dep.minus, rho)) / reach;
    const double u = uniform01(rng);
    if (k == last) return u * (pp + pm) < pp ? 1 : -1;
    if (u < pp) return 1;
    if (u < pp + pm) return -1;
  }
  throw ComputationError("readout chain exhausted");
}

double FullChainSampler::expectation(const BlochVector& psi0, const Direction& basis) const {
  const Eigen::Matrix2cd rho = density(psi0);
  std::lock_guard<std::mutex> lock(mutex_);
  double e = 0.0;
  for (int k = 0; k < depth_count(); ++k) {
    const Depth& dep = depth(basis, k);
    e += trace_real(dep.plus, rho) - trace_real(dep.minus, rho);
  }
  return e;
}

double FullChainSampler::mean_depth(const BlochVector& psi0, const Direction& basis) const {
  const Eigen::Matrix2cd rho = density(psi0);
  std::lock_guard<std::mutex> lock(mutex_);
  double m = 0.0;
  for (int k = 0; k < depth_count(); ++k) {
    const Depth& dep = depth(basis, k);
    m += (k + 1) * (trace_real(dep.plus, rho) + trace_real(dep.minus, rho));
  }
  return m;
}

std::unique_ptr<EdgeSampler> make_sampler(SamplerMode mode, const Direction& true_axis,
                                          const FullChainOptions& full_chain) {
  if (mode == SamplerMode::Abstract) return std::make_unique<AbstractSampler>(true_axis);
  return std::make_unique<FullChainSampler>(true_axis, full_chain);
}

int sample_edge_readout(const EdgeSampler& sampler, const BlochVector& psi0, const Direction& basis, Rng& rng) {
  return sampler.sample(psi0, basis, rng);
}

void TomographyCounts::add(const Vec3& basis, double n_plus, double n_minus) {
  bases.push_back(basis);
  plus.push_back(n_plus);
  minus.push_back(n_minus);
}

double TomographyCounts::total() const {
  double t = 0.0;
  for (std::size_t i = 0; i < bases.size(); ++i) t += plus[i] + minus[i];
  return t;
}

BlochVector ml_bloch(const TomographyCounts& c) {
  const double total = c.total();
  if (!(total > 0.0)) throw InvalidArgument("no tomography counts");
  const std::size_t m = c.bases.size();
  auto objective = [&](const Vec3& r, double mu) {
    double f = mu * std::log(1.0 - r.squaredNorm());
    for (std::size_t i = 0; i < m; ++i) {
      const double s = c.bases[i].dot(r);
      if (c.plus[i] > 0.0) f += c.plus[i] * std::log(0.5 * (1.0 + s));
      if (c.minus[i] > 0.0) f += c.minus[i] * std::log(0.5 * (1.0 - s));
    }
    return f;
  };
  // Damped Newton on the log-barrier objective, shrinking the barrier weight.
  Vec3 r = Vec3::Zero();
  for (double mu = total; mu > total * 1e-19; mu *= 0.1) {
    for (int it = 0; it < 100; ++it) {
      const double q = 1.0 - r.squaredNorm();
      Vec3 g = -2.0 * mu * r / q;
      Eigen::Matrix3d h = -mu * (2.0 * Eigen::Matrix3d::Identity() / q + 4.0 * r * r.transpose() / (q * q));
      for (std::size_t i = 0; i < m; ++i) {
        const Vec3& b = c.bases[i];
        const double s = b.dot(r);
        const double wp = c.plus[i] / (1.0 + s), wm = c.minus[i] / (1.0 - s);
        g += (wp - wm) * b;
        h -= (wp / (1.0 + s) + wm / (1.0 - s)) * b * b.transpose();
      }
      const Vec3 step = (-h).llt().solve(g);
      const double decrement = g.dot(step);
      if (!(decrement > 1e-20 * total)) break;
      const double f0 = objective(r, mu);
      double t = 1.0;
      while (t > 1e-16) {
        const Vec3 rn = r + t * step;
        if (rn.squaredNorm() < 1.0 && objective(rn, mu) >= f0) break;
        t *= 0.5;
      }
      if (t <= 1e-16) break;
      r += t * step;
    }
  }
  return BlochVector::clamped(r);
}

std::array<Direction, 3> adapted_bases(const Vec3& predicted) {
  const Direction p = predicted.norm() > 1e-12 ? direction_of(predicted) : Direction::z_axis();
  const Direction u = orthogonal_direction(p);
  const Vec3 w = p.vec().cross(u.vec());
  return {p, u, direction_of(w)};
}

void measure_bases(const QubitSource& source, const std::vector<Direction>& bases, int shots, Rng& rng,
                   bool noiseless, TomographyCounts& counts) {
  const int k = static_cast<int>(bases.size());
  for (int i = 0; i < k; ++i) {
    const int n_i = shots / k + (i < shots % k ? 1 : 0);
    if (n_i == 0) continue;
    if (noiseless) {
      const double e = source.expectation(bases[i]);
      counts.add(bases[i].vec(), 0.5 * n_i * (1.0 + e), 0.5 * n_i * (1.0 - e));
    } else {
      int plus = 0;
      for (int s = 0; s < n_i; ++s) plus += source.sample(bases[i], rng) > 0 ? 1 : 0;
      counts.add(bases[i].vec(), plus, n_i - plus);
    }
  }
}

namespace {
const std::vector<Direction>& world_bases() {
  static const std::vector<Direction> b{Direction::x_axis(), Direction::y_axis(), Direction::z_axis()};
  return b;
}
std::vector<Direction> as_vector(const std::array<Direction, 3>& a) { return {a.begin(), a.end()}; }

QubitSource source_for(const EdgeSampler& sampler, const BlochVector& psi0) {
  return {[&sampler, psi0](const Direction& b, Rng& rng) { return sampler.sample(psi0, b, rng); },
          [&sampler, psi0](const Direction& b) { return sampler.expectation(psi0, b); }};
}

Vec3 unit_or(const Vec3& v, const Vec3& fallback) { return v.norm() > 1e-12 ? Vec3(v.normalized()) : fallback; }
}  // namespace

BlochVector adaptive_tomography(int N, const QubitSource& source, Rng& rng, bool noiseless) {
  if (N < 6) throw InvalidArgument("adaptive tomography needs at least 6 samples");
  const int n1 = N / 2;
  TomographyCounts counts;
  measure_bases(source, world_bases(), n1, rng, noiseless, counts);
  const BlochVector crude = ml_bloch(counts);
  measure_bases(source, as_vector(adapted_bases(crude.vec())), N - n1, rng, noiseless, counts);
  return ml_bloch(counts);
}

namespace {

EstimationRecord direction_trial(const DirectionExperiment& e, const EdgeSampler& sampler, int trial,
                                 std::uint64_t seed) {
  EstimationRecord rec;
  rec.trial = trial;
  rec.sample_count = e.N;
  rec.mode = sampler.mode();
  rec.seed = seed;
  Rng rng(seed);
  const int n1 = e.N / 2, n2 = e.N - n1;

  TomographyCounts counts;
  measure_bases(source_for(sampler, e.psi0), world_bases(), n1, rng, e.noiseless, counts);
  const BlochVector crude = ml_bloch(counts);
  const Vec3 crude_unit = unit_or(crude.vec(), -e.psi0.vec());
  const Vec3 sum = e.psi0.vec() + crude_unit;
  rec.first_phase_conditioning = sum.norm();
  rec.conditioning_flagged = rec.first_phase_conditioning < kConditioningFlag;
  Direction crude_axis = Direction::z_axis();
  if (rec.first_phase_conditioning >= 1e-6) {
    crude_axis = direction_of(sum);
  } else {
    rec.first_phase_degenerate = true;
    crude_axis = orthogonal_direction(direction_of(unit_or(e.psi0.vec(), Vec3::UnitZ())));
  }

  BlochVector psi0 = e.psi0;
  BlochVector psi1;
  if (e.reorient) {
    // Phase 2 re-prepares psi0 along the crude axis, where the bisector is
    // best conditioned; its reflection is predicted to be psi0 itself.
    psi0 = BlochVector(crude_axis.vec());
    rec.reoriented = true;
    TomographyCounts second;
    measure_bases(source_for(sampler, psi0), as_vector(adapted_bases(psi0.vec())), n2, rng, e.noiseless, second);
    psi1 = ml_bloch(second);
  } else {
    measure_bases(source_for(sampler, psi0), as_vector(adapted_bases(crude.vec())), n2, rng, e.noiseless, counts);
    psi1 = ml_bloch(counts);
  }
  rec.psi0_used = psi0;
  rec.psi1_estimate = psi1;
  const BlochVector truth = reflect_bloch(psi0, e.true_axis);
  rec.infidelity = std::max(0.0, 0.5 * (1.0 - psi1.vec().dot(truth.vec())));
  try {
    const BlochVector psi1_unit(unit_or(psi1.vec(), -psi0.vec()));
    rec.axis_estimate = canonicalize_axis(axis_from_pair(psi0, psi1_unit).axis);
    rec.angular_error = axis_angle(rec.axis_estimate, e.true_axis);
  } catch (const DegenerateGeometry& err) {
    rec.error = err.what();
  }
  return rec;
}

}  // namespace

std::vector<EstimationRecord> direction_experiment(const DirectionExperiment& e, const EdgeSampler& sampler) {
  if (e.trials < 1) throw InvalidArgument("trials must be positive");
  if (e.N < 6) throw InvalidArgument("N must be at least 6");
  std::vector<EstimationRecord> out(e.trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < e.trials; ++t) {
    const std::uint64_t seed = derive_seed(e.seed, static_cast<std::uint64_t>(t));
    try {
      out[t] = direction_trial(e, sampler, t, seed);
    } catch (const std::exception& err) {
      out[t].trial = t;
      out[t].sample_count = e.N;
      out[t].mode = sampler.mode();
      out[t].seed = seed;
      out[t].error = err.what();
    }
  }
  return out;
}

DirectionSummary summarize(const std::vector<EstimationRecord>& records) {
  DirectionSummary s;
  s.trials = static_cast<int>(records.size());
  std::vector<double> angles, infid;
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& r : records) {
    if (r.conditioning_flagged) ++s.flagged;
    if (r.first_phase_degenerate) ++s.degenerate;
    if (r.error || !r.angular_error) {
      ++s.failed;
      continue;
    }
    angles.push_back(*r.angular_error);
    infid.push_back(r.infidelity);
    scatter += r.axis_estimate.vec() * r.axis_estimate.vec().transpose();
  }
  const double k = static_cast<double>(angles.size());
  if (angles.empty()) return s;
  double sum = 0.0, sq = 0.0;
  for (double a : angles) {
    sum += a;
    sq += a * a;
  }
  s.mean_angular_error = sum / k;
  s.var_angular_error = sq / k;
  s.rms_angular_error = std::sqrt(s.var_angular_error);
  if (angles.size() > 1) {
    double dev = 0.0;
    for (double a : angles) dev += (a - s.mean_angular_error) * (a - s.mean_angular_error);
    s.sem_angular_error = std::sqrt(dev / (k - 1.0)) / std::sqrt(k);
  }
  double fsum = 0.0;
  for (double f : infid) fsum += f;
  s.mean_infidelity = fsum / k;
  std::vector<double> sorted = infid;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median_infidelity = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  s.mean_axis = canonicalize_axis(direction_of(es.eigenvectors().col(2)));
  return s;
}

TotalField total_field_direction(double E_f, const Direction& m_f, double E_b, const Direction& m_b) {
  if (!(E_b > 0.0)) throw InvalidArgument("background strength must be positive");
  if (!(E_f >= 0.0)) throw InvalidArgument("field strength must be nonnegative");
  const Vec3 total = E_b * m_b.vec() + E_f * m_f.vec();
  if (total.norm() < 1e-14 * std::max(E_b, E_f)) throw DegenerateGeometry("total field vanishes");
  return {direction_of(total), E_b < 10.0 * E_f};
}

FieldReconstruction reconstruct_field(const Direction& obs1, const Direction& obs2, const Background& bg1,
                                      const Background& bg2) {
  if (!(bg1.E_b > 0.0) || !(bg2.E_b > 0.0)) throw InvalidArgument("background strengths must be positive");
  // Resolve the axis sign with the known background.
  const Vec3 o1 = obs1.vec().dot(bg1.m_b.vec()) < 0.0 ? Vec3(-obs1.vec()) : obs1.vec();
  const Vec3 o2 = obs2.vec().dot(bg2.m_b.vec()) < 0.0 ? Vec3(-obs2.vec()) : obs2.vec();
  // Unknowns (E_tot1, E_tot2, v = E_f m_f): E_tot_i o_i - v = E_b_i m_b_i.
  Eigen::Matrix<double, 6, 5> a = Eigen::Matrix<double, 6, 5>::Zero();
  Eigen::Matrix<double, 6, 1> rhs;
  a.block<3, 1>(0, 0) = o1;
  a.block<3, 1>(3, 1) = o2;
  a.block<3, 3>(0, 2) = -Eigen::Matrix3d::Identity();
  a.block<3, 3>(3, 2) = -Eigen::Matrix3d::Identity();
  rhs.head<3>() = bg1.E_b * bg1.m_b.vec();
  rhs.tail<3>() = bg2.E_b * bg2.m_b.vec();
  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 5>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(4) < 1e-8 * sv(0))
    throw RankDeficient("observed axes are parallel; the two backgrounds must differ");
  const Eigen::Matrix<double, 5, 1> x = svd.solve(rhs);
  FieldReconstruction r;
  const Vec3 v = x.tail<3>();
  r.E_f = v.norm();
  if (r.E_f > 1e-15) r.m_f = direction_of(v);
  r.residual = (a * x - rhs).norm();
  r.total_strengths = {x(0), x(1)};
  r.weak_background = bg1.E_b < 10.0 * r.E_f || bg2.E_b < 10.0 * r.E_f;
  return r;
}

std::vector<BackgroundRecord> background_experiment(const BackgroundExperiment& e, const SamplerFactory& factory) {
  if (e.trials < 1) throw InvalidArgument("trials must be positive");
  if (e.N < 6) throw InvalidArgument("N must be at least 6");
  const std::array<Background, 2> bgs{e.bg1, e.bg2};
  std::array<Direction, 2> totals{Direction::z_axis(), Direction::z_axis()};
  std::array<std::unique_ptr<EdgeSampler>, 2> samplers;
  for (int i = 0; i < 2; ++i) {
    totals[i] = total_field_direction(e.E_f, e.m_f, bgs[i].E_b, bgs[i].m_b).direction;
    samplers[i] = factory(totals[i]);
  }
  std::vector<BackgroundRecord> out(e.trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < e.trials; ++t) {
    BackgroundRecord& rec = out[t];
    rec.trial = t;
    const std::uint64_t trial_seed = derive_seed(e.seed, static_cast<std::uint64_t>(t));
    try {
      std::array<Direction, 2> obs{Direction::z_axis(), Direction::z_axis()};
      for (int i = 0; i < 2; ++i) {
        DirectionExperiment d;
        d.N = e.N;
        d.true_axis = totals[i];
        d.psi0 = e.psi0;
        d.trials = 1;
        d.reorient = e.reorient;
        d.noiseless = e.noiseless;
        const EstimationRecord r = direction_trial(d, *samplers[i], t, derive_seed(trial_seed, i));
        if (r.error) throw DegenerateGeometry(*r.error);
        obs[i] = r.axis_estimate;
      }
      const FieldReconstruction fr = reconstruct_field(obs[0], obs[1], e.bg1, e.bg2);
      rec.reconstruction = fr;
      if (fr.m_f) {
        const double c = std::clamp(fr.m_f->dot(e.m_f), -1.0, 1.0);
        rec.angular_error = std::atan2(fr.m_f->vec().cross(e.m_f.vec()).norm(), c);
      }
      rec.relative_error = e.E_f > 0.0 ? std::abs(fr.E_f - e.E_f) / e.E_f : fr.E_f;
    } catch (const std::exception& err) {
      rec.error = err.what();
    }
  }
  return out;
}

}  // namespace holosense
