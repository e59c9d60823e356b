#include "holosense/chain_model.hpp"

#include <algorithm>
#include <cmath>

#include "holosense/errors.hpp"

namespace holosense {

void CouplingConstants::validate() const {
  // J = 0 is allowed for decoupled reference runs; configs still require J > 0.
  if (!(J >= 0.0)) throw InvalidArgument("J must be nonnegative");
  if (!(J_f >= 0.0)) throw InvalidArgument("J_f must be nonnegative");
  if (!(J_R >= 0.0)) throw InvalidArgument("J_R must be nonnegative");
}

OperatorLabel parse_operator_label(const std::string& text) {
  if (text == "Sx") return OperatorLabel::Sx;
  if (text == "Sy") return OperatorLabel::Sy;
  if (text == "Sz") return OperatorLabel::Sz;
  if (text == "Sx2" || text == "(Sx)^2") return OperatorLabel::Sx2;
  if (text == "Sy2" || text == "(Sy)^2") return OperatorLabel::Sy2;
  if (text == "Sz2" || text == "(Sz)^2") return OperatorLabel::Sz2;
  if (text == "Sd2" || text == "(Sd)^2") return OperatorLabel::Sd2;
  throw InvalidArgument("unknown perturbation operator label '" + text + "'");
}

std::string to_string(OperatorLabel label) {
  switch (label) {
    case OperatorLabel::Sx: return "Sx";
    case OperatorLabel::Sy: return "Sy";
    case OperatorLabel::Sz: return "Sz";
    case OperatorLabel::Sx2: return "Sx2";
    case OperatorLabel::Sy2: return "Sy2";
    case OperatorLabel::Sz2: return "Sz2";
    case OperatorLabel::Sd2: return "Sd2";
  }
  return "?";
}

DenseMatrix PerturbationSpec::local_operator(int local_dim) const {
  const SpinComponents s = spin_components(local_dim);
  switch (label) {
    case OperatorLabel::Sx: return s.x;
    case OperatorLabel::Sy: return s.y;
    case OperatorLabel::Sz: return s.z;
    case OperatorLabel::Sx2: return s.x * s.x;
    case OperatorLabel::Sy2: return s.y * s.y;
    case OperatorLabel::Sz2: return s.z * s.z;
    case OperatorLabel::Sd2: {
      if (!axis) throw InvalidArgument("Sd2 perturbation needs an axis");
      const DenseMatrix sd = spin_along(*axis, local_dim);
      return sd * sd;
    }
  }
  throw InvalidArgument("unknown perturbation operator label");
}

int PerturbationSpec::resolved_last(const Lattice& lattice) const {
  return last_site == 0 ? lattice.spin1_sites() : last_site;
}

void PerturbationSpec::validate(const Lattice& lattice) const {
  const int last = resolved_last(lattice);
  if (first_site < 1 || last > lattice.spin1_sites() || first_site > last)
    throw InvalidArgument("perturbation site range outside the chain");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
  if (label == OperatorLabel::Sd2 && !axis) throw InvalidArgument("Sd2 perturbation needs an axis");
}

Ramp Ramp::linear(double T) {
  return {[T](double t) { return t / T; }, [T](double t) { return 1.0 - t / T; }};
}

GateSchedule::GateSchedule(double T, double dt, Direction field_dir, int boundary_site, std::optional<Ramp> ramp)
    : GateSchedule(T, dt, field_dir, boundary_site, std::move(ramp), true) {}

GateSchedule GateSchedule::decoupling(double T, double dt, int boundary_site, std::optional<Ramp> ramp) {
  return GateSchedule(T, dt, Direction::z_axis(), boundary_site, std::move(ramp), false);
}

GateSchedule::GateSchedule(double T, double dt, Direction field_dir, int boundary_site, std::optional<Ramp> ramp,
                           bool field_on)
    : T_(T), dt_(dt), steps_(0), field_(field_dir), k_(boundary_site), field_on_(field_on) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("T and dt must be positive");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw InvalidArgument("T/dt must be a positive integer");
  steps_ = static_cast<int>(rounded);
  if (boundary_site < 1) throw InvalidArgument("boundary site must be >= 1");
  ramp_ = ramp ? std::move(*ramp) : Ramp::linear(T);

  auto endpoint = [](double v, double want, const char* what) {
    if (std::abs(v - want) > 1e-12) throw InvalidArgument(std::string("schedule endpoint violated: ") + what);
  };
  endpoint(ramp_.g(0.0), 1.0, "g(0)=1");
  endpoint(ramp_.g(T), 0.0, "g(T)=0");
  if (field_on_) {
    endpoint(ramp_.f(0.0), 0.0, "f(0)=0");
    endpoint(ramp_.f(T), 1.0, "f(T)=1");
  }
  constexpr int kSamples = 1000;
  double fp = ramp_.f(0.0), gp = ramp_.g(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double t = T * i / kSamples;
    const double fv = ramp_.f(t), gv = ramp_.g(t);
    if (field_on_ && fv < fp - 1e-12) throw InvalidArgument("f must be nondecreasing");
    if (gv > gp + 1e-12) throw InvalidArgument("g must be nonincreasing");
    fp = fv;
    gp = gv;
  }
}

void GateSchedule::check_time(double t) const {
  if (!(t >= -1e-12 && t <= T_ + 1e-12)) throw InvalidArgument("time outside [0, T]");
}

double GateSchedule::f(double t) const { return field_on_ ? ramp_.f(t) : 0.0; }
double GateSchedule::g(double t) const { return ramp_.g(t); }

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DenseMatrix bond_operator(int d1, int d2) {
  const SpinComponents a = spin_components(d1), b = spin_components(d2);
  return kron(a.x, b.x) + kron(a.y, b.y) + kron(a.z, b.z);
}

SpinOperator heisenberg(int k, int n, double J, const Lattice& lattice) {
  if (k < 1 || k >= n) throw InvalidArgument("heisenberg needs 1 <= k < n");
  if (n > lattice.spin1_sites()) throw InvalidArgument("heisenberg range exceeds the lattice");
  const DenseMatrix ss = bond_operator(3, 3);
  SpinOperator h = SpinOperator::zero(lattice);
  for (int j = k; j < n; ++j) h += embed_bond(J * ss, j, lattice);
  return h;
}

SpinOperator heisenberg(int k, int n, double J) { return heisenberg(k, n, J, Lattice(n)); }

SpinOperator partner_bond(const Lattice& lattice, double J_R) {
  if (!lattice.has_partner()) throw InvalidArgument("lattice has no edge partner");
  return embed_bond(J_R * bond_operator(3, 2), lattice.spin1_sites(), lattice);
}

SpinOperator chain_hamiltonian(int k, const Lattice& lattice, const CouplingConstants& c) {
  const int n = lattice.spin1_sites();
  if (k < 1 || k > n) throw InvalidArgument("boundary site outside the chain");
  SpinOperator h = SpinOperator::zero(lattice);
  if (k < n) h += heisenberg(k, n, c.J, lattice);
  if (lattice.has_partner()) h += partner_bond(lattice, c.J_R);
  return h;
}

SpinOperator local_field(int site, const Direction& d, double J_f, const Lattice& lattice) {
  if (!(J_f >= 0.0)) throw InvalidArgument("J_f must be nonnegative");
  if (site < 1 || site > lattice.spin1_sites()) throw InvalidArgument("field site outside the chain");
  const DenseMatrix sd = spin_along(d, 3);
  return embed_site(J_f * sd * sd, site, lattice);
}

SpinOperator local_field(int site, const Direction& d, double J_f, int n) {
  return local_field(site, d, J_f, Lattice(n));
}

SpinOperator perturbation(const PerturbationSpec& spec, const Lattice& lattice) {
  spec.validate(lattice);
  SpinOperator h = SpinOperator::zero(lattice);
  if (spec.gamma == 0.0) return h;
  const DenseMatrix o3 = spec.gamma * spec.local_operator(3);
  for (int j = spec.first_site; j <= spec.resolved_last(lattice); ++j) h += embed_site(o3, j, lattice);
  if (lattice.has_partner() && spec.include_partner)
    h += embed_site(spec.gamma * spec.local_operator(2), lattice.partner_site(), lattice);
  return h;
}

SpinOperator perturbation(const PerturbationSpec& spec, int n) { return perturbation(spec, Lattice(n)); }

namespace {
double boundary_coupling(int k, const Lattice& lattice, const CouplingConstants& c) {
  return k < lattice.spin1_sites() ? c.J : c.J_R;
}
}  // namespace

GateHamiltonian::GateHamiltonian(const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                                 const std::optional<PerturbationSpec>& pert)
    : sched_(sched),
      field_(SpinOperator::zero(lattice)),
      bond_(SpinOperator::zero(lattice)),
      rest_(SpinOperator::zero(lattice)) {
  c.validate();
  const int k = sched.boundary_site();
  const int n = lattice.spin1_sites();
  if (k > n || (k == n && !lattice.has_partner())) throw InvalidArgument("boundary site has no right neighbor");
  if (sched.field_enabled()) field_ = local_field(k, sched.field_dir(), c.J_f, lattice);
  bond_ = embed_bond(boundary_coupling(k, lattice, c) * bond_operator(3, lattice.local_dim(k + 1)), k, lattice);
  if (k + 1 < n) rest_ += heisenberg(k + 1, n, c.J, lattice);
  if (lattice.has_partner() && k + 1 <= n) rest_ += partner_bond(lattice, c.J_R);
  if (pert) rest_ += perturbation(*pert, lattice);
}

SpinOperator GateHamiltonian::at(double t) const {
  sched_.check_time(t);
  return field_ * sched_.f(t) + bond_ * sched_.g(t) + rest_;
}

SpinOperator gate_hamiltonian(double t, const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                              const std::optional<PerturbationSpec>& pert) {
  return GateHamiltonian(sched, c, lattice, pert).at(t);
}

SpinOperator total_spin(const Direction& d, const Lattice& lattice, int first, int last) {
  if (last == 0) last = lattice.site_count();
  lattice.check_site(first);
  lattice.check_site(last);
  SpinOperator s = SpinOperator::zero(lattice);
  for (int j = first; j <= last; ++j) s += embed_site(spin_along(d, lattice.local_dim(j)), j, lattice);
  return s;
}

SpinOperator total_spin_squared(const Lattice& lattice, int first, int last) {
  SpinOperator sq = SpinOperator::zero(lattice);
  for (const Direction& d : {Direction::x_axis(), Direction::y_axis(), Direction::z_axis()}) {
    const SpinOperator s = total_spin(d, lattice, first, last);
    sq += s * s;
  }
  return sq;
}

}  // namespace holosense
