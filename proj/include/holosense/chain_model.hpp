#pragma once

#include <functional>
#include <optional>
#include <string>

#include "holosense/spin_algebra.hpp"

namespace holosense {

// J: Heisenberg coupling, J_f: local field coupling, J_R: coupling of the
// last spin-1 site to the spin-1/2 edge partner (used only when present).
struct CouplingConstants {
  double J = 1.0;
  double J_f = 1.0;
  double J_R = 2.0;
  void validate() const;
};

enum class OperatorLabel { Sx, Sy, Sz, Sx2, Sy2, Sz2, Sd2 };

OperatorLabel parse_operator_label(const std::string& text);
std::string to_string(OperatorLabel label);

struct PerturbationSpec {
  OperatorLabel label = OperatorLabel::Sz;
  double gamma = 0.0;
  int first_site = 1;
  int last_site = 0;  // 0 means the last spin-1 site
  std::optional<Direction> axis;  // required for Sd2
  bool include_partner = true;     // add the spin-1/2 analog on the partner site

  // Single-site operator for a site of the given local dimension.
  DenseMatrix local_operator(int local_dim) const;
  int resolved_last(const Lattice& lattice) const;
  void validate(const Lattice& lattice) const;
};

// Ramp functions f (field) and g (boundary bond) on [0, T].
struct Ramp {
  std::function<double(double)> f;
  std::function<double(double)> g;
  static Ramp linear(double T);
};

class GateSchedule {
 public:
  GateSchedule(double T, double dt, Direction field_dir, int boundary_site = 1, std::optional<Ramp> ramp = {});
  // Decoupling ramp: g goes 1 -> 0 and no field term is applied.
  static GateSchedule decoupling(double T, double dt, int boundary_site, std::optional<Ramp> ramp = {});

  double T() const { return T_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  const Direction& field_dir() const { return field_; }
  int boundary_site() const { return k_; }
  bool field_enabled() const { return field_on_; }
  double f(double t) const;
  double g(double t) const;
  void check_time(double t) const;

 private:
  GateSchedule(double T, double dt, Direction field_dir, int boundary_site, std::optional<Ramp> ramp,
               bool field_on);
  double T_, dt_;
  int steps_;
  Direction field_;
  int k_;
  Ramp ramp_;
  bool field_on_;
};

// Two-site S.S for local dimensions d1, d2.
DenseMatrix bond_operator(int d1, int d2);
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

SpinOperator heisenberg(int k, int n, double J, const Lattice& lattice);
SpinOperator heisenberg(int k, int n, double J);
SpinOperator partner_bond(const Lattice& lattice, double J_R);
// H_{k,n} plus the edge-partner bond when the lattice has one.
SpinOperator chain_hamiltonian(int k, const Lattice& lattice, const CouplingConstants& c);
SpinOperator local_field(int site, const Direction& d, double J_f, const Lattice& lattice);
SpinOperator local_field(int site, const Direction& d, double J_f, int n);
SpinOperator perturbation(const PerturbationSpec& spec, const Lattice& lattice);
SpinOperator perturbation(const PerturbationSpec& spec, int n);

// The gate Hamiltonian split into its three fixed sparse parts:
// H(t) = f(t) field + g(t) boundary_bond + rest.
class GateHamiltonian {
 public:
  GateHamiltonian(const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                  const std::optional<PerturbationSpec>& pert = {});
  SpinOperator at(double t) const;
  const SpinOperator& field_part() const { return field_; }
  const SpinOperator& bond_part() const { return bond_; }
  const SpinOperator& static_part() const { return rest_; }
  const GateSchedule& schedule() const { return sched_; }

 private:
  GateSchedule sched_;
  SpinOperator field_, bond_, rest_;
};

SpinOperator gate_hamiltonian(double t, const GateSchedule& sched, const CouplingConstants& c, const Lattice& lattice,
                              const std::optional<PerturbationSpec>& pert = {});

// Total spin component along d and Casimir S_tot^2 over sites first..last
// (partner included when last is the partner site).
SpinOperator total_spin(const Direction& d, const Lattice& lattice, int first = 1, int last = 0);
SpinOperator total_spin_squared(const Lattice& lattice, int first = 1, int last = 0);

}  // namespace holosense
