// Serial vs OpenMP kernels on chain-sized state vectors, plus a full gate step.
#include <benchmark/benchmark.h>

#include "holosense/chain_model.hpp"
#include "holosense/evolution.hpp"
#include "holosense/kernels.hpp"
#include "holosense/random.hpp"

using namespace holosense;

namespace {

Vector random_state(Index dim) {
  Rng rng(7);
  std::normal_distribution<double> g;
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

template <void (*Spmv)(const SparseMatrix&, const Complex*, Complex*)>
void BM_Spmv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpinOperator h = heisenberg(1, n, 1.0);
  const Vector x = random_state(h.dim());
  Vector y(h.dim());
  for (auto _ : state) {
    Spmv(h.matrix(), x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * h.matrix().nonZeros());
}

template <void (*Apply)(const kernels::LocalGate&, const kernels::GateLayout&, Complex*)>
void BM_ApplyLocal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lattice(n);
  const kernels::LocalGate gate(bond_operator(3, 3));
  const kernels::GateLayout layout = gate_layout(lattice, n / 2, 2);
  Vector psi = random_state(lattice.dim());
  for (auto _ : state) {
    Apply(gate, layout, psi.data());
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * lattice.dim());
}

template <Complex (*Dot)(const Complex*, const Complex*, Index)>
void BM_Dot(benchmark::State& state) {
  const Lattice lattice(static_cast<int>(state.range(0)));
  const Vector a = random_state(lattice.dim()), b = random_state(lattice.dim());
  for (auto _ : state) benchmark::DoNotOptimize(Dot(a.data(), b.data(), a.size()));
  state.SetItemsProcessed(state.iterations() * lattice.dim());
}

// 100 Trotter steps of the n-site partner-terminated gate.
void BM_TrotterSteps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lattice(n, true);
  const ChainState s0(lattice, random_state(lattice.dim()));
  const GateSchedule sched(1.0, 0.01, Direction::x_axis(), 1);
  const TrotterPropagator prop(sched, CouplingConstants{}, lattice);
  for (auto _ : state) benchmark::DoNotOptimize(prop.evolve(s0).final_state.amplitudes().data());
  state.SetItemsProcessed(state.iterations() * sched.steps());
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Spmv, kernels::serial::spmv)->Arg(8)->Arg(10);
BENCHMARK_TEMPLATE(BM_Spmv, kernels::parallel::spmv)->Arg(8)->Arg(10);
BENCHMARK_TEMPLATE(BM_ApplyLocal, kernels::serial::apply_local)->Arg(8)->Arg(10);
BENCHMARK_TEMPLATE(BM_ApplyLocal, kernels::parallel::apply_local)->Arg(8)->Arg(10);
BENCHMARK_TEMPLATE(BM_Dot, kernels::serial::dot)->Arg(10);
BENCHMARK_TEMPLATE(BM_Dot, kernels::parallel::dot)->Arg(10);
BENCHMARK(BM_TrotterSteps)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
