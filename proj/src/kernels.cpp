#include "holosense/kernels.hpp"

#include <array>
#include <cmath>

#include "holosense/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace holosense::kernels {

namespace {
constexpr int kMaxBlock = 32;

// Reductions on std::complex need a user-declared OpenMP reduction.
#pragma omp declare reduction(csum : std::complex<double> : omp_out += omp_in) \
    initializer(omp_priv = std::complex<double>(0.0, 0.0))

inline void gate_on_block(const LocalGate& g, Index base, Index inner, Complex* psi) {
  const int d = g.block();
  std::array<Complex, kMaxBlock> in;
  for (int a = 0; a < d; ++a) in[a] = psi[base + a * inner];
  const auto& rows = g.rows();
  for (int a = 0; a < d; ++a) {
    Complex acc = 0.0;
    for (const auto& [col, v] : rows[a]) acc += v * in[col];
    psi[base + a * inner] = acc;
  }
}
}  // namespace

LocalGate::LocalGate(DenseMatrix matrix, double drop_tol)
    : block_(static_cast<int>(matrix.rows())), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || block_ <= 0 || block_ > kMaxBlock)
    throw InvalidArgument("local gate must be square with block size in [1, 32]");
  rows_.resize(block_);
  for (int a = 0; a < block_; ++a)
    for (int b = 0; b < block_; ++b)
      if (std::abs(matrix_(a, b)) > drop_tol) rows_[a].emplace_back(b, matrix_(a, b));
}

namespace serial {

void spmv(const SparseMatrix& a, const Complex* x, Complex* y) {
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const auto* val = a.valuePtr();
  for (Index i = 0; i < a.rows(); ++i) {
    Complex acc = 0.0;
    for (auto p = outer[i]; p < outer[i + 1]; ++p) acc += val[p] * x[inner[p]];
    y[i] = acc;
  }
}

void apply_local(const LocalGate& g, const GateLayout& layout, Complex* psi) {
  const Index d = g.block();
  for (Index o = 0; o < layout.outer; ++o)
    for (Index r = 0; r < layout.inner; ++r) gate_on_block(g, o * d * layout.inner + r, layout.inner, psi);
}

Complex dot(const Complex* a, const Complex* b, Index n) {
  Complex acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm_squared(const Complex* a, Index n) {
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += std::norm(a[i]);
  return acc;
}

}  // namespace serial

namespace parallel {

void spmv(const SparseMatrix& a, const Complex* x, Complex* y) {
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const auto* val = a.valuePtr();
  const Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    Complex acc = 0.0;
    for (auto p = outer[i]; p < outer[i + 1]; ++p) acc += val[p] * x[inner[p]];
    y[i] = acc;
  }
}

void apply_local(const LocalGate& g, const GateLayout& layout, Complex* psi) {
  const Index d = g.block();
  const Index inner = layout.inner;
  const Index total = layout.outer * inner;
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < total; ++t) {
    const Index o = t / inner;
    const Index r = t % inner;
    gate_on_block(g, o * d * inner + r, inner, psi);
  }
}

Complex dot(const Complex* a, const Complex* b, Index n) {
  Complex acc = 0.0;
#pragma omp parallel for schedule(static) reduction(csum : acc)
  for (Index i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm_squared(const Complex* a, Index n) {
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (Index i = 0; i < n; ++i) acc += std::norm(a[i]);
  return acc;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int k) {
  if (k < 1) throw InvalidArgument("thread count must be positive");
#ifdef _OPENMP
  omp_set_num_threads(k);
#endif
}

}  // namespace holosense::kernels
