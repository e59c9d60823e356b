#pragma once

// State-vector kernels. Every kernel has a serial reference and an OpenMP
// variant with the same signature; the unqualified entry points dispatch to
// the OpenMP variant. The parallel versions write each output element exactly
// as the serial ones do, so spmv and apply_local agree bitwise; reductions
// agree to rounding.

#include <utility>
#include <vector>

#include "holosense/types.hpp"

namespace holosense::kernels {

// Dense gate on a block of consecutive sites, with its nonzero pattern
// precomputed so structured gates (e.g. S.S exponentials) skip zeros.
class LocalGate {
 public:
  LocalGate() = default;
  explicit LocalGate(DenseMatrix matrix, double drop_tol = 0.0);

  int block() const { return block_; }
  const DenseMatrix& matrix() const { return matrix_; }
  const std::vector<std::vector<std::pair<int, Complex>>>& rows() const { return rows_; }

 private:
  int block_ = 0;
  DenseMatrix matrix_;
  std::vector<std::vector<std::pair<int, Complex>>> rows_;
};

// Index layout for a gate: amplitude index = (o * block + a) * inner + r.
struct GateLayout {
  Index outer = 1;
  Index inner = 1;
};

namespace serial {
void spmv(const SparseMatrix& a, const Complex* x, Complex* y);
void apply_local(const LocalGate& g, const GateLayout& layout, Complex* psi);
Complex dot(const Complex* a, const Complex* b, Index n);
double norm_squared(const Complex* a, Index n);
}  // namespace serial

namespace parallel {
void spmv(const SparseMatrix& a, const Complex* x, Complex* y);
void apply_local(const LocalGate& g, const GateLayout& layout, Complex* psi);
Complex dot(const Complex* a, const Complex* b, Index n);
double norm_squared(const Complex* a, Index n);
}  // namespace parallel

inline void spmv(const SparseMatrix& a, const Complex* x, Complex* y) { parallel::spmv(a, x, y); }
inline void apply_local(const LocalGate& g, const GateLayout& layout, Complex* psi) {
  parallel::apply_local(g, layout, psi);
}
inline Complex dot(const Complex* a, const Complex* b, Index n) { return parallel::dot(a, b, n); }
inline double norm_squared(const Complex* a, Index n) { return parallel::norm_squared(a, n); }

// Threads used by the parallel kernels (OpenMP); 1 when built without OpenMP.
int max_threads();
void set_threads(int k);

}  // namespace holosense::kernels
