#include "holosense/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "holosense/errors.hpp"
#include "holosense/kernels.hpp"
#include "holosense/random.hpp"

namespace holosense {

namespace {

void random_fill(Rng& rng, Complex* v, Index n) {
  for (Index i = 0; i < n; ++i) {
    const double re = 2.0 * uniform01(rng) - 1.0;
    const double im = 2.0 * uniform01(rng) - 1.0;
    v[i] = Complex(re, im);
  }
}

// Orthogonalize column w against V[:, :cols] twice (classical GS, full reorthogonalization).
void project_out(const DenseMatrix& V, Index cols, Eigen::Ref<Vector> w) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vector c = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * c;
  }
}

// Append the columns of W to V as new orthonormal columns; rank-deficient
// directions are replaced with random vectors orthogonal to everything so far.
Index append_block(DenseMatrix& V, Index cols, DenseMatrix& W, Index want, Rng& rng) {
  for (Index j = 0; j < want; ++j) {
    Vector w = W.col(j);
    double before = w.norm();
    project_out(V, cols, w);
    double after = w.norm();
    int attempts = 0;
    while (!(after > 1e-8 * before)) {
      if (++attempts > 8) throw ComputationError("Krylov basis could not be extended");
      random_fill(rng, w.data(), w.size());
      before = w.norm();
      project_out(V, cols, w);
      after = w.norm();
    }
    V.col(cols) = w / after;
    ++cols;
  }
  return cols;
}

void block_matvec(const SpinOperator& h, const DenseMatrix& V, Index start, Index size, DenseMatrix& W) {
  W.resize(V.rows(), size);
  for (Index j = 0; j < size; ++j) kernels::spmv(h.matrix(), V.col(start + j).data(), W.col(j).data());
}

}  // namespace

SpectrumSlice lowest_eigenpairs(const SpinOperator& h, int count, const LanczosOptions& opt) {
  const Index dim = h.dim();
  if (count < 1 || count > 12) throw InvalidArgument("count must be in 1..12");
  if (count > dim) throw InvalidArgument("count exceeds the operator dimension");
  if (!(opt.tol > 0.0)) throw InvalidArgument("tolerance must be positive");

  const Index p = std::min<Index>(count + opt.extra_block, dim);
  Index max_basis = opt.max_basis;
  if (max_basis <= 0) {
    const Index memory_cap = std::max<Index>(3 * p, static_cast<Index>(1.2e8 / static_cast<double>(dim)));
    max_basis = std::min<Index>(std::max<Index>(8 * p, 48), memory_cap);
  }
  max_basis = std::min(std::max(max_basis, 2 * p), dim);

  Rng rng(opt.seed);
  DenseMatrix V(dim, max_basis);
  DenseMatrix X(dim, p);
  random_fill(rng, X.data(), X.size());

  SpectrumSlice out;
  std::vector<double> best_res(count, INFINITY);
  DenseMatrix W;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    Index cols = append_block(V, 0, X, p, rng);
    DenseMatrix T = DenseMatrix::Zero(max_basis, max_basis);
    Index start = 0;
    while (start < cols) {
      const Index size = cols - start;
      block_matvec(h, V, start, size, W);
      out.matvecs += size;
      DenseMatrix C = V.leftCols(cols).adjoint() * W;
      W.noalias() -= V.leftCols(cols) * C;
      const DenseMatrix C2 = V.leftCols(cols).adjoint() * W;
      W.noalias() -= V.leftCols(cols) * C2;
      C += C2;
      T.block(0, start, cols, size) = C;
      const Index next = std::min<Index>(p, max_basis - cols);
      start = cols;
      if (next <= 0) break;
      cols = append_block(V, cols, W, std::min<Index>(next, size), rng);
    }
    // Only the upper triangle (rows up to each block) was computed exactly.
    DenseMatrix Th = T.topLeftCorner(cols, cols);
    for (Index a = 0; a < cols; ++a) {
      Th(a, a) = Th(a, a).real();
      for (Index b = 0; b < a; ++b) Th(a, b) = std::conj(Th(b, a));
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(Th);
    const Index keep = std::min<Index>(p, cols);
    X = V.leftCols(cols) * es.eigenvectors().leftCols(keep);

    std::vector<double> res(count);
    Vector hy(dim);
    for (int i = 0; i < count; ++i) {
      kernels::spmv(h.matrix(), X.col(i).data(), hy.data());
      res[i] = (hy - es.eigenvalues()(i) * X.col(i)).norm();
    }
    out.matvecs += count;
    if (*std::max_element(res.begin(), res.end()) < *std::max_element(best_res.begin(), best_res.end()))
      best_res = res;
    if (*std::max_element(res.begin(), res.end()) < opt.tol) {
      out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
      out.eigenvectors = X.leftCols(count);
      out.residual_norms = res;
      out.restarts = restart;
      return out;
    }
    if (keep < p) {
      DenseMatrix pad(dim, p);
      pad.leftCols(keep) = X;
      random_fill(rng, pad.col(keep).data(), dim * (p - keep));
      X = pad;
    }
  }
  throw ConvergenceError("block Lanczos did not converge", best_res);
}

SpectrumSlice lowest_eigenpairs(const SpinOperator& h, int count, double tol, std::uint64_t seed) {
  LanczosOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  return lowest_eigenpairs(h, count, opt);
}

SpectrumSlice dense_lowest_eigenpairs(const SpinOperator& h, int count) {
  if (h.dim() > 6561) throw InvalidArgument("dense reference limited to dimension 6561");
  if (count < 1 || count > h.dim()) throw InvalidArgument("invalid eigenpair count");
  DenseMatrix m = h.dense();
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m);
  SpectrumSlice out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
  out.eigenvectors = es.eigenvectors().leftCols(count);
  for (int i = 0; i < count; ++i)
    out.residual_norms.push_back((m * out.eigenvectors.col(i) - out.eigenvalues[i] * out.eigenvectors.col(i)).norm());
  return out;
}

GroundSpaceReport ground_space(const SpinOperator& h, std::uint64_t seed) {
  if (h.dim() < 6) throw InvalidArgument("ground space needs at least six levels");
  const SpectrumSlice s = lowest_eigenpairs(h, 6, 1e-9, seed);
  const auto& e = s.eigenvalues;
  int brk = 0;
  for (int i = 1; i < 5; ++i)
    if (e[i + 1] - e[i] > e[brk + 1] - e[brk]) brk = i;
  GroundSpaceReport r;
  r.levels = e;
  r.residual_norms = s.residual_norms;
  r.splitting = e[3] - e[0];
  r.gap = e[4] - e[3];
  // Equality within solver tolerance counts as ambiguous (n=2 sits exactly there).
  if (brk != 3 || !(r.splitting < 0.5 * r.gap - 1e-8))
    throw AmbiguousQuartet("no clear quartet: largest break after level " + std::to_string(brk + 1) +
                           ", splitting " + std::to_string(r.splitting) + ", gap " + std::to_string(r.gap));
  for (int i = 0; i < 4; ++i) r.quartet_energies[i] = e[i];
  r.quartet_states = s.eigenvectors.leftCols(4);
  return r;
}

double expectation(const SpinOperator& h, const Vector& v) {
  if (v.size() != h.dim()) throw InvalidArgument("dimension mismatch in expectation");
  const Vector hv = h.apply(v);
  return kernels::dot(v.data(), hv.data(), v.size()).real();
}

double expectation(const SpinOperator& h, const ChainState& s) {
  if (h.lattice() != s.lattice()) throw InvalidArgument("dimension mismatch in expectation");
  return expectation(h, s.amplitudes());
}

}  // namespace holosense
