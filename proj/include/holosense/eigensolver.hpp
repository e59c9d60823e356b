#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "holosense/spin_algebra.hpp"

namespace holosense {

inline constexpr std::uint64_t kDefaultSolverSeed = 0x9e3779b97f4a7c15ULL;

struct SpectrumSlice {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix eigenvectors;         // one orthonormal column per eigenvalue
  std::vector<double> residual_norms;
  int restarts = 0;
  Index matvecs = 0;

  Vector vector(int i) const { return eigenvectors.col(i); }
};

struct LanczosOptions {
  double tol = 1e-9;
  std::uint64_t seed = kDefaultSolverSeed;
  int max_restarts = 400;
  int extra_block = 1;  // block size = count + extra_block
  Index max_basis = 0;  // 0 picks a size from the dimension
};

// Restarted block Lanczos with full reorthogonalization. The block size
// exceeds the count so exact multiplets (SO(3) degeneracies) are resolved.
SpectrumSlice lowest_eigenpairs(const SpinOperator& h, int count, const LanczosOptions& options);
SpectrumSlice lowest_eigenpairs(const SpinOperator& h, int count, double tol = 1e-9,
                                std::uint64_t seed = kDefaultSolverSeed);

// Dense reference diagonalization (small dimensions only).
SpectrumSlice dense_lowest_eigenpairs(const SpinOperator& h, int count);

struct GroundSpaceReport {
  std::array<double, 4> quartet_energies{};
  double splitting = 0.0;
  double gap = 0.0;
  std::vector<double> levels;  // lowest six
  DenseMatrix quartet_states;  // four orthonormal columns
  std::vector<double> residual_norms;
};

GroundSpaceReport ground_space(const SpinOperator& h, std::uint64_t seed = kDefaultSolverSeed);

double expectation(const SpinOperator& h, const ChainState& s);
double expectation(const SpinOperator& h, const Vector& v);

}  // namespace holosense
