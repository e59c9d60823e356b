#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace holosense {

using Complex = std::complex<double>;
using Index = std::int64_t;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, std::int64_t>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace holosense
