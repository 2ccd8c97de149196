#pragma once

#include <Eigen/Dense>

namespace psgla {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One sample per row; rows are contiguous so a row maps onto a point.
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Absolute tolerance for "x lies in K".
inline constexpr double kMembershipTol = 1e-9;

// Selects the OpenMP kernel or the serial reference path. Both produce
// bit-identical results; the serial path exists for testing and benchmarks.
enum class Execution { kSerial, kParallel };

}  // namespace psgla
