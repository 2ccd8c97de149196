#include "psgla/lp.h"

#include <limits>
#include <vector>

#include "psgla/errors.h"

namespace psgla {

LpSolution maximize_linear(const Matrix& A, const Vector& b, const Vector& c) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || c.size() != n) {
    throw InputError("maximize_linear: dimension mismatch");
  }
  if ((b.array() < 0.0).any()) {
    throw InputError("maximize_linear: origin must be feasible (b >= 0)");
  }

  // Columns: x+ (n), x- (n), slacks (m), rhs.
  const Eigen::Index cols = 2 * n + m;
  Matrix T = Matrix::Zero(m + 1, cols + 1);
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, n) = -A;
  T.block(0, 2 * n, m, m).setIdentity();
  T.block(0, cols, m, 1) = b;
  T.block(m, 0, 1, n) = -c.transpose();
  T.block(m, n, 1, n) = c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = 2 * n + i;

  constexpr double kTol = 1e-12;
  const int max_pivots = 50 * static_cast<int>(cols + m) + 1000;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (T(m, j) < -kTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      LpSolution sol;
      sol.value = T(m, cols);
      sol.x = Vector::Zero(n);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bj = basis[static_cast<std::size_t>(i)];
        if (bj < n) {
          sol.x[bj] += T(i, cols);
        } else if (bj < 2 * n) {
          sol.x[bj - n] -= T(i, cols);
        }
      }
      return sol;
    }

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double col = T(i, enter);
      if (col > kTol) {
        const double ratio = T(i, cols) / col;
        if (ratio < best - kTol ||
            (ratio <= best + kTol && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      LpSolution sol;
      sol.status = LpSolution::Status::kUnbounded;
      sol.value = std::numeric_limits<double>::infinity();
      return sol;
    }

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && T(i, enter) != 0.0) {
        T.row(i) -= T(i, enter) * T.row(leave);
      }
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  throw NumericError("maximize_linear: pivot limit reached");
}

}  // namespace psgla
