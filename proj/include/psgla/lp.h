#pragma once

#include "psgla/types.h"

namespace psgla {

struct LpSolution {
  enum class Status { kOptimal, kUnbounded };
  Status status = Status::kOptimal;
  double value = 0.0;
  Vector x;
};

// max c^T x subject to A x <= b with x free. Requires b >= 0 so the origin is a
// feasible starting vertex. Dense tableau simplex with Bland's rule; intended
// for the handful of facets a desk-scale polytope has.
LpSolution maximize_linear(const Matrix& A, const Vector& b, const Vector& c);

}  // namespace psgla
