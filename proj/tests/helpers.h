#pragma once

#include <cmath>

#include "psgla/geometry.h"
#include "psgla/types.h"

namespace testing {

inline psgla::Vector vec(std::initializer_list<double> v) {
  psgla::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline psgla::ConvexBody interval(double lo = -1.0, double hi = 1.0) {
  return psgla::ConvexBody::box(vec({lo}), vec({hi}));
}

inline psgla::ConvexBody square() { return psgla::ConvexBody::box(vec({-1, -1}), vec({1, 1})); }

inline psgla::ConvexBody unit_disk() { return psgla::ConvexBody::ball(vec({0, 0}), 1.0); }

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace testing
