#include "psgla/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "psgla/errors.h"
#include "psgla/lp.h"

namespace psgla {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool all_finite(const Vector& v) { return v.allFinite(); }

// Exact projection onto {y : a_i^T y = b_i, i in active}, accepted only if the
// KKT conditions hold (multipliers >= 0, all constraints satisfied).
bool polish_active_set(const ConvexBody::Polytope& p, const Vector& x0, Vector& y) {
  const Vector slack = p.unit_b - p.unit_A * y;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (slack[i] < 1e-8) active.push_back(i);
  }
  if (active.empty() || active.size() > static_cast<std::size_t>(x0.size())) return false;
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix AI(k, x0.size());
  Vector bI(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    AI.row(j) = p.unit_A.row(active[static_cast<std::size_t>(j)]);
    bI[j] = p.unit_b[active[static_cast<std::size_t>(j)]];
  }
  const Matrix G = AI * AI.transpose();
  Eigen::LDLT<Matrix> ldlt(G);
  if (ldlt.info() != Eigen::Success) return false;
  // Reject near-singular active sets; Dykstra's answer stands then.
  const Vector d = ldlt.vectorD();
  if (d.minCoeff() < 1e-10 * std::max(1.0, d.maxCoeff())) return false;
  const Vector lambda = ldlt.solve(AI * x0 - bI);
  if ((lambda.array() < -1e-12).any()) return false;
  Vector candidate = x0 - AI.transpose() * lambda;
  if (((p.unit_A * candidate - p.unit_b).array() > 1e-12).any()) return false;
  y = std::move(candidate);
  return true;
}

void project_polytope(const ConvexBody::Polytope& p, Eigen::Ref<Vector> x) {
  const Eigen::Index m = p.unit_A.rows();
  const Vector x0 = x;
  Matrix increments = Matrix::Zero(x.size(), m);
  Vector y(x.size());
  Vector start(x.size());
  for (int sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    start = x;
    for (Eigen::Index i = 0; i < m; ++i) {
      y = x + increments.col(i);
      const double excess = p.unit_A.row(i).dot(y) - p.unit_b[i];
      if (excess > 0.0) {
        x = y - excess * p.unit_A.row(i).transpose();
      } else {
        x = y;
      }
      increments.col(i) = y - x;
    }
    const double moved = (x - start).norm();
    const double violation = (p.unit_A * x - p.unit_b).maxCoeff();
    if (moved <= kDykstraTol && violation <= kDykstraTol) break;
  }
  Vector polished = x;
  if (polish_active_set(p, x0, polished)) x = polished;
}

}  // namespace

ConvexBody::ConvexBody(std::variant<Ball, Box, Polytope> shape, int dim, double diameter,
                       double inradius, double max_norm)
    : shape_(std::move(shape)),
      dim_(dim),
      diameter_(diameter),
      inradius_(inradius),
      max_norm_(max_norm) {}

ConvexBody ConvexBody::ball(Vector center, double radius) {
  if (center.size() < 1) throw InputError("ball: dimension must be positive");
  if (!all_finite(center) || !std::isfinite(radius) || radius <= 0.0) {
    throw InputError("ball: radius must be positive and finite");
  }
  const double offset = center.norm();
  const double r = radius - offset;
  if (r <= 0.0) {
    throw InputError("ball: the origin must lie strictly inside the ball");
  }
  const int n = static_cast<int>(center.size());
  return ConvexBody(Ball{std::move(center), radius}, n, 2.0 * radius, r, offset + radius);
}

ConvexBody ConvexBody::box(Vector lower, Vector upper) {
  if (lower.size() < 1 || lower.size() != upper.size()) {
    throw InputError("box: lower and upper must have the same positive dimension");
  }
  if (!all_finite(lower) || !all_finite(upper)) throw InputError("box: bounds must be finite");
  if ((lower.array() >= 0.0).any() || (upper.array() <= 0.0).any()) {
    throw InputError("box: requires lower < 0 < upper in every coordinate");
  }
  const double r = std::min((-lower).minCoeff(), upper.minCoeff());
  const double d = (upper - lower).norm();
  const double far = lower.cwiseAbs().cwiseMax(upper.cwiseAbs()).norm();
  const int n = static_cast<int>(lower.size());
  return ConvexBody(Box{std::move(lower), std::move(upper)}, n, d, r, far);
}

ConvexBody ConvexBody::polytope(Matrix A, Vector b, double diameter, double inradius) {
  const Eigen::Index n = A.cols();
  if (n < 1 || A.rows() < 1) throw InputError("polytope: A must be non-empty");
  if (b.size() != A.rows()) {
    throw InputError("polytope: b has " + std::to_string(b.size()) + " rows, A has " +
                     std::to_string(A.rows()));
  }
  if (!A.allFinite() || !all_finite(b)) throw InputError("polytope: A and b must be finite");
  if (!(inradius > 0.0) || !(diameter > 0.0)) {
    throw InputError("polytope: diameter and inradius must be positive");
  }
  if (2.0 * inradius > diameter * (1.0 + 1e-12)) {
    throw InputError("polytope: inradius cannot exceed half the diameter");
  }

  Polytope p;
  const Vector norms = A.rowwise().norm();
  if ((norms.array() <= 0.0).any()) throw InputError("polytope: A has a zero row");
  p.unit_A = norms.cwiseInverse().asDiagonal() * A;
  p.unit_b = b.cwiseQuotient(norms);
  // The r-ball lies in {a^T x <= b} iff b / |a| >= r; its extreme point along
  // a / |a| is the binding one.
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (p.unit_b[i] < inradius * (1.0 - 1e-12)) {
      throw InputError("polytope: the origin-centred ball of radius " + std::to_string(inradius) +
                       " violates facet " + std::to_string(i));
    }
  }
  p.A = std::move(A);
  p.b = std::move(b);

  p.bbox_lower.resize(n);
  p.bbox_upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    const LpSolution up = maximize_linear(p.unit_A, p.unit_b, e);
    const LpSolution down = maximize_linear(p.unit_A, p.unit_b, -e);
    if (up.status != LpSolution::Status::kOptimal ||
        down.status != LpSolution::Status::kOptimal) {
      throw InvariantError("polytope: feasible region is unbounded along axis " +
                           std::to_string(i));
    }
    p.bbox_upper[i] = up.value;
    p.bbox_lower[i] = -down.value;
  }

  // Diameter check: the width along any unit direction is a lower bound on D.
  RandomStream rng(0x5eed5eedULL);
  for (int k = 0; k < static_cast<int>(n) + 64; ++k) {
    Vector u(n);
    if (k < n) {
      u.setZero();
      u[k] = 1.0;
    } else {
      rng.fill_normal(u);
      u.normalize();
    }
    const double width = maximize_linear(p.unit_A, p.unit_b, u).value +
                         maximize_linear(p.unit_A, p.unit_b, -u).value;
    if (width > diameter * (1.0 + 1e-9)) {
      throw InputError("polytope: declared diameter " + std::to_string(diameter) +
                       " is smaller than the width " + std::to_string(width));
    }
  }
  return ConvexBody(std::move(p), static_cast<int>(n), diameter, inradius, diameter);
}

ConvexBody::Kind ConvexBody::kind() const {
  return std::visit(Overloaded{[](const Ball&) { return Kind::kBall; },
                               [](const Box&) { return Kind::kBox; },
                               [](const Polytope&) { return Kind::kPolytope; }},
                    shape_);
}

void ConvexBody::check_dim(const Vector& x, const char* op) const {
  if (x.size() != dim_) {
    throw InputError(std::string(op) + ": expected dimension " + std::to_string(dim_) + ", got " +
                     std::to_string(x.size()));
  }
}

Vector ConvexBody::project(const Vector& x) const {
  check_dim(x, "project");
  Vector y = x;
  project_inplace(y);
  return y;
}

bool ConvexBody::project_inplace(Eigen::Ref<Vector> x) const {
  return std::visit(
      Overloaded{[&](const Ball& b) {
                   const double norm = (x - b.center).norm();
                   if (norm <= b.radius) return false;
                   x = b.center + (b.radius / norm) * (x - b.center);
                   return true;
                 },
                 [&](const Box& b) {
                   bool moved = false;
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     const double c = std::clamp(x[i], b.lower[i], b.upper[i]);
                     if (c != x[i]) {
                       x[i] = c;
                       moved = true;
                     }
                   }
                   return moved;
                 },
                 [&](const Polytope& p) {
                   if (((p.A * x - p.b).array() <= 0.0).all()) return false;
                   project_polytope(p, x);
                   return true;
                 }},
      shape_);
}

bool ConvexBody::contains(const Vector& x, double tol) const {
  check_dim(x, "contains");
  return std::visit(
      Overloaded{[&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                 [&](const Box& b) {
                   return ((x - b.lower).array() >= -tol).all() &&
                          ((b.upper - x).array() >= -tol).all();
                 },
                 [&](const Polytope& p) { return (p.unit_A * x - p.unit_b).maxCoeff() <= tol; }},
      shape_);
}

double ConvexBody::gauge(const Vector& x) const {
  check_dim(x, "gauge");
  return std::visit(
      Overloaded{[&](const Ball& b) {
                   // Positive root of t^2 (R^2 - |c|^2) + 2 t c^T x - |x|^2 = 0.
                   const double q = b.radius * b.radius - b.center.squaredNorm();
                   const double cx = b.center.dot(x);
                   const double xx = x.squaredNorm();
                   if (xx == 0.0) return 0.0;
                   const double disc = std::sqrt(cx * cx + q * xx);
                   // Rationalised form avoids cancellation when c^T x > 0.
                   return cx <= 0.0 ? (disc - cx) / q : xx / (disc + cx);
                 },
                 [&](const Box& b) {
                   double t = 0.0;
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     t = std::max(t, x[i] > 0.0 ? x[i] / b.upper[i] : x[i] / b.lower[i]);
                   }
                   return t;
                 },
                 [&](const Polytope& p) {
                   return std::max(0.0, (p.A * x).cwiseQuotient(p.b).maxCoeff());
                 }},
      shape_);
}

double ConvexBody::support(const Vector& y) const {
  check_dim(y, "support");
  return std::visit(
      Overloaded{[&](const Ball& b) { return b.center.dot(y) + b.radius * y.norm(); },
                 [&](const Box& b) {
                   double s = 0.0;
                   for (Eigen::Index i = 0; i < y.size(); ++i) {
                     s += std::max(b.lower[i] * y[i], b.upper[i] * y[i]);
                   }
                   return s;
                 },
                 [&](const Polytope& p) {
                   if (y.isZero(0.0)) return 0.0;
                   const LpSolution sol = maximize_linear(p.unit_A, p.unit_b, y);
                   if (sol.status != LpSolution::Status::kOptimal) {
                     throw InvariantError("support: unbounded linear program");
                   }
                   return sol.value;
                 }},
      shape_);
}

Vector ConvexBody::sample_uniform(RandomStream& rng) const {
  return std::visit(
      Overloaded{[&](const Ball& b) {
                   Vector d(dim_);
                   rng.fill_normal(d);
                   d.normalize();
                   const double radius = b.radius * std::pow(rng.uniform(), 1.0 / dim_);
                   return Vector(b.center + radius * d);
                 },
                 [&](const Box& b) {
                   Vector x(dim_);
                   for (int i = 0; i < dim_; ++i) {
                     x[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * rng.uniform();
                   }
                   return x;
                 },
                 [&](const Polytope& p) {
                   Vector x(dim_);
                   for (long attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
                     for (int i = 0; i < dim_; ++i) {
                       x[i] = p.bbox_lower[i] + (p.bbox_upper[i] - p.bbox_lower[i]) * rng.uniform();
                     }
                     if (((p.A * x - p.b).array() <= 0.0).all()) return x;
                   }
                   throw DegenerateGeometryError(
                       "sample_uniform: bounding-box rejection acceptance below 1e-6");
                 }},
      shape_);
}

}  // namespace psgla
