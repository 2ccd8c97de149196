#pragma once

#include <variant>

#include "psgla/random.h"
#include "psgla/types.h"

namespace psgla {

// A compact convex body K containing the origin-centred ball of radius r.
// Immutable after construction; every method is const and thread-safe.
class ConvexBody {
 public:
  enum class Kind { kBall, kBox, kPolytope };

  struct Ball {
    Vector center;
    double radius;
  };
  struct Box {
    Vector lower;
    Vector upper;
  };
  // {x : A x <= b}; rows of A are stored together with unit-normalised copies.
  struct Polytope {
    Matrix A;
    Vector b;
    Matrix unit_A;
    Vector unit_b;
    Vector bbox_lower;
    Vector bbox_upper;
  };

  // The origin must lie strictly inside the ball; r = radius - |center|.
  static ConvexBody ball(Vector center, double radius);
  // Requires lower < 0 < upper coordinatewise.
  static ConvexBody box(Vector lower, Vector upper);
  // D and r are user supplied. r is checked exactly (b_i >= r |a_i|); D is
  // checked against the width of K along the axes and random directions.
  static ConvexBody polytope(Matrix A, Vector b, double diameter, double inradius);

  Kind kind() const;
  int dim() const { return dim_; }
  double diameter() const { return diameter_; }
  double inradius() const { return inradius_; }
  // Largest Euclidean norm over K (exact for ball and box, D for polytopes).
  double max_norm() const { return max_norm_; }

  const Ball* as_ball() const { return std::get_if<Ball>(&shape_); }
  const Box* as_box() const { return std::get_if<Box>(&shape_); }
  const Polytope* as_polytope() const { return std::get_if<Polytope>(&shape_); }

  // Euclidean projection. Points already in K are returned unchanged.
  Vector project(const Vector& x) const;
  // In-place variant for hot loops; returns true if x was moved.
  bool project_inplace(Eigen::Ref<Vector> x) const;

  bool contains(const Vector& x, double tol = kMembershipTol) const;

  // Minkowski functional inf{t > 0 : x in tK}.
  double gauge(const Vector& x) const;
  // sup{y^T x : y in K}. Throws InvariantError on an unbounded polytope LP.
  double support(const Vector& direction) const;

  Vector sample_uniform(RandomStream& rng) const;

 private:
  ConvexBody(std::variant<Ball, Box, Polytope> shape, int dim, double diameter, double inradius,
             double max_norm);
  void check_dim(const Vector& x, const char* op) const;

  std::variant<Ball, Box, Polytope> shape_;
  int dim_;
  double diameter_;
  double inradius_;
  double max_norm_;
};

// Dykstra settings for polytope projection.
inline constexpr double kDykstraTol = 1e-10;
inline constexpr int kDykstraMaxSweeps = 10000;

// Consecutive rejected proposals after which uniform sampling gives up.
inline constexpr long kMaxConsecutiveRejections = 1000000;

}  // namespace psgla
