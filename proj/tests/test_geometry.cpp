#include "doctest.h"
#include "helpers.h"
#include "psgla/errors.h"
#include "psgla/geometry.h"

using namespace psgla;
using testing::vec;

namespace {

ConvexBody square_polytope() {
  Matrix A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  return ConvexBody::polytope(A, Vector::Ones(4), 2.0 * std::sqrt(2.0), 1.0);
}

ConvexBody triangle() {
  // x >= -1, y >= -1, x + y <= 1.
  Matrix A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  return ConvexBody::polytope(A, vec({1, 1, 1}), 2.0 * std::sqrt(5.0), 0.5);
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("projection examples") {
    const ConvexBody disk = testing::unit_disk();
    CHECK((disk.project(vec({3, 4})) - vec({0.6, 0.8})).norm() < 1e-15);
    CHECK(disk.project(vec({0.2, 0.1})) == vec({0.2, 0.1}));
    CHECK(testing::square().project(vec({2, -0.5})) == vec({1, -0.5}));
  }

  TEST_CASE("gauge examples") {
    CHECK(testing::unit_disk().gauge(vec({0.5, 0})) == doctest::Approx(0.5));
    CHECK(testing::square().gauge(vec({2, 1})) == doctest::Approx(2.0));
    for (const ConvexBody& k : {testing::unit_disk(), testing::square(), square_polytope()}) {
      CHECK(k.gauge(Vector::Zero(2)) == 0.0);
      CHECK(k.support(Vector::Zero(2)) == 0.0);
    }
  }

  TEST_CASE("support examples") {
    CHECK(testing::unit_disk().support(vec({3, 4})) == doctest::Approx(5.0));
    CHECK(testing::square().support(vec({1, 2})) == doctest::Approx(3.0));
    CHECK(square_polytope().support(vec({1, 2})) == doctest::Approx(3.0));
    CHECK(triangle().support(vec({1, 1})) == doctest::Approx(1.0));
  }

  TEST_CASE("polytope square agrees with box") {
    const ConvexBody box = testing::square();
    const ConvexBody poly = square_polytope();
    RandomStream rng(3);
    for (int i = 0; i < 2000; ++i) {
      Vector x(2);
      rng.fill_normal(x);
      x *= 3.0;
      CHECK((box.project(x) - poly.project(x)).norm() < 1e-9);
      CHECK(box.gauge(x) == doctest::Approx(poly.gauge(x)).epsilon(1e-12));
      CHECK(box.support(x) == doctest::Approx(poly.support(x)).epsilon(1e-9));
    }
  }

  TEST_CASE("polytope projection is the nearest point") {
    const ConvexBody tri = triangle();
    RandomStream rng(5);
    for (int i = 0; i < 500; ++i) {
      Vector x(2);
      rng.fill_normal(x);
      x *= 3.0;
      const Vector p = tri.project(x);
      REQUIRE(tri.contains(p));
      // Variational inequality (x - p)^T (y - p) <= 0 for y in K.
      for (int j = 0; j < 20; ++j) {
        const Vector y = tri.sample_uniform(rng);
        CHECK((x - p).dot(y - p) <= 1e-9);
      }
    }
  }

  TEST_CASE("construction errors") {
    CHECK_THROWS_AS(ConvexBody::ball(vec({2, 0}), 1.0), InputError);
    CHECK_THROWS_AS(ConvexBody::box(vec({0, -1}), vec({1, 1})), InputError);
    Matrix half(1, 2);
    half << 1, 0;
    CHECK_THROWS_AS(ConvexBody::polytope(half, vec({1}), 4.0, 0.5), InvariantError);
    Matrix A(4, 2);
    A << 1, 0, -1, 0, 0, 1, 0, -1;
    CHECK_THROWS_AS(ConvexBody::polytope(A, Vector::Ones(4), 2.0, 1.0), InputError);   // D too small
    CHECK_THROWS_AS(ConvexBody::polytope(A, Vector::Ones(4), 3.0, 1.2), InputError);   // r too large
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(testing::unit_disk().project(vec({1, 2, 3})), InputError);
    CHECK_THROWS_AS(testing::square().gauge(vec({1})), InputError);
  }

  TEST_CASE("diameter and inradius") {
    CHECK(testing::unit_disk().diameter() == 2.0);
    CHECK(testing::unit_disk().inradius() == 1.0);
    const ConvexBody off = ConvexBody::ball(vec({0.5, 0}), 1.0);
    CHECK(off.inradius() == doctest::Approx(0.5));
    CHECK(testing::square().diameter() == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(ConvexBody::box(vec({-1, -3}), vec({2, 1})).inradius() == 1.0);
  }

  TEST_CASE("homogeneity") {
    RandomStream rng(9);
    for (const ConvexBody& k : {testing::unit_disk(), testing::square(), triangle()}) {
      for (int i = 0; i < 200; ++i) {
        Vector x(2);
        rng.fill_normal(x);
        const double t = 3.0 * rng.uniform();
        CHECK(k.gauge(t * x) == doctest::Approx(t * k.gauge(x)).epsilon(1e-9));
        CHECK(k.support(t * x) == doctest::Approx(t * k.support(x)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("uniform sampling moments") {
    RandomStream rng(11);
    const int N = 100000;
    double norm2 = 0.0, mean = 0.0;
    const ConvexBody disk = testing::unit_disk();
    const ConvexBody line = testing::interval();
    for (int i = 0; i < N; ++i) {
      norm2 += disk.sample_uniform(rng).squaredNorm();
      mean += line.sample_uniform(rng)[0];
    }
    CHECK(std::abs(norm2 / N - 0.5) < 0.01);
    CHECK(std::abs(mean / N) < 0.01);
    for (int i = 0; i < 1000; ++i) CHECK(triangle().contains(triangle().sample_uniform(rng)));
  }

  TEST_CASE("degenerate polytope sampling fails") {
    // A sliver of width 1e-9 around the diagonal of the square.
    Matrix A(6, 2);
    A << 1, -1, -1, 1, 1, 0, -1, 0, 0, 1, 0, -1;
    Vector b(6);
    b << 1e-9, 1e-9, 1, 1, 1, 1;
    const ConvexBody sliver = ConvexBody::polytope(A, b, 3.0, 1e-10);
    RandomStream rng(1);
    CHECK_THROWS_AS(sliver.sample_uniform(rng), DegenerateGeometryError);
  }

  TEST_CASE("projection properties on random inputs") {
    RandomStream rng(13);
    for (const ConvexBody& k : {testing::unit_disk(), testing::square(), triangle(),
                                ConvexBody::ball(vec({0.3, -0.2}), 1.5)}) {
      for (int i = 0; i < 2000; ++i) {
        Vector x(2), y(2);
        rng.fill_normal(x);
        rng.fill_normal(y);
        x *= 2.5;
        y *= 2.5;
        const Vector px = k.project(x), py = k.project(y);
        CHECK(k.contains(px));
        CHECK((k.project(px) - px).norm() <= 1e-9);
        CHECK((px - py).norm() <= (x - y).norm() + 1e-9);
        const Vector m = k.sample_uniform(rng);
        CHECK((m - x).squaredNorm() + 1e-9 >= (m - px).squaredNorm() + (x - px).squaredNorm());
        CHECK(k.gauge(x) <= x.norm() / k.inradius() + 1e-9);
        CHECK(x.dot(y) <= k.gauge(x) * k.support(y) + 1e-9);
      }
    }
  }
}
