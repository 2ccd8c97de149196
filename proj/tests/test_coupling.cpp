#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.h"
#include "psgla/constants.h"
#include "psgla/coupling.h"
#include "psgla/errors.h"
#include "psgla/random.h"

using namespace psgla;
using testing::vec;

namespace {

LossPtr flat(const ConvexBody& body) {
  return make_linear(body, Vector::Zero(body.dim()), NoiseModel::zero(body.dim()));
}

std::vector<OscillatorSolution> sample_solutions() {
  return {OscillatorSolution::from_parameters(0.5, 0.5, 2.0),
          OscillatorSolution::from_parameters(2.0, 3.0, 1.5),
          OscillatorSolution::from_parameters(1.3, 0.05, 1.0),
          OscillatorSolution::from_parameters(4.0, 1.0 + 1e-8, 1.0),
          OscillatorSolution::from_parameters(0.8, 12.0, 3.0)};
}

}  // namespace

TEST_SUITE("coupling") {
  TEST_CASE("oscillator closed forms") {
    const auto under = OscillatorSolution::from_parameters(0.5, 0.5, 2.0);
    CHECK(under.regime() == OscillatorSolution::Regime::kUnderdamped);
    CHECK(h_eval(under, 1.0) == doctest::Approx(0.75469040694981365).epsilon(1e-14));
    const auto over = OscillatorSolution::from_parameters(2.0, 3.0, 1.0);
    CHECK(over.regime() == OscillatorSolution::Regime::kOverdamped);
    CHECK(h_eval(over, 0.7) == doctest::Approx(0.069489419695018734).epsilon(1e-13));
    const auto crit = OscillatorSolution::from_parameters(2.0, 1.0 + 1e-7, 1.0);
    CHECK(crit.regime() == OscillatorSolution::Regime::kCritical);
    CHECK(h_eval(crit, 0.5) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
    // The limit form agrees with the overdamped branch just outside the window.
    const auto near = OscillatorSolution::from_parameters(2.0, 1.0 + 2e-6, 1.0);
    CHECK(near.regime() == OscillatorSolution::Regime::kOverdamped);
    CHECK(h_eval(near, 0.5) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-5));
  }

  TEST_CASE("boundary conditions") {
    for (const auto& s : sample_solutions()) {
      CHECK(h_eval(s, 0.0) == 0.0);
      const double step = 1e-7;
      CHECK(std::abs((s.h(step) - s.h(0.0)) / step - 1.0) < 1e-6);
      CHECK(s.dh(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("ODE residual by finite differences") {
    for (const auto& s : sample_solutions()) {
      const double w = s.omega(), xi = s.xi(), D = s.D();
      const double step = 1e-5;
      double worst = 0.0;
      for (int i = 1; i < 1000; ++i) {
        const double x = D * i / 1000.0;
        if (x + step > D) break;
        const double fd1 = (s.h(x + step) - s.h(x - step)) / (2 * step);
        const double fd2 = (s.dh(x + step) - s.dh(x - step)) / (2 * step);
        const double scale = w * w * std::abs(s.h(x)) + 2 * xi * w * std::abs(fd1) + std::abs(fd2) + 1.0;
        worst = std::max(worst, std::abs(w * w * s.h(x) + 2 * xi * w * fd1 + fd2) / scale);
        CHECK(std::abs(fd1 - s.dh(x)) < 1e-8 * (1.0 + std::abs(s.dh(x))));
      }
      CHECK(worst < 1e-8);
    }
  }

  TEST_CASE("input checks") {
    CHECK_THROWS_AS(OscillatorSolution::from_parameters(1.0, 1.0, 1.0), DegenerateDampingError);
    CHECK_THROWS_AS(OscillatorSolution::from_parameters(0.0, 0.5, 1.0), InputError);
    CHECK_THROWS_AS(OscillatorSolution::from_parameters(1.0, -0.5, 1.0), InputError);
    const auto s = OscillatorSolution::from_parameters(1.0, 0.5, 1.0);
    CHECK_THROWS_AS(h_eval(s, -0.1), InputError);
    CHECK_THROWS_AS(h_eval(s, 1.1), InputError);
  }

  TEST_CASE("problem-derived h is increasing, concave and bracketed") {
    RandomStream rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      ProblemData p;
      p.D = 0.5 + 3.0 * rng.uniform();
      p.r = 0.25 * p.D;
      p.lipschitz = 0.1 + 4.0 * rng.uniform();
      p.smoothness = p.lipschitz;
      p.beta = std::exp(-1.0 + 5.0 * rng.uniform());
      // Past this point h'(D) ~ e^{-D^2 l beta / 4} is lost to cancellation.
      if (p.D * p.D * p.lipschitz * p.beta > 40.0) continue;
      const auto s = OscillatorSolution::from_problem(p);
      const double slope_D = s.dh(p.D);
      for (int i = 0; i <= 1000; ++i) {
        const double x = p.D * i / 1000.0;
        REQUIRE(s.dh(x) > 0.0);
        if (i > 0) REQUIRE(s.d2h(x) < 0.0);
        REQUIRE(slope_D * x <= s.h(x) * (1 + 1e-12));
        REQUIRE(s.h(x) <= x);
      }
    }
  }

  TEST_CASE("coupled_step examples") {
    const ConvexBody big = ConvexBody::box(vec({-100, -100}), vec({100, 100}));
    const LossPtr f = flat(big);
    const double eta = 0.5, beta = 1.0;
    const double s = std::sqrt(2 * eta / beta);
    auto [a, b] = coupled_step(big, *f, vec({0.3, 0.1}), vec({0.3, 0.1}), eta, beta, vec({0, 0}),
                               vec({0.4, -0.7}), true);
    CHECK(a == b);

    auto [c, d] = coupled_step(big, *f, vec({1.0, 0.5}), vec({-1.0, 0.5}), eta, beta, vec({0, 0}),
                               vec({0.4, -0.7}), false);
    CHECK(((d - vec({-1.0, 0.5})) / s - vec({-0.4, -0.7})).norm() < 1e-14);
    CHECK(((c - vec({1.0, 0.5})) / s - vec({0.4, -0.7})).norm() < 1e-14);

    const ConvexBody line = ConvexBody::box(vec({-100}), vec({100}));
    auto [e, g] = coupled_step(line, *flat(line), vec({0.2}), vec({0.9}), eta, beta, vec({0}),
                               vec({1.3}), false);
    CHECK((g[0] - 0.9) / s == doctest::Approx(-1.3));
    CHECK((e[0] - 0.2) / s == doctest::Approx(1.3));
  }

  TEST_CASE("reflected noise is standard normal") {
    const ConvexBody big = ConvexBody::box(vec({-1e6, -1e6}), vec({1e6, 1e6}));
    const LossPtr f = flat(big);
    const int N = 100000;
    const double eta = 0.5, beta = 1.0, s = 1.0;
    RandomStream rng(99);
    Vector sum = Vector::Zero(2);
    Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
    Vector x1(2), x2(2), w(2);
    for (int i = 0; i < N; ++i) {
      rng.fill_normal(x1);
      rng.fill_normal(x2);
      rng.fill_normal(w);
      auto [y1, y2] = coupled_step(big, *f, x1, x2, eta, beta, Vector::Zero(2), w, false);
      const Vector noise = (y2 - x2) / s;
      sum += noise;
      second += noise * noise.transpose();
    }
    const Vector mean = sum / N;
    const Eigen::Matrix2d cov = second / N - mean * mean.transpose();
    CHECK(mean.cwiseAbs().maxCoeff() < 3.0 / std::sqrt(static_cast<double>(N)));
    // Standard errors: sqrt(2/N) on the diagonal, sqrt(1/N) off it.
    CHECK(std::abs(cov(0, 0) - 1.0) < 3.0 * std::sqrt(2.0 / N));
    CHECK(std::abs(cov(1, 1) - 1.0) < 3.0 * std::sqrt(2.0 / N));
    CHECK(std::abs(cov(0, 1)) < 3.0 * std::sqrt(1.0 / N));
  }

  TEST_CASE("maximal coupling meets when the means coincide") {
    const ConvexBody line = testing::interval();
    const LossPtr f = flat(line);
    const MaximalStep m =
        coupled_step_maximal(line, *f, vec({0.1}), vec({0.1}), 0.1, 1.0, vec({0}), vec({0.3}), 0.999);
    CHECK(m.met);
    CHECK(m.x1 == m.x2);
    // Far apart with a large uniform draw: reflection.
    const MaximalStep r =
        coupled_step_maximal(line, *f, vec({0.9}), vec({-0.9}), 0.01, 1.0, vec({0}), vec({0.0}), 0.999);
    CHECK_FALSE(r.met);
    CHECK(r.x1[0] == doctest::Approx(0.9));
    CHECK(r.x2[0] == doctest::Approx(-0.9));
  }

  TEST_CASE("supermartingale grid") {
    const auto g = supermartingale_grid(500, 20);
    REQUIRE(g.size() == 20);
    CHECK(g.front() == 0);
    CHECK(g.back() == 500);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    const auto tight = supermartingale_grid(19, 20);
    for (long i = 0; i < 20; ++i) CHECK(tight[i] == i);
    CHECK_THROWS_AS(supermartingale_grid(10, 20), InputError);
  }

  TEST_CASE("constant drift passes") {
    const ConvexBody line = testing::interval();
    const LossPtr f = flat(line);
    ProblemData p = problem_data(line, *f, 2.0);
    const ContractionConstants cc = contraction_constants(p);
    const auto sol = OscillatorSolution::from_contraction(cc, p.D);
    const auto rep = supermartingale_check(line, *f, sol, 0.1, 2.0, cc.a, 1000, 200, 4);
    CHECK(rep.pass);
    CHECK(rep.grid.size() == 20);
    for (std::size_t j = 0; j < rep.grid.size(); ++j) {
      CHECK(rep.ci_lo[j] <= rep.mean_m[j]);
      CHECK(rep.mean_m[j] <= rep.ci_hi[j]);
    }
  }

  TEST_CASE("pure reflection does not merge in discrete time") {
    // Without the maximal meeting step the distance never reaches the merge
    // threshold, so e^{eta a t} h(|rho_t|) eventually grows.
    const ConvexBody line = testing::interval();
    const LossPtr f = flat(line);
    ProblemData p = problem_data(line, *f, 2.0);
    const ContractionConstants cc = contraction_constants(p);
    const auto sol = OscillatorSolution::from_contraction(cc, p.D);
    SupermartingaleOptions o;
    o.kind = CouplingKind::kReflection;
    const auto rep = supermartingale_check(line, *f, sol, 0.1, 2.0, cc.a, 1000, 200, 4, o);
    long merged = 0;
    for (long t : rep.coupling_times) merged += t >= 0;
    CHECK(merged < 10);
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("identical starts give M = 0") {
    const ConvexBody sq = testing::square();
    const LossPtr w = make_double_well(sq, NoiseModel::gaussian(2, 0.2));
    SupermartingaleOptions o;
    o.identical_start = true;
    const auto sol = OscillatorSolution::from_parameters(1.0, 2.0, sq.diameter());
    const auto rep = supermartingale_check(sq, *w, sol, 0.1, 1.0, 0.1, 1000, 50, 8, o);
    for (double m : rep.mean_m) CHECK(m == 0.0);
    for (long t : rep.coupling_times) CHECK(t == 0);
    CHECK(rep.pass);
  }

  TEST_CASE("double well passes and coupling absorbs") {
    const ConvexBody line = testing::interval();
    const LossPtr w = make_double_well(line, NoiseModel::gaussian(1, 0.1));
    const double beta = 2.0, eta = 0.1;
    const ProblemData p = problem_data(line, *w, beta);
    const ContractionConstants cc = contraction_constants(p);
    const auto sol = OscillatorSolution::from_contraction(cc, p.D);
    SupermartingaleOptions o;
    o.keep_distances = true;
    const auto rep = supermartingale_check(line, *w, sol, eta, beta, cc.a, 2000, 500, 2024, o);
    CHECK(rep.pass);
    REQUIRE(rep.distances.rows() == 2000);
    for (long i = 0; i < 2000; ++i) {
      for (std::size_t j = 0; j < rep.grid.size(); ++j) {
        const double d = rep.distances(i, static_cast<Eigen::Index>(j));
        REQUIRE(d >= 0.0);
        REQUIRE(d <= p.D);
        const long tau = rep.coupling_times[i];
        if (tau >= 0 && rep.grid[j] >= tau) REQUIRE(d == 0.0);
      }
    }
  }

  TEST_CASE("replicate floor") {
    const ConvexBody line = testing::interval();
    const auto sol = OscillatorSolution::from_parameters(1.0, 0.5, 2.0);
    CHECK_THROWS_AS(supermartingale_check(line, *flat(line), sol, 0.1, 1.0, 0.1, 999, 100, 1),
                    InputError);
  }
}
