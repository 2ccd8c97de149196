#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.h"
#include "psgla/constants.h"
#include "psgla/coupling.h"
#include "psgla/errors.h"
#include "psgla/random.h"

using namespace psgla;

namespace {

ProblemData make(int n, double D, double r, double l, double u, double sigma, double beta) {
  ProblemData p;
  p.n = n;
  p.D = D;
  p.r = r;
  p.lipschitz = l;
  p.smoothness = u;
  p.sigma = sigma;
  p.beta = beta;
  return p;
}

ProblemData random_problem(RandomStream& rng, double max_log_beta = 3.0) {
  ProblemData p;
  p.n = 1 + static_cast<int>(rng.below(5));
  p.D = 0.5 + 3.0 * rng.uniform();
  p.r = p.D * (0.05 + 0.45 * rng.uniform());
  p.lipschitz = 0.05 + 4.0 * rng.uniform();
  p.smoothness = 0.05 + 4.0 * rng.uniform();
  p.sigma = 2.0 * rng.uniform();
  p.beta = std::exp(-2.0 + (max_log_beta + 2.0) * rng.uniform());
  return p;
}

}  // namespace

TEST_SUITE("constants") {
  TEST_CASE("contraction constants examples") {
    const auto u = contraction_constants(make(1, 2, 1, 1, 1, 0, 1));
    CHECK(u.regime == DampingRegime::kUnderdamped);
    CHECK(u.a == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(u.omega == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(u.xi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(u.c_w1mult == doctest::Approx(7.9243724345131846).epsilon(1e-13));

    const auto o = contraction_constants(make(1, 1, 0.5, 4, 1, 0, 4));
    CHECK(o.regime == DampingRegime::kOverdamped);
    CHECK(o.a == doctest::Approx(0.28260329941265786).epsilon(1e-13));
    CHECK(o.c_w1mult == doctest::Approx(372.17359979796154).epsilon(1e-12));
    CHECK(o.log_a == doctest::Approx(std::log(o.a)).epsilon(1e-14));
    CHECK(o.log_c_w1mult == doctest::Approx(std::log(o.c_w1mult)).epsilon(1e-14));
  }

  TEST_CASE("underdamped branch has D omega = 1") {
    RandomStream rng(1);
    for (int i = 0; i < 1000; ++i) {
      ProblemData p = random_problem(rng);
      if (p.D * p.D * p.lipschitz * p.beta >= 8.0) continue;
      const auto c = contraction_constants(p);
      CHECK(c.regime == DampingRegime::kUnderdamped);
      CHECK(p.D * c.omega == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(c.a >= p.lipschitz / 2 * (1 - 1e-14));
    }
  }

  TEST_CASE("overdamped lower bound on a") {
    RandomStream rng(2);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
      ProblemData p = random_problem(rng, 5.0);
      const double s = p.D * p.D * p.lipschitz * p.beta;
      if (s < 8.0) continue;
      const auto c = contraction_constants(p);
      CHECK(c.regime == DampingRegime::kOverdamped);
      const double log_lower =
          std::log(p.D * p.D * p.lipschitz * p.lipschitz / 16.0) + std::log(p.beta) - s / 4.0;
      CHECK(c.log_a >= log_lower - 1e-12);
      ++checked;
    }
    CHECK(checked > 100);
  }

  TEST_CASE("c_W1mult equals 1 / h'(D)") {
    RandomStream rng(3);
    for (int i = 0; i < 200; ++i) {
      const ProblemData p = random_problem(rng);
      // Beyond this range h'(D) ~ e^{-D^2 l beta / 4} drowns in rounding.
      if (p.D * p.D * p.lipschitz * p.beta > 32.0) continue;
      const auto c = contraction_constants(p);
      const auto sol = OscillatorSolution::from_contraction(c, p.D);
      const double step = 1e-3 * p.D;
      auto h = [&](int k) { return h_eval(sol, p.D - k * step); };
      const double fd = (25 * h(0) - 48 * h(1) + 36 * h(2) - 16 * h(3) + 3 * h(4)) / (12 * step);
      CHECK(testing::rel_close(c.c_w1mult, 1.0 / fd, 1e-6));
    }
  }

  TEST_CASE("discretization constants") {
    const auto d = discretization_constants(make(1, 2, 1, 1, 1, 0, 1));
    CHECK(d.c_tanaka_rt == doctest::Approx(5.0961321360888142).epsilon(1e-14));
    CHECK(d.c_tanaka_rt ==
          doctest::Approx(std::sqrt(2 * (1.5 + 2 * std::sqrt(2.0)) * 3)).epsilon(1e-14));
    CHECK(d.c_tanaka_const == doctest::Approx(6.6104642078556039).epsilon(1e-14));
    const auto tiny = discretization_constants(make(1, 1e-9, 1e-9, 1, 1e-9, 0, 1e12));
    CHECK(tiny.c_tanaka_const < 1e-3);
    const auto one = discretization_constants(make(1, 2, 1, 1, 1, 0.5, 1));
    const auto two = discretization_constants(make(2, 2, 1, 1, 1, 0.5, 1));
    CHECK(two.c_tanaka_rt > one.c_tanaka_rt);
    CHECK(two.c_tanaka_const > one.c_tanaka_const);
  }

  TEST_CASE("averaging constants") {
    const auto a = averaging_constants(make(1, 1, 1, 1, 1, 1, 1));
    CHECK(a.c_ave_lin == 2.0);
    CHECK(a.c_ave_root == doctest::Approx(12.665867896689276).epsilon(1e-14));
    CHECK(a.c_ave_root == doctest::Approx(std::sqrt(64 * std::sqrt(2 * std::numbers::pi))));
    const auto z = averaging_constants(make(3, 2, 1, 1, 1, 0, 1));
    CHECK(z.c_ave_lin == 0.0);
    CHECK(z.c_ave_root == 0.0);
    CHECK(z.c_ave_tq == 0.0);
  }

  TEST_CASE("composite identities and positivity") {
    RandomStream rng(4);
    for (int i = 0; i < 1000; ++i) {
      ProblemData p = random_problem(rng);
      p.sigma = 0.01 + p.sigma;
      const TheoryConstants tc = composite_constants(p);
      CHECK(tc.c_global_contract == tc.contraction.c_w1mult * p.D);
      CHECK(tc.c_global_const == tc.c_a_to_c + tc.c_c_to_m);
      CHECK(tc.contraction.a > 0.0);
      for (double v : {tc.c_global_contract, tc.c_a_to_c, tc.c_c_to_m, tc.c_global_const, tc.c_subopt,
                       tc.discretization.c_tanaka_rt, tc.discretization.c_tanaka_const,
                       tc.averaging.c_ave_lin, tc.averaging.c_ave_root, tc.averaging.c_ave_tq}) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
      }
      CHECK(tc.log_c_global_const == doctest::Approx(std::log(tc.c_global_const)).epsilon(1e-12));
    }
  }

  TEST_CASE("constants grow at most linearly in n") {
    RandomStream rng(5);
    for (int i = 0; i < 20; ++i) {
      ProblemData p = random_problem(rng);
      p.sigma += 0.01;
      ProblemData q = p;
      q.n = 2 * p.n;
      const TheoryConstants a = composite_constants(p), b = composite_constants(q);
      CHECK(b.c_a_to_c / a.c_a_to_c <= 2.01);
      CHECK(b.c_c_to_m / a.c_c_to_m <= 2.01);
      CHECK(b.c_global_const / a.c_global_const <= 2.01);
      CHECK(b.c_global_contract / a.c_global_contract <= 2.01);
      CHECK(b.discretization.c_tanaka_rt / a.discretization.c_tanaka_rt <= 2.01);
      CHECK(b.discretization.c_tanaka_const / a.discretization.c_tanaka_const <= 2.01);
      CHECK(b.averaging.c_ave_tq / a.averaging.c_ave_tq <= 2.01);
    }
  }

  TEST_CASE("log fields survive large D^2 l beta") {
    const TheoryConstants tc = composite_constants(make(1, 2, 1, 1, 1, 0.1, 12100.0));
    CHECK(std::isfinite(tc.contraction.log_a));
    CHECK(std::isfinite(tc.contraction.log_c_w1mult));
    CHECK(std::isfinite(tc.log_c_global_const));
    CHECK(std::isfinite(tc.log_c_global_contract));
    CHECK(tc.contraction.log_a < -1000.0);
  }

  TEST_CASE("wasserstein bound") {
    CHECK(wasserstein_bound(1.0, 1.0, 0.01, 1.0, 100) ==
          doctest::Approx(0.83112516714086206).epsilon(1e-14));
    CHECK_THROWS_AS(wasserstein_bound(1.0, 1.0, 0.01, 1.0, 3), InputError);
    CHECK_THROWS_AS(wasserstein_bound(1.0, 1.0, 0.6, 1.0, 10), InputError);
    CHECK(log_wasserstein_bound(0.0, 0.0, 0.01, 0.0, 100) ==
          doctest::Approx(std::log(0.83112516714086206)).epsilon(1e-14));
    // Far past the exponential regime the bound grows with k.
    CHECK(wasserstein_bound(1.0, 1.0, 0.01, 1.0, 100000) < wasserstein_bound(1.0, 1.0, 0.01, 1.0, 1000000));

    const ProblemData p = make(1, 2, 1, 1, 1, 0.1, 1);
    const TheoryConstants tc = composite_constants(p);
    const double a = tc.contraction.a;
    const double lead = tc.c_global_contract + tc.c_global_const / std::pow(4 * a, 0.25);
    for (double lt = std::log(4.0); lt <= std::log(1e6); lt += 0.05) {
      const long T = std::lround(std::exp(lt));
      const double eta = std::log(static_cast<double>(T)) / (4 * a * T);
      const double rhs = lead * std::pow(T, -0.25) * std::sqrt(std::log(static_cast<double>(T)));
      CHECK(wasserstein_bound(tc, eta, a, T) <= rhs * (1 + 1e-12));
    }
  }

  TEST_CASE("suboptimality constant and bound") {
    CHECK(suboptimality_constant(make(1, 2, 1, 1, 1, 0, 1)) ==
          doctest::Approx(18.674636892474097).epsilon(1e-14));
    CHECK(suboptimality_constant(make(1, 2, 1, 1, 1e-9, 0, 1)) == doctest::Approx(8.0));
    const double big = suboptimality_constant(make(1, 2, 1, 1, 100, 0, 1));
    CHECK(suboptimality_constant(make(1, 2, 1, 1, 1000, 0, 1)) == doctest::Approx(10 * big).epsilon(1e-14));

    const ProblemData p = make(2, 2, 1, 1, 1, 0, 10);
    CHECK(suboptimality_bound(p, 18.676, 0.0) == doctest::Approx(1.0459648740205473).epsilon(1e-14));
    CHECK(suboptimality_bound(p, 18.676, 0.5) - suboptimality_bound(p, 18.676, 0.0) ==
          doctest::Approx(0.5));
    ProblemData cold = p;
    cold.beta = 1e12;
    CHECK(suboptimality_bound(cold, 18.676, 0.0) < 1e-9);
  }

  TEST_CASE("tune golden") {
    const ProblemData p = make(1, 2, 1, 1, 1, 0.1, 1);
    TuneOptions o;
    o.epsilon = 0.5;
    o.lambda = 0.5;
    o.delta = 0.1;
    const TuneResult r = tune_parameters(p, o);
    CHECK(r.beta == doctest::Approx(161.74958548376822862).epsilon(1e-12));
    CHECK(r.log_a == doctest::Approx(-156.66353611308745306).epsilon(1e-12));
    CHECK(r.log_T == doctest::Approx(2600.5218740199550312).epsilon(1e-12));
    CHECK(r.T_saturated);
    CHECK(r.T_run == o.max_steps);
    CHECK(r.log_term <= o.epsilon / 2 * (1 + 1e-12));
    CHECK(std::log(r.c_subopt * r.beta) / r.beta == doctest::Approx(r.log_term));
    CHECK(r.eta_run == 0.5);
  }

  TEST_CASE("tune properties") {
    RandomStream rng(6);
    for (int i = 0; i < 50; ++i) {
      ProblemData p = random_problem(rng);
      TuneOptions o;
      o.epsilon = 0.05 + rng.uniform();
      const TuneResult r = tune_parameters(p, o);
      CHECK(r.beta >= 1.0);
      CHECK(r.log_term <= o.epsilon / 2 * (1 + 1e-12));
      CHECK(r.eta_run <= 0.5);
      CHECK(r.T_run <= o.max_steps);
    }
    // beta = 1 in both runs, so halving epsilon scales T by exactly 2^rho.
    const ProblemData p = make(1, 2, 1, 1, 1, 0.1, 1);
    TuneOptions o;
    o.lambda = 0.9;
    o.epsilon = 20.0;
    const TuneResult a = tune_parameters(p, o);
    o.epsilon = 10.0;
    const TuneResult b = tune_parameters(p, o);
    REQUIRE(a.beta == 1.0);
    REQUIRE(b.beta == 1.0);
    CHECK(std::exp(b.log_T - a.log_T) <= std::pow(2.0, o.rho()) * (1 + 1e-9));
    CHECK(std::exp(b.log_T - a.log_T) >= std::pow(2.0, o.rho()) * (1 - 1e-9));
  }

  TEST_CASE("tune option errors") {
    const ProblemData p = make(1, 2, 1, 1, 1, 0.1, 1);
    TuneOptions o;
    o.epsilon = 0.0;
    CHECK_THROWS_AS(tune_parameters(p, o), InputError);
    CHECK_THROWS_AS(TuneOptions::from_rho_zeta(0.1, 4.0, 2.0).validate(), InputError);
    CHECK_THROWS_AS(TuneOptions::from_rho_zeta(0.1, 5.0, 1.0).validate(), InputError);
    const TuneOptions q = TuneOptions::from_rho_zeta(0.1, 5.0, 2.0);
    CHECK(q.delta == doctest::Approx(0.1));
    CHECK(q.lambda == doctest::Approx(0.5));
    ProblemData bad = p;
    bad.r = 3.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
  }
}
