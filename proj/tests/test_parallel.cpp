#include <atomic>
#include <string>

#include "doctest.h"
#include "helpers.h"
#include "psgla/constants.h"
#include "psgla/coupling.h"
#include "psgla/errors.h"
#include "psgla/metrics.h"
#include "psgla/parallel.h"
#include "psgla/sampler.h"

using namespace psgla;
using testing::vec;

namespace {

struct ThreadGuard {
  int saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("parallel_for visits every index once") {
    ThreadGuard guard;
    for (int threads : {1, 2, 4}) {
      set_thread_count(threads);
      std::vector<std::atomic<int>> hits(1000);
      parallel_for(1000, Execution::kParallel, [&](long i) { hits[i]++; });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
    set_thread_count(3);
    CHECK(thread_count() == 3);
  }

  TEST_CASE("lowest failing index is reported with its category") {
    ThreadGuard guard;
    set_thread_count(4);
    for (Execution exec : {Execution::kSerial, Execution::kParallel}) {
      try {
        parallel_for(100, exec, [](long i) {
          if (i == 17 || i == 60) throw NumericError("bad " + std::to_string(i));
        });
        FAIL("no exception");
      } catch (const NumericError& e) {
        CHECK(std::string(e.what()) == "item 17: bad 17");
      }
      CHECK_THROWS_AS(parallel_for(10, exec, [](long i) {
                        if (i == 3) throw InputError("x");
                      }),
                      InputError);
    }
  }

  TEST_CASE("ensemble is identical for serial and any thread count") {
    ThreadGuard guard;
    const ConvexBody sq = testing::square();
    const LossPtr w = make_double_well(sq, NoiseModel::gaussian(2, 0.3));
    SamplerConfig c;
    c.eta = 0.05;
    c.beta = 2.0;
    c.steps = 200;
    c.chains = 257;
    c.seed = 31;
    c.init = InitKind::kUniform;
    const Batch serial = run_ensemble(sq, *w, c, Execution::kSerial);
    for (int threads : {1, 2, 5}) {
      set_thread_count(threads);
      CHECK(run_ensemble(sq, *w, c, Execution::kParallel) == serial);
    }
  }

  TEST_CASE("Euler ensemble is identical for serial and parallel") {
    ThreadGuard guard;
    set_thread_count(3);
    const ConvexBody line = testing::interval();
    const LossPtr w = make_double_well(line, NoiseModel::gaussian(1, 0.3));
    StochasticDrift drift(w, 0.1);
    EulerOptions o;
    o.eta = 0.1;
    o.beta = 2.0;
    o.horizon = 30.0;
    o.substeps = 4;
    const Batch start = Batch::Zero(100, 1);
    CHECK(euler_ensemble(line, drift, o, start, 8, Execution::kSerial) ==
          euler_ensemble(line, drift, o, start, 8, Execution::kParallel));
  }

  TEST_CASE("Gibbs sampler is identical for serial and parallel") {
    ThreadGuard guard;
    set_thread_count(4);
    const ConvexBody line = testing::interval();
    const LossPtr w = make_double_well(line, NoiseModel::zero(1));
    const GibbsSample a = gibbs_rejection_sample(line, *w, 20.0, 40000, 3, Execution::kSerial);
    const GibbsSample b = gibbs_rejection_sample(line, *w, 20.0, 40000, 3, Execution::kParallel);
    CHECK(a.samples == b.samples);
    CHECK(a.acceptance_rate == b.acceptance_rate);
  }

  TEST_CASE("supermartingale report is identical for serial and parallel") {
    ThreadGuard guard;
    set_thread_count(2);
    const ConvexBody line = testing::interval();
    const LossPtr w = make_double_well(line, NoiseModel::gaussian(1, 0.1));
    const ProblemData p = problem_data(line, *w, 2.0);
    const ContractionConstants cc = contraction_constants(p);
    const auto sol = OscillatorSolution::from_contraction(cc, p.D);
    SupermartingaleOptions o;
    o.exec = Execution::kSerial;
    const auto a = supermartingale_check(line, *w, sol, 0.1, 2.0, cc.a, 1000, 100, 5, o);
    o.exec = Execution::kParallel;
    const auto b = supermartingale_check(line, *w, sol, 0.1, 2.0, cc.a, 1000, 100, 5, o);
    CHECK(a.mean_m == b.mean_m);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);
    CHECK(a.coupling_times == b.coupling_times);
    CHECK(a.worst_excess == b.worst_excess);
  }

  TEST_CASE("chain errors name the failing chain") {
    const ConvexBody line = testing::interval();
    SamplerConfig c;
    c.chains = 4;
    c.x0 = vec({5.0});
    try {
      run_ensemble(line, *make_double_well(line, NoiseModel::zero(1)), c);
      FAIL("no exception");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).rfind("item 0: ", 0) == 0);
    }
  }
}
