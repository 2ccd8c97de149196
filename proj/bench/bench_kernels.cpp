// Serial reference against OpenMP kernels.

#include <benchmark/benchmark.h>

#include "psgla/coupling.h"
#include "psgla/metrics.h"
#include "psgla/sampler.h"

namespace {

using psgla::Execution;

const psgla::ConvexBody& interval() {
  static const psgla::ConvexBody body =
      psgla::ConvexBody::box(psgla::Vector::Constant(1, -1.0), psgla::Vector::Constant(1, 1.0));
  return body;
}

psgla::LossPtr well() {
  static const psgla::LossPtr loss =
      psgla::make_double_well(interval(), psgla::NoiseModel::gaussian(1, 0.1));
  return loss;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_Ensemble(benchmark::State& state) {
  psgla::SamplerConfig c;
  c.eta = 0.01;
  c.beta = 5.0;
  c.steps = 1000;
  c.chains = 256;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psgla::run_ensemble(interval(), *well(), c, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * c.steps * c.chains);
}
BENCHMARK(BM_Ensemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EulerEnsemble(benchmark::State& state) {
  psgla::MeanDrift drift(well(), 0.01);
  psgla::EulerOptions o;
  o.eta = 0.01;
  o.beta = 5.0;
  o.horizon = 100.0;
  o.substeps = 10;
  const psgla::Batch initial = psgla::Batch::Zero(256, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psgla::euler_ensemble(interval(), drift, o, initial, 7, mode(state)));
  }
}
BENCHMARK(BM_EulerEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Gibbs(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(psgla::gibbs_rejection_sample(interval(), *well(), 5.0, 100000, 3, mode(state)));
  }
}
BENCHMARK(BM_Gibbs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Supermartingale(benchmark::State& state) {
  psgla::ProblemData p;
  p.D = 2.0;
  p.r = 1.0;
  p.lipschitz = well()->constants().lipschitz;
  p.beta = 2.0;
  const psgla::ContractionConstants cc = psgla::contraction_constants(p);
  const auto sol = psgla::OscillatorSolution::from_contraction(cc, p.D);
  psgla::SupermartingaleOptions opt;
  opt.exec = mode(state);
  opt.bootstrap = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        psgla::supermartingale_check(interval(), *well(), sol, 0.1, 2.0, cc.a, 1000, 200, 11, opt));
  }
}
BENCHMARK(BM_Supermartingale)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
