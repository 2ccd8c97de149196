#include <algorithm>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "psgla/errors.h"
#include "psgla/parallel.h"
#include "psgla/sampler.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace psgla {

namespace {

[[noreturn]] void rethrow_tagged(const std::exception_ptr& ep, long index) {
  const std::string tag = "item " + std::to_string(index) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError&) {
    throw;
  } catch (const DegenerateGeometryError& e) {
    throw DegenerateGeometryError(tag + e.what());
  } catch (const InputError& e) {
    throw InputError(tag + e.what());
  } catch (const TemperatureError& e) {
    throw TemperatureError(tag + e.what());
  } catch (const DegenerateDampingError& e) {
    throw DegenerateDampingError(tag + e.what());
  } catch (const NumericError& e) {
    throw NumericError(tag + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(tag + e.what());
  } catch (const std::exception& e) {
    throw Error(tag + e.what());
  }
}

}  // namespace

void parallel_for(long count, Execution exec, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  if (exec == Execution::kSerial) {
    for (long i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        rethrow_tagged(std::current_exception(), i);
      }
    }
    return;
  }
  std::exception_ptr first;
  long first_index = std::numeric_limits<long>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(psgla_parallel_for_error)
      {
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) rethrow_tagged(first, first_index);
}

void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Batch run_ensemble(const ConvexBody& body, const StochasticLoss& loss, const SamplerConfig& config,
                   Execution exec) {
  config.validate();
  Batch out(config.chains, body.dim());
  // stride = steps records only the endpoints.
  const long stride = std::max(1L, config.steps);
  parallel_for(config.chains, exec, [&](long i) {
    Trajectory t = run_chain_indexed(body, loss, config, static_cast<std::uint64_t>(i), stride);
    out.row(i) = t.states.back().transpose();
  });
  return out;
}

Batch euler_ensemble(const ConvexBody& body, const Drift& drift, const EulerOptions& options,
                     const Batch& initial, std::uint64_t seed, Execution exec) {
  if (initial.cols() != body.dim()) throw InputError("euler_ensemble: dimension mismatch");
  Batch out(initial.rows(), initial.cols());
  EulerOptions endpoints = options;
  endpoints.stride = 0;
  parallel_for(initial.rows(), exec, [&](long i) {
    std::unique_ptr<Drift> own = drift.clone();
    RandomStream rng(chain_seed(seed, static_cast<std::uint64_t>(i)));
    const Vector x0 = initial.row(i).transpose();
    Trajectory t = euler_reflected(body, *own, endpoints, x0, rng);
    out.row(i) = t.states.back().transpose();
  });
  return out;
}

}  // namespace psgla
