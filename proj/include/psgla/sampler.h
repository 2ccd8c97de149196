#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "psgla/geometry.h"
#include "psgla/oracle.h"
#include "psgla/random.h"
#include "psgla/types.h"

namespace psgla {

enum class InitKind { kOrigin, kUniform };

struct SamplerConfig {
  double eta = 0.01;
  double beta = 1.0;
  long steps = 1000;  // T, number of iterations
  std::uint64_t seed = 0;
  int substeps = 1;   // m, Euler refinements per unit time
  int chains = 1;
  InitKind init = InitKind::kOrigin;
  std::optional<Vector> x0;  // overrides `init` when set

  // Throws InputError on eta/beta <= 0, steps < 0, substeps or chains < 1.
  // Warns when eta > 1/2.
  void validate() const;
};

// Recorded states of one path. reflections[i] is the total displacement added
// by projection between record i-1 and record i (zero for the first record).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> reflections;
};

// Pi_K(x - eta grad f(x, z) + sqrt(2 eta / beta) w).
Vector psgla_step(const ConvexBody& body, const StochasticLoss& loss, const Vector& x, double eta,
                  double beta, const Vector& z, const Vector& w);

// Default recording stride: max(1, T / 1000).
long default_stride(long steps);

// Runs chain 0 of `config` (seed chain_seed(config.seed, 0)). Per iteration the
// stream yields z_k first, then w_k. stride <= 0 selects default_stride.
Trajectory run_chain(const ConvexBody& body, const StochasticLoss& loss,
                     const SamplerConfig& config, long stride = 0);

// Same as run_chain for an arbitrary chain index.
Trajectory run_chain_indexed(const ConvexBody& body, const StochasticLoss& loss,
                             const SamplerConfig& config, std::uint64_t chain, long stride);

// Initial point of a chain: explicit x0, the origin, or a uniform draw taken
// from the chain's own stream.
Vector initial_state(const ConvexBody& body, const SamplerConfig& config, RandomStream& rng);

// Terminal states of config.chains independent chains (row i = chain i).
// Chain i uses seed chain_seed(config.seed, i); output is identical for both
// execution modes and for any thread count.
Batch run_ensemble(const ConvexBody& body, const StochasticLoss& loss,
                   const SamplerConfig& config, Execution exec = Execution::kParallel);

// Drift b(t, x) of a reflected SDE dx = b dt + sqrt(2 eta / beta) dw - v dmu.
// One instance belongs to one path; refresh() is called at every integer time
// before the substeps of [k, k+1).
class Drift {
 public:
  virtual ~Drift() = default;
  virtual void refresh(RandomStream&) {}
  virtual void evaluate(double t, const Vector& x, Eigen::Ref<Vector> out) = 0;
  virtual std::unique_ptr<Drift> clone() const = 0;
};

// -eta grad f(x, z_floor(t)): the continuous-time interpolation x^C.
class StochasticDrift final : public Drift {
 public:
  StochasticDrift(LossPtr loss, double eta);
  void refresh(RandomStream& rng) override;
  void evaluate(double t, const Vector& x, Eigen::Ref<Vector> out) override;
  std::unique_ptr<Drift> clone() const override;

 private:
  LossPtr loss_;
  double eta_;
  Vector z_;
};

// -eta grad fbar(x): the averaged process x^M.
class MeanDrift final : public Drift {
 public:
  MeanDrift(LossPtr loss, double eta);
  void evaluate(double t, const Vector& x, Eigen::Ref<Vector> out) override;
  std::unique_ptr<Drift> clone() const override;

 private:
  LossPtr loss_;
  double eta_;
};

// Arbitrary deterministic drift.
class FunctionDrift final : public Drift {
 public:
  using Fn = std::function<void(double, const Vector&, Eigen::Ref<Vector>)>;
  explicit FunctionDrift(Fn fn) : fn_(std::move(fn)) {}
  void evaluate(double t, const Vector& x, Eigen::Ref<Vector> out) override { fn_(t, x, out); }
  std::unique_ptr<Drift> clone() const override { return std::make_unique<FunctionDrift>(fn_); }

 private:
  Fn fn_;
};

struct EulerOptions {
  double eta = 0.01;
  double beta = 1.0;
  double horizon = 1.0;  // continuous time
  int substeps = 1;      // m; time step 1/m
  long stride = 0;       // record every stride-th substep; <= 0 records only endpoints
};

// Projected Euler scheme x_{(k+1)/m} = Pi_K(x_{k/m} + b/m + sqrt(2 eta/beta) dW),
// dW ~ N(0, I/m). At m = 1 with StochasticDrift it reproduces run_chain exactly
// (same draw order: z at integer times, then the Brownian increment).
Trajectory euler_reflected(const ConvexBody& body, Drift& drift, const EulerOptions& options,
                           const Vector& x0, RandomStream& rng);

// Terminal states of one Euler path per row of `initial`; path i uses
// chain_seed(seed, i) and its own clone of `drift`.
Batch euler_ensemble(const ConvexBody& body, const Drift& drift, const EulerOptions& options,
                     const Batch& initial, std::uint64_t seed,
                     Execution exec = Execution::kParallel);

// Exact Skorokhod solution for an input that is constant between jump times.
struct SkorokhodPath {
  std::vector<double> times;
  std::vector<Vector> states;      // x at each jump time
  std::vector<double> magnitudes;  // d_k (0 for k = 0)
  std::vector<Vector> directions;  // unit v_k, zero when no reflection occurred
};

// `values[k]` is the input on [times[k], times[k+1]); values[0] must lie in K.
SkorokhodPath skorokhod_piecewise(const ConvexBody& body, const std::vector<double>& times,
                                  const std::vector<Vector>& values);

// log(T) / (4 a T), capped at 1/2 with a warning. Throws InputError for T < 4
// or a <= 0.
double eta_schedule(long T, double a);
// Same schedule with the rate given as log(a), for rates below double range.
double eta_schedule_log(long T, double log_a);

}  // namespace psgla
