#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "psgla/geometry.h"
#include "psgla/oracle.h"
#include "psgla/types.h"

namespace psgla {

struct GibbsSample {
  Batch samples;
  long proposals;
  double acceptance_rate;
};

// Exactly `count` draws from the density proportional to exp(-beta fbar) on K,
// by uniform proposals accepted with probability exp(-beta (fbar - f_min)).
// Proposals run in fixed blocks of kGibbsBlock, block b seeded with
// chain_seed(seed, b), so the output does not depend on the thread count.
// Throws TemperatureError once 1e7 proposals have an acceptance rate below 1e-6.
GibbsSample gibbs_rejection_sample(const ConvexBody& body, const StochasticLoss& loss, double beta,
                                   long count, std::uint64_t seed,
                                   Execution exec = Execution::kParallel);

inline constexpr long kGibbsBlock = 1L << 14;

// Exact W1 between two empirical distributions on the line. Equal sizes use the
// sorted order statistics; unequal sizes integrate |F_a - F_b|.
double w1_exact_1d(const Vector& a, const Vector& b);
double w1_exact_1d(const Batch& a, const Batch& b);

// W1 between weighted empirical measures given sorted support points. Weights
// are normalized internally.
double w1_weighted_sorted(const std::vector<double>& xa, const std::vector<double>& wa,
                          const std::vector<double>& xb, const std::vector<double>& wb);

// Mean over `directions` unit vectors of w1_exact_1d of the projections. In 2D
// the directions are a randomly rotated equispaced grid on the half circle;
// otherwise they are independent uniform draws on the sphere.
// Throws InputError for directions < 32 or a dimension mismatch.
double w1_sliced(const Batch& a, const Batch& b, int directions, std::uint64_t seed);

struct Estimate {
  double value;
  double ci_lo;
  double ci_hi;
};

// W1 with a percentile bootstrap interval: each resample redraws both samples
// with replacement (multinomial weights on the sorted data).
Estimate w1_bootstrap(const Vector& a, const Vector& b, int resamples, std::uint64_t seed,
                      double confidence = 0.95);

// Sample mean with a percentile bootstrap interval.
Estimate bootstrap_mean_ci(const Vector& values, int resamples, std::uint64_t seed,
                           double confidence = 0.95);

// Mean of fbar over the batch minus the known minimum, with bootstrap CI.
// Throws InputError when the loss has no known minimum and none is supplied.
Estimate suboptimality_estimate(const StochasticLoss& loss, const Batch& terminal, int resamples,
                                std::uint64_t seed, std::optional<double> minimum = std::nullopt);

struct LineFit {
  double slope;
  double intercept;
  double slope_stderr;
};

// Ordinary least squares y = intercept + slope x.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct RateFit {
  LineFit power;       // log W1 against log T; slope is the rate exponent
  LineFit log_factor;  // log W1 against log(T^{-1/4} (log T)^{1/2})
  std::vector<bool> clipped;
  bool any_clipped;
};

// Needs >= 4 checkpoints spanning >= 2 decades of T. Nonpositive W1 values
// are replaced by noise_floor and flagged; noise_floor must then be positive.
RateFit rate_fit(const std::vector<double>& T, const std::vector<double>& w1, double noise_floor = 0.0);

// sup |F_n - F| for the sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// Asymptotic one-sample critical value sqrt(-log(alpha/2)/2) / sqrt(n).
double ks_critical_value(long n, double alpha);

}  // namespace psgla
