#include "psgla/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "psgla/errors.h"
#include "psgla/parallel.h"
#include "psgla/random.h"

namespace psgla {

namespace {

constexpr long kGibbsMinProposals = 10000000;
constexpr double kGibbsMinAcceptance = 1e-6;
constexpr int kGibbsWave = 16;

std::vector<double> sorted_copy(const Vector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

double percentile(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void check_confidence(double confidence, int resamples) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw InputError("bootstrap: confidence must be in (0, 1)");
  if (resamples < 2) throw InputError("bootstrap: at least 2 resamples are required");
}

// Multinomial(n, uniform) counts.
void resample_counts(RandomStream& rng, std::vector<double>& counts) {
  std::fill(counts.begin(), counts.end(), 0.0);
  const std::uint64_t n = counts.size();
  for (std::uint64_t i = 0; i < n; ++i) counts[rng.below(n)] += 1.0;
}

}  // namespace

GibbsSample gibbs_rejection_sample(const ConvexBody& body, const StochasticLoss& loss, double beta,
                                   long count, std::uint64_t seed, Execution exec) {
  if (count < 0) throw InputError("gibbs_rejection_sample: count must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("gibbs_rejection_sample: beta must be >= 0");
  if (loss.dim() != body.dim()) throw InputError("gibbs_rejection_sample: dimension mismatch");
  const double f_min = loss.value_bounds().f_min;
  const int n = body.dim();

  GibbsSample out{Batch(count, n), 0, 1.0};
  long filled = 0, accepted_total = 0;
  long block = 0;
  std::vector<Batch> accepted(kGibbsWave);
  while (filled < count) {
    parallel_for(kGibbsWave, exec, [&](long j) {
      RandomStream rng(chain_seed(seed, static_cast<std::uint64_t>(block + j)));
      Batch& acc = accepted[j];
      acc.resize(kGibbsBlock, n);
      long k = 0;
      for (long p = 0; p < kGibbsBlock; ++p) {
        Vector x = body.sample_uniform(rng);
        const double u = rng.uniform();
        if (u < std::exp(-beta * (loss.mean_value(x) - f_min))) acc.row(k++) = x.transpose();
      }
      acc.conservativeResize(k, n);
    });
    for (int j = 0; j < kGibbsWave && filled < count; ++j) {
      out.proposals += kGibbsBlock;
      accepted_total += accepted[j].rows();
      const long take = std::min<long>(accepted[j].rows(), count - filled);
      out.samples.middleRows(filled, take) = accepted[j].topRows(take);
      filled += take;
    }
    block += kGibbsWave;
    const double rate = static_cast<double>(accepted_total) / static_cast<double>(out.proposals);
    if (out.proposals >= kGibbsMinProposals && rate < kGibbsMinAcceptance) {
      throw TemperatureError("gibbs_rejection_sample: acceptance rate " + std::to_string(rate) +
                             " after " + std::to_string(out.proposals) +
                             " proposals; reduce beta or restrict the domain");
    }
  }
  if (out.proposals > 0) {
    out.acceptance_rate = static_cast<double>(accepted_total) / static_cast<double>(out.proposals);
  }
  return out;
}

double w1_weighted_sorted(const std::vector<double>& xa, const std::vector<double>& wa,
                          const std::vector<double>& xb, const std::vector<double>& wb) {
  const double sa = std::accumulate(wa.begin(), wa.end(), 0.0);
  const double sb = std::accumulate(wb.begin(), wb.end(), 0.0);
  if (xa.empty() || xb.empty() || !(sa > 0.0) || !(sb > 0.0)) {
    throw InputError("w1: empty batch");
  }
  // Integrate |F_a - F_b| over the merged support.
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double prev = std::min(xa.front(), xb.front());
  while (i < xa.size() || j < xb.size()) {
    const double next = (j >= xb.size() || (i < xa.size() && xa[i] <= xb[j])) ? xa[i] : xb[j];
    total += std::abs(fa - fb) * (next - prev);
    while (i < xa.size() && xa[i] == next) fa += wa[i++] / sa;
    while (j < xb.size() && xb[j] == next) fb += wb[j++] / sb;
    prev = next;
  }
  return total;
}

double w1_exact_1d(const Vector& a, const Vector& b) {
  if (a.size() == 0 || b.size() == 0) throw InputError("w1_exact_1d: empty batch");
  const std::vector<double> sa = sorted_copy(a), sb = sorted_copy(b);
  if (sa.size() == sb.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
    return acc / static_cast<double>(sa.size());
  }
  return w1_weighted_sorted(sa, std::vector<double>(sa.size(), 1.0), sb,
                            std::vector<double>(sb.size(), 1.0));
}

double w1_exact_1d(const Batch& a, const Batch& b) {
  if (a.cols() != 1 || b.cols() != 1) throw InputError("w1_exact_1d: batches must be one-dimensional");
  return w1_exact_1d(Vector(a.col(0)), Vector(b.col(0)));
}

double w1_sliced(const Batch& a, const Batch& b, int directions, std::uint64_t seed) {
  if (directions < 32) throw InputError("w1_sliced: at least 32 directions are required");
  if (a.cols() != b.cols()) throw InputError("w1_sliced: dimension mismatch");
  RandomStream rng(derive_seed(seed, streams::kDirections));
  Vector theta(a.cols());
  const double phase = rng.uniform();
  double acc = 0.0;
  for (int d = 0; d < directions; ++d) {
    if (a.cols() == 2) {
      const double angle = std::numbers::pi * (d + phase) / directions;
      theta << std::cos(angle), std::sin(angle);
    } else {
      do {
        rng.fill_normal(theta);
      } while (theta.norm() == 0.0);
      theta.normalize();
    }
    acc += w1_exact_1d(Vector(a * theta), Vector(b * theta));
  }
  return acc / directions;
}

Estimate w1_bootstrap(const Vector& a, const Vector& b, int resamples, std::uint64_t seed,
                      double confidence) {
  check_confidence(confidence, resamples);
  Estimate e{w1_exact_1d(a, b), 0.0, 0.0};
  const std::vector<double> sa = sorted_copy(a), sb = sorted_copy(b);
  std::vector<double> ca(sa.size()), cb(sb.size()), values(resamples);
  RandomStream rng(derive_seed(seed, streams::kBootstrap));
  for (int r = 0; r < resamples; ++r) {
    resample_counts(rng, ca);
    resample_counts(rng, cb);
    values[r] = w1_weighted_sorted(sa, ca, sb, cb);
  }
  const double tail = (1.0 - confidence) / 2.0;
  e.ci_lo = std::min(percentile(values, tail), e.value);
  e.ci_hi = std::max(percentile(values, 1.0 - tail), e.value);
  return e;
}

Estimate bootstrap_mean_ci(const Vector& values, int resamples, std::uint64_t seed,
                           double confidence) {
  check_confidence(confidence, resamples);
  if (values.size() == 0) throw InputError("bootstrap_mean_ci: empty sample");
  Estimate e{values.mean(), 0.0, 0.0};
  std::vector<double> counts(values.size()), means(resamples);
  RandomStream rng(derive_seed(seed, streams::kBootstrap));
  for (int r = 0; r < resamples; ++r) {
    resample_counts(rng, counts);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) acc += counts[i] * values[i];
    means[r] = acc / static_cast<double>(values.size());
  }
  const double tail = (1.0 - confidence) / 2.0;
  e.ci_lo = std::min(percentile(means, tail), e.value);
  e.ci_hi = std::max(percentile(means, 1.0 - tail), e.value);
  return e;
}

Estimate suboptimality_estimate(const StochasticLoss& loss, const Batch& terminal, int resamples,
                                std::uint64_t seed, std::optional<double> minimum) {
  if (!minimum) minimum = loss.known_minimum();
  if (!minimum) {
    throw InputError("suboptimality_estimate: the minimum of " + loss.name() +
                     " is not known; supply it explicitly");
  }
  if (terminal.cols() != loss.dim()) throw InputError("suboptimality_estimate: dimension mismatch");
  Vector gaps(terminal.rows());
  for (Eigen::Index i = 0; i < terminal.rows(); ++i) {
    gaps[i] = loss.mean_value(terminal.row(i).transpose()) - *minimum;
  }
  return bootstrap_mean_ci(gaps, resamples, seed);
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("least_squares: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("least_squares: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = y[i] - f.intercept - f.slope * x[i];
    rss += res * res;
  }
  f.slope_stderr = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return f;
}

RateFit rate_fit(const std::vector<double>& T, const std::vector<double>& w1, double noise_floor) {
  if (T.size() != w1.size()) throw InputError("rate_fit: T and W1 lengths differ");
  if (T.size() < 4) throw InputError("rate_fit: at least 4 checkpoints are required");
  const auto [lo, hi] = std::minmax_element(T.begin(), T.end());
  if (!(*lo > 1.0) || *hi / *lo < 100.0) {
    throw InputError("rate_fit: checkpoints must exceed 1 and span at least 2 decades");
  }
  RateFit fit;
  fit.clipped.assign(T.size(), false);
  fit.any_clipped = false;
  std::vector<double> lx(T.size()), lf(T.size()), ly(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    double v = w1[i];
    if (!(v > 0.0)) {
      if (!(noise_floor > 0.0)) throw InputError("rate_fit: nonpositive W1 and no noise floor");
      v = noise_floor;
      fit.clipped[i] = true;
      fit.any_clipped = true;
    }
    lx[i] = std::log(T[i]);
    lf[i] = -0.25 * lx[i] + 0.5 * std::log(lx[i]);
    ly[i] = std::log(v);
  }
  fit.power = least_squares(lx, ly);
  fit.log_factor = least_squares(lf, ly);
  return fit;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InputError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(long n, double alpha) {
  if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw InputError("ks_critical_value: bad arguments");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

}  // namespace psgla
