#include "psgla/coupling.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "psgla/errors.h"
#include "psgla/parallel.h"
#include "psgla/random.h"
#include "psgla/sampler.h"

namespace psgla {

namespace {
constexpr double kCriticalBand = 1e-6;
}

OscillatorSolution OscillatorSolution::from_parameters(double omega, double xi, double D) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InputError("oscillator: omega must be positive");
  if (!(xi >= 0.0)) throw InputError("oscillator: xi must be nonnegative");
  if (!(D > 0.0)) throw InputError("oscillator: D must be positive");
  if (xi == 1.0) throw DegenerateDampingError("oscillator: damping ratio is exactly 1");
  OscillatorSolution s;
  s.omega_ = omega;
  s.xi_ = xi;
  s.D_ = D;
  s.alpha_ = omega * xi;
  if (std::abs(xi - 1.0) < kCriticalBand) {
    s.regime_ = Regime::kCritical;
  } else if (xi < 1.0) {
    s.regime_ = Regime::kUnderdamped;
    s.freq_ = omega * std::sqrt(1.0 - xi * xi);
  } else {
    s.regime_ = Regime::kOverdamped;
    s.lambda_plus_ = s.alpha_ * (1.0 + std::sqrt(1.0 - 1.0 / (xi * xi)));
    s.lambda_minus_ = omega * omega / s.lambda_plus_;
  }
  return s;
}

OscillatorSolution OscillatorSolution::from_contraction(const ContractionConstants& c, double D) {
  if (c.regime == DampingRegime::kUnderdamped) return from_parameters(c.omega, c.xi, D);
  OscillatorSolution s;
  s.regime_ = Regime::kOverdamped;
  s.omega_ = c.omega;
  s.xi_ = c.xi;
  s.D_ = D;
  s.alpha_ = c.omega_xi;
  const double inv_xi = std::isfinite(c.xi) ? 1.0 / c.xi : 0.0;
  s.lambda_plus_ = c.omega_xi * (1.0 + std::sqrt(1.0 - inv_xi * inv_xi));
  s.lambda_minus_ = std::exp(c.log_omega_sq - std::log(s.lambda_plus_));
  return s;
}

OscillatorSolution OscillatorSolution::from_problem(const ProblemData& p) {
  return from_contraction(contraction_constants(p), p.D);
}

double OscillatorSolution::h(double x) const {
  switch (regime_) {
    case Regime::kUnderdamped:
      return std::exp(-alpha_ * x) * std::sin(freq_ * x) / freq_;
    case Regime::kCritical:
      return x * std::exp(-omega_ * x);
    case Regime::kOverdamped: {
      const double gap = lambda_plus_ - lambda_minus_;
      return -std::exp(-lambda_minus_ * x) * std::expm1(-gap * x) / gap;
    }
  }
  return 0.0;
}

double OscillatorSolution::dh(double x) const {
  switch (regime_) {
    case Regime::kUnderdamped:
      return std::exp(-alpha_ * x) * (std::cos(freq_ * x) - alpha_ / freq_ * std::sin(freq_ * x));
    case Regime::kCritical:
      return std::exp(-omega_ * x) * (1.0 - omega_ * x);
    case Regime::kOverdamped: {
      const double gap = lambda_plus_ - lambda_minus_;
      return (lambda_plus_ * std::exp(-lambda_plus_ * x) - lambda_minus_ * std::exp(-lambda_minus_ * x)) /
             gap;
    }
  }
  return 0.0;
}

double OscillatorSolution::d2h(double x) const {
  if (regime_ == Regime::kOverdamped) {
    const double gap = lambda_plus_ - lambda_minus_;
    return (lambda_minus_ * lambda_minus_ * std::exp(-lambda_minus_ * x) -
            lambda_plus_ * lambda_plus_ * std::exp(-lambda_plus_ * x)) /
           gap;
  }
  const double damping = regime_ == Regime::kCritical ? omega_ : alpha_;
  return -omega_ * omega_ * h(x) - 2.0 * damping * dh(x);
}

double h_eval(const OscillatorSolution& sol, double x) {
  if (!(x >= 0.0) || x > sol.D()) throw InputError("h_eval: x must lie in [0, D]");
  return sol.h(x);
}

std::pair<Vector, Vector> coupled_step(const ConvexBody& body, const StochasticLoss& loss,
                                       const Vector& x1, const Vector& x2, double eta, double beta,
                                       const Vector& z, const Vector& w, bool coupled) {
  const double s = std::sqrt(2.0 * eta / beta);
  Vector y1 = x1 - eta * noisy_grad(loss, x1, z) + s * w;
  Vector y2 = x2 - eta * noisy_grad(loss, x2, z);
  const Vector diff = x1 - x2;
  const double dist = diff.norm();
  if (coupled || dist == 0.0) {
    y2 += s * w;
  } else {
    const Vector u = diff / dist;
    y2 += s * (w - 2.0 * u.dot(w) * u);
  }
  body.project_inplace(y1);
  body.project_inplace(y2);
  return {std::move(y1), std::move(y2)};
}

MaximalStep coupled_step_maximal(const ConvexBody& body, const StochasticLoss& loss,
                                 const Vector& x1, const Vector& x2, double eta, double beta,
                                 const Vector& z, const Vector& w, double uniform) {
  const double s = std::sqrt(2.0 * eta / beta);
  const Vector m1 = x1 - eta * noisy_grad(loss, x1, z);
  const Vector m2 = x2 - eta * noisy_grad(loss, x2, z);
  const Vector d = (m1 - m2) / s;
  MaximalStep out{m1 + s * w, Vector(), false};
  const double dn2 = d.squaredNorm();
  const double log_ratio = -(2.0 * w.dot(d) + dn2) / 2.0;
  if (dn2 == 0.0 || std::log(uniform) <= log_ratio) {
    out.met = true;
    body.project_inplace(out.x1);
    out.x2 = out.x1;
    return out;
  }
  const Vector e = d / std::sqrt(dn2);
  out.x2 = m2 + s * (w - 2.0 * e.dot(w) * e);
  body.project_inplace(out.x1);
  body.project_inplace(out.x2);
  return out;
}

std::vector<long> supermartingale_grid(long horizon, int points) {
  if (points < 2) throw InputError("supermartingale grid needs at least 2 points");
  if (horizon < points - 1) throw InputError("supermartingale grid: horizon too short for the grid");
  std::vector<long> grid{0};
  const int rest = points - 1;
  for (int j = 1; j <= rest; ++j) {
    const double g = std::pow(static_cast<double>(horizon), static_cast<double>(j) / rest);
    long t = std::max(grid.back() + 1, static_cast<long>(std::llround(g)));
    grid.push_back(t);
  }
  // Forward pushes may overshoot; pull the tail back below the horizon.
  grid.back() = horizon;
  for (int j = rest - 1; j >= 1; --j) grid[j] = std::min(grid[j], grid[j + 1] - 1);
  for (int j = 1; j <= rest; ++j) {
    if (grid[j] <= grid[j - 1]) throw InputError("supermartingale grid is not strictly increasing");
  }
  return grid;
}

SupermartingaleReport supermartingale_check(const ConvexBody& body, const StochasticLoss& loss,
                                            const OscillatorSolution& sol, double eta, double beta,
                                            double a, long replicates, long horizon,
                                            std::uint64_t seed,
                                            const SupermartingaleOptions& options) {
  if (replicates < 1000) throw InputError("supermartingale_check: replicates must be >= 1000");
  if (!(eta > 0.0) || !(beta > 0.0) || !(a >= 0.0)) {
    throw InputError("supermartingale_check: eta, beta must be positive and a nonnegative");
  }
  if (options.bootstrap < 2) throw InputError("supermartingale_check: bootstrap must be >= 2");
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw InputError("supermartingale_check: confidence must be in (0, 1)");
  }
  SupermartingaleReport rep;
  rep.eta = eta;
  rep.beta = beta;
  rep.a = a;
  rep.replicates = replicates;
  rep.horizon = horizon;
  rep.grid = supermartingale_grid(horizon, options.grid_points);
  const int G = static_cast<int>(rep.grid.size());
  const double D = body.diameter();
  const double merge = options.merge_tolerance * D;
  const int n = body.dim();

  Matrix dist(replicates, G);
  rep.coupling_times.assign(replicates, -1);
  parallel_for(replicates, options.exec, [&](long i) {
    RandomStream rng(chain_seed(seed, static_cast<std::uint64_t>(i)));
    Vector x1 = body.sample_uniform(rng);
    Vector x2 = options.identical_start ? x1 : body.sample_uniform(rng);
    Vector z(loss.noise().dim()), w(n);
    bool coupled = (x1 - x2).norm() <= merge;
    if (coupled) {
      x2 = x1;
      rep.coupling_times[i] = 0;
    }
    dist(i, 0) = (x1 - x2).norm();
    int next = 1;
    for (long k = 0; k < horizon; ++k) {
      loss.sample_z(rng, z);
      rng.fill_normal(w);
      if (coupled) {
        x1 = psgla_step(body, loss, x1, eta, beta, z, w);
        x2 = x1;
      } else if (options.kind == CouplingKind::kReflectionMaximal) {
        MaximalStep st = coupled_step_maximal(body, loss, x1, x2, eta, beta, z, w, rng.uniform());
        x1 = std::move(st.x1);
        x2 = std::move(st.x2);
      } else {
        auto [y1, y2] = coupled_step(body, loss, x1, x2, eta, beta, z, w, false);
        x1 = std::move(y1);
        x2 = std::move(y2);
      }
      if (!coupled && (x1 - x2).norm() <= merge) {
        x2 = x1;
        coupled = true;
        rep.coupling_times[i] = k + 1;
      }
      if (next < G && k + 1 == rep.grid[next]) dist(i, next++) = (x1 - x2).norm();
    }
  });

  Matrix m(replicates, G);
  for (int j = 0; j < G; ++j) {
    const double growth = std::exp(eta * a * static_cast<double>(rep.grid[j]));
    for (long i = 0; i < replicates; ++i) m(i, j) = growth * sol.h(std::min(dist(i, j), D));
  }
  rep.mean_m.resize(G);
  rep.mean_distance.resize(G);
  for (int j = 0; j < G; ++j) {
    rep.mean_m[j] = m.col(j).mean();
    rep.mean_distance[j] = dist.col(j).mean();
  }

  // Paired bootstrap over replicate indices.
  const int B = options.bootstrap;
  Matrix boot(B, G);
  RandomStream brng(derive_seed(seed, streams::kBootstrap));
  std::vector<double> counts(replicates);
  for (int b = 0; b < B; ++b) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (long i = 0; i < replicates; ++i) counts[brng.below(replicates)] += 1.0;
    for (int j = 0; j < G; ++j) {
      double acc = 0.0;
      for (long i = 0; i < replicates; ++i) acc += counts[i] * m(i, j);
      boot(b, j) = acc / static_cast<double>(replicates);
    }
  }
  const double tail = (1.0 - options.confidence) / 2.0;
  rep.ci_lo.resize(G);
  rep.ci_hi.resize(G);
  std::vector<double> col(B);
  for (int j = 0; j < G; ++j) {
    for (int b = 0; b < B; ++b) col[b] = boot(b, j);
    std::sort(col.begin(), col.end());
    const auto at = [&](double q) {
      const double pos = q * (B - 1);
      const int lo = static_cast<int>(std::floor(pos));
      const int hi = std::min(lo + 1, B - 1);
      return col[lo] + (pos - lo) * (col[hi] - col[lo]);
    };
    rep.ci_lo[j] = std::min(at(tail), rep.mean_m[j]);
    rep.ci_hi[j] = std::max(at(1.0 - tail), rep.mean_m[j]);
  }

  const double pairs = 0.5 * G * (G - 1);
  boost::math::normal standard;
  rep.critical_z = boost::math::quantile(standard, 1.0 - (1.0 - options.confidence) / pairs);
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  rep.worst_t1 = rep.worst_t2 = 0;
  for (int j1 = 0; j1 < G; ++j1) {
    for (int j2 = j1 + 1; j2 < G; ++j2) {
      const double diff = rep.mean_m[j2] - rep.mean_m[j1];
      double s1 = 0.0, s2 = 0.0;
      for (int b = 0; b < B; ++b) {
        const double d = boot(b, j2) - boot(b, j1);
        s1 += d;
        s2 += d * d;
      }
      const double mean = s1 / B;
      const double se = std::sqrt(std::max(0.0, (s2 - B * mean * mean) / (B - 1)));
      const double excess = diff - rep.critical_z * se;
      if (excess > rep.worst_excess) {
        rep.worst_excess = excess;
        rep.worst_t1 = rep.grid[j1];
        rep.worst_t2 = rep.grid[j2];
      }
    }
  }
  rep.pass = rep.worst_excess <= 0.0;
  if (options.keep_distances) rep.distances = dist;
  return rep;
}

}  // namespace psgla
