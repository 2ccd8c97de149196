#include "psgla/constants.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psgla/errors.h"
#include "psgla/sampler.h"

namespace psgla {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

// log(1 + e^x)
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - e^{-t}) for t = exp(log_t) > 0.
double log1mexp_neg(double log_t) {
  if (log_t < -30.0) return log_t;  // 1 - e^{-t} = t (1 - t/2 + ...)
  return std::log(-std::expm1(-std::exp(log_t)));
}

// log cosh x and log sinh x for x >= 0 without overflow.
double log_cosh(double x) { return x + std::log1p(std::exp(-2.0 * x)) - kLog2; }
double log_sinh(double x) { return x + std::log1p(-std::exp(-2.0 * x)) - kLog2; }

double positive_exp(double log_value) { return std::exp(log_value); }

}  // namespace

void ProblemData::validate() const {
  if (n < 1) throw InputError("problem: n must be >= 1");
  if (!(D > 0.0) || !std::isfinite(D)) throw InputError("problem: D must be positive");
  if (!(r > 0.0)) throw InputError("problem: r must be positive");
  if (r > D) throw InputError("problem: r must not exceed D");
  if (!(lipschitz >= 0.0) || !(smoothness >= 0.0) || !(sigma >= 0.0)) {
    throw InputError("problem: l, u and sigma must be nonnegative");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("problem: beta must be positive");
  if (eta && !(*eta > 0.0)) throw InputError("problem: eta must be positive");
}

ProblemData problem_data(const ConvexBody& body, const StochasticLoss& loss, double beta) {
  ProblemData p;
  p.n = body.dim();
  p.D = body.diameter();
  p.r = body.inradius();
  p.lipschitz = loss.constants().lipschitz;
  p.smoothness = loss.constants().smoothness;
  p.sigma = loss.constants().subgauss;
  p.beta = beta;
  p.validate();
  return p;
}

ContractionConstants contraction_constants(const ProblemData& p) {
  if (!(p.D > 0.0) || !(p.lipschitz >= 0.0) || !(p.beta > 0.0)) {
    throw InputError("contraction_constants: D, beta must be positive and l nonnegative");
  }
  const double D = p.D, l = p.lipschitz, beta = p.beta;
  const double x = D * D * l * beta / 8.0;
  ContractionConstants c{};
  if (x < 1.0) {
    c.regime = DampingRegime::kUnderdamped;
    c.a = 4.0 / (D * D * beta);
    c.log_a = std::log(c.a);
    c.omega = 1.0 / D;
    c.xi = x;
    c.omega_xi = x / D;
    c.log_omega_sq = -2.0 * std::log(D);
    const double s = std::sqrt(1.0 - x * x);
    c.c_w1mult = std::exp(x) / (std::cos(s) - x / s * std::sin(s));
    c.log_c_w1mult = std::log(c.c_w1mult);
    return c;
  }
  c.regime = DampingRegime::kOverdamped;
  c.log_a = std::log(D * D * l * l * beta / 16.0) - 2.0 * log_cosh(x);
  c.a = std::exp(c.log_a);
  c.log_omega_sq = c.log_a + std::log(beta) - std::log(4.0);
  c.omega = std::exp(0.5 * c.log_omega_sq);
  c.omega_xi = x / D;
  c.xi = std::cosh(x);
  // 1/h'(D) = e^x sinh(x) / sinh(d), d = x (1 - tanh x).
  const double log_d = std::log(2.0 * x) - 2.0 * x - std::log1p(std::exp(-2.0 * x));
  const double d = std::exp(log_d);
  const double log_sinhc_d = d < 1e-8 ? 0.0 : std::log(std::sinh(d) / d);
  c.log_c_w1mult = x + log_sinh(x) - (log_d + log_sinhc_d);
  c.c_w1mult = positive_exp(c.log_c_w1mult);
  return c;
}

DiscretizationConstants discretization_constants(const ProblemData& p) {
  const double n = p.n, D = p.D, r = p.r, l = p.lipschitz, u = p.smoothness, s = p.sigma;
  const double inner = (u + l * D) / (2.0 * r) + n * s / (std::sqrt(2.0) * r) +
                       2.0 * n * std::sqrt(2.0) / (r * std::sqrt(p.beta));
  const double spread = n / p.beta + D * u + 2.0 * D * n * s;
  DiscretizationConstants c;
  c.c_tanaka_rt = std::sqrt(2.0 * inner * spread);
  c.c_tanaka_const = std::sqrt(2.0 * (D * u + 2.0 * n * s + n / p.beta)) + D * std::sqrt(inner);
  return c;
}

AveragingConstants averaging_constants(const ProblemData& p) {
  const double n = p.n, D = p.D, r = p.r, u = p.smoothness, s = p.sigma;
  const double sqrt2pi = std::sqrt(2.0 * M_PI);
  AveragingConstants c;
  c.c_ave_lin = 2.0 * s * std::sqrt(n);
  c.c_ave_root = std::sqrt(64.0 * n * s * D * sqrt2pi / r);
  c.c_ave_tq = std::sqrt(128.0 * n * s * sqrt2pi / r * (n / p.beta + D * u + 2.0 * D * n * s));
  return c;
}

TheoryConstants composite_constants(const ProblemData& p) {
  p.validate();
  TheoryConstants tc;
  tc.contraction = contraction_constants(p);
  tc.discretization = discretization_constants(p);
  tc.averaging = averaging_constants(p);
  const ContractionConstants& cc = tc.contraction;
  const double l = p.lipschitz;

  // log(1 + c_w1mult / (1 - e^{-a/2}))
  const double log_factor = softplus(cc.log_c_w1mult - log1mexp_neg(cc.log_a - kLog2));
  const double tanaka = tc.discretization.c_tanaka_rt + tc.discretization.c_tanaka_const;
  const double averaging =
      tc.averaging.c_ave_lin + tc.averaging.c_ave_root + tc.averaging.c_ave_tq;

  tc.log_c_global_contract = cc.log_c_w1mult + std::log(p.D);
  tc.log_c_a_to_c = 0.25 * kLog2 + std::log(tanaka) + l + log_factor;
  tc.log_c_c_to_m = averaging > 0.0 ? std::log(averaging) + l + log_factor
                                    : -std::numeric_limits<double>::infinity();
  tc.log_c_global_const = log_add_exp(tc.log_c_a_to_c, tc.log_c_c_to_m);

  const double factor = std::exp(log_factor);
  tc.c_global_contract = cc.c_w1mult * p.D;
  tc.c_a_to_c = std::pow(2.0, 0.25) * tanaka * std::exp(l) * factor;
  tc.c_c_to_m = averaging * std::exp(l) * factor;
  tc.c_global_const = tc.c_a_to_c + tc.c_c_to_m;
  tc.c_subopt = suboptimality_constant(p);
  return tc;
}

double wasserstein_bound(double c1, double c2, double eta, double a, long k) {
  if (k < 4) throw InputError("wasserstein_bound: k must be >= 4");
  if (!(eta > 0.0) || eta > 0.5) throw InputError("wasserstein_bound: eta must be in (0, 1/2]");
  if (!(a >= 0.0)) throw InputError("wasserstein_bound: a must be nonnegative");
  const double kd = static_cast<double>(k);
  return c1 * std::exp(-eta * a * kd) + c2 * std::pow(eta * std::log(kd), 0.25);
}

double wasserstein_bound(const TheoryConstants& tc, double eta, double a, long k) {
  return wasserstein_bound(tc.c_global_contract, tc.c_global_const, eta, a, k);
}

double log_wasserstein_bound(double log_c1, double log_c2, double eta, double log_a, long k) {
  if (k < 4) throw InputError("wasserstein_bound: k must be >= 4");
  if (!(eta > 0.0) || eta > 0.5) throw InputError("wasserstein_bound: eta must be in (0, 1/2]");
  const double kd = static_cast<double>(k);
  return log_add_exp(log_c1 - eta * std::exp(log_a) * kd,
                     log_c2 + 0.25 * std::log(eta * std::log(kd)));
}

double suboptimality_constant(const ProblemData& p) {
  if (!(p.D > 0.0) || !(p.r > 0.0) || !(p.smoothness >= 0.0)) {
    throw InputError("suboptimality_constant: D, r must be positive and u nonnegative");
  }
  const double r = p.r, D = p.D;
  return 2.0 * D * std::max(2.0 / r, (r + std::sqrt(r * r + D * D)) * p.smoothness / (r * kLog2));
}

double suboptimality_bound(const ProblemData& p, double c_subopt, double w1) {
  if (!(w1 >= 0.0)) throw InputError("suboptimality_bound: w1 must be nonnegative");
  return p.smoothness * w1 + p.n * std::log(c_subopt * std::max(1.0, p.beta)) / p.beta;
}

double suboptimality_bound(const ProblemData& p, const TheoryConstants& tc, double w1) {
  return suboptimality_bound(p, tc.c_subopt, w1);
}

TuneOptions TuneOptions::from_rho_zeta(double epsilon, double rho, double zeta) {
  if (!(rho > 4.0)) throw InputError("tune: rho must exceed 4");
  if (!(zeta > 1.0)) throw InputError("tune: zeta must exceed 1");
  TuneOptions o;
  o.epsilon = epsilon;
  o.delta = 0.5 * (1.0 - 4.0 / rho);
  o.lambda = 1.0 / zeta;
  return o;
}

void TuneOptions::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("tune: epsilon must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("tune: lambda must be in (0, 1)");
  if (!(delta > 0.0 && delta < 0.5)) throw InputError("tune: delta must be in (0, 1/2)");
  if (max_steps < 4) throw InputError("tune: max_steps must be >= 4");
}

TuneResult tune_parameters(const ProblemData& p_in, const TuneOptions& options) {
  options.validate();
  p_in.validate();
  const double eps = options.epsilon, lambda = options.lambda, delta = options.delta;
  TuneResult res{};
  res.c_subopt = suboptimality_constant(p_in);
  const double c = res.c_subopt;

  // n log(c beta) / beta <= n c^{1-lambda} beta^{-lambda} / ((1 - lambda) e) <= eps / 2.
  const double log_beta = (std::log(2.0 * p_in.n * c) - std::log((1.0 - lambda) * eps) - 1.0) / lambda -
                          std::log(c);
  res.beta = std::max(1.0, std::exp(log_beta));
  if (!std::isfinite(res.beta)) throw NumericError("tune: beta requirement overflows");

  ProblemData p = p_in;
  p.beta = res.beta;
  res.constants = composite_constants(p);
  res.log_a = res.constants.contraction.log_a;
  res.log_term = p.n * std::log(c * std::max(1.0, res.beta)) / res.beta;

  // W1 <= C T^{-1/4} (log T)^{1/2}, C = c1 + c2 (4a)^{-1/4}; u W1 <= eps / 2 holds once
  // T >= eps_hat^{-2/(1-2 delta)} with eps_hat = e delta (eps/2)^2 / (u C)^2.
  const TheoryConstants& tc = res.constants;
  const double log_C =
      log_add_exp(tc.log_c_global_contract, tc.log_c_global_const - 0.25 * (std::log(4.0) + res.log_a));
  const double log_u = std::log(p.smoothness);
  const double log_eps_hat = 1.0 + std::log(delta) + 2.0 * std::log(eps / 2.0) - 2.0 * log_u - 2.0 * log_C;
  res.log_T = -2.0 / (1.0 - 2.0 * delta) * log_eps_hat;

  const double log_max_long = std::log(static_cast<double>(std::numeric_limits<long>::max()));
  res.T_saturated = !(res.log_T < log_max_long - 1.0);
  if (res.T_saturated) {
    res.T = std::numeric_limits<long>::max();
  } else {
    res.T = std::max(4L, static_cast<long>(std::ceil(std::exp(res.log_T))));
  }
  res.T_run = std::min(res.T, options.max_steps);
  res.eta = res.T_saturated ? std::exp(std::log(res.log_T) - std::log(4.0) - res.log_a - res.log_T)
                            : eta_schedule_log(res.T, res.log_a);
  res.eta = std::min(res.eta, 0.5);
  res.eta_run = eta_schedule_log(res.T_run, res.log_a);

  const double logT_run = std::log(static_cast<double>(res.T_run));
  res.log_w1_bound_term = log_u + log_C - 0.25 * logT_run + 0.5 * std::log(logT_run);
  res.w1_bound_term = std::exp(res.log_w1_bound_term);
  return res;
}

}  // namespace psgla
