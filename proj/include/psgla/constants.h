#pragma once

#include <optional>

#include "psgla/geometry.h"
#include "psgla/oracle.h"

namespace psgla {

// Scalar summary of a problem instance.
struct ProblemData {
  int n = 1;
  double D = 1.0;          // diameter of K
  double r = 0.5;          // inradius (origin-centred ball inside K)
  double lipschitz = 1.0;  // l
  double smoothness = 1.0; // u
  double sigma = 0.0;
  double beta = 1.0;
  std::optional<double> eta;

  // D, r, beta > 0; l, u, sigma >= 0; r <= D.
  void validate() const;
};

ProblemData problem_data(const ConvexBody& body, const StochasticLoss& loss, double beta);

enum class DampingRegime { kUnderdamped, kOverdamped };

// Decay rate and oscillator parameters. The overdamped branch stays usable
// when a, omega or xi leave double range: log_a, omega_xi (= omega * xi) and
// log_omega_sq are always finite.
struct ContractionConstants {
  DampingRegime regime;
  double a;
  double log_a;
  double omega;  // natural frequency
  double xi;     // damping ratio
  double omega_xi;
  double log_omega_sq;
  double c_w1mult;
  double log_c_w1mult;
};

ContractionConstants contraction_constants(const ProblemData& p);

struct DiscretizationConstants {
  double c_tanaka_rt;
  double c_tanaka_const;
};
DiscretizationConstants discretization_constants(const ProblemData& p);

struct AveragingConstants {
  double c_ave_lin;
  double c_ave_root;
  double c_ave_tq;
};
AveragingConstants averaging_constants(const ProblemData& p);

// Every constant of the convergence bound. The log_ fields hold the same
// quantities in log space; the plain fields overflow to +inf once D^2 l beta
// reaches a few thousand.
struct TheoryConstants {
  ContractionConstants contraction;
  DiscretizationConstants discretization;
  AveragingConstants averaging;
  double c_global_contract;  // c_w1mult * D
  double c_a_to_c;
  double c_c_to_m;
  double c_global_const;     // c_a_to_c + c_c_to_m
  double c_subopt;
  double log_c_global_contract;
  double log_c_a_to_c;
  double log_c_c_to_m;
  double log_c_global_const;
};

TheoryConstants composite_constants(const ProblemData& p);

// c1 exp(-eta a k) + c2 (eta log k)^(1/4). Throws InputError for k < 4, eta
// outside (0, 1/2] or a < 0.
double wasserstein_bound(const TheoryConstants& tc, double eta, double a, long k);
double wasserstein_bound(double c1, double c2, double eta, double a, long k);
// Log of the bound from log constants and log a.
double log_wasserstein_bound(double log_c1, double log_c2, double eta, double log_a, long k);

// 2D max{2/r, (r + sqrt(r^2 + D^2)) u / (r log 2)}.
double suboptimality_constant(const ProblemData& p);
// u * w1 + n log(c_subopt max{1, beta}) / beta.
double suboptimality_bound(const ProblemData& p, const TheoryConstants& tc, double w1);
double suboptimality_bound(const ProblemData& p, double c_subopt, double w1);

struct TuneOptions {
  double epsilon = 0.1;
  double lambda = 0.5;  // exponent of the beta requirement
  double delta = 0.1;   // slack of the T requirement
  long max_steps = 1000000;

  // Equivalent parametrization: rho = 4 / (1 - 2 delta) > 4, zeta = 1 / lambda > 1.
  static TuneOptions from_rho_zeta(double epsilon, double rho, double zeta);
  double rho() const { return 4.0 / (1.0 - 2.0 * delta); }
  double zeta() const { return 1.0 / lambda; }
  void validate() const;
};

struct TuneResult {
  double beta;
  double log_T;          // requirement on T, natural log (may exceed double range as T)
  long T;                // ceil(exp(log_T)) clamped to [4, LONG_MAX]
  bool T_saturated;      // exp(log_T) does not fit in a long
  long T_run;            // min(T, max_steps)
  double eta;            // eta_schedule at T
  double eta_run;        // eta_schedule at T_run
  double log_a;
  double c_subopt;
  double log_term;       // n log(c_subopt max{1, beta}) / beta, <= epsilon / 2
  double w1_bound_term;  // u * (c1 + c2 (4a)^(-1/4)) T^(-1/4) (log T)^(1/2) at T_run
  double log_w1_bound_term;
  TheoryConstants constants;
};

// Smallest beta meeting the log-term requirement, then T from the W1 term
// with the constants evaluated at that beta.
TuneResult tune_parameters(const ProblemData& p, const TuneOptions& options);

}  // namespace psgla
