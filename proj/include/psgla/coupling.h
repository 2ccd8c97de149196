#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "psgla/constants.h"
#include "psgla/geometry.h"
#include "psgla/oracle.h"
#include "psgla/types.h"

namespace psgla {

// Solution of h'' + 2 xi omega h' + omega^2 h = 0 with h(0) = 0, h'(0) = 1 on
// [0, D].
class OscillatorSolution {
 public:
  enum class Regime { kUnderdamped, kCritical, kOverdamped };

  // Throws InputError for omega <= 0, xi < 0 or D <= 0 and
  // DegenerateDampingError for xi == 1. |xi - 1| < 1e-6 uses x e^{-omega x}.
  static OscillatorSolution from_parameters(double omega, double xi, double D);
  // Parameters of contraction_constants for (D, l, beta); valid even when
  // omega and xi individually leave double range.
  static OscillatorSolution from_problem(const ProblemData& p);
  static OscillatorSolution from_contraction(const ContractionConstants& c, double D);

  Regime regime() const { return regime_; }
  double omega() const { return omega_; }
  double xi() const { return xi_; }
  double D() const { return D_; }

  double h(double x) const;
  double dh(double x) const;
  double d2h(double x) const;

 private:
  OscillatorSolution() = default;
  Regime regime_ = Regime::kUnderdamped;
  double omega_ = 1.0;
  double xi_ = 0.0;
  double D_ = 1.0;
  double alpha_ = 0.0;  // omega xi
  double freq_ = 1.0;   // omega sqrt(1 - xi^2), underdamped
  double lambda_plus_ = 0.0, lambda_minus_ = 0.0;  // overdamped decay rates
};

// h(x); throws InputError unless 0 <= x <= D.
double h_eval(const OscillatorSolution& sol, double x);

enum class CouplingKind {
  kReflection,         // chain 2 noise (I - 2 u u^T) w until merged
  kReflectionMaximal,  // reflection, but chain 2 jumps onto chain 1 with the maximal probability
};

// One reflection-coupled PSGLA step with shared z and w. u = (x1 - x2)/|x1 - x2|;
// when `coupled` or x1 == x2 both chains use w.
std::pair<Vector, Vector> coupled_step(const ConvexBody& body, const StochasticLoss& loss,
                                       const Vector& x1, const Vector& x2, double eta, double beta,
                                       const Vector& z, const Vector& w, bool coupled);

struct MaximalStep {
  Vector x1;
  Vector x2;
  bool met;  // chain 2 took chain 1's proposal
};

// Reflection-maximal variant. With d = (m1 - m2)/s, m_i = x_i - eta grad f(x_i, z),
// s = sqrt(2 eta / beta): chain 2 uses w + d with probability
// min(1, phi(w + d)/phi(w)) (decided by `uniform`), else w reflected across d.
MaximalStep coupled_step_maximal(const ConvexBody& body, const StochasticLoss& loss,
                                 const Vector& x1, const Vector& x2, double eta, double beta,
                                 const Vector& z, const Vector& w, double uniform);

struct SupermartingaleOptions {
  CouplingKind kind = CouplingKind::kReflectionMaximal;
  int grid_points = 20;
  int bootstrap = 1000;
  double confidence = 0.95;
  double merge_tolerance = 1e-8;  // relative to D
  bool identical_start = false;   // x2(0) = x1(0)
  bool keep_distances = false;
  Execution exec = Execution::kParallel;
};

struct SupermartingaleReport {
  double eta, beta, a;
  long replicates, horizon;
  std::vector<long> grid;           // iteration indices, grid[0] = 0
  std::vector<double> mean_m;       // mean of e^{eta a t} h(|rho_t|)
  std::vector<double> ci_lo, ci_hi; // percentile bootstrap interval per grid point
  std::vector<double> mean_distance;
  std::vector<long> coupling_times; // -1 when never merged
  double critical_z;                // one-sided normal quantile after Bonferroni
  double worst_excess;              // max over pairs of (diff - z se)
  long worst_t1, worst_t2;
  bool pass;
  Batch distances;                  // replicates x grid when keep_distances
};

// Grid of `points` strictly increasing iterations: 0, then geometric up to horizon.
std::vector<long> supermartingale_grid(long horizon, int points);

// Runs `replicates` coupled pairs from independent uniform starts on K x K and
// tests that the mean of M_t = e^{eta a t} h(|rho_t|) is non-increasing over
// every pair of grid times (paired bootstrap standard errors, one-sided,
// Bonferroni over pairs). Pair i draws from chain_seed(seed, i).
SupermartingaleReport supermartingale_check(const ConvexBody& body, const StochasticLoss& loss,
                                            const OscillatorSolution& sol, double eta, double beta,
                                            double a, long replicates, long horizon,
                                            std::uint64_t seed,
                                            const SupermartingaleOptions& options = {});

}  // namespace psgla
