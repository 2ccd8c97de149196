#include "psgla/sampler.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psgla/errors.h"
#include "psgla/log.h"

namespace psgla {

void SamplerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("sampler: eta must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("sampler: beta must be positive");
  if (steps < 0) throw InputError("sampler: steps must be >= 0");
  if (substeps < 1) throw InputError("sampler: substeps must be >= 1");
  if (chains < 1) throw InputError("sampler: chains must be >= 1");
  if (eta > 0.5) warn("eta > 1/2 is outside the range covered by the convergence bound");
}

namespace {

void require_finite_grad(const Vector& g, const Vector& x) {
  if (!g.allFinite()) {
    std::ostringstream os;
    os << "non-finite gradient at x = [" << x.transpose() << "]";
    throw NumericError(os.str());
  }
}

// Unprojected PSGLA update with pre-drawn z and w.
inline void psgla_update(const StochasticLoss& loss, Vector& x,
                         double eta, double noise_scale, const Vector& z, const Vector& w,
                         Vector& g) {
  loss.noisy_grad(x, z, g);
  require_finite_grad(g, x);
  x = x - eta * g + noise_scale * w;
}

}  // namespace

Vector psgla_step(const ConvexBody& body, const StochasticLoss& loss, const Vector& x, double eta,
                  double beta, const Vector& z, const Vector& w) {
  if (x.size() != body.dim() || x.size() != loss.dim() || w.size() != body.dim()) {
    throw InputError("psgla_step: dimension mismatch");
  }
  Vector y = x;
  Vector g(loss.dim());
  psgla_update(loss, y, eta, std::sqrt(2.0 * eta / beta), z, w, g);
  body.project_inplace(y);
  return y;
}

long default_stride(long steps) { return std::max(1L, steps / 1000); }

Vector initial_state(const ConvexBody& body, const SamplerConfig& config, RandomStream& rng) {
  if (config.x0) {
    if (config.x0->size() != body.dim() || !body.contains(*config.x0)) {
      throw InputError("initial point is not in K");
    }
    return *config.x0;
  }
  if (config.init == InitKind::kUniform) return body.sample_uniform(rng);
  return Vector::Zero(body.dim());
}

Trajectory run_chain_indexed(const ConvexBody& body, const StochasticLoss& loss,
                             const SamplerConfig& config, std::uint64_t chain, long stride) {
  config.validate();
  if (stride <= 0) stride = default_stride(config.steps);
  RandomStream rng(chain_seed(config.seed, chain));
  const int n = body.dim();
  Vector x = initial_state(body, config, rng);
  Vector z(loss.noise().dim());
  Vector w(n), g(n), pre(n);
  Vector refl = Vector::Zero(n);
  const double noise_scale = std::sqrt(2.0 * config.eta / config.beta);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.reflections.push_back(refl);
  for (long k = 0; k < config.steps; ++k) {
    loss.sample_z(rng, z);
    rng.fill_normal(w);
    try {
      psgla_update(loss, x, config.eta, noise_scale, z, w, g);
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(k) + ": " + e.what());
    }
    pre = x;
    if (body.project_inplace(x)) refl += x - pre;
    const long done = k + 1;
    if (done % stride == 0 || done == config.steps) {
      traj.times.push_back(static_cast<double>(done));
      traj.states.push_back(x);
      traj.reflections.push_back(refl);
      refl.setZero();
    }
  }
  return traj;
}

Trajectory run_chain(const ConvexBody& body, const StochasticLoss& loss,
                     const SamplerConfig& config, long stride) {
  return run_chain_indexed(body, loss, config, 0, stride);
}

StochasticDrift::StochasticDrift(LossPtr loss, double eta)
    : loss_(std::move(loss)), eta_(eta), z_(Vector::Zero(loss_->noise().dim())) {}

void StochasticDrift::refresh(RandomStream& rng) { loss_->sample_z(rng, z_); }

void StochasticDrift::evaluate(double, const Vector& x, Eigen::Ref<Vector> out) {
  loss_->noisy_grad(x, z_, out);
  out = -eta_ * out;
}

std::unique_ptr<Drift> StochasticDrift::clone() const {
  return std::make_unique<StochasticDrift>(loss_, eta_);
}

MeanDrift::MeanDrift(LossPtr loss, double eta) : loss_(std::move(loss)), eta_(eta) {}

void MeanDrift::evaluate(double, const Vector& x, Eigen::Ref<Vector> out) {
  loss_->mean_grad(x, out);
  out = -eta_ * out;
}

std::unique_ptr<Drift> MeanDrift::clone() const { return std::make_unique<MeanDrift>(loss_, eta_); }

Trajectory euler_reflected(const ConvexBody& body, Drift& drift, const EulerOptions& options,
                           const Vector& x0, RandomStream& rng) {
  if (options.substeps < 1) throw InputError("euler_reflected: substeps must be >= 1");
  if (!(options.eta > 0.0) || !(options.beta > 0.0) || !(options.horizon >= 0.0)) {
    throw InputError("euler_reflected: eta, beta must be positive and horizon >= 0");
  }
  if (x0.size() != body.dim() || !body.contains(x0)) {
    throw InputError("euler_reflected: initial point is not in K");
  }
  const int m = options.substeps;
  const long total = std::llround(options.horizon * m);
  const double dt = 1.0 / m;
  const double increment_scale = std::sqrt(2.0 * options.eta / options.beta) * std::sqrt(dt);
  const int n = body.dim();

  Vector x = x0;
  Vector b(n), w(n), pre(n);
  Vector refl = Vector::Zero(n);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.reflections.push_back(refl);
  for (long k = 0; k < total; ++k) {
    if (k % m == 0) drift.refresh(rng);
    const double t = static_cast<double>(k) * dt;
    drift.evaluate(t, x, b);
    if (!b.allFinite()) {
      std::ostringstream os;
      os << "euler_reflected: non-finite drift at t = " << t;
      throw NumericError(os.str());
    }
    rng.fill_normal(w);
    x = x + dt * b + increment_scale * w;
    pre = x;
    if (body.project_inplace(x)) refl += x - pre;
    const long done = k + 1;
    if ((options.stride > 0 && done % options.stride == 0) || done == total) {
      traj.times.push_back(static_cast<double>(done) * dt);
      traj.states.push_back(x);
      traj.reflections.push_back(refl);
      refl.setZero();
    }
  }
  return traj;
}

SkorokhodPath skorokhod_piecewise(const ConvexBody& body, const std::vector<double>& times,
                                  const std::vector<Vector>& values) {
  if (times.empty() || times.size() != values.size()) {
    throw InputError("skorokhod_piecewise: times and values must be non-empty and equal length");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw InputError("skorokhod_piecewise: jump times must be strictly increasing");
    }
  }
  if (values[0].size() != body.dim() || !body.contains(values[0])) {
    throw InputError("skorokhod_piecewise: the input must start inside K");
  }
  const int n = body.dim();
  SkorokhodPath path;
  path.times = times;
  path.states.push_back(values[0]);
  path.magnitudes.push_back(0.0);
  path.directions.push_back(Vector::Zero(n));
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k].size() != n) throw InputError("skorokhod_piecewise: dimension mismatch");
    const Vector pre = path.states.back() + (values[k] - values[k - 1]);
    Vector x = pre;
    const bool moved = body.project_inplace(x);
    const double d = (pre - x).norm();
    path.magnitudes.push_back(d);
    path.directions.push_back(moved && d > 0.0 ? Vector((pre - x) / d) : Vector::Zero(n));
    path.states.push_back(std::move(x));
  }
  return path;
}

double eta_schedule(long T, double a) {
  if (!(a > 0.0)) throw InputError("eta_schedule: a must be positive");
  return eta_schedule_log(T, std::log(a));
}

double eta_schedule_log(long T, double log_a) {
  if (T < 4) throw InputError("eta_schedule: T must be >= 4");
  const double logT = std::log(static_cast<double>(T));
  const double log_eta = std::log(logT) - std::log(4.0) - log_a - logT;
  if (log_eta > std::log(0.5)) {
    warn("eta_schedule: log(T)/(4aT) exceeds 1/2; capped at 1/2");
    return 0.5;
  }
  return std::exp(log_eta);
}

}  // namespace psgla
