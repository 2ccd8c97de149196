#include "psgla/oracle.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "psgla/errors.h"
#include "psgla/log.h"

namespace psgla {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_noise_dim(const NoiseModel& noise, const ConvexBody& body) {
  if (noise.dim() != body.dim()) {
    throw InputError("loss: noise dimension " + std::to_string(noise.dim()) +
                     " does not match body dimension " + std::to_string(body.dim()));
  }
}

class QuadraticLoss final : public StochasticLoss {
 public:
  QuadraticLoss(const ConvexBody& body, double k, NoiseModel noise)
      : StochasticLoss(body.dim(), noise,
                       {k, k * body.max_norm(), noise.subgauss()},
                       {0.0, 0.5 * k * body.max_norm() * body.max_norm()}, 0.0),
        k_(k) {}
  std::string name() const override { return "quadratic"; }
  double mean_value(const Vector& x) const override { return 0.5 * k_ * x.squaredNorm(); }
  void mean_grad(const Vector& x, Eigen::Ref<Vector> g) const override { g = k_ * x; }

 private:
  double k_;
};

constexpr double kWellRadiusSq = 0.25;

double well_grad_norm(double t) { return 4.0 * t * std::abs(t * t - kWellRadiusSq); }

class DoubleWellLoss final : public StochasticLoss {
 public:
  DoubleWellLoss(const ConvexBody& body, NoiseModel noise)
      : StochasticLoss(body.dim(), noise, constants_for(body, noise), bounds_for(body),
                       bounds_for(body).f_min) {}
  std::string name() const override { return "double_well"; }
  double mean_value(const Vector& x) const override {
    const double s = x.squaredNorm() - kWellRadiusSq;
    return s * s;
  }
  void mean_grad(const Vector& x, Eigen::Ref<Vector> g) const override {
    g = (4.0 * (x.squaredNorm() - kWellRadiusSq)) * x;
  }

 private:
  // Hessian eigenvalues at |x| = t are 12t^2 - 1 (radial) and 4t^2 - 1.
  static LossConstants constants_for(const ConvexBody& body, const NoiseModel& noise) {
    const double R = body.max_norm();
    const double lipschitz = std::max(1.0, 12.0 * R * R - 1.0);
    const double t_inner = 1.0 / std::sqrt(12.0);  // interior maximiser of |grad| on |x| < 1/2
    double smooth = well_grad_norm(R);
    if (R >= t_inner) smooth = std::max(smooth, well_grad_norm(t_inner));
    return {lipschitz, smooth, noise.subgauss()};
  }
  // Norms attained on K fill [0, R] because K is convex and contains 0.
  static ValueBounds bounds_for(const ConvexBody& body) {
    const double R = body.max_norm();
    const double edge = (R * R - kWellRadiusSq) * (R * R - kWellRadiusSq);
    const double f_min = R >= 0.5 ? 0.0 : edge;
    return {f_min, std::max(kWellRadiusSq * kWellRadiusSq, edge)};
  }
};

class LinearLoss final : public StochasticLoss {
 public:
  LinearLoss(const ConvexBody& body, Vector c, NoiseModel noise)
      : StochasticLoss(body.dim(), noise, {0.0, c.norm(), noise.subgauss()},
                       {-body.support(-c), body.support(c)}, -body.support(-c)),
        c_(std::move(c)) {}
  std::string name() const override { return "linear"; }
  double mean_value(const Vector& x) const override { return c_.dot(x); }
  void mean_grad(const Vector&, Eigen::Ref<Vector> g) const override { g = c_; }

 private:
  Vector c_;
};

class TrigonometricLoss final : public StochasticLoss {
 public:
  TrigonometricLoss(const ConvexBody& body, Vector coeff, Matrix freq, Vector phase,
                    NoiseModel noise, std::optional<double> known_min)
      : StochasticLoss(body.dim(), noise, constants_for(coeff, freq, noise),
                       {-coeff.cwiseAbs().sum(), coeff.cwiseAbs().sum()}, known_min),
        coeff_(std::move(coeff)),
        freq_(std::move(freq)),
        phase_(std::move(phase)) {}
  std::string name() const override { return "trigonometric"; }
  double mean_value(const Vector& x) const override {
    const Vector arg = freq_ * x + phase_;
    return coeff_.dot(arg.array().cos().matrix());
  }
  void mean_grad(const Vector& x, Eigen::Ref<Vector> g) const override {
    const Vector arg = freq_ * x + phase_;
    g = -freq_.transpose() * coeff_.cwiseProduct(arg.array().sin().matrix());
  }

 private:
  static LossConstants constants_for(const Vector& c, const Matrix& w, const NoiseModel& noise) {
    const Vector wn = w.rowwise().norm();
    return {c.cwiseAbs().dot(wn.cwiseProduct(wn)), c.cwiseAbs().dot(wn), noise.subgauss()};
  }
  Vector coeff_;
  Matrix freq_;  // one frequency per row
  Vector phase_;
};

}  // namespace

NoiseModel NoiseModel::zero(int dim) {
  if (dim < 1) throw InputError("noise: dimension must be positive");
  return NoiseModel(dim, Zero{});
}

NoiseModel NoiseModel::gaussian(int dim, double sigma) {
  if (dim < 1) throw InputError("noise: dimension must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("noise: sigma must be >= 0");
  return NoiseModel(dim, Gaussian{sigma});
}

NoiseModel NoiseModel::bounded_uniform(int dim, double halfwidth) {
  if (dim < 1) throw InputError("noise: dimension must be positive");
  if (!(halfwidth >= 0.0) || !std::isfinite(halfwidth)) {
    throw InputError("noise: halfwidth must be >= 0");
  }
  return NoiseModel(dim, BoundedUniform{halfwidth});
}

NoiseModel NoiseModel::data_driven(Batch rows) {
  if (rows.rows() < 1 || rows.cols() < 1) throw InputError("noise: empty dataset");
  if (!rows.allFinite()) throw InputError("noise: dataset contains non-finite values");
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  rows.rowwise() -= mean;
  const double max_norm = rows.rowwise().norm().maxCoeff();
  const int dim = static_cast<int>(rows.cols());
  return NoiseModel(dim, DataDriven{std::move(rows), max_norm});
}

void NoiseModel::sample(RandomStream& rng, Eigen::Ref<Vector> z) const {
  std::visit(Overloaded{[&](const Zero&) { z.setZero(); },
                        [&](const Gaussian& g) {
                          for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g.sigma * rng.normal();
                        },
                        [&](const BoundedUniform& u) {
                          for (Eigen::Index i = 0; i < z.size(); ++i) {
                            z[i] = u.halfwidth * (2.0 * rng.uniform() - 1.0);
                          }
                        },
                        [&](const DataDriven& d) {
                          const auto row = static_cast<Eigen::Index>(
                              rng.below(static_cast<std::uint64_t>(d.rows.rows())));
                          z = d.rows.row(row).transpose();
                        }},
             model_);
}

double NoiseModel::subgauss() const {
  return std::visit(Overloaded{[](const Zero&) { return 0.0; },
                               [](const Gaussian& g) { return g.sigma; },
                               [](const BoundedUniform& u) { return u.halfwidth / std::sqrt(3.0); },
                               [](const DataDriven& d) { return d.max_norm; }},
                    model_);
}

std::string NoiseModel::kind_name() const {
  return std::visit(Overloaded{[](const Zero&) { return std::string("zero"); },
                               [](const Gaussian&) { return std::string("gaussian"); },
                               [](const BoundedUniform&) { return std::string("uniform"); },
                               [](const DataDriven&) { return std::string("data"); }},
                    model_);
}

StochasticLoss::StochasticLoss(int dim, NoiseModel noise, LossConstants constants,
                               ValueBounds bounds, std::optional<double> known_min)
    : dim_(dim),
      noise_(std::move(noise)),
      constants_(constants),
      bounds_(bounds),
      known_min_(known_min) {}

void StochasticLoss::noisy_grad(const Vector& x, const Vector& z, Eigen::Ref<Vector> g) const {
  mean_grad(x, g);
  g += z;
}

LossPtr make_quadratic(const ConvexBody& body, double curvature, NoiseModel noise) {
  require_noise_dim(noise, body);
  if (!(curvature >= 0.0) || !std::isfinite(curvature)) {
    throw InputError("quadratic: curvature must be >= 0");
  }
  return std::make_shared<QuadraticLoss>(body, curvature, std::move(noise));
}

LossPtr make_double_well(const ConvexBody& body, NoiseModel noise) {
  require_noise_dim(noise, body);
  return std::make_shared<DoubleWellLoss>(body, std::move(noise));
}

LossPtr make_linear(const ConvexBody& body, Vector coefficients, NoiseModel noise) {
  require_noise_dim(noise, body);
  if (coefficients.size() != body.dim() || !coefficients.allFinite()) {
    throw InputError("linear: coefficient vector must be finite with the body's dimension");
  }
  return std::make_shared<LinearLoss>(body, std::move(coefficients), std::move(noise));
}

LossPtr make_trigonometric(const ConvexBody& body, int terms, double max_frequency,
                           double amplitude, std::uint64_t seed, NoiseModel noise,
                           std::optional<double> known_min) {
  require_noise_dim(noise, body);
  if (terms < 1 || !(max_frequency > 0.0) || !(amplitude > 0.0)) {
    throw InputError("trigonometric: terms, max_frequency and amplitude must be positive");
  }
  const int n = body.dim();
  RandomStream rng(seed);
  Vector c(terms);
  Matrix w(terms, n);
  Vector phase(terms);
  for (int i = 0; i < terms; ++i) {
    c[i] = 2.0 * rng.uniform() - 1.0;
    Vector dir(n);
    rng.fill_normal(dir);
    dir.normalize();
    w.row(i) = (max_frequency * std::pow(rng.uniform(), 1.0 / n)) * dir.transpose();
    phase[i] = 2.0 * std::numbers::pi * rng.uniform();
  }
  c *= amplitude / c.cwiseAbs().sum();
  return std::make_shared<TrigonometricLoss>(body, std::move(c), std::move(w), std::move(phase),
                                             std::move(noise), known_min);
}

Vector noisy_grad(const StochasticLoss& loss, const Vector& x, const Vector& z) {
  if (x.size() != loss.dim() || z.size() != loss.noise().dim()) {
    throw InputError("noisy_grad: dimension mismatch");
  }
  Vector g(loss.dim());
  loss.noisy_grad(x, z, g);
  if (!g.allFinite()) {
    std::ostringstream os;
    os << "noisy_grad: non-finite gradient at x = [" << x.transpose() << "]";
    throw NumericError(os.str());
  }
  return g;
}

Vector mean_grad(const StochasticLoss& loss, const Vector& x) {
  if (x.size() != loss.dim()) throw InputError("mean_grad: dimension mismatch");
  Vector g(loss.dim());
  loss.mean_grad(x, g);
  return g;
}

EstimatedConstants estimate_constants(const StochasticLoss& loss, const ConvexBody& body,
                                      long samples, RandomStream& rng) {
  if (samples < 1000) throw InputError("estimate_constants: samples must be >= 1000");
  const int n = loss.dim();
  EstimatedConstants est{0.0, 0.0, 0.0, {}};
  Vector z(loss.noise().dim());
  Vector g1(n), g2(n);

  for (long k = 0; k < samples; ++k) {
    const Vector x1 = body.sample_uniform(rng);
    const Vector x2 = body.sample_uniform(rng);
    loss.sample_z(rng, z);
    loss.noisy_grad(x1, z, g1);
    loss.noisy_grad(x2, z, g2);
    const double dx = (x1 - x2).norm();
    if (dx > 0.0) est.lipschitz = std::max(est.lipschitz, (g1 - g2).norm() / dx);
  }

  // Half interior points, half boundary points pushed out along random rays.
  for (long k = 0; k < samples; ++k) {
    Vector x;
    if (k % 2 == 0) {
      x = body.sample_uniform(rng);
    } else {
      Vector dir(n);
      rng.fill_normal(dir);
      x = body.project((4.0 * body.diameter() / dir.norm()) * dir);
    }
    loss.mean_grad(x, g1);
    est.smoothness = std::max(est.smoothness, g1.norm());
  }

  // sigma^2 >= 2 log E[exp(lambda a^T g)] / lambda^2 for every lambda and unit a.
  constexpr int kDirections = 20;
  std::vector<double> proj(static_cast<std::size_t>(samples));
  for (int d = 0; d < kDirections; ++d) {
    Vector alpha(n);
    rng.fill_normal(alpha);
    alpha.normalize();
    const Vector x = body.sample_uniform(rng);
    loss.mean_grad(x, g2);
    double mean = 0.0;
    for (long k = 0; k < samples; ++k) {
      loss.sample_z(rng, z);
      loss.noisy_grad(x, z, g1);
      proj[static_cast<std::size_t>(k)] = alpha.dot(g1 - g2);
      mean += proj[static_cast<std::size_t>(k)];
    }
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (double p : proj) var += (p - mean) * (p - mean);
    const double sd = std::sqrt(var / static_cast<double>(samples));
    if (sd <= 0.0) continue;
    for (double scale : {0.5, 1.0, 2.0}) {
      const double lambda = scale / sd;
      double mgf = 0.0;
      for (double p : proj) mgf += std::exp(lambda * p);
      mgf /= static_cast<double>(samples);
      const double s2 = 2.0 * std::log(mgf) / (lambda * lambda);
      if (s2 > 0.0) est.subgauss = std::max(est.subgauss, std::sqrt(s2));
    }
  }

  const LossConstants& declared = loss.constants();
  auto check = [&](const char* what, double estimate, double value) {
    if (estimate > value * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream os;
      os << "estimated " << what << " " << estimate << " exceeds declared " << value;
      est.warnings.push_back(os.str());
      warn(os.str());
    }
  };
  check("lipschitz", est.lipschitz, declared.lipschitz);
  check("smoothness", est.smoothness, declared.smoothness);
  check("subgauss", est.subgauss, declared.subgauss);
  return est;
}

}  // namespace psgla
