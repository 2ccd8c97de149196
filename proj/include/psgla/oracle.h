#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psgla/geometry.h"
#include "psgla/random.h"
#include "psgla/types.h"

namespace psgla {

// Distribution of the external variable z. All built-in models are additive
// and zero-mean: grad f(x, z) = grad fbar(x) + z.
class NoiseModel {
 public:
  struct Zero {};
  struct Gaussian {
    double sigma;
  };
  struct BoundedUniform {
    double halfwidth;
  };
  // Empirical distribution over rows; rows are centred at construction.
  struct DataDriven {
    Batch rows;
    double max_norm;
  };

  static NoiseModel zero(int dim);
  static NoiseModel gaussian(int dim, double sigma);
  static NoiseModel bounded_uniform(int dim, double halfwidth);
  static NoiseModel data_driven(Batch rows);

  int dim() const { return dim_; }
  void sample(RandomStream& rng, Eigen::Ref<Vector> z) const;

  // Sub-Gaussian parameter of z: sigma for Gaussian; h/sqrt(3) for uniform on
  // [-h, h] (strictly sub-Gaussian); max row norm for data (Hoeffding).
  double subgauss() const;
  std::string kind_name() const;

  const std::variant<Zero, Gaussian, BoundedUniform, DataDriven>& model() const { return model_; }

 private:
  NoiseModel(int dim, std::variant<Zero, Gaussian, BoundedUniform, DataDriven> model)
      : dim_(dim), model_(std::move(model)) {}
  int dim_;
  std::variant<Zero, Gaussian, BoundedUniform, DataDriven> model_;
};

struct LossConstants {
  double lipschitz;   // l: gradient Lipschitz constant in x
  double smoothness;  // u: sup of |grad fbar| on K
  double subgauss;    // sigma
};

// Bounds of fbar on K. f_min may be a lower bound rather than the minimum.
struct ValueBounds {
  double f_min;
  double f_max;
};

// f(x, z) with mean fbar(x) = E f(x, z). Immutable; z draws go through the
// caller's RandomStream.
class StochasticLoss {
 public:
  virtual ~StochasticLoss() = default;

  int dim() const { return dim_; }
  const NoiseModel& noise() const { return noise_; }
  const LossConstants& constants() const { return constants_; }
  const ValueBounds& value_bounds() const { return bounds_; }
  // min over K of fbar when it is known in closed form.
  std::optional<double> known_minimum() const { return known_min_; }

  virtual std::string name() const = 0;
  virtual double mean_value(const Vector& x) const = 0;
  virtual void mean_grad(const Vector& x, Eigen::Ref<Vector> g) const = 0;
  // Additive by default: mean_grad(x) + z.
  virtual void noisy_grad(const Vector& x, const Vector& z, Eigen::Ref<Vector> g) const;

  void sample_z(RandomStream& rng, Eigen::Ref<Vector> z) const { noise_.sample(rng, z); }

 protected:
  StochasticLoss(int dim, NoiseModel noise, LossConstants constants, ValueBounds bounds,
                 std::optional<double> known_min);

 private:
  int dim_;
  NoiseModel noise_;
  LossConstants constants_;
  ValueBounds bounds_;
  std::optional<double> known_min_;
};

using LossPtr = std::shared_ptr<const StochasticLoss>;

// fbar(x) = (k/2)|x|^2, f(x, z) = fbar(x) + z^T x.
LossPtr make_quadratic(const ConvexBody& body, double curvature, NoiseModel noise);
// fbar(x) = (|x|^2 - 1/4)^2: global minima on the sphere |x| = 1/2.
LossPtr make_double_well(const ConvexBody& body, NoiseModel noise);
// fbar(x) = c^T x; l = 0.
LossPtr make_linear(const ConvexBody& body, Vector coefficients, NoiseModel noise);
// fbar(x) = sum_i c_i cos(w_i^T x + phi_i), drawn from `seed`, |w_i| <= max_frequency,
// sum |c_i| = amplitude. l = sum |c_i||w_i|^2 and u = sum |c_i||w_i| in closed form.
LossPtr make_trigonometric(const ConvexBody& body, int terms, double max_frequency,
                           double amplitude, std::uint64_t seed, NoiseModel noise,
                           std::optional<double> known_min = std::nullopt);

// grad_x f(x, z); throws NumericError naming x if the result is not finite.
Vector noisy_grad(const StochasticLoss& loss, const Vector& x, const Vector& z);
Vector mean_grad(const StochasticLoss& loss, const Vector& x);

struct EstimatedConstants {
  double lipschitz;
  double smoothness;
  double subgauss;
  std::vector<std::string> warnings;
};

// Empirical lower bounds on (l, u, sigma) used to validate the declared
// constants. Warns (and records) when an estimate exceeds its declared value.
EstimatedConstants estimate_constants(const StochasticLoss& loss, const ConvexBody& body,
                                      long samples, RandomStream& rng);

}  // namespace psgla
