#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "edlab/rng.hpp"

namespace edlab::dist {

// Shortage / excess penalties, $/MWh.
struct Penalties {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

struct Normal {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
};

struct Uniform {
  double a = 0.0;
  double b = 1.0;  // a < b
};

// cdf (1-(L/x)^alpha) / (1-(L/H)^alpha) on [L, H].
struct BoundedPareto {
  double lower = 1.0;  // L > 0
  double upper = 2.0;  // H > L
  double alpha = 1.0;  // > 0
};

struct Empirical {
  std::vector<double> sorted_samples;  // ascending
};

enum class Family { Normal, Uniform, BoundedPareto, Empirical };

// Demand model: the predicted distribution f_t(x; theta) during training,
// or the realized/true cdf when evaluating. Immutable after construction.
class DemandDistribution {
 public:
  static DemandDistribution normal(double mu, double sigma);
  static DemandDistribution uniform(double a, double b);
  static DemandDistribution bounded_pareto(double lower, double upper, double alpha);
  static DemandDistribution empirical(std::vector<double> samples);

  Family family() const;
  std::string family_name() const;

  double pdf(double x) const;
  double cdf(double x) const;
  // Inverse cdf; throws InvalidProbability outside [0,1]. Empirical uses the
  // linear-interpolated inverse of the step cdf, so quantile(cdf(x)) = x at
  // every sample point.
  double quantile(double p) const;

  double mean() const;
  double sample(Rng& rng) const;

  // Distribution parameters in a fixed per-family order:
  //   Normal: (mu, sigma); Uniform: (a, b); BoundedPareto: (L, H, alpha).
  Eigen::VectorXd params() const;
  // d quantile(p) / d params. Throws EmpiricalNotDifferentiable.
  Eigen::VectorXd quantile_param_grad(double p) const;

  const Normal* as_normal() const { return std::get_if<Normal>(&family_); }
  const Uniform* as_uniform() const { return std::get_if<Uniform>(&family_); }
  const BoundedPareto* as_bounded_pareto() const {
    return std::get_if<BoundedPareto>(&family_);
  }
  const Empirical* as_empirical() const { return std::get_if<Empirical>(&family_); }

 private:
  explicit DemandDistribution(std::variant<Normal, Uniform, BoundedPareto, Empirical> f)
      : family_(std::move(f)) {}
  std::variant<Normal, Uniform, BoundedPareto, Empirical> family_;
};

// Expected mismatch cost gamma1 E(d - g)+ + gamma2 E(g - d)+.
// Closed forms for Normal and Uniform, adaptive quadrature for BoundedPareto,
// sample average for Empirical.
double risk(const DemandDistribution& d, double g, const Penalties& pen);

// (gamma1 + gamma2) cdf(g) - gamma1: derivative of the risk in g.
double risk_deriv(const DemandDistribution& d, double g, const Penalties& pen);

}  // namespace edlab::dist
