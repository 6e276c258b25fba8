#include "edlab/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edlab/errors.hpp"
#include "edlab/math.hpp"

namespace edlab::dist {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidProbability("probability must lie in [0,1]");
}

double pareto_denom(const BoundedPareto& bp) {
  return 1.0 - std::pow(bp.lower / bp.upper, bp.alpha);
}

}  // namespace

DemandDistribution DemandDistribution::normal(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw InvalidParams("Normal needs finite mu and sigma > 0");
  return DemandDistribution(Normal{mu, sigma});
}

DemandDistribution DemandDistribution::uniform(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidParams("Uniform needs a < b");
  return DemandDistribution(Uniform{a, b});
}

DemandDistribution DemandDistribution::bounded_pareto(double lower, double upper,
                                                      double alpha) {
  if (!(lower > 0.0) || !(upper > lower) || !(alpha > 0.0))
    throw InvalidParams("BoundedPareto needs 0 < L < H and alpha > 0");
  return DemandDistribution(BoundedPareto{lower, upper, alpha});
}

DemandDistribution DemandDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidParams("Empirical needs at least one sample");
  std::sort(samples.begin(), samples.end());
  return DemandDistribution(Empirical{std::move(samples)});
}

Family DemandDistribution::family() const {
  if (as_normal()) return Family::Normal;
  if (as_uniform()) return Family::Uniform;
  if (as_bounded_pareto()) return Family::BoundedPareto;
  return Family::Empirical;
}

std::string DemandDistribution::family_name() const {
  switch (family()) {
    case Family::Normal: return "normal";
    case Family::Uniform: return "uniform";
    case Family::BoundedPareto: return "bounded_pareto";
    default: return "empirical";
  }
}

double DemandDistribution::pdf(double x) const {
  if (const auto* n = as_normal()) {
    return math::normal_pdf((x - n->mu) / n->sigma) / n->sigma;
  }
  if (const auto* u = as_uniform()) {
    return (x >= u->a && x <= u->b) ? 1.0 / (u->b - u->a) : 0.0;
  }
  if (const auto* bp = as_bounded_pareto()) {
    if (x < bp->lower || x > bp->upper) return 0.0;
    return bp->alpha * std::pow(bp->lower, bp->alpha) *
           std::pow(x, -bp->alpha - 1.0) / pareto_denom(*bp);
  }
  // Point masses carry no density in this representation.
  return 0.0;
}

double DemandDistribution::cdf(double x) const {
  if (const auto* n = as_normal()) {
    return math::normal_cdf((x - n->mu) / n->sigma);
  }
  if (const auto* u = as_uniform()) {
    if (x <= u->a) return 0.0;
    if (x >= u->b) return 1.0;
    return (x - u->a) / (u->b - u->a);
  }
  if (const auto* bp = as_bounded_pareto()) {
    if (x <= bp->lower) return 0.0;
    if (x >= bp->upper) return 1.0;
    return (1.0 - std::pow(bp->lower / x, bp->alpha)) / pareto_denom(*bp);
  }
  const auto& s = as_empirical()->sorted_samples;
  const auto it = std::upper_bound(s.begin(), s.end(), x);
  return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
}

double DemandDistribution::quantile(double p) const {
  check_p(p);
  if (const auto* n = as_normal()) {
    return n->mu + n->sigma * math::normal_quantile(p);
  }
  if (const auto* u = as_uniform()) {
    return u->a + p * (u->b - u->a);
  }
  if (const auto* bp = as_bounded_pareto()) {
    return bp->lower * std::pow(1.0 - p * pareto_denom(*bp), -1.0 / bp->alpha);
  }
  const auto& s = as_empirical()->sorted_samples;
  const auto n = static_cast<double>(s.size());
  const double h = p * n - 1.0;
  if (h <= 0.0) return s.front();
  if (h >= n - 1.0) return s.back();
  const auto i = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(i);
  return s[i] + frac * (s[i + 1] - s[i]);
}

double DemandDistribution::mean() const {
  if (const auto* n = as_normal()) return n->mu;
  if (const auto* u = as_uniform()) return 0.5 * (u->a + u->b);
  if (const auto* bp = as_bounded_pareto()) {
    const double la = std::pow(bp->lower, bp->alpha);
    const double denom = pareto_denom(*bp);
    if (std::abs(bp->alpha - 1.0) < 1e-12) {
      return bp->lower / denom * std::log(bp->upper / bp->lower);
    }
    return bp->alpha * la / (denom * (1.0 - bp->alpha)) *
           (std::pow(bp->upper, 1.0 - bp->alpha) -
            std::pow(bp->lower, 1.0 - bp->alpha));
  }
  const auto& s = as_empirical()->sorted_samples;
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double DemandDistribution::sample(Rng& rng) const {
  if (const auto* e = as_empirical()) {
    return e->sorted_samples[rng.below(e->sorted_samples.size())];
  }
  return quantile(rng.uniform01());
}

Eigen::VectorXd DemandDistribution::params() const {
  if (const auto* n = as_normal()) return Eigen::Vector2d(n->mu, n->sigma);
  if (const auto* u = as_uniform()) return Eigen::Vector2d(u->a, u->b);
  if (const auto* bp = as_bounded_pareto())
    return Eigen::Vector3d(bp->lower, bp->upper, bp->alpha);
  throw EmpiricalNotDifferentiable("empirical family has no parameter vector");
}

Eigen::VectorXd DemandDistribution::quantile_param_grad(double p) const {
  check_p(p);
  if (const auto* n = as_normal()) {
    return Eigen::Vector2d(1.0, math::normal_quantile(p));
  }
  if (const auto* u = as_uniform()) {
    return Eigen::Vector2d(1.0 - p, p);
  }
  if (const auto* bp = as_bounded_pareto()) {
    const double L = bp->lower, H = bp->upper, alpha = bp->alpha;
    const double r = std::pow(L / H, alpha);
    const double u_val = 1.0 - p * (1.0 - r);
    const double q_over_l = std::pow(u_val, -1.0 / alpha);
    const double du_dl = p * alpha * r / L;
    const double du_dh = -p * alpha * r / H;
    const double du_da = p * r * std::log(L / H);
    const double common = -L / alpha * std::pow(u_val, -1.0 / alpha - 1.0);
    Eigen::Vector3d grad;
    grad[0] = q_over_l + common * du_dl;
    grad[1] = common * du_dh;
    grad[2] = L * q_over_l * std::log(u_val) / (alpha * alpha) + common * du_da;
    return grad;
  }
  throw EmpiricalNotDifferentiable("empirical quantile is not differentiable");
}

double risk(const DemandDistribution& d, double g, const Penalties& pen) {
  if (const auto* n = d.as_normal()) {
    const double z = (g - n->mu) / n->sigma;
    const double phi = math::normal_pdf(z);
    const double cdf = math::normal_cdf(z);
    const double shortage = n->sigma * (phi - z * (1.0 - cdf));
    const double excess = n->sigma * (phi + z * cdf);
    return pen.gamma1 * shortage + pen.gamma2 * excess;
  }
  if (const auto* u = d.as_uniform()) {
    const double width = u->b - u->a;
    double shortage, excess;
    if (g <= u->a) {
      shortage = 0.5 * (u->a + u->b) - g;
      excess = 0.0;
    } else if (g >= u->b) {
      shortage = 0.0;
      excess = g - 0.5 * (u->a + u->b);
    } else {
      shortage = (u->b - g) * (u->b - g) / (2.0 * width);
      excess = (g - u->a) * (g - u->a) / (2.0 * width);
    }
    return pen.gamma1 * shortage + pen.gamma2 * excess;
  }
  if (const auto* bp = d.as_bounded_pareto()) {
    const double tol = 1e-9 * std::max(1.0, bp->upper - bp->lower);
    double shortage = 0.0;
    if (g < bp->upper) {
      const double lo = std::max(g, bp->lower);
      shortage = math::adaptive_simpson(
          [&](double x) { return (x - g) * d.pdf(x); }, lo, bp->upper, tol);
    }
    double excess = 0.0;
    if (g > bp->lower) {
      const double hi = std::min(g, bp->upper);
      excess = math::adaptive_simpson(
          [&](double x) { return (g - x) * d.pdf(x); }, bp->lower, hi, tol);
    }
    return pen.gamma1 * shortage + pen.gamma2 * excess;
  }
  const auto& s = d.as_empirical()->sorted_samples;
  double acc = 0.0;
  for (double x : s) {
    acc += x > g ? pen.gamma1 * (x - g) : pen.gamma2 * (g - x);
  }
  return acc / static_cast<double>(s.size());
}

double risk_deriv(const DemandDistribution& d, double g, const Penalties& pen) {
  return (pen.gamma1 + pen.gamma2) * d.cdf(g) - pen.gamma1;
}

}  // namespace edlab::dist
