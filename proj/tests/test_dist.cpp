#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "edlab/dist.hpp"
#include "edlab/errors.hpp"
#include "edlab/math.hpp"
#include "edlab/rng.hpp"
#include "support/oracles.hpp"

using namespace edlab;
using dist::DemandDistribution;
using dist::Penalties;

TEST_CASE("normal cdf and quantile basics") {
  const auto n = DemandDistribution::normal(0.0, 1.0);
  CHECK(n.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(n.quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK_THROWS_AS(n.quantile(1.5), InvalidProbability);
}

TEST_CASE("uniform quantile is linear") {
  const auto u = DemandDistribution::uniform(0.0, 2.0);
  CHECK(u.quantile(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(u.cdf(0.5) == doctest::Approx(0.25));
  CHECK(u.pdf(1.0) == doctest::Approx(0.5));
  CHECK(u.pdf(3.0) == 0.0);
}

TEST_CASE("bounded pareto cdf closed form and Monte Carlo cross-check") {
  const auto bp = DemandDistribution::bounded_pareto(1.0, 4.0, 1.0);
  CHECK(bp.cdf(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  Rng rng(42);
  int below = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i)
    if (bp.sample(rng) <= 2.0) ++below;
  CHECK(static_cast<double>(below) / n == doctest::Approx(2.0 / 3.0).epsilon(3e-3));
}

TEST_CASE("quantile(cdf(x)) round trip on the support interior") {
  Rng rng(5);
  const auto families = {
      DemandDistribution::normal(1.2, 0.3),
      DemandDistribution::uniform(0.5, 2.5),
      DemandDistribution::bounded_pareto(0.8, 5.0, 1.7),
  };
  for (const auto& d : families) {
    for (int i = 0; i < 50; ++i) {
      const double x = d.quantile(rng.uniform(0.01, 0.99));
      CHECK(d.quantile(d.cdf(x)) == doctest::Approx(x).epsilon(1e-8));
    }
  }
  SUBCASE("empirical round trip holds at the sample points") {
    std::vector<double> samples;
    for (int i = 0; i < 37; ++i) samples.push_back(rng.uniform(0.0, 3.0));
    const auto e = DemandDistribution::empirical(samples);
    for (double x : e.as_empirical()->sorted_samples)
      CHECK(e.quantile(e.cdf(x)) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("cdf limits and monotonicity") {
  Rng rng(6);
  const auto families = {
      DemandDistribution::normal(0.0, 1.0),
      DemandDistribution::uniform(-1.0, 1.0),
      DemandDistribution::bounded_pareto(1.0, 6.0, 1.3),
      DemandDistribution::empirical({0.3, 0.9, 1.4, 2.2}),
  };
  for (const auto& d : families) {
    CHECK(d.cdf(-1e9) == 0.0);
    CHECK(d.cdf(1e9) == 1.0);
    double prev = -1.0;
    for (int i = -40; i <= 40; ++i) {
      const double c = d.cdf(0.1 * i);
      CHECK(c >= prev - 1e-15);
      prev = c;
    }
  }
}

TEST_CASE("risk values") {
  const Penalties even{1.0, 1.0};
  SUBCASE("degenerate empirical at the dispatch point") {
    const auto e = DemandDistribution::empirical({1.0});
    CHECK(dist::risk(e, 1.0, even) == 0.0);
  }
  SUBCASE("half-normal mean") {
    const auto n = DemandDistribution::normal(0.0, 1.0);
    CHECK(dist::risk(n, 0.0, even) ==
          doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  }
  SUBCASE("uniform one-sided") {
    const auto u = DemandDistribution::uniform(0.0, 2.0);
    CHECK(dist::risk(u, 0.0, Penalties{1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(dist::risk(u, 2.0, Penalties{0.0, 1.0}) == doctest::Approx(1.0));
  }
  SUBCASE("closed forms match an independent quadrature") {
    const Penalties pen{100.0, 10.0};
    const auto n = DemandDistribution::normal(1.0, 0.25);
    const auto u = DemandDistribution::uniform(0.4, 1.8);
    const auto bp = DemandDistribution::bounded_pareto(0.5, 3.0, 1.4);
    for (const auto& d : {n, u, bp}) {
      for (double g : {0.2, 0.9, 1.4, 2.6}) {
        const double lo = d.quantile(0.0) < -1e18 ? -10.0 : d.quantile(0.0);
        const double hi = d.quantile(1.0) > 1e18 ? 12.0 : d.quantile(1.0);
        const auto integrand = [&](double x) {
          const double short_part = x > g ? pen.gamma1 * (x - g) : 0.0;
          const double excess_part = x < g ? pen.gamma2 * (g - x) : 0.0;
          return (short_part + excess_part) * d.pdf(x);
        };
        const double ref = oracles::composite_simpson(integrand, lo, hi, 20000);
        CHECK(dist::risk(d, g, pen) ==
              doctest::Approx(ref).epsilon(1e-6).scale(std::max(1.0, ref)));
      }
    }
  }
}

TEST_CASE("risk_deriv closed form and finite differences") {
  const Penalties pen{100.0, 10.0};
  const auto n = DemandDistribution::normal(1.0, 0.1);
  SUBCASE("saturated tails") {
    CHECK(dist::risk_deriv(n, -50.0, pen) == doctest::Approx(-pen.gamma1));
    CHECK(dist::risk_deriv(n, 50.0, pen) == doctest::Approx(pen.gamma2));
  }
  SUBCASE("symmetric point arithmetic") {
    CHECK(dist::risk_deriv(n, 1.0, pen) == doctest::Approx(-45.0).epsilon(1e-12));
  }
  SUBCASE("matches central differences of risk on interior points") {
    Rng rng(17);
    const auto families = {
        DemandDistribution::normal(1.0, 0.3),
        DemandDistribution::uniform(0.2, 2.2),
        DemandDistribution::bounded_pareto(0.6, 4.0, 1.5),
    };
    for (const auto& d : families) {
      for (int i = 0; i < 50; ++i) {
        const double g = d.quantile(rng.uniform(0.05, 0.95));
        const double h = 1e-6;
        const double fd = (dist::risk(d, g + h, pen) - dist::risk(d, g - h, pen)) /
                          (2.0 * h);
        CHECK(dist::risk_deriv(d, g, pen) ==
              doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("risk is convex in g") {
  const Penalties pen{100.0, 10.0};
  Rng rng(23);
  const auto families = {
      DemandDistribution::normal(1.0, 0.2),
      DemandDistribution::uniform(0.0, 2.0),
      DemandDistribution::bounded_pareto(1.0, 6.0, 1.3),
      DemandDistribution::empirical({0.7, 0.9, 1.2, 1.8, 2.4}),
  };
  for (const auto& d : families) {
    for (int i = 0; i < 40; ++i) {
      const double g = rng.uniform(0.0, 3.0);
      const double h = 1e-3;
      const double second = dist::risk(d, g + h, pen) - 2.0 * dist::risk(d, g, pen) +
                            dist::risk(d, g - h, pen);
      CHECK(second >= -1e-8);
    }
  }
}

TEST_CASE("quantile parameter gradients match finite differences") {
  const double p = 0.545;
  SUBCASE("normal") {
    const auto d = DemandDistribution::normal(1.0, 0.1);
    const Eigen::VectorXd grad = d.quantile_param_grad(p);
    CHECK(grad[0] == doctest::Approx(1.0));
    CHECK(grad[1] == doctest::Approx(math::normal_quantile(p)).epsilon(1e-12));
  }
  SUBCASE("uniform") {
    const auto d = DemandDistribution::uniform(0.0, 2.0);
    const Eigen::VectorXd grad = d.quantile_param_grad(p);
    CHECK(grad[0] == doctest::Approx(1.0 - p));
    CHECK(grad[1] == doctest::Approx(p));
  }
  SUBCASE("bounded pareto vs finite differences") {
    const double L = 1.0, H = 5.0, alpha = 1.4, h = 1e-6;
    const auto d = DemandDistribution::bounded_pareto(L, H, alpha);
    const Eigen::VectorXd grad = d.quantile_param_grad(p);
    const auto q = [&](double l, double hh, double a) {
      return DemandDistribution::bounded_pareto(l, hh, a).quantile(p);
    };
    CHECK(grad[0] ==
          doctest::Approx((q(L + h, H, alpha) - q(L - h, H, alpha)) / (2 * h))
              .epsilon(1e-5));
    CHECK(grad[1] ==
          doctest::Approx((q(L, H + h, alpha) - q(L, H - h, alpha)) / (2 * h))
              .epsilon(1e-5));
    CHECK(grad[2] ==
          doctest::Approx((q(L, H, alpha + h) - q(L, H, alpha - h)) / (2 * h))
              .epsilon(1e-5));
  }
  SUBCASE("empirical is not differentiable") {
    const auto e = DemandDistribution::empirical({1.0, 2.0});
    CHECK_THROWS_AS(e.quantile_param_grad(0.5), EmpiricalNotDifferentiable);
  }
}

TEST_CASE("normal quantile accuracy against the cdf") {
  // The rational approximation must invert the erfc-based cdf well below the
  // 1e-9 requirement across the usable range.
  for (int i = 1; i < 200; ++i) {
    const double z = -5.0 + 10.0 * i / 200.0;
    const double p = math::normal_cdf(z);
    CHECK(math::normal_quantile(p) == doctest::Approx(z).epsilon(1e-9));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DemandDistribution::normal(0.0, 0.0), InvalidParams);
  CHECK_THROWS_AS(DemandDistribution::uniform(2.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(DemandDistribution::bounded_pareto(-1.0, 2.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(DemandDistribution::bounded_pareto(1.0, 0.5, 1.0), InvalidParams);
  CHECK_THROWS_AS(DemandDistribution::empirical({}), InvalidParams);
}

TEST_CASE("bounded pareto mean against sampling") {
  const auto bp = DemandDistribution::bounded_pareto(1.0, 6.0, 1.3);
  Rng rng(77);
  double acc = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) acc += bp.sample(rng);
  CHECK(bp.mean() == doctest::Approx(acc / n).epsilon(3e-3));
}
