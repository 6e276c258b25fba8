#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edlab/curve.hpp"
#include "edlab/errors.hpp"
#include "edlab/lp.hpp"
#include "edlab/rng.hpp"
#include "support/oracles.hpp"

using namespace edlab;

namespace {

std::vector<grid::Generator> merit_gens() {
  return {{0, 40.0, 1.5}, {0, 50.0, 1.5}, {0, 60.0, 1.5}};
}

grid::Network unconstrained_net(const std::vector<grid::Generator>& gens) {
  return grid::build_network({{0, true}}, {}, gens, {{0, 1.0}});
}

double lp_cost(const grid::Network& net, const Eigen::VectorXd& demand, double g) {
  const lp::LpSolution sol = lp::solve(lp::dispatch_problem(net, demand, g));
  REQUIRE(sol.status == lp::LpStatus::Optimal);
  return sol.objective;
}

}  // namespace

TEST_CASE("merit-order stack: breakpoints, slopes, costs") {
  const curve::CostCurve c = curve::merit_order_curve(merit_gens());
  REQUIRE(c.breakpoints().size() == 4);
  const double gs[4] = {0.0, 1.5, 3.0, 4.5};
  const double costs[4] = {0.0, 60.0, 135.0, 225.0};
  for (int k = 0; k < 4; ++k) {
    CHECK(c.breakpoints()[k].g == doctest::Approx(gs[k]).epsilon(1e-12));
    CHECK(c.breakpoints()[k].cost == doctest::Approx(costs[k]).epsilon(1e-12));
  }
  REQUIRE(c.slopes().size() == 3);
  CHECK(c.slopes()[0] == doctest::Approx(40.0));
  CHECK(c.slopes()[1] == doctest::Approx(50.0));
  CHECK(c.slopes()[2] == doctest::Approx(60.0));
}

TEST_CASE("single generator: one linear segment") {
  const curve::CostCurve c = curve::merit_order_curve({{0, 40.0, 2.0}});
  CHECK(c.slopes().size() == 1);
  CHECK(c.slopes()[0] == doctest::Approx(40.0));
  CHECK(c.g_min() == 0.0);
  CHECK(c.g_max() == doctest::Approx(2.0));
}

TEST_CASE("equal-cost generators merge into one segment") {
  const curve::CostCurve c =
      curve::merit_order_curve({{0, 40.0, 1.0}, {0, 40.0, 2.0}});
  CHECK(c.slopes().size() == 1);
  CHECK(c.g_max() == doctest::Approx(3.0));
  CHECK(c.eval(3.0) == doctest::Approx(120.0));
}

TEST_CASE("eval / deriv / profile on the merit curve") {
  const curve::CostCurve c = curve::merit_order_curve(merit_gens());
  CHECK(c.eval(2.25) == doctest::Approx(97.5).epsilon(1e-12));
  CHECK_THROWS_AS(c.eval(4.6), OutOfDomain);
  CHECK_THROWS_AS(c.eval(-0.1), OutOfDomain);

  // Clamped derivative extension.
  CHECK(c.deriv(c.g_min() - 10.0) == doctest::Approx(40.0));
  CHECK(c.deriv(c.g_max() + 10.0) == doctest::Approx(60.0));
  // Right-slope convention at breakpoints.
  CHECK(c.deriv(1.5) == doctest::Approx(50.0));
  // Interior derivative equals the centered difference of eval.
  const double eps = 1e-6;
  for (double g : {0.7, 2.2, 3.9}) {
    const double fd = (c.eval(g + eps) - c.eval(g - eps)) / (2.0 * eps);
    CHECK(c.deriv(g) == doctest::Approx(fd).epsilon(1e-6));
  }

  SUBCASE("profile interpolation") {
    const Eigen::VectorXd at_bp = c.profile(1.5);
    CHECK(at_bp[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(at_bp[1] == doctest::Approx(0.0).epsilon(1e-12));

    const Eigen::VectorXd mid = c.profile(2.25);
    CHECK(mid[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(mid[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(mid[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(c.profile(5.0), OutOfDomain);
  }
}

TEST_CASE("merit fast path equals the LP-built curve on an unconstrained network") {
  const auto gens = merit_gens();
  const grid::Network net = unconstrained_net(gens);
  const curve::CostCurve fast = curve::merit_order_curve(gens);
  const curve::CostCurve built = curve::build_curve(net, net.nodal_demand(1.0));
  REQUIRE(fast.breakpoints().size() == built.breakpoints().size());
  for (std::size_t k = 0; k < fast.breakpoints().size(); ++k) {
    CHECK(fast.breakpoints()[k].g ==
          doctest::Approx(built.breakpoints()[k].g).epsilon(1e-9));
    CHECK(fast.breakpoints()[k].cost ==
          doctest::Approx(built.breakpoints()[k].cost).epsilon(1e-9));
  }
  for (std::size_t k = 0; k < fast.slopes().size(); ++k)
    CHECK(fast.slopes()[k] == doctest::Approx(built.slopes()[k]).epsilon(1e-9));
}

TEST_CASE("four-bus ring: line limit creates an above-merit segment") {
  const grid::Network net = oracles::four_bus();
  const Eigen::VectorXd demand = net.nodal_demand(2.0);
  curve::BuildStats stats;
  const curve::CostCurve c = curve::build_curve(net, demand, &stats);

  REQUIRE(c.slopes().size() == 2);
  CHECK(c.breakpoints()[1].g == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(c.slopes()[0] == doctest::Approx(40.0).epsilon(1e-7));
  CHECK(c.slopes()[1] == doctest::Approx(70.0).epsilon(1e-7));
  CHECK(c.g_max() == doctest::Approx(3.0).epsilon(1e-9));

  // Whole curve against the LP on a uniform grid.
  for (int i = 0; i <= 200; ++i) {
    const double g = c.g_min() + (c.g_max() - c.g_min()) * i / 200.0;
    const double ref = lp_cost(net, demand, g);
    CHECK(c.eval(g) == doctest::Approx(ref).epsilon(1e-6).scale(std::max(1.0, ref)));
  }

  // Recursion accounting: LP calls bounded by 4 * breakpoints + 2.
  CHECK(stats.lp_calls <= 4 * static_cast<int>(c.breakpoints().size()) + 2);
}

TEST_CASE("random networks: exactness, convexity, profile lemmas") {
  Rng rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = oracles::random_network(rng);
    curve::BuildStats stats;
    const curve::CostCurve c = curve::build_curve(inst.net, inst.demand, &stats);

    // Strictly increasing slopes, continuity at breakpoints.
    for (std::size_t k = 0; k + 1 < c.slopes().size(); ++k)
      CHECK(c.slopes()[k + 1] > c.slopes()[k] + 1e-9);
    for (std::size_t k = 0; k + 1 < c.breakpoints().size(); ++k) {
      const auto& a = c.breakpoints()[k];
      const auto& b = c.breakpoints()[k + 1];
      CHECK(a.cost + c.slopes()[k] * (b.g - a.g) ==
            doctest::Approx(b.cost).epsilon(1e-7).scale(std::max(1.0, b.cost)));
    }

    // Exactness on a 60-point grid (the acceptance suite does 200).
    for (int i = 0; i <= 60; ++i) {
      const double g = c.g_min() + (c.g_max() - c.g_min()) * i / 60.0;
      const double ref = lp_cost(inst.net, inst.demand, g);
      CHECK(c.eval(g) ==
            doctest::Approx(ref).epsilon(1e-6).scale(std::max(1.0, std::abs(ref))));
    }

    // Interpolated profiles feasible and cost-consistent.
    for (int i = 1; i < 10; ++i) {
      const double g = c.g_min() + (c.g_max() - c.g_min()) * i / 10.0;
      const Eigen::VectorXd prof = c.profile(g);
      CHECK(std::abs(prof.sum() - g) < 1e-8 * std::max(1.0, std::abs(g)));
      CHECK(oracles::profile_feasible(inst.net, inst.demand, prof, 1e-8));
      const double direct_cost = inst.net.generator_costs().dot(prof);
      CHECK(direct_cost ==
            doctest::Approx(c.eval(g)).epsilon(1e-8).scale(std::max(1.0, direct_cost)));
    }

    // Convex combinations of stored profiles stay feasible.
    const auto& bps = c.breakpoints();
    for (int rep = 0; rep < 5 && bps.size() >= 2; ++rep) {
      const auto i = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(bps.size()) - 1));
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(bps.size()) - 1));
      const double beta = rng.uniform01();
      const Eigen::VectorXd combo =
          (1.0 - beta) * bps[i].profile + beta * bps[j].profile;
      CHECK(oracles::profile_feasible(inst.net, inst.demand, combo, 1e-8));
    }

    CHECK(stats.lp_calls <= 4 * static_cast<int>(c.breakpoints().size()) + 2);
  }
}

TEST_CASE("infeasible line limits propagate") {
  // Load at bus 0 with slack at bus 1: the withdrawal leaks across the only
  // line, so a large enough demand breaks every dispatch.
  grid::Network net = grid::build_network(
      {{0, false}, {1, true}}, {{0, 1, 1.0, 1.5}}, {{0, 40.0, 5.0}}, {{0, 1.0}});
  CHECK_THROWS_AS(curve::build_curve(net, net.nodal_demand(10.0)), Infeasible);
}
