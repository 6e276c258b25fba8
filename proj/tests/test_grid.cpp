#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "edlab/errors.hpp"
#include "edlab/grid.hpp"
#include "edlab/rng.hpp"
#include "support/oracles.hpp"

using namespace edlab;

namespace {

grid::Network two_bus() {
  return grid::build_network({{0, false}, {1, true}}, {{0, 1, 1.0, 1.0}},
                             {{0, 40.0, 2.0}}, {{1, 1.0}});
}

}  // namespace

TEST_CASE("two-bus single path: injection at non-slack flows fully") {
  const grid::Network net = two_bus();
  CHECK(net.Hg()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(net.Hd()(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("generator and load at the same bus share a PTDF column") {
  grid::Network net = grid::build_network(
      {{0, true}, {1, false}, {2, false}},
      {{0, 1, 0.7, 1.0}, {1, 2, 1.3, 1.0}, {2, 0, 0.9, 1.0}},
      {{2, 55.0, 1.0}}, {{2, 1.0}});
  CHECK((net.Hg().col(0) - net.Hd().col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("four-bus ring splits injection 0.75 / 0.25") {
  const grid::Network net = oracles::four_bus();
  // Injection at bus 0 withdrawn at the slack (bus 3): 0.75 on the direct
  // line 3-0, 0.25 along 0-1-2-3.
  const Eigen::VectorXd col = net.bus_ptdf().col(0);
  CHECK(col[0] == doctest::Approx(0.25).epsilon(1e-9));   // line 0-1
  CHECK(col[1] == doctest::Approx(0.25).epsilon(1e-9));   // line 1-2
  CHECK(col[2] == doctest::Approx(0.25).epsilon(1e-9));   // line 2-3
  CHECK(col[3] == doctest::Approx(-0.75).epsilon(1e-9));  // line 3-0

  // Same via a dense solve of the reduced susceptance system.
  Eigen::Matrix3d bred;
  bred << 2, -1, 0, -1, 2, -1, 0, -1, 2;  // buses 0,1,2 with slack 3 removed
  Eigen::Vector3d inj(1, 0, 0);
  const Eigen::Vector3d theta = bred.fullPivLu().solve(inj);
  CHECK(theta[0] - theta[1] == doctest::Approx(col[0]).epsilon(1e-12));
}

TEST_CASE("line_flow matches Hg g - Hd d") {
  const grid::Network net = oracles::four_bus();
  SUBCASE("zero injections give zero flow") {
    const Eigen::VectorXd f =
        grid::line_flow(net, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1));
    CHECK(f.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two-bus full transfer") {
    const grid::Network tb = two_bus();
    Eigen::VectorXd g(1), d(1);
    g << 1.0;
    d << 1.0;
    CHECK(grid::line_flow(tb, g, d)[0] == doctest::Approx(1.0));
  }
  SUBCASE("ring PTDF flows for g at buses 0-2, demand at bus 3") {
    Eigen::VectorXd g(3), d(1);
    g << 1.0, 0.0, 0.0;
    d << 1.0;
    const Eigen::VectorXd f = grid::line_flow(net, g, d);
    CHECK(f[3] == doctest::Approx(-0.75).epsilon(1e-9));
    CHECK(f[0] == doctest::Approx(0.25).epsilon(1e-9));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(
        grid::line_flow(net, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)),
        DimensionMismatch);
  }
}

TEST_CASE("construction errors") {
  using namespace grid;
  CHECK_THROWS_AS(build_network({{0, false}, {1, false}}, {{0, 1, 1.0, 1.0}},
                                {{0, 40.0, 1.0}}, {{1, 1.0}}),
                  NoSlack);
  CHECK_THROWS_AS(build_network({{0, true}, {1, true}}, {{0, 1, 1.0, 1.0}},
                                {{0, 40.0, 1.0}}, {{1, 1.0}}),
                  MultipleSlack);
  CHECK_THROWS_AS(build_network({{0, true}, {1, false}}, {{0, 1, 0.0, 1.0}},
                                {{0, 40.0, 1.0}}, {{1, 1.0}}),
                  SingularSusceptance);
  CHECK_THROWS_AS(build_network({{0, true}, {1, false}, {2, false}},
                                {{0, 1, 1.0, 1.0}}, {{0, 40.0, 1.0}}, {{1, 1.0}}),
                  DisconnectedNetwork);
  CHECK_THROWS_AS(build_network({{0, true}, {1, false}}, {{0, 1, 1.0, 1.0}},
                                {{0, 40.0, 1.0}}, {{1, 0.5}}),
                  InvalidParams);  // weights must sum to 1
}

TEST_CASE("PTDF antisymmetry: swapping injection and withdrawal flips signs") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracles::random_network(rng);
    const auto& ptdf = inst.net.bus_ptdf();
    for (int a = 0; a < inst.net.n_bus(); ++a) {
      for (int b = 0; b < inst.net.n_bus(); ++b) {
        const Eigen::VectorXd ab = ptdf.col(a) - ptdf.col(b);
        const Eigen::VectorXd ba = ptdf.col(b) - ptdf.col(a);
        CHECK((ab + ba).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
    // Connected network: every PTDF entry lies in [-1, 1].
    CHECK(ptdf.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("flow conservation reconstructed from incidence") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracles::random_network(rng);
    const int n = inst.net.n_bus();
    Eigen::VectorXd inj(n);
    for (int i = 0; i < n; ++i) inj[i] = rng.uniform(-1.0, 1.0);
    inj.array() -= inj.mean();  // balanced injection

    const Eigen::VectorXd flow = inst.net.bus_ptdf() * inj;
    Eigen::VectorXd node_balance = Eigen::VectorXd::Zero(n);
    for (int l = 0; l < inst.net.n_line(); ++l) {
      node_balance[inst.net.lines()[l].from_bus] += flow[l];
      node_balance[inst.net.lines()[l].to_bus] -= flow[l];
    }
    CHECK((node_balance - inj).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("slack choice does not affect balanced-pair flows") {
  using namespace grid;
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = oracles::random_network(rng);
    const int n = inst.net.n_bus();

    std::vector<Bus> buses = inst.net.buses();
    for (auto& b : buses) b.is_slack = false;
    int other = 0;
    while (other < n - 1 && other == inst.net.slack_bus()) ++other;
    buses[other].is_slack = true;
    Network moved = build_network(buses, inst.net.lines(), inst.net.generators(),
                                  inst.net.loads());

    // Balanced pair: total generation equals total demand.
    Eigen::VectorXd g(inst.net.n_gen());
    double gsum = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      g[i] = rng.uniform(0.0, 1.0);
      gsum += g[i];
    }
    const Eigen::VectorXd d = inst.net.load_weights() * gsum;
    const Eigen::VectorXd f0 = line_flow(inst.net, g, d);
    const Eigen::VectorXd f1 = line_flow(moved, g, d);
    CHECK((f0 - f1).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("network JSON round trip via the shipped four-bus file") {
  const grid::Network net =
      grid::load_network(std::string(EDLAB_DATA_DIR) + "/networks/fourbus.json");
  CHECK(net.n_bus() == 4);
  CHECK(net.n_line() == 4);
  CHECK(net.n_gen() == 3);
  CHECK(net.slack_bus() == 3);
  const grid::Network ref = oracles::four_bus();
  CHECK((net.Hg() - ref.Hg()).cwiseAbs().maxCoeff() < 1e-15);
}
