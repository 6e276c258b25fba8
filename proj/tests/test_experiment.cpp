#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edlab/errors.hpp"
#include "edlab/experiment.hpp"

using namespace edlab;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = EDLAB_DATA_DIR;

std::string tiny_config_json(const std::string& extra = "") {
  // 6 synthetic days, 3/1/2 split, quick training.
  return std::string(R"({
    "network": ")") +
         kDataDir + R"(/networks/fourbus.json",
    "data": {"synth": {
      "family": {"family": "bounded_pareto", "lower": 1.0, "upper": 6.0, "alpha": 1.3},
      "hours": 144, "seed": 5,
      "diurnal": {"base": 1.9, "amplitude": 0.4, "phase_hours": 9.0},
      "noise_scale": 0.08, "hetero": 0.6}},
    "penalties": {"gamma1": 100.0, "gamma2": 10.0},
    "frameworks": ["oracle", "mse", "model_free"],
    "split": {"train_days": 3, "val_days": 1, "test_days": 2},
    "train": {"learning_rate": 0.01, "batch_size": 16, "max_epochs": 5,
              "patience": 3, "seed": 1, "hidden": [8, 8]},
    "curve_mode": "fixed-mean",
    "enforce_paper_regime": true,
    "out_dir": "OUTDIR")" +
         extra + "\n}";
}

}  // namespace

TEST_CASE("config parsing and validation") {
  SUBCASE("valid config round trips the fields") {
    const auto cfg = cli::config_from_json_text(tiny_config_json(), "");
    CHECK(cfg.frameworks.size() == 3);
    CHECK(cfg.penalties.gamma1 == 100.0);
    CHECK(cfg.split.train_days == 3);
    CHECK(cfg.train.hidden == std::vector<int>{8, 8});
    CHECK(cfg.curve_mode == learn::CurveMode::FixedMean);
  }
  SUBCASE("missing data source is an actionable error") {
    std::string bad = tiny_config_json();
    const auto pos = bad.find("\"data\"");
    bad.replace(pos, 6, "\"nope\"");
    CHECK_THROWS_AS(cli::config_from_json_text(bad, ""), ConfigError);
  }
  SUBCASE("paper regime rejects gamma1 below the top marginal cost") {
    std::string bad = tiny_config_json();
    const auto pos = bad.find("\"gamma1\": 100.0");
    bad.replace(pos, 15, "\"gamma1\": 55.0");
    CHECK_THROWS_AS(cli::run_bench(cli::config_from_json_text(bad, ""),
                                   {.write_outputs = false}),
                    ConfigError);
  }
  SUBCASE("nonexistent network file") {
    std::string bad = tiny_config_json();
    const auto pos = bad.find("fourbus.json");
    bad.replace(pos, 12, "missing.json");
    CHECK_THROWS_AS(cli::config_from_json_text(bad, ""), ConfigError);
  }
}

TEST_CASE("bench writes a self-consistent, reloadable report") {
  const fs::path out = fs::temp_directory_path() / "edlab_test_bench";
  fs::remove_all(out);
  auto cfg = cli::config_from_json_text(tiny_config_json(), "");
  cfg.out_dir = out.string();

  cli::RunOptions opts;
  opts.plot_csv = true;
  const auto report = cli::run_bench(cfg, opts);

  REQUIRE(report.frameworks.size() == 3);
  CHECK(report.frameworks[0].name == "oracle");
  // Oracle dispatch pays no regret on in-domain demand.
  CHECK(report.frameworks[0].metrics.cost_loss == doctest::Approx(0.0));

  // Per-period sample counts add up to the test size.
  for (const auto& f : report.frameworks) {
    int n = 0;
    for (const auto& p : f.metrics.periods) n += p.count;
    CHECK(n == f.metrics.count);
    CHECK(f.metrics.count == 2 * 24);
    // Period means recombine into the overall mean.
    double acc = 0.0;
    for (const auto& p : f.metrics.periods) acc += p.cost_loss * p.count;
    CHECK(acc / f.metrics.count == doctest::Approx(f.metrics.cost_loss).epsilon(1e-9));
  }

  SUBCASE("report JSON round trips through its own reader") {
    std::ifstream in(out / "report.json");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto loaded = cli::report_from_json_text(ss.str());
    CHECK(loaded.content_hash == report.content_hash);
    CHECK(cli::report_to_json_text(loaded) == cli::report_to_json_text(report));
    CHECK(loaded.frameworks.size() == report.frameworks.size());
    CHECK(loaded.frameworks[1].metrics.cost_loss ==
          report.frameworks[1].metrics.cost_loss);
  }
  SUBCASE("csv side files exist") {
    CHECK(fs::exists(out / "report.csv"));
    CHECK(fs::exists(out / "periods.csv"));
  }
  fs::remove_all(out);
}

TEST_CASE("same seed reproduces the report bit for bit; new seed changes it") {
  auto cfg = cli::config_from_json_text(tiny_config_json(), "");
  cli::RunOptions opts;
  opts.write_outputs = false;

  const auto a = cli::run_bench(cfg, opts);
  const auto b = cli::run_bench(cfg, opts);
  CHECK(a.content_hash == b.content_hash);
  CHECK(cli::compute_content_hash(a) == cli::compute_content_hash(b));
  // Timings may differ but the deterministic payload must not.
  auto strip = [](cli::ExperimentReport r) {
    for (auto& f : r.frameworks) f.timing = {};
    return cli::report_to_json_text(r);
  };
  CHECK(strip(a) == strip(b));

  opts.seed = 2;
  const auto c = cli::run_bench(cfg, opts);
  CHECK(c.content_hash != a.content_hash);
}

TEST_CASE("train writes model files that eval can reuse") {
  const fs::path out = fs::temp_directory_path() / "edlab_test_train";
  fs::remove_all(out);
  auto cfg = cli::config_from_json_text(tiny_config_json(), "");
  cfg.out_dir = out.string();
  cfg.frameworks = {learn::Framework::ModelFree};

  const auto trained = cli::run_train(cfg, {});
  const fs::path model = out / "model_model_free.json";
  REQUIRE(fs::exists(model));

  cli::RunOptions opts;
  opts.write_outputs = false;
  const auto evaled = cli::run_eval(cfg, model.string(), opts);
  REQUIRE(evaled.frameworks.size() == 1);
  CHECK(evaled.frameworks[0].metrics.cost_loss ==
        doctest::Approx(trained.frameworks[0].metrics.cost_loss).epsilon(1e-12));
  fs::remove_all(out);
}

TEST_CASE("robustness sweep reports ratios per true family") {
  auto cfg = cli::config_from_json_text(tiny_config_json(), "");
  cfg.frameworks.clear();
  cli::RobustnessSpec rs;
  rs.hypothesis = dist::Family::Normal;
  rs.true_families = {dist::DemandDistribution::normal(2.0, 1.0),
                      dist::DemandDistribution::bounded_pareto(1.0, 6.0, 1.3)};
  cfg.robustness = rs;

  cli::RunOptions opts;
  opts.write_outputs = false;
  const auto report = cli::run_bench(cfg, opts);
  REQUIRE(report.robustness.size() == 2);
  CHECK(report.robustness[0].true_family == "normal");
  CHECK(report.robustness[1].true_family == "bounded_pareto");
  for (const auto& rr : report.robustness) {
    CHECK(rr.hypothesis == "normal");
    CHECK(rr.cost_ratio > 0.0);
    CHECK(rr.mse_ratio > 0.0);
  }
}

TEST_CASE("curve command emits CSV and flags infeasibility with exit 2") {
  std::ostringstream out, err;
  SUBCASE("four-bus breakpoints") {
    const int rc = cli::run_curve_command(kDataDir + "/networks/fourbus.json",
                                          {2.0}, out, err);
    CHECK(rc == 0);
    const std::string text = out.str();
    CHECK(text.find("g,cost,slope,profile_0,profile_1,profile_2") == 0);
    int rows = 0;
    for (char ch : text)
      if (ch == '\n') ++rows;
    CHECK(rows == 4);  // header + three breakpoints
  }
  SUBCASE("infeasible demand") {
    // Load far from the slack: a 100 MW withdrawal cannot cross the 1.5 MW
    // line no matter the dispatch.
    const fs::path tmp = fs::temp_directory_path() / "edlab_twobus.json";
    {
      std::ofstream f(tmp);
      f << R"({"slack_bus":1,"buses":[{"id":0},{"id":1}],
              "lines":[{"from":0,"to":1,"reactance_pu":1.0,"capacity_mw":1.5}],
              "generators":[{"bus":0,"marginal_cost":40.0,"capacity_mw":5.0}],
              "loads":[{"bus":0,"weight":1.0}]})";
    }
    const int rc = cli::run_curve_command(tmp.string(), {100.0}, out, err);
    CHECK(rc == 2);
    CHECK(err.str().find("infeasible") != std::string::npos);
    fs::remove(tmp);
  }
}

TEST_CASE("dispatch command round trips distribution JSON") {
  const std::string result = cli::run_dispatch_command(
      kDataDir + "/networks/fourbus.json",
      R"({"family":"normal","mu":1.0,"sigma":0.1})", dist::Penalties{100.0, 10.0},
      std::nullopt);
  CHECK(result.find("\"g_total\"") != std::string::npos);
  CHECK(result.find("1.0114") != std::string::npos);

  const auto d = cli::dist_from_json_text(cli::dist_to_json_text(
      dist::DemandDistribution::bounded_pareto(1.0, 4.0, 1.0)));
  CHECK(d.cdf(2.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("39-bus network file loads and matches the documented shape") {
  const auto net = grid::load_network(kDataDir + "/networks/ieee39.json");
  CHECK(net.n_bus() == 39);
  CHECK(net.n_line() == 46);
  CHECK(net.n_gen() == 10);
  CHECK(net.slack_bus() == 30);
  double total_cap = 0.0;
  for (const auto& g : net.generators()) total_cap += g.capacity_mw;
  CHECK(total_cap == doctest::Approx(7367.0));
  CHECK(net.generators().front().marginal_cost == doctest::Approx(30.0));
  CHECK(net.generators().back().marginal_cost == doctest::Approx(48.0));
}
