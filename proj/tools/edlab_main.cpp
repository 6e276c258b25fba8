#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edlab/errors.hpp"
#include "edlab/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool plot_csv = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t s) { args.seed = s; },
      "override the training/data seed");
  cmd->add_option_function<std::string>(
      "--out", [&args](const std::string& d) { args.out_dir = d; },
      "override the output directory");
  cmd->add_flag("--plot-csv", args.plot_csv, "also emit per-period CSV series");
}

edlab::cli::RunOptions to_options(const CommonArgs& args) {
  edlab::cli::RunOptions opts;
  opts.seed = args.seed;
  opts.out_dir = args.out_dir;
  opts.plot_csv = args.plot_csv;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Economic dispatch lab: cost curves, stochastic dispatch, and "
               "decision-focused load predictors"};
  app.require_subcommand(1);

  // curve
  auto* curve_cmd = app.add_subcommand("curve", "dump the dispatch cost curve as CSV");
  std::string curve_network;
  std::vector<double> curve_demand;
  std::string curve_out;
  curve_cmd->add_option("--network", curve_network, "network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  curve_cmd
      ->add_option("--demand", curve_demand,
                   "nodal demand MW (one value per load site, or a single total)")
      ->required()
      ->delimiter(',');
  curve_cmd->add_option("--out", curve_out, "write CSV here instead of stdout");

  // dispatch
  auto* dispatch_cmd =
      app.add_subcommand("dispatch", "optimal stochastic dispatch as JSON");
  std::string dispatch_network, dispatch_dist;
  double gamma1 = 100.0, gamma2 = 10.0;
  std::optional<double> dispatch_curve_demand;
  dispatch_cmd->add_option("--network", dispatch_network, "network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  dispatch_cmd
      ->add_option("--dist", dispatch_dist,
                   R"(distribution JSON, e.g. {"family":"normal","mu":1,"sigma":0.1})")
      ->required();
  dispatch_cmd->add_option("--gamma1", gamma1, "shortage penalty $/MWh");
  dispatch_cmd->add_option("--gamma2", gamma2, "excess penalty $/MWh");
  dispatch_cmd->add_option_function<double>(
      "--curve-demand",
      [&dispatch_curve_demand](double v) { dispatch_curve_demand = v; },
      "total demand MW for the line constraints (default: distribution mean)");

  // train / eval / bench
  CommonArgs train_args, eval_args, bench_args;
  auto* train_cmd =
      app.add_subcommand("train", "train the configured frameworks, save models");
  add_common(train_cmd, train_args);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on the test split");
  add_common(eval_cmd, eval_args);
  std::string eval_model;
  eval_cmd->add_option("--model", eval_model, "model JSON written by train")
      ->required()
      ->check(CLI::ExistingFile);
  auto* bench_cmd = app.add_subcommand(
      "bench", "train and compare all configured frameworks on one split");
  add_common(bench_cmd, bench_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (curve_cmd->parsed()) {
      if (curve_out.empty())
        return edlab::cli::run_curve_command(curve_network, curve_demand, std::cout,
                                             std::cerr);
      std::ofstream out(curve_out);
      if (!out) {
        std::cerr << "cannot open " << curve_out << "\n";
        return 1;
      }
      return edlab::cli::run_curve_command(curve_network, curve_demand, out,
                                           std::cerr);
    }
    if (dispatch_cmd->parsed()) {
      std::cout << edlab::cli::run_dispatch_command(
                       dispatch_network, dispatch_dist,
                       edlab::dist::Penalties{gamma1, gamma2},
                       dispatch_curve_demand)
                << "\n";
      return 0;
    }
    if (train_cmd->parsed()) {
      edlab::cli::run_train(edlab::cli::load_config(train_args.config_path),
                            to_options(train_args));
      return 0;
    }
    if (eval_cmd->parsed()) {
      edlab::cli::run_eval(edlab::cli::load_config(eval_args.config_path), eval_model,
                           to_options(eval_args));
      return 0;
    }
    if (bench_cmd->parsed()) {
      edlab::cli::run_bench(edlab::cli::load_config(bench_args.config_path),
                            to_options(bench_args));
      return 0;
    }
  } catch (const edlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const edlab::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
