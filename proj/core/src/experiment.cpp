#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edlab/errors.hpp"
#include "edlab/experiment.hpp"

namespace edlab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

dist::Family family_from_string(const std::string& name) {
  if (name == "normal") return dist::Family::Normal;
  if (name == "uniform") return dist::Family::Uniform;
  if (name == "bounded_pareto") return dist::Family::BoundedPareto;
  if (name == "empirical") return dist::Family::Empirical;
  throw ConfigError("unknown family '" + name +
                    "' (expected normal|uniform|bounded_pareto|empirical)");
}

dist::DemandDistribution dist_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "normal")
    return dist::DemandDistribution::normal(j.at("mu").get<double>(),
                                            j.at("sigma").get<double>());
  if (family == "uniform")
    return dist::DemandDistribution::uniform(j.at("a").get<double>(),
                                             j.at("b").get<double>());
  if (family == "bounded_pareto")
    return dist::DemandDistribution::bounded_pareto(j.at("lower").get<double>(),
                                                    j.at("upper").get<double>(),
                                                    j.at("alpha").get<double>());
  if (family == "empirical")
    return dist::DemandDistribution::empirical(
        j.at("samples").get<std::vector<double>>());
  throw ConfigError("unknown distribution family: " + family);
}

json dist_to_json(const dist::DemandDistribution& d) {
  if (const auto* n = d.as_normal())
    return {{"family", "normal"}, {"mu", n->mu}, {"sigma", n->sigma}};
  if (const auto* u = d.as_uniform())
    return {{"family", "uniform"}, {"a", u->a}, {"b", u->b}};
  if (const auto* bp = d.as_bounded_pareto())
    return {{"family", "bounded_pareto"},
            {"lower", bp->lower},
            {"upper", bp->upper},
            {"alpha", bp->alpha}};
  return {{"family", "empirical"}, {"samples", d.as_empirical()->sorted_samples}};
}

data::SynthSpec synth_from_json(const json& j) {
  data::SynthSpec s;
  s.family = dist_from_json(j.at("family"));
  s.hours = j.at("hours").get<int>();
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("start")) s.start = data::parse_iso8601(j["start"].get<std::string>());
  if (j.contains("diurnal")) {
    data::Diurnal d;
    d.base = j["diurnal"].at("base").get<double>();
    d.amplitude = j["diurnal"].at("amplitude").get<double>();
    d.phase_hours = j["diurnal"].value("phase_hours", 0.0);
    s.diurnal = d;
  }
  s.noise_scale = j.value("noise_scale", 1.0);
  s.hetero = j.value("hetero", 0.0);
  s.weekend_scale = j.value("weekend_scale", 1.0);
  return s;
}

json synth_to_json(const data::SynthSpec& s) {
  json j;
  j["family"] = dist_to_json(s.family);
  j["hours"] = s.hours;
  j["seed"] = s.seed;
  j["start"] = data::format_iso8601(s.start);
  if (s.diurnal) {
    j["diurnal"] = {{"base", s.diurnal->base},
                    {"amplitude", s.diurnal->amplitude},
                    {"phase_hours", s.diurnal->phase_hours}};
  }
  j["noise_scale"] = s.noise_scale;
  j["hetero"] = s.hetero;
  j["weekend_scale"] = s.weekend_scale;
  return j;
}

std::string resolve_path(const std::string& raw, const std::string& base_dir) {
  fs::path p(raw);
  if (p.is_absolute() || base_dir.empty()) return raw;
  return (fs::path(base_dir) / p).string();
}

json config_to_json(const ExperimentConfig& cfg, std::uint64_t master_seed) {
  json j;
  j["network"] = cfg.network_path;
  if (cfg.csv_path) j["data"] = {{"csv", *cfg.csv_path}};
  if (cfg.synth) j["data"] = {{"synth", synth_to_json(*cfg.synth)}};
  j["penalties"] = {{"gamma1", cfg.penalties.gamma1},
                    {"gamma2", cfg.penalties.gamma2}};
  json fws = json::array();
  for (auto f : cfg.frameworks) fws.push_back(learn::framework_name(f));
  j["frameworks"] = fws;
  j["split"] = {{"train_days", cfg.split.train_days},
                {"val_days", cfg.split.val_days},
                {"test_days", cfg.split.test_days}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"batch_size", cfg.train.batch_size},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"seed", master_seed},
                {"hypothesis_family",
                 cfg.train.hypothesis_family == dist::Family::Normal ? "normal"
                 : cfg.train.hypothesis_family == dist::Family::Uniform
                     ? "uniform"
                     : "bounded_pareto"},
                {"hidden", cfg.train.hidden}};
  j["curve_mode"] =
      cfg.curve_mode == learn::CurveMode::FixedMean ? "fixed-mean" : "per-slot";
  j["enforce_paper_regime"] = cfg.enforce_paper_regime;
  j["efficiency_repeats"] = cfg.efficiency_repeats;
  if (cfg.robustness) {
    json fams = json::array();
    for (const auto& d : cfg.robustness->true_families) fams.push_back(dist_to_json(d));
    j["robustness"] = {
        {"hypothesis",
         cfg.robustness->hypothesis == dist::Family::Normal ? "normal"
         : cfg.robustness->hypothesis == dist::Family::Uniform ? "uniform"
                                                               : "bounded_pareto"},
        {"true_families", fams}};
  }
  return j;
}

struct PreparedData {
  data::SampleSplits splits;
  double train_mean_demand = 0.0;
};

PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t master_seed) {
  data::LoadSeries series;
  if (cfg.csv_path) {
    series = data::load_csv(*cfg.csv_path);
  } else if (cfg.synth) {
    data::SynthSpec spec = *cfg.synth;
    spec.seed += master_seed;  // one knob reseeds both data and training
    series = data::synth(spec);
  } else {
    throw ConfigError("config needs a data source: either data.csv or data.synth");
  }

  PreparedData out;
  out.splits = data::make_samples(series, cfg.split);
  if (out.splits.train.empty())
    throw ConfigError("train split is empty; check split day counts");
  double acc = 0.0;
  for (const auto& s : out.splits.train) acc += s.target;
  out.train_mean_demand = acc / static_cast<double>(out.splits.train.size());
  return out;
}

void validate(const ExperimentConfig& cfg, const grid::Network& net) {
  if (!(cfg.penalties.gamma1 > 0.0) || !(cfg.penalties.gamma2 > 0.0))
    throw ConfigError("penalties gamma1 and gamma2 must be positive");
  if (cfg.enforce_paper_regime) {
    double cmax = 0.0;
    for (const auto& g : net.generators()) cmax = std::max(cmax, g.marginal_cost);
    if (!(cfg.penalties.gamma1 > cmax))
      throw ConfigError(
          "enforce_paper_regime: gamma1 must exceed the highest marginal cost (" +
          std::to_string(cmax) + ")");
  }
}

learn::TrainOutcome train_one(learn::Framework fw, const PreparedData& data,
                              const learn::CurveProvider& curves,
                              const dist::Penalties& pen,
                              const learn::TrainConfig& tc) {
  switch (fw) {
    case learn::Framework::Mse:
      return learn::train_mse(data.splits.train, data.splits.val, tc);
    case learn::Framework::TaskSpecific:
      return learn::train_taskspecific(data.splits.train, data.splits.val, curves,
                                       pen, tc);
    case learn::Framework::ModelFree:
      return learn::train_modelfree(data.splits.train, data.splits.val, curves, pen,
                                    tc);
    default: {
      learn::TrainOutcome out;
      out.predictor.framework = learn::Framework::Oracle;
      out.predictor.norm = learn::fit_normalization(data.splits.train);
      return out;
    }
  }
}

ExperimentReport run_frameworks(const ExperimentConfig& cfg, const RunOptions& opts,
                                bool save_models) {
  const std::uint64_t master = opts.seed.value_or(cfg.train.seed);
  const std::string out_dir = opts.out_dir.value_or(cfg.out_dir);

  ExperimentReport report;
  report.seed = master;
  report.config_echo_json = config_to_json(cfg, master).dump();

  const grid::Network net = grid::load_network(cfg.network_path);
  validate(cfg, net);
  const PreparedData data = prepare_data(cfg, master);
  const learn::CurveProvider curves(net, cfg.curve_mode, data.train_mean_demand);

  learn::TrainConfig tc = cfg.train;
  tc.seed = master;

  auto flush = [&]() {
    report.content_hash = compute_content_hash(report);
    if (opts.write_outputs) write_report(report, out_dir, opts.plot_csv);
  };

  for (auto fw : cfg.frameworks) {
    FrameworkResult result;
    result.name = learn::framework_name(fw);
    try {
      const int repeats = std::max(1, cfg.efficiency_repeats);
      std::vector<double> seconds;
      learn::TrainOutcome outcome;
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        outcome = train_one(fw, data, curves, cfg.penalties, tc);
        const auto t1 = std::chrono::steady_clock::now();
        seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      double mean = 0.0;
      for (double s : seconds) mean += s;
      mean /= static_cast<double>(seconds.size());
      double var = 0.0;
      for (double s : seconds) var += (s - mean) * (s - mean);
      result.timing = {mean,
                       std::sqrt(var / static_cast<double>(seconds.size())),
                       repeats};
      result.epochs = outcome.epochs_run;
      result.best_val_loss = outcome.best_val_loss;
      result.metrics =
          learn::evaluate(outcome.predictor, data.splits.test, curves, cfg.penalties);
      if (save_models && fw != learn::Framework::Oracle && opts.write_outputs) {
        fs::create_directories(out_dir);
        outcome.predictor.save(
            (fs::path(out_dir) / ("model_" + result.name + ".json")).string());
      }
      report.frameworks.push_back(std::move(result));
    } catch (const std::exception& e) {
      result.error = e.what();
      report.frameworks.push_back(std::move(result));
      flush();  // partial results stay on disk
      throw;
    }
  }

  if (cfg.robustness) {
    if (!cfg.synth)
      throw ConfigError("robustness sweep needs a synth data source");
    for (const auto& family : cfg.robustness->true_families) {
      ExperimentConfig sweep = cfg;
      sweep.synth->family = family;
      sweep.robustness.reset();
      const PreparedData sdata = prepare_data(sweep, master);
      const learn::CurveProvider scurves(net, cfg.curve_mode,
                                         sdata.train_mean_demand);
      learn::TrainConfig stc = tc;
      stc.hypothesis_family = cfg.robustness->hypothesis;

      const auto ts = train_one(learn::Framework::TaskSpecific, sdata, scurves,
                                cfg.penalties, stc);
      const auto mf = train_one(learn::Framework::ModelFree, sdata, scurves,
                                cfg.penalties, stc);
      RobustnessResult rr;
      rr.true_family = family.family_name();
      rr.hypothesis = stc.hypothesis_family == dist::Family::Normal ? "normal"
                      : stc.hypothesis_family == dist::Family::Uniform
                          ? "uniform"
                          : "bounded_pareto";
      rr.task_specific =
          learn::evaluate(ts.predictor, sdata.splits.test, scurves, cfg.penalties);
      rr.model_free =
          learn::evaluate(mf.predictor, sdata.splits.test, scurves, cfg.penalties);
      rr.cost_ratio = rr.task_specific.cost_loss / rr.model_free.cost_loss;
      rr.mse_ratio = rr.task_specific.mse / rr.model_free.mse;
      report.robustness.push_back(std::move(rr));
    }
  }

  flush();
  return report;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& base_dir) {
  const json j = parse_json(text, "config");
  ExperimentConfig cfg;
  try {
    cfg.network_path = resolve_path(j.at("network").get<std::string>(), base_dir);
    const auto& jd = j.at("data");
    if (jd.contains("csv")) {
      cfg.csv_path = resolve_path(jd["csv"].get<std::string>(), base_dir);
    } else if (jd.contains("synth")) {
      cfg.synth = synth_from_json(jd["synth"]);
    } else {
      throw ConfigError("data must carry either 'csv' or 'synth'");
    }
    cfg.penalties.gamma1 = j.at("penalties").at("gamma1").get<double>();
    cfg.penalties.gamma2 = j.at("penalties").at("gamma2").get<double>();
    cfg.frameworks.clear();
    for (const auto& name : j.value("frameworks", std::vector<std::string>{}))
      cfg.frameworks.push_back(learn::framework_from_name(name));
    if (j.contains("split")) {
      cfg.split.train_days = j["split"].at("train_days").get<int>();
      cfg.split.val_days = j["split"].at("val_days").get<int>();
      cfg.split.test_days = j["split"].at("test_days").get<int>();
    }
    if (j.contains("train")) {
      const auto& jt = j["train"];
      cfg.train.learning_rate = jt.value("learning_rate", cfg.train.learning_rate);
      cfg.train.batch_size = jt.value("batch_size", cfg.train.batch_size);
      cfg.train.max_epochs = jt.value("max_epochs", cfg.train.max_epochs);
      cfg.train.patience = jt.value("patience", cfg.train.patience);
      cfg.train.seed = jt.value("seed", cfg.train.seed);
      if (jt.contains("hypothesis_family"))
        cfg.train.hypothesis_family =
            family_from_string(jt["hypothesis_family"].get<std::string>());
      if (jt.contains("hidden"))
        cfg.train.hidden = jt["hidden"].get<std::vector<int>>();
    }
    if (j.contains("curve_mode")) {
      const auto mode = j["curve_mode"].get<std::string>();
      if (mode == "fixed-mean")
        cfg.curve_mode = learn::CurveMode::FixedMean;
      else if (mode == "per-slot")
        cfg.curve_mode = learn::CurveMode::PerSlot;
      else
        throw ConfigError("curve_mode must be 'fixed-mean' or 'per-slot'");
    }
    cfg.out_dir = resolve_path(j.value("out_dir", cfg.out_dir), base_dir);
    cfg.enforce_paper_regime = j.value("enforce_paper_regime", false);
    cfg.efficiency_repeats = j.value("efficiency_repeats", 1);
    if (j.contains("robustness")) {
      RobustnessSpec rs;
      rs.hypothesis =
          family_from_string(j["robustness"].value("hypothesis", "normal"));
      for (const auto& jf : j["robustness"].at("true_families"))
        rs.true_families.push_back(dist_from_json(jf));
      cfg.robustness = std::move(rs);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }

  if (!fs::exists(cfg.network_path))
    throw ConfigError("network file does not exist: " + cfg.network_path);
  if (cfg.csv_path && !fs::exists(*cfg.csv_path))
    throw ConfigError("csv file does not exist: " + *cfg.csv_path);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str(), fs::path(path).parent_path().string());
}

ExperimentReport run_bench(const ExperimentConfig& cfg, const RunOptions& opts) {
  return run_frameworks(cfg, opts, /*save_models=*/false);
}

ExperimentReport run_train(const ExperimentConfig& cfg, const RunOptions& opts) {
  return run_frameworks(cfg, opts, /*save_models=*/true);
}

ExperimentReport run_eval(const ExperimentConfig& cfg, const std::string& model_path,
                          const RunOptions& opts) {
  const std::uint64_t master = opts.seed.value_or(cfg.train.seed);
  const std::string out_dir = opts.out_dir.value_or(cfg.out_dir);

  ExperimentReport report;
  report.seed = master;
  report.config_echo_json = config_to_json(cfg, master).dump();

  const grid::Network net = grid::load_network(cfg.network_path);
  validate(cfg, net);
  const PreparedData data = prepare_data(cfg, master);
  const learn::CurveProvider curves(net, cfg.curve_mode, data.train_mean_demand);

  learn::Predictor predictor = learn::Predictor::load(model_path);
  FrameworkResult result;
  result.name = learn::framework_name(predictor.framework);
  result.metrics =
      learn::evaluate(predictor, data.splits.test, curves, cfg.penalties);
  report.frameworks.push_back(std::move(result));
  report.content_hash = compute_content_hash(report);
  if (opts.write_outputs) write_report(report, out_dir, opts.plot_csv);
  return report;
}

int run_curve_command(const std::string& network_path,
                      const std::vector<double>& nodal_demand, std::ostream& out,
                      std::ostream& err) {
  try {
    const grid::Network net = grid::load_network(network_path);
    Eigen::VectorXd demand;
    if (nodal_demand.size() == 1 && net.n_load() > 1) {
      demand = net.nodal_demand(nodal_demand[0]);  // total spread by weights
    } else {
      demand = Eigen::Map<const Eigen::VectorXd>(
          nodal_demand.data(), static_cast<Eigen::Index>(nodal_demand.size()));
    }
    const curve::CostCurve c = curve::build_curve(net, demand);

    out << "g,cost,slope";
    for (int i = 0; i < net.n_gen(); ++i) out << ",profile_" << i;
    out << "\n";
    char buf[64];
    const auto& bps = c.breakpoints();
    for (std::size_t k = 0; k < bps.size(); ++k) {
      const double slope =
          c.slopes().empty() ? 0.0
                             : c.slopes()[std::min(k, c.slopes().size() - 1)];
      std::snprintf(buf, sizeof(buf), "%.12g", bps[k].g);
      out << buf;
      std::snprintf(buf, sizeof(buf), "%.12g", bps[k].cost);
      out << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.12g", slope);
      out << ',' << buf;
      for (Eigen::Index i = 0; i < bps[k].profile.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", bps[k].profile[i]);
        out << ',' << buf;
      }
      out << "\n";
    }
    return 0;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << "\n";
    return 2;
  }
}

std::string run_dispatch_command(const std::string& network_path,
                                 const std::string& dist_json,
                                 const dist::Penalties& pen,
                                 std::optional<double> curve_demand) {
  const grid::Network net = grid::load_network(network_path);
  const dist::DemandDistribution d = dist_from_json_text(dist_json);
  const double total = curve_demand.value_or(d.mean());
  const curve::CostCurve c = curve::build_curve(net, net.nodal_demand(total));
  const kernel::DispatchResult res = kernel::optimal_dispatch(c, d, pen);

  json j;
  j["g_total"] = res.g_total;
  j["profile"] = std::vector<double>(res.profile.begin(), res.profile.end());
  j["gen_cost"] = res.gen_cost;
  j["risk_cost"] = res.risk_cost;
  j["task_loss"] = res.task_loss;
  j["g_min"] = c.g_min();
  j["g_max"] = c.g_max();
  j["curve_demand"] = total;
  return j.dump(2);
}

dist::DemandDistribution dist_from_json_text(const std::string& text) {
  return dist_from_json(parse_json(text, "distribution"));
}

std::string dist_to_json_text(const dist::DemandDistribution& d) {
  return dist_to_json(d).dump();
}

}  // namespace edlab::cli
