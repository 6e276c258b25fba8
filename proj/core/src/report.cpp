#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "edlab/errors.hpp"
#include "edlab/experiment.hpp"

namespace edlab::cli {

namespace {

using nlohmann::json;

constexpr const char* kWindows[4] = {"00-06", "06-12", "12-18", "18-24"};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json metrics_to_json(const learn::EvalMetrics& m) {
  json periods = json::array();
  for (int p = 0; p < 4; ++p) {
    periods.push_back({{"window", kWindows[p]},
                       {"count", m.periods[p].count},
                       {"mse", m.periods[p].mse},
                       {"cost_loss", m.periods[p].cost_loss},
                       {"cost_loss_std", m.periods[p].cost_loss_std}});
  }
  return {{"count", m.count},
          {"mse", m.mse},
          {"cost_loss", m.cost_loss},
          {"cost_loss_std", m.cost_loss_std},
          {"periods", periods}};
}

learn::EvalMetrics metrics_from_json(const json& j) {
  learn::EvalMetrics m;
  m.count = j.at("count").get<int>();
  m.mse = j.at("mse").get<double>();
  m.cost_loss = j.at("cost_loss").get<double>();
  m.cost_loss_std = j.at("cost_loss_std").get<double>();
  const auto& periods = j.at("periods");
  for (int p = 0; p < 4; ++p) {
    const auto& jp = periods.at(p);
    m.periods[p].count = jp.at("count").get<int>();
    m.periods[p].mse = jp.at("mse").get<double>();
    m.periods[p].cost_loss = jp.at("cost_loss").get<double>();
    m.periods[p].cost_loss_std = jp.at("cost_loss_std").get<double>();
  }
  return m;
}

json report_to_json(const ExperimentReport& r, bool with_volatile) {
  json j;
  j["schema_version"] = r.schema_version;
  j["seed"] = r.seed;
  j["config"] = r.config_echo_json.empty() ? json::object()
                                           : json::parse(r.config_echo_json);
  json fws = json::array();
  for (const auto& f : r.frameworks) {
    json jf;
    jf["name"] = f.name;
    if (f.error.empty()) {
      jf["metrics"] = metrics_to_json(f.metrics);
      jf["epochs"] = f.epochs;
      jf["best_val_loss"] = f.best_val_loss;
      if (with_volatile) {
        jf["timing"] = {{"mean_seconds", f.timing.mean_seconds},
                        {"std_seconds", f.timing.std_seconds},
                        {"repeats", f.timing.repeats}};
      }
    } else {
      jf["error"] = f.error;
    }
    fws.push_back(std::move(jf));
  }
  j["frameworks"] = std::move(fws);
  json rob = json::array();
  for (const auto& rr : r.robustness) {
    rob.push_back({{"true_family", rr.true_family},
                   {"hypothesis", rr.hypothesis},
                   {"task_specific", metrics_to_json(rr.task_specific)},
                   {"model_free", metrics_to_json(rr.model_free)},
                   {"cost_ratio", rr.cost_ratio},
                   {"mse_ratio", rr.mse_ratio}});
  }
  j["robustness"] = std::move(rob);
  if (with_volatile) j["content_hash"] = r.content_hash;
  return j;
}

}  // namespace

std::string compute_content_hash(const ExperimentReport& r) {
  const std::string payload = report_to_json(r, /*with_volatile=*/false).dump();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));
  return buf;
}

std::string report_to_json_text(const ExperimentReport& report) {
  return report_to_json(report, /*with_volatile=*/true).dump(2);
}

ExperimentReport report_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("invalid report JSON: ") + e.what());
  }
  ExperimentReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != 1)
    throw InvalidParams("unsupported report schema_version");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_echo_json = j.at("config").dump();
  r.content_hash = j.value("content_hash", "");
  for (const auto& jf : j.at("frameworks")) {
    FrameworkResult f;
    f.name = jf.at("name").get<std::string>();
    if (jf.contains("error")) {
      f.error = jf.at("error").get<std::string>();
    } else {
      f.metrics = metrics_from_json(jf.at("metrics"));
      f.epochs = jf.at("epochs").get<int>();
      f.best_val_loss = jf.at("best_val_loss").get<double>();
      if (jf.contains("timing")) {
        f.timing.mean_seconds = jf["timing"].at("mean_seconds").get<double>();
        f.timing.std_seconds = jf["timing"].at("std_seconds").get<double>();
        f.timing.repeats = jf["timing"].at("repeats").get<int>();
      }
    }
    r.frameworks.push_back(std::move(f));
  }
  for (const auto& jr : j.at("robustness")) {
    RobustnessResult rr;
    rr.true_family = jr.at("true_family").get<std::string>();
    rr.hypothesis = jr.at("hypothesis").get<std::string>();
    rr.task_specific = metrics_from_json(jr.at("task_specific"));
    rr.model_free = metrics_from_json(jr.at("model_free"));
    rr.cost_ratio = jr.at("cost_ratio").get<double>();
    rr.mse_ratio = jr.at("mse_ratio").get<double>();
    r.robustness.push_back(std::move(rr));
  }
  return r;
}

void write_report(const ExperimentReport& report, const std::string& out_dir,
                  bool plot_csv) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw InvalidParams("cannot write report.json in " + out_dir);
    out << report_to_json_text(report) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "report.csv");
    out << "framework,count,mse,cost_loss,cost_loss_std,epochs,best_val_loss,"
           "train_seconds,train_seconds_std,error\n";
    char buf[512];
    for (const auto& f : report.frameworks) {
      if (f.error.empty()) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.12g,%.12g,%.12g,%d,%.12g,%.6g,%.6g,\n",
                      f.name.c_str(), f.metrics.count, f.metrics.mse,
                      f.metrics.cost_loss, f.metrics.cost_loss_std, f.epochs,
                      f.best_val_loss, f.timing.mean_seconds, f.timing.std_seconds);
      } else {
        std::snprintf(buf, sizeof(buf), "%s,,,,,,,,,%s\n", f.name.c_str(),
                      f.error.c_str());
      }
      out << buf;
    }
    if (!report.robustness.empty()) {
      out << "robustness_true_family,hypothesis,ts_cost_loss,mf_cost_loss,"
             "cost_ratio,ts_mse,mf_mse,mse_ratio\n";
      for (const auto& rr : report.robustness) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      rr.true_family.c_str(), rr.hypothesis.c_str(),
                      rr.task_specific.cost_loss, rr.model_free.cost_loss,
                      rr.cost_ratio, rr.task_specific.mse, rr.model_free.mse,
                      rr.mse_ratio);
        out << buf;
      }
    }
  }
  if (plot_csv) {
    std::ofstream out(fs::path(out_dir) / "periods.csv");
    out << "framework,window,count,mse,cost_loss,cost_loss_std\n";
    char buf[256];
    for (const auto& f : report.frameworks) {
      if (!f.error.empty()) continue;
      for (int p = 0; p < 4; ++p) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.12g,%.12g,%.12g\n",
                      f.name.c_str(), kWindows[p], f.metrics.periods[p].count,
                      f.metrics.periods[p].mse, f.metrics.periods[p].cost_loss,
                      f.metrics.periods[p].cost_loss_std);
        out << buf;
      }
    }
  }
}

}  // namespace edlab::cli
