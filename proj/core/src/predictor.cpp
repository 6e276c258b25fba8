#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edlab/errors.hpp"
#include "edlab/learn.hpp"
#include "edlab/math.hpp"

namespace edlab::learn {

std::string framework_name(Framework f) {
  switch (f) {
    case Framework::Mse: return "mse";
    case Framework::TaskSpecific: return "task_specific";
    case Framework::ModelFree: return "model_free";
    default: return "oracle";
  }
}

Framework framework_from_name(const std::string& name) {
  if (name == "mse") return Framework::Mse;
  if (name == "task_specific") return Framework::TaskSpecific;
  if (name == "model_free") return Framework::ModelFree;
  if (name == "oracle") return Framework::Oracle;
  throw InvalidParams("unknown framework: " + name);
}

namespace {

dist::Family family_from_name(const std::string& name) {
  if (name == "normal") return dist::Family::Normal;
  if (name == "uniform") return dist::Family::Uniform;
  if (name == "bounded_pareto") return dist::Family::BoundedPareto;
  if (name == "empirical") return dist::Family::Empirical;
  throw InvalidParams("unknown distribution family: " + name);
}

std::string family_to_name(dist::Family f) {
  switch (f) {
    case dist::Family::Normal: return "normal";
    case dist::Family::Uniform: return "uniform";
    case dist::Family::BoundedPareto: return "bounded_pareto";
    default: return "empirical";
  }
}

}  // namespace

Normalization fit_normalization(const data::SampleSet& train) {
  if (train.empty()) throw EmptyDataset("cannot fit normalization on empty set");
  const Eigen::Index dim = train.front().features.size();
  Normalization n;
  n.feature_mean = Eigen::VectorXd::Zero(dim);
  n.feature_scale = Eigen::VectorXd::Ones(dim);

  for (const auto& s : train) n.feature_mean += s.features;
  n.feature_mean /= static_cast<double>(train.size());

  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  double tmean = 0.0;
  for (const auto& s : train) {
    const Eigen::VectorXd c = s.features - n.feature_mean;
    var += c.cwiseProduct(c);
    tmean += s.target;
  }
  var /= static_cast<double>(train.size());
  tmean /= static_cast<double>(train.size());

  for (Eigen::Index i = 0; i < dim; ++i) {
    const double sd = std::sqrt(var[i]);
    n.feature_scale[i] = sd > 1e-12 ? sd : 1.0;
  }

  double tvar = 0.0;
  for (const auto& s : train) tvar += (s.target - tmean) * (s.target - tmean);
  tvar /= static_cast<double>(train.size());
  n.target_mean = tmean;
  n.target_scale = std::sqrt(tvar) > 1e-12 ? std::sqrt(tvar) : 1.0;
  return n;
}

Eigen::VectorXd Predictor::normalize(const Eigen::VectorXd& features) const {
  if (features.size() != norm.feature_mean.size())
    throw DimensionMismatch("feature length does not match normalization stats");
  return (features - norm.feature_mean).cwiseQuotient(norm.feature_scale);
}

Eigen::MatrixXd Predictor::normalize_batch(const data::SampleSet& samples) const {
  Eigen::MatrixXd x(norm.feature_mean.size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = normalize(samples[j].features);
  return x;
}

int Predictor::head_size(Framework f, dist::Family family) {
  if (f != Framework::TaskSpecific) return 1;
  switch (family) {
    case dist::Family::Normal:
    case dist::Family::Uniform: return 2;
    case dist::Family::BoundedPareto: return 3;
    default:
      throw EmpiricalNotDifferentiable(
          "task-specific training needs a parametric family");
  }
}

double Predictor::predict_scalar(const Eigen::VectorXd& features) const {
  const Eigen::VectorXd raw = mlp.forward(normalize(features));
  return norm.target_mean + norm.target_scale * raw[0];
}

dist::DemandDistribution Predictor::predict_distribution(
    const Eigen::VectorXd& features) const {
  const DistributionHead head{hypothesis_family, norm.target_mean, norm.target_scale};
  return head.distribution(mlp.forward(normalize(features)));
}

dist::DemandDistribution DistributionHead::distribution(
    const Eigen::VectorXd& raw) const {
  const double floor = 1e-9 * target_scale;
  switch (family) {
    case dist::Family::Normal: {
      const double mu = target_mean + target_scale * raw[0];
      const double sigma = target_scale * math::softplus(raw[1]) + floor;
      return dist::DemandDistribution::normal(mu, sigma);
    }
    case dist::Family::Uniform: {
      const double center = target_mean + target_scale * raw[0];
      const double half = target_scale * math::softplus(raw[1]) + floor;
      return dist::DemandDistribution::uniform(center - half, center + half);
    }
    case dist::Family::BoundedPareto: {
      const double lower = target_scale * math::softplus(raw[0]) + floor;
      const double gap = target_scale * math::softplus(raw[1]) + floor;
      const double alpha = 0.5 + math::softplus(raw[2]);
      return dist::DemandDistribution::bounded_pareto(lower, lower + gap, alpha);
    }
    default:
      throw EmpiricalNotDifferentiable("no parametric head for this family");
  }
}

Eigen::MatrixXd DistributionHead::jacobian(const Eigen::VectorXd& raw) const {
  switch (family) {
    case dist::Family::Normal: {
      Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 2);
      j(0, 0) = target_scale;
      j(1, 1) = target_scale * math::softplus_deriv(raw[1]);
      return j;
    }
    case dist::Family::Uniform: {
      Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 2);
      const double dh = target_scale * math::softplus_deriv(raw[1]);
      j(0, 0) = target_scale;  // d a / d raw0
      j(0, 1) = -dh;
      j(1, 0) = target_scale;  // d b / d raw0
      j(1, 1) = dh;
      return j;
    }
    case dist::Family::BoundedPareto: {
      Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 3);
      const double dl = target_scale * math::softplus_deriv(raw[0]);
      const double dg = target_scale * math::softplus_deriv(raw[1]);
      j(0, 0) = dl;        // L
      j(1, 0) = dl;        // H = L + gap
      j(1, 1) = dg;
      j(2, 2) = math::softplus_deriv(raw[2]);  // alpha
      return j;
    }
    default:
      throw EmpiricalNotDifferentiable("no parametric head for this family");
  }
}

CurveProvider::CurveProvider(const grid::Network& net, CurveMode mode,
                             double mean_total_demand)
    : net_(&net),
      mode_(mode),
      fixed_(curve::build_curve(net, net.nodal_demand(mean_total_demand))) {}

const curve::CostCurve& CurveProvider::at(double realized_total_demand) const {
  if (mode_ == CurveMode::FixedMean) return fixed_;
  const auto key = static_cast<std::int64_t>(std::llround(realized_total_demand * 1e9));
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  auto built = std::make_unique<curve::CostCurve>(
      curve::build_curve(*net_, net_->nodal_demand(realized_total_demand)));
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(key, std::move(built));
  return *it->second;
}

std::string Predictor::to_json_text() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["framework"] = framework_name(framework);
  j["hypothesis_family"] = family_to_name(hypothesis_family);
  j["normalization"] = {
      {"feature_mean", std::vector<double>(norm.feature_mean.begin(),
                                           norm.feature_mean.end())},
      {"feature_scale", std::vector<double>(norm.feature_scale.begin(),
                                            norm.feature_scale.end())},
      {"target_mean", norm.target_mean},
      {"target_scale", norm.target_scale}};
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < mlp.weights().size(); ++l) {
    const auto& w = mlp.weights()[l];
    std::vector<double> flat(w.size());
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        flat[static_cast<std::size_t>(r * w.cols() + c)] = w(r, c);
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"w", flat},
                      {"b", std::vector<double>(mlp.biases()[l].begin(),
                                                mlp.biases()[l].end())}});
  }
  j["layers"] = layers;
  return j.dump(2);
}

Predictor Predictor::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("invalid model JSON: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw InvalidParams("unsupported model schema_version");
  Predictor p;
  p.framework = framework_from_name(j.at("framework").get<std::string>());
  p.hypothesis_family =
      family_from_name(j.at("hypothesis_family").get<std::string>());
  const auto& jn = j.at("normalization");
  const auto fm = jn.at("feature_mean").get<std::vector<double>>();
  const auto fs = jn.at("feature_scale").get<std::vector<double>>();
  p.norm.feature_mean = Eigen::Map<const Eigen::VectorXd>(fm.data(), fm.size());
  p.norm.feature_scale = Eigen::Map<const Eigen::VectorXd>(fs.data(), fs.size());
  p.norm.target_mean = jn.at("target_mean").get<double>();
  p.norm.target_scale = jn.at("target_scale").get<double>();

  std::vector<Eigen::MatrixXd> ws;
  std::vector<Eigen::VectorXd> bs;
  for (const auto& jl : j.at("layers")) {
    const auto rows = jl.at("rows").get<Eigen::Index>();
    const auto cols = jl.at("cols").get<Eigen::Index>();
    const auto flat = jl.at("w").get<std::vector<double>>();
    const auto bias = jl.at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols ||
        static_cast<Eigen::Index>(bias.size()) != rows)
      throw InvalidParams("model layer shape mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    ws.push_back(std::move(w));
    bs.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), bias.size()));
  }
  if (!ws.empty()) p.mlp = Mlp(std::move(ws), std::move(bs));
  return p;
}

void Predictor::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot open model file for writing: " + path);
  out << to_json_text();
}

Predictor Predictor::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace edlab::learn
