#include "edlab/grid.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "edlab/errors.hpp"

namespace edlab::grid {

namespace {

void validate_parts(const std::vector<Bus>& buses, const std::vector<Line>& lines,
                    const std::vector<Generator>& generators,
                    const std::vector<LoadSite>& loads) {
  const int n = static_cast<int>(buses.size());
  if (n == 0) throw InvalidParams("network has no buses");
  for (int i = 0; i < n; ++i) {
    if (buses[i].id != i)
      throw InvalidParams("bus ids must be contiguous 0..n-1, got " +
                          std::to_string(buses[i].id) + " at position " +
                          std::to_string(i));
  }
  int slack_count = 0;
  for (const auto& b : buses) slack_count += b.is_slack ? 1 : 0;
  if (slack_count == 0) throw NoSlack("no slack bus designated");
  if (slack_count > 1) throw MultipleSlack("more than one slack bus designated");

  for (const auto& l : lines) {
    if (l.from_bus < 0 || l.from_bus >= n || l.to_bus < 0 || l.to_bus >= n)
      throw InvalidParams("line references unknown bus");
    if (l.from_bus == l.to_bus) throw InvalidParams("line endpoints coincide");
    if (!(l.reactance_pu > 0.0))
      throw SingularSusceptance("line reactance must be > 0");
    if (!(l.capacity_mw > 0.0)) throw InvalidParams("line capacity must be > 0");
  }
  for (const auto& g : generators) {
    if (g.bus < 0 || g.bus >= n) throw InvalidParams("generator on unknown bus");
    if (g.capacity_mw < 0.0) throw InvalidParams("generator capacity must be >= 0");
    if (!std::isfinite(g.marginal_cost))
      throw InvalidParams("generator marginal cost must be finite");
  }
  double wsum = 0.0;
  for (const auto& l : loads) {
    if (l.bus < 0 || l.bus >= n) throw InvalidParams("load on unknown bus");
    if (l.weight < 0.0) throw InvalidParams("load weight must be >= 0");
    wsum += l.weight;
  }
  if (!loads.empty() && std::abs(wsum - 1.0) > 1e-12)
    throw InvalidParams("load weights must sum to 1");

  // Connectivity over the line graph.
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  std::vector<std::vector<int>> adj(n);
  for (const auto& l : lines) {
    adj[l.from_bus].push_back(l.to_bus);
    adj[l.to_bus].push_back(l.from_bus);
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  if (reached != n) throw DisconnectedNetwork("network graph is not connected");
}

}  // namespace

Network::Network(std::vector<Bus> buses, std::vector<Line> lines,
                 std::vector<Generator> generators, std::vector<LoadSite> loads,
                 Eigen::MatrixXd hg, Eigen::MatrixXd hd, Eigen::MatrixXd bus_ptdf)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      generators_(std::move(generators)),
      loads_(std::move(loads)),
      hg_(std::move(hg)),
      hd_(std::move(hd)),
      bus_ptdf_(std::move(bus_ptdf)) {
  for (const auto& b : buses_)
    if (b.is_slack) slack_ = b.id;
}

Eigen::VectorXd Network::line_capacities() const {
  Eigen::VectorXd b(n_line());
  for (int i = 0; i < n_line(); ++i) b[i] = lines_[i].capacity_mw;
  return b;
}

Eigen::VectorXd Network::generator_costs() const {
  Eigen::VectorXd c(n_gen());
  for (int i = 0; i < n_gen(); ++i) c[i] = generators_[i].marginal_cost;
  return c;
}

Eigen::VectorXd Network::generator_capacities() const {
  Eigen::VectorXd b(n_gen());
  for (int i = 0; i < n_gen(); ++i) b[i] = generators_[i].capacity_mw;
  return b;
}

Eigen::VectorXd Network::load_weights() const {
  Eigen::VectorXd w(n_load());
  for (int i = 0; i < n_load(); ++i) w[i] = loads_[i].weight;
  return w;
}

Eigen::VectorXd Network::nodal_demand(double total_mw) const {
  return load_weights() * total_mw;
}

Network build_network(std::vector<Bus> buses, std::vector<Line> lines,
                      std::vector<Generator> generators,
                      std::vector<LoadSite> loads) {
  validate_parts(buses, lines, generators, loads);

  const int n = static_cast<int>(buses.size());
  const int nl = static_cast<int>(lines.size());
  int slack = -1;
  for (const auto& b : buses)
    if (b.is_slack) slack = b.id;

  // Susceptance-weighted incidence Bf (line x bus) and reduced bus
  // susceptance matrix with the slack row/column removed.
  Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(nl, n);
  for (int l = 0; l < nl; ++l) {
    const double susceptance = 1.0 / lines[l].reactance_pu;
    bf(l, lines[l].from_bus) += susceptance;
    bf(l, lines[l].to_bus) -= susceptance;
  }
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < nl; ++l) {
    const int a = lines[l].from_bus;
    const int b = lines[l].to_bus;
    const double susceptance = 1.0 / lines[l].reactance_pu;
    bbus(a, a) += susceptance;
    bbus(b, b) += susceptance;
    bbus(a, b) -= susceptance;
    bbus(b, a) -= susceptance;
  }

  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != slack) keep.push_back(i);

  Eigen::MatrixXd bred(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) bred(i, j) = bbus(keep[i], keep[j]);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(bred);
  if (!lu.isInvertible())
    throw SingularSusceptance("reduced susceptance matrix is singular");

  Eigen::MatrixXd bf_red(nl, n - 1);
  for (int j = 0; j < n - 1; ++j) bf_red.col(j) = bf.col(keep[j]);

  // PTDF = Bf_red * Bred^-1, re-expanded with a zero slack column.
  Eigen::MatrixXd ptdf_red = lu.solve(bf_red.transpose()).transpose();
  Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(nl, n);
  for (int j = 0; j < n - 1; ++j) ptdf.col(keep[j]) = ptdf_red.col(j);

  Eigen::MatrixXd hg(nl, generators.size());
  for (std::size_t i = 0; i < generators.size(); ++i)
    hg.col(static_cast<int>(i)) = ptdf.col(generators[i].bus);
  Eigen::MatrixXd hd(nl, loads.size());
  for (std::size_t j = 0; j < loads.size(); ++j)
    hd.col(static_cast<int>(j)) = ptdf.col(loads[j].bus);

  return Network(std::move(buses), std::move(lines), std::move(generators),
                 std::move(loads), std::move(hg), std::move(hd), std::move(ptdf));
}

Eigen::VectorXd line_flow(const Network& net, const Eigen::VectorXd& g,
                          const Eigen::VectorXd& d) {
  if (g.size() != net.n_gen() || d.size() != net.n_load())
    throw DimensionMismatch("line_flow: vector sizes do not match network");
  if (net.n_line() == 0) return Eigen::VectorXd::Zero(0);
  return net.Hg() * g - net.Hd() * d;
}

Network network_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("invalid network JSON: ") + e.what());
  }
  try {
    const int slack = j.at("slack_bus").get<int>();
    std::vector<Bus> buses;
    for (const auto& jb : j.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.is_slack = (b.id == slack);
      buses.push_back(b);
    }
    std::vector<Line> lines;
    if (j.contains("lines")) {
      for (const auto& jl : j["lines"]) {
        Line l;
        l.from_bus = jl.at("from").get<int>();
        l.to_bus = jl.at("to").get<int>();
        l.reactance_pu = jl.at("reactance_pu").get<double>();
        l.capacity_mw = jl.at("capacity_mw").get<double>();
        lines.push_back(l);
      }
    }
    std::vector<Generator> gens;
    for (const auto& jg : j.at("generators")) {
      Generator g;
      g.bus = jg.at("bus").get<int>();
      g.marginal_cost = jg.at("marginal_cost").get<double>();
      g.capacity_mw = jg.at("capacity_mw").get<double>();
      gens.push_back(g);
    }
    std::vector<LoadSite> loads;
    for (const auto& jl : j.at("loads")) {
      LoadSite l;
      l.bus = jl.at("bus").get<int>();
      l.weight = jl.at("weight").get<double>();
      loads.push_back(l);
    }
    return build_network(std::move(buses), std::move(lines), std::move(gens),
                         std::move(loads));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("network JSON missing field: ") + e.what());
  }
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json_text(ss.str());
}

}  // namespace edlab::grid
