#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace edlab::grid {

struct Bus {
  int id = 0;
  bool is_slack = false;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double reactance_pu = 1.0;
  double capacity_mw = 0.0;
};

struct Generator {
  int bus = 0;
  double marginal_cost = 0.0;  // $/MWh
  double capacity_mw = 0.0;    // B_i
};

struct LoadSite {
  int bus = 0;
  double weight = 0.0;  // fraction of total demand served at this bus
};

// Immutable DC network model. Hg and Hd are the generator and load shift
// factor (PTDF) matrices: row per line, column per generator / load site,
// referenced to the designated slack bus.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Line> lines,
          std::vector<Generator> generators, std::vector<LoadSite> loads,
          Eigen::MatrixXd hg, Eigen::MatrixXd hd, Eigen::MatrixXd bus_ptdf);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<LoadSite>& loads() const { return loads_; }

  int n_bus() const { return static_cast<int>(buses_.size()); }
  int n_line() const { return static_cast<int>(lines_.size()); }
  int n_gen() const { return static_cast<int>(generators_.size()); }
  int n_load() const { return static_cast<int>(loads_.size()); }
  int slack_bus() const { return slack_; }

  const Eigen::MatrixXd& Hg() const { return hg_; }
  const Eigen::MatrixXd& Hd() const { return hd_; }
  // Full bus-injection PTDF (line x bus), slack column zero.
  const Eigen::MatrixXd& bus_ptdf() const { return bus_ptdf_; }

  Eigen::VectorXd line_capacities() const;
  Eigen::VectorXd generator_costs() const;
  Eigen::VectorXd generator_capacities() const;
  Eigen::VectorXd load_weights() const;

  // Spread a total system demand over load sites by their weights.
  Eigen::VectorXd nodal_demand(double total_mw) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  std::vector<LoadSite> loads_;
  int slack_ = -1;
  Eigen::MatrixXd hg_, hd_, bus_ptdf_;
};

// Builds the network and its shift factor matrices. Throws NoSlack,
// MultipleSlack, SingularSusceptance, DisconnectedNetwork, InvalidParams.
Network build_network(std::vector<Bus> buses, std::vector<Line> lines,
                      std::vector<Generator> generators,
                      std::vector<LoadSite> loads);

// Hg*g - Hd*d. Throws DimensionMismatch.
Eigen::VectorXd line_flow(const Network& net, const Eigen::VectorXd& g,
                          const Eigen::VectorXd& d);

// JSON file with arrays buses, lines, generators, loads and a slack_bus field.
Network load_network(const std::string& path);
Network network_from_json_text(const std::string& text);

}  // namespace edlab::grid
