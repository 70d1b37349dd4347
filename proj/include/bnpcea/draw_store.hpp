#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bnpcea/config.hpp"
#include "bnpcea/local_models.hpp"

namespace bnpcea {

// Nested cluster label: omega-cluster j, theta-subcluster k within j.
struct ClusterLabel {
  int j = 0;
  int k = 0;
  auto operator<=>(const ClusterLabel&) const = default;
};

// One retained MCMC iteration.
struct Draw {
  std::int64_t iteration = 0;
  std::vector<ClusterLabel> assignments;
  std::map<int, CostParams> omegas;
  std::map<ClusterLabel, SurvParams> thetas;
  double alpha_omega = 0.0;
  double alpha_theta = 0.0;
  std::vector<double> lambda;
  std::vector<std::int64_t> u;
  std::vector<double> c;
  // Bayesian-bootstrap weights and the g-computation outputs of this draw.
  std::vector<double> weights;
  std::vector<double> psi;  // one per kappa in DrawStore::kappa_grid
  double delta_cost = 0.0;
  double delta_time = 0.0;

  const CostParams& omega_of(std::size_t i) const { return omegas.at(assignments[i].j); }
  const SurvParams& theta_of(std::size_t i) const { return thetas.at(assignments[i]); }
  PiecewiseHazard hazard(const std::vector<double>& taus) const { return PiecewiseHazard(taus, lambda); }
};

struct SamplerDiagnostics {
  std::vector<double> c_acceptance;      // per interval v < V - 1
  std::vector<double> theta_acceptance;  // per theta coordinate
  double alpha_theta_acceptance = 0.0;
  std::vector<std::string> warnings;
};

struct DrawStore {
  RunConfig config;
  std::string data_path;
  std::size_t n = 0;
  std::size_t q = 0;  // confounders after the optional intercept column
  std::vector<double> taus;
  std::vector<Draw> draws;
  SamplerDiagnostics diagnostics;

  const std::vector<double>& kappa_grid() const { return config.kappa_grid; }
};

// JSON-lines: a header record, one record per draw, then a diagnostics record.
void write_draw_store(std::ostream& out, const DrawStore& store);
void save_draw_store(const std::string& path, const DrawStore& store);
DrawStore read_draw_store(std::istream& in, const std::string& source = "<stream>");
DrawStore load_draw_store(const std::string& path);

}  // namespace bnpcea
