#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bnpcea/base_measure.hpp"
#include "bnpcea/data.hpp"
#include "bnpcea/gamma_process.hpp"

namespace bnpcea {

enum class BootstrapPrior { dir_inv_n, dir_one };

// Every tunable of a fit. Keys of the flat config file map 1:1 onto fields.
struct RunConfig {
  std::int64_t iters = 2000;
  std::int64_t burnin = 1000;
  std::int64_t thin = 2;
  std::uint64_t seed = 1;
  std::int64_t V = 0;  // 0: min(50, distinct event times)
  double b = 1e-6;
  double xi = 0.001;
  LambdaStarSpec lambda_star;
  BaseMeasureConfig base;
  CostModel cost_model = CostModel::gaussian;
  std::vector<double> kappa_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  bool add_intercept = false;
  std::int64_t init_clusters = 10;
  std::int64_t grid_cap = 10000;
  std::int64_t tune_window = 20;
  double alpha_omega = 1.0;
  double alpha_theta = 1.0;
  bool update_alpha = true;
  BootstrapPrior bootstrap = BootstrapPrior::dir_inv_n;

  // Throws ConfigError on inconsistent settings (e.g. burnin >= iters).
  void validate() const;
  // Ordered (key, value) pairs; the inverse of apply().
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  void apply(const std::string& key, const std::string& value);
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// `key = value` lines; '#' starts a comment. Throws ParseError with line number.
KeyValues parse_key_values(const std::string& text, const std::string& source = "<config>");
KeyValues read_key_values(const std::string& path);
RunConfig config_from(const KeyValues& kv, RunConfig base = {});

std::string format_list(const std::vector<double>& v);
std::vector<double> parse_list(const std::string& text);
// One-line rendering of the effective config for output headers.
std::string config_fingerprint(const RunConfig& config);

}  // namespace bnpcea
