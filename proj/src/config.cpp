#include "bnpcea/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bnpcea/errors.hpp"

namespace bnpcea {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": not an integer: '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const ParseError&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + text + "'");
}

}  // namespace

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item));
  }
  return out;
}

void RunConfig::validate() const {
  if (iters < 1) throw ConfigError("iters must be >= 1");
  if (burnin < 0 || burnin >= iters) throw ConfigError("burnin must satisfy 0 <= burnin < iters");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (V != 0 && V < 2) throw ConfigError("V must be >= 2 (or 0 for automatic)");
  if (!(b > 0.0)) throw ConfigError("b must be > 0");
  if (!(xi > 0.0)) throw ConfigError("xi must be > 0");
  if (kappa_grid.empty()) throw ConfigError("kappa_grid must not be empty");
  if (init_clusters < 1) throw ConfigError("init_clusters must be >= 1");
  if (grid_cap < 1) throw ConfigError("grid_cap must be >= 1");
  if (tune_window < 1) throw ConfigError("tune_window must be >= 1");
  if (alpha_omega < 0.0 || alpha_theta < 0.0) throw ConfigError("concentrations must be >= 0");
  if (!(base.a_0 > 0.0)) throw ConfigError("a_0 must be > 0");
  if (!(base.nu_theta > 0.0) || !(base.nu_omega > 0.0)) throw ConfigError("nu_theta and nu_omega must be > 0");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  return {
      {"iters", std::to_string(iters)},
      {"burnin", std::to_string(burnin)},
      {"thin", std::to_string(thin)},
      {"seed", std::to_string(seed)},
      {"V", std::to_string(V)},
      {"b", format_double(b)},
      {"xi", format_double(xi)},
      {"lambda_star_family", to_string(lambda_star.family)},
      {"lambda_star_params", format_list(lambda_star.params)},
      {"nu_theta", format_double(base.nu_theta)},
      {"nu_omega", format_double(base.nu_omega)},
      {"a_0", format_double(base.a_0)},
      {"centering", to_string(base.centering)},
      {"theta_center", format_list(base.theta_center)},
      {"beta_center", format_list(base.beta_center)},
      {"cost_model", to_string(cost_model)},
      {"kappa_grid", format_list(kappa_grid)},
      {"add_intercept", add_intercept ? "1" : "0"},
      {"init_clusters", std::to_string(init_clusters)},
      {"grid_cap", std::to_string(grid_cap)},
      {"tune_window", std::to_string(tune_window)},
      {"alpha_omega", format_double(alpha_omega)},
      {"alpha_theta", format_double(alpha_theta)},
      {"update_alpha", update_alpha ? "1" : "0"},
      {"bootstrap", bootstrap == BootstrapPrior::dir_inv_n ? "dir_inv_n" : "dir_one"},
  };
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "iters") {
    iters = parse_int(key, value);
  } else if (key == "burnin") {
    burnin = parse_int(key, value);
  } else if (key == "thin") {
    thin = parse_int(key, value);
  } else if (key == "seed") {
    const auto s = parse_int(key, value);
    if (s < 0) throw ConfigError("seed must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "V") {
    V = parse_int(key, value);
  } else if (key == "b") {
    b = parse_real(key, value);
  } else if (key == "xi") {
    xi = parse_real(key, value);
  } else if (key == "lambda_star_family") {
    lambda_star.family = parse_lambda_star_family(value);
  } else if (key == "lambda_star_params") {
    lambda_star.params = parse_list(value);
  } else if (key == "nu_theta") {
    base.nu_theta = parse_real(key, value);
  } else if (key == "nu_omega") {
    base.nu_omega = parse_real(key, value);
  } else if (key == "a_0") {
    base.a_0 = parse_real(key, value);
  } else if (key == "centering") {
    base.centering = parse_centering(value);
  } else if (key == "theta_center") {
    base.theta_center = parse_list(value);
  } else if (key == "beta_center") {
    base.beta_center = parse_list(value);
  } else if (key == "cost_model") {
    cost_model = parse_cost_model(value);
  } else if (key == "kappa_grid") {
    kappa_grid = parse_list(value);
  } else if (key == "add_intercept") {
    add_intercept = parse_bool(key, value);
  } else if (key == "init_clusters") {
    init_clusters = parse_int(key, value);
  } else if (key == "grid_cap") {
    grid_cap = parse_int(key, value);
  } else if (key == "tune_window") {
    tune_window = parse_int(key, value);
  } else if (key == "alpha_omega") {
    alpha_omega = parse_real(key, value);
  } else if (key == "alpha_theta") {
    alpha_theta = parse_real(key, value);
  } else if (key == "update_alpha") {
    update_alpha = parse_bool(key, value);
  } else if (key == "bootstrap") {
    if (value == "dir_inv_n") {
      bootstrap = BootstrapPrior::dir_inv_n;
    } else if (value == "dir_one") {
      bootstrap = BootstrapPrior::dir_one;
    } else {
      throw ConfigError("bootstrap: expected dir_inv_n or dir_one");
    }
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues out;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

RunConfig config_from(const KeyValues& kv, RunConfig base) {
  for (const auto& [k, v] : kv) base.apply(k, v);
  return base;
}

std::string config_fingerprint(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.to_pairs()) {
    if (!out.empty()) out += ' ';
    out += k + '=' + v;
  }
  return out;
}

}  // namespace bnpcea
