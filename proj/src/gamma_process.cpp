#include "bnpcea/gamma_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bnpcea/errors.hpp"
#include "bnpcea/stats.hpp"

namespace bnpcea {

namespace {

constexpr double kGridPadding = 1e-6;
// Terms this far (in log units) below the running maximum of a concave log
// pmf cannot move a double-precision categorical draw.
constexpr double kLogCutoff = 60.0;

double positive_rate(double draw) { return std::max(draw, std::numeric_limits<double>::min()); }

}  // namespace

double LambdaStarSpec::cumulative(double t) const {
  switch (family) {
    case LambdaStarFamily::exponential:
      return params.at(0) * t;
    case LambdaStarFamily::weibull:
      return std::pow(t / params.at(1), params.at(0));
  }
  return 0.0;
}

LambdaStarFamily parse_lambda_star_family(const std::string& name) {
  if (name == "exponential") return LambdaStarFamily::exponential;
  if (name == "weibull") return LambdaStarFamily::weibull;
  throw ConfigError("unknown lambda_star_family '" + name + "' (expected exponential or weibull)");
}

std::string to_string(LambdaStarFamily family) {
  return family == LambdaStarFamily::exponential ? "exponential" : "weibull";
}

std::vector<double> lambda_star_rates(const LambdaStarSpec& spec, std::span<const double> taus) {
  const std::size_t expected = spec.family == LambdaStarFamily::exponential ? 1 : 2;
  if (spec.params.size() != expected) {
    throw ConfigError("lambda_star_params: " + to_string(spec.family) + " takes " + std::to_string(expected) +
                      " parameter(s)");
  }
  for (double p : spec.params)
    if (!(p > 0.0)) throw ConfigError("lambda_star_params must be positive");
  std::vector<double> rates(taus.size());
  double prev_tau = 0.0;
  for (std::size_t v = 0; v < taus.size(); ++v) {
    const double w = taus[v] - prev_tau;
    rates[v] = (spec.cumulative(taus[v]) - spec.cumulative(prev_tau)) / w;
    if (!(rates[v] > 0.0)) rates[v] = std::numeric_limits<double>::min();
    prev_tau = taus[v];
  }
  return rates;
}

std::vector<double> build_grid(double max_time, std::size_t intervals) {
  if (intervals < 2) throw ConfigError("hazard grid needs V >= 2 intervals");
  if (!(max_time > 0.0)) throw ValidationError("hazard grid needs a positive maximum time");
  const double horizon = max_time * (1.0 + kGridPadding);
  std::vector<double> taus(intervals);
  for (std::size_t v = 0; v < intervals; ++v) {
    taus[v] = horizon * static_cast<double>(v + 1) / static_cast<double>(intervals);
  }
  taus.back() = horizon;
  return taus;
}

std::vector<double> build_grid(const Dataset& data, std::size_t intervals) {
  return build_grid(data.max_time(), intervals);
}

std::size_t default_interval_count(const Dataset& data) {
  return std::max<std::size_t>(2, std::min<std::size_t>(50, data.distinct_event_times()));
}

HazardState HazardState::initial(std::vector<double> taus, const LambdaStarSpec& spec, double b, double xi) {
  if (!(b > 0.0)) throw ConfigError("Gamma Process dispersion b must be > 0");
  if (!(xi > 0.0)) throw ConfigError("Gamma Process smoothing xi must be > 0");
  HazardState s;
  s.lambda_star = lambda_star_rates(spec, taus);
  s.hazard = PiecewiseHazard(std::move(taus), s.lambda_star);
  s.u.assign(s.intervals(), 0);
  s.c.assign(s.intervals(), xi);
  s.b = b;
  s.xi = xi;
  return s;
}

void HazardState::check() const {
  for (std::size_t v = 0; v < intervals(); ++v) {
    if (!(hazard.lambda()[v] > 0.0) || !std::isfinite(hazard.lambda()[v]))
      throw std::logic_error("hazard rate " + std::to_string(v) + " not positive");
    if (!(c[v] > 0.0) || !std::isfinite(c[v])) throw std::logic_error("latent c " + std::to_string(v) + " not positive");
    if (u[v] < 0) throw std::logic_error("latent u " + std::to_string(v) + " negative");
  }
}

MHTuner::MHTuner(std::size_t dims, double initial_sd, std::size_t window)
    : sds_(dims, initial_sd),
      win_acc_(dims, 0),
      win_prop_(dims, 0),
      total_acc_(dims, 0),
      total_prop_(dims, 0),
      window_(std::max<std::size_t>(1, window)) {}

void MHTuner::record(std::size_t d, bool accepted) {
  ++win_prop_[d];
  ++total_prop_[d];
  if (accepted) {
    ++win_acc_[d];
    ++total_acc_[d];
  }
}

void MHTuner::end_iteration() {
  if (frozen_ || ++iter_in_window_ < window_) return;
  iter_in_window_ = 0;
  for (std::size_t d = 0; d < sds_.size(); ++d) {
    if (win_prop_[d] > 0) {
      const double rate = static_cast<double>(win_acc_[d]) / static_cast<double>(win_prop_[d]);
      const double r[1] = {rate};
      const double s[1] = {sds_[d]};
      sds_[d] = tune(s, r)[0];
    }
    win_acc_[d] = win_prop_[d] = 0;
  }
}

void MHTuner::freeze() {
  frozen_ = true;
  std::fill(total_acc_.begin(), total_acc_.end(), 0);
  std::fill(total_prop_.begin(), total_prop_.end(), 0);
}

double MHTuner::acceptance_rate(std::size_t d) const {
  return total_prop_[d] == 0 ? 0.0 : static_cast<double>(total_acc_[d]) / static_cast<double>(total_prop_[d]);
}

std::vector<double> tune(std::span<const double> sds, std::span<const double> rates, double target) {
  std::vector<double> out(sds.begin(), sds.end());
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (rates[d] > target) {
      out[d] *= std::exp(0.1);
    } else if (rates[d] < target) {
      out[d] *= std::exp(-0.1);
    }
  }
  return out;
}

HazardExposure make_exposure(const Dataset& data, const PiecewiseHazard& hazard) {
  HazardExposure e;
  e.interval.resize(data.n());
  e.partial.resize(data.n());
  e.deaths.assign(hazard.intervals(), 0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const std::size_t v = hazard.interval_of(data[i].t);
    e.interval[i] = v;
    e.partial[i] = data[i].t - hazard.lower(v);
    e.deaths[v] += data[i].delta;
  }
  return e;
}

std::vector<double> risk_exposure(std::span<const double> etas, const HazardExposure& exposure,
                                  const PiecewiseHazard& hazard) {
  const std::size_t V = hazard.intervals();
  // beyond[v]: total e^eta of subjects whose time lies strictly past interval v.
  std::vector<double> partial(V, 0.0), ending(V, 0.0);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const double w = std::exp(etas[i]);
    partial[exposure.interval[i]] += w * exposure.partial[i];
    ending[exposure.interval[i]] += w;
  }
  std::vector<double> out(V, 0.0);
  double beyond = 0.0;
  for (std::size_t v = V; v-- > 0;) {
    out[v] = partial[v] + beyond * (hazard.taus()[v] - hazard.lower(v));
    beyond += ending[v];
  }
  return out;
}

double c_log_target(const HazardState& s, std::size_t v, double c) {
  const auto& lam = s.hazard.lambda();
  const double u = static_cast<double>(s.u[v]);
  const double ulogc = s.u[v] == 0 ? 0.0 : u * std::log(c);
  return ulogc - (lam[v] + lam[v + 1] + 1.0 / s.xi) * c + (s.shape_increment(v + 1) + u) * std::log(s.b + c);
}

void update_c(HazardState& s, MHTuner& tuner, Rng& rng) {
  const std::size_t V = s.intervals();
  for (std::size_t v = 0; v + 1 < V; ++v) {
    const double cur = s.c[v];
    // On the log scale the conditional is close to a log-Gamma with shape
    // about 2 u_v + 1; u_v is fixed during this update, so shrinking the
    // step by that precision keeps the walk symmetric.
    const double scale = 1.0 / std::sqrt(1.0 + 2.0 * static_cast<double>(s.u[v]));
    const double step = tuner.sd(v) * scale * rng.normal();
    const double prop = cur * std::exp(step);
    bool accept = false;
    if (prop > 0.0 && std::isfinite(prop)) {
      // Log-scale random walk: the Jacobian adds log(prop) - log(cur) = step.
      const double log_ratio = c_log_target(s, v, prop) - c_log_target(s, v, cur) + step;
      accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
    } else {
      rng.uniform();
    }
    if (accept) s.c[v] = prop;
    tuner.record(v, accept);
  }
  // Last interval: Gamma(u_V + 1, lambda_V + 1/xi) exactly.
  const double draw = rng.gamma(static_cast<double>(s.u[V - 1]) + 1.0, s.hazard.lambda()[V - 1] + 1.0 / s.xi);
  s.c[V - 1] = std::max(draw, std::numeric_limits<double>::min());
}

namespace {

// log of c lambda_v lambda_{v+1} (b + c), the base of the u_v pmf.
double u_log_base(const HazardState& s, std::size_t v) {
  const auto& lam = s.hazard.lambda();
  return std::log(s.c[v]) + std::log(lam[v]) + std::log(lam[v + 1]) + std::log(s.b + s.c[v]);
}

// Unnormalised log pmf via the ratio recurrence; when `truncate` is set the
// scan stops once terms fall kLogCutoff below the maximum past the mode
// (the log pmf is concave in u).
std::vector<double> u_log_terms(const HazardState& s, std::size_t v, std::int64_t grid_cap, bool truncate) {
  const double log_x = u_log_base(s, v);
  const double alpha = s.shape_increment(v + 1);
  std::vector<double> lp;
  lp.reserve(truncate ? 64 : static_cast<std::size_t>(grid_cap + 1));
  double cur = -std::lgamma(alpha);
  double best = cur;
  lp.push_back(cur);
  for (std::int64_t u = 0; u < grid_cap; ++u) {
    const double du = static_cast<double>(u);
    const double inc = log_x - std::log(du + 1.0) - std::log(alpha + du);
    cur += inc;
    lp.push_back(cur);
    best = std::max(best, cur);
    if (truncate && inc < 0.0 && cur < best - kLogCutoff) break;
  }
  return lp;
}

}  // namespace

std::vector<double> u_log_pmf(const HazardState& s, std::size_t v, std::int64_t grid_cap) {
  auto lp = u_log_terms(s, v, grid_cap, false);
  const double norm = log_sum_exp(lp);
  if (!std::isfinite(norm)) throw NumericError("u_v pmf normalisation is not finite");
  for (auto& x : lp) x -= norm;
  return lp;
}

void update_u(HazardState& s, Rng& rng, std::int64_t grid_cap) {
  if (grid_cap < 1) throw ConfigError("u grid cap must be >= 1");
  const std::size_t V = s.intervals();
  for (std::size_t v = 0; v + 1 < V; ++v) {
    const auto lp = u_log_terms(s, v, grid_cap, true);
    if (!std::isfinite(log_sum_exp(lp))) throw NumericError("u_v pmf normalisation is not finite");
    s.u[v] = static_cast<std::int64_t>(rng.categorical_log(lp));
  }
  s.u[V - 1] = static_cast<std::int64_t>(rng.poisson(s.c[V - 1] * s.hazard.lambda()[V - 1]));
}

GammaParams lambda_conditional(const HazardState& s, std::size_t v, std::int64_t deaths, double exposure) {
  double shape = static_cast<double>(deaths + s.u[v]) + s.shape_increment(v);
  double rate = s.b + s.c[v] + exposure;
  if (v > 0) {
    shape += static_cast<double>(s.u[v - 1]);
    rate += s.c[v - 1];
  }
  return {shape, rate};
}

void update_lambda(HazardState& s, std::span<const double> etas, const HazardExposure& exposure, Rng& rng) {
  const std::size_t V = s.intervals();
  const auto risk = risk_exposure(etas, exposure, s.hazard);
  std::vector<double> lambda = s.hazard.lambda();
  // Sequential in ascending v; the RNG stream order is part of the kernel.
  for (std::size_t v = 0; v < V; ++v) {
    const auto g = lambda_conditional(s, v, exposure.deaths[v], risk[v]);
    if (!(g.shape > 0.0) || !(g.rate > 0.0) || !std::isfinite(g.shape) || !std::isfinite(g.rate)) {
      std::ostringstream msg;
      msg << "degenerate lambda conditional at v=" << v + 1 << ": shape=" << g.shape << " rate=" << g.rate
          << " (d=" << exposure.deaths[v] << ", u=" << s.u[v] << ", c=" << s.c[v] << ", b=" << s.b
          << ", exposure=" << risk[v] << ")";
      throw NumericError(msg.str());
    }
    lambda[v] = positive_rate(rng.gamma(g.shape, g.rate));
  }
  s.hazard.set_lambda(std::move(lambda));
}

std::vector<std::vector<double>> prior_predictive_draws(const LambdaStarSpec& spec, double b, double xi,
                                                        std::span<const double> taus, std::size_t count, Rng& rng) {
  const auto star = lambda_star_rates(spec, taus);
  const std::size_t V = taus.size();
  std::vector<std::vector<double>> paths(count, std::vector<double>(V));
  for (auto& path : paths) {
    path[0] = positive_rate(rng.gamma(b * star[0], b));
    for (std::size_t v = 0; v + 1 < V; ++v) {
      const double c = rng.exponential(1.0 / xi);
      const auto u = static_cast<double>(rng.poisson(c * path[v]));
      path[v + 1] = positive_rate(rng.gamma(b * star[v + 1] + u, b + c));
    }
  }
  return paths;
}

void write_hazard_summary(std::ostream& out, std::span<const double> taus,
                          const std::vector<std::vector<double>>& lambda_draws) {
  out << "v,tau_lo,tau_hi,lambda_mean,lambda_lo95,lambda_hi95\n";
  std::vector<double> col(lambda_draws.size());
  for (std::size_t v = 0; v < taus.size(); ++v) {
    for (std::size_t m = 0; m < lambda_draws.size(); ++m) col[m] = lambda_draws[m][v];
    out << v + 1 << ',' << format_double(v == 0 ? 0.0 : taus[v - 1]) << ',' << format_double(taus[v]) << ','
        << format_double(mean(col)) << ',' << format_double(quantile(col, 0.025)) << ','
        << format_double(quantile(col, 0.975)) << '\n';
  }
}

}  // namespace bnpcea
