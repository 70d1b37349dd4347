#include "bnpcea/base_measure.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "bnpcea/errors.hpp"
#include "bnpcea/stats.hpp"

namespace bnpcea {

Centering parse_centering(const std::string& name) {
  if (name == "null") return Centering::null;
  if (name == "user") return Centering::user;
  if (name == "ols") return Centering::ols;
  throw ConfigError("unknown centering '" + name + "' (expected null, user or ols)");
}

std::string to_string(Centering c) {
  switch (c) {
    case Centering::null:
      return "null";
    case Centering::user:
      return "user";
    case Centering::ols:
      return "ols";
  }
  return "null";
}

CostParams BaseMeasure::draw_omega(Rng& rng) const {
  CostParams w;
  w.beta.resize(beta_center.size());
  for (std::size_t d = 0; d < beta_center.size(); ++d) w.beta[d] = rng.normal(beta_center[d], std::sqrt(beta_var[d]));
  w.phi = rng.inv_gamma(phi_shape, phi_scale);
  return w;
}

SurvParams BaseMeasure::draw_theta(Rng& rng) const {
  SurvParams s;
  s.theta.resize(theta_center.size());
  for (std::size_t d = 0; d < theta_center.size(); ++d) s.theta[d] = rng.normal(theta_center[d], std::sqrt(theta_var[d]));
  return s;
}

double BaseMeasure::theta_log_prior(std::span<const double> theta) const {
  double lp = 0.0;
  for (std::size_t d = 0; d < theta.size(); ++d) {
    const double r = theta[d] - theta_center[d];
    lp -= r * r / (2.0 * theta_var[d]);
  }
  return lp;
}

namespace {

double outcome(const Subject& s, CostModel model) { return model == CostModel::gaussian ? s.y : std::log(s.y); }

std::vector<double> cost_row(const Subject& s) {
  std::vector<double> x{s.t, static_cast<double>(s.a)};
  x.insert(x.end(), s.l.begin(), s.l.end());
  return x;
}

std::vector<double> surv_row(const Subject& s) {
  std::vector<double> x{static_cast<double>(s.a)};
  x.insert(x.end(), s.l.begin(), s.l.end());
  return x;
}

// Prior variance for the coefficient of one column: outcome_scale / var(x),
// or outcome_scale_const / mean(x)^2 for a constant column.
std::vector<double> coefficient_variances(const std::vector<std::vector<double>>& rows, double nu, double scale,
                                          double const_scale) {
  const std::size_t p = rows.front().size();
  std::vector<double> out(p);
  std::vector<double> col(rows.size());
  for (std::size_t d = 0; d < p; ++d) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][d];
    const double m = mean(col);
    const double v = variance(col);
    if (v > 1e-12 * (1.0 + m * m)) {
      out[d] = nu * scale / v;
    } else if (std::abs(m) > 0.0) {
      out[d] = nu * const_scale / (m * m);
    } else {
      out[d] = nu * scale;
    }
  }
  return out;
}

std::vector<double> sized_or_zero(const std::vector<double>& v, std::size_t p, const char* what) {
  if (v.empty()) return std::vector<double>(p, 0.0);
  if (v.size() != p) {
    throw ConfigError(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(p));
  }
  return v;
}

}  // namespace

OlsFit cost_ols(const Dataset& data, CostModel model) {
  const std::size_t n = data.n();
  const std::size_t p = data.q() + 2;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = cost_row(data[i]);
    for (std::size_t d = 0; d < p; ++d) X(i, d) = row[d];
    y(i) = outcome(data[i], model);
  }
  OlsFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (n <= p || static_cast<std::size_t>(qr.rank()) < p) return fit;
  const Eigen::VectorXd coef = qr.solve(y);
  const double rss = (y - X * coef).squaredNorm();
  fit.sigma2 = rss / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  fit.coef.assign(coef.data(), coef.data() + p);
  fit.se.resize(p);
  for (std::size_t d = 0; d < p; ++d) fit.se[d] = std::sqrt(fit.sigma2 * xtx_inv(d, d));
  fit.full_rank = true;
  return fit;
}

BaseMeasure build_base_measure(const Dataset& data, CostModel model, const BaseMeasureConfig& config,
                               std::vector<std::string>* warnings) {
  if (!(config.nu_theta > 0.0) || !(config.nu_omega > 0.0)) throw ConfigError("nu_theta and nu_omega must be > 0");
  if (!(config.a_0 > 0.0)) throw ConfigError("a_0 must be > 0");
  if (data.n() < 2) throw ValidationError("base measure needs at least 2 subjects");

  std::vector<std::vector<double>> cost_rows, surv_rows;
  std::vector<double> ys;
  for (const auto& s : data) {
    cost_rows.push_back(cost_row(s));
    surv_rows.push_back(surv_row(s));
    ys.push_back(outcome(s, model));
  }
  double s2 = variance(ys);
  if (!(s2 > 0.0)) s2 = 1e-8;
  const double ybar = mean(ys);
  const std::size_t p_cost = data.q() + 2;
  const std::size_t p_surv = data.q() + 1;

  BaseMeasure base;
  base.phi_shape = config.a_0;
  base.phi_scale = s2 * (config.a_0 + 1.0);
  base.theta_var = coefficient_variances(surv_rows, config.nu_theta, 1.0, 1.0);
  base.beta_var = coefficient_variances(cost_rows, config.nu_omega, s2, s2 + ybar * ybar);
  base.theta_center.assign(p_surv, 0.0);
  base.beta_center.assign(p_cost, 0.0);

  switch (config.centering) {
    case Centering::null:
      break;
    case Centering::user:
      base.theta_center = sized_or_zero(config.theta_center, p_surv, "theta_center");
      base.beta_center = sized_or_zero(config.beta_center, p_cost, "beta_center");
      break;
    case Centering::ols: {
      base.theta_center = sized_or_zero(config.theta_center, p_surv, "theta_center");
      const OlsFit fit = cost_ols(data, model);
      if (!fit.full_rank) {
        if (warnings) warnings->push_back("OLS design is rank deficient; cost base measure falls back to null centering");
        break;
      }
      base.beta_center = fit.coef;
      // Floor keeps the prior precision finite on noiseless data.
      for (std::size_t d = 0; d < p_cost; ++d)
        base.beta_var[d] = std::max(config.nu_omega * fit.se[d] * fit.se[d], 1e-12);
      break;
    }
  }
  return base;
}

}  // namespace bnpcea
