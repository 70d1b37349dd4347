#pragma once

#include <span>
#include <string>
#include <vector>

#include "bnpcea/data.hpp"
#include "bnpcea/local_models.hpp"
#include "bnpcea/random.hpp"

namespace bnpcea {

enum class Centering { null, user, ols };

Centering parse_centering(const std::string& name);
std::string to_string(Centering c);

struct BaseMeasureConfig {
  double nu_theta = 10.0;
  double nu_omega = 10.0;
  double a_0 = 3.0;
  Centering centering = Centering::null;
  // Used by `user` centering (and for theta under `ols`); empty means zero.
  std::vector<double> theta_center;
  std::vector<double> beta_center;
};

// Independent product base measure G0(omega, theta) = G0w(beta, phi) G0t(theta)
// with diagonal Gaussians on the coefficients and IG(a_0, scale) on phi.
struct BaseMeasure {
  std::vector<double> theta_center;
  std::vector<double> theta_var;
  std::vector<double> beta_center;
  std::vector<double> beta_var;
  double phi_shape = 3.0;
  double phi_scale = 4.0;

  CostParams draw_omega(Rng& rng) const;
  SurvParams draw_theta(Rng& rng) const;
  // Unnormalised Gaussian log prior of theta.
  double theta_log_prior(std::span<const double> theta) const;
  double phi_mean() const { return phi_scale / (phi_shape - 1.0); }
};

// Empirical-Bayes construction. Null mode centres everything at zero with
// coefficient variances nu * (outcome variance / covariate variance); OLS mode
// centres cost coefficients at the least-squares fit with variances
// nu_omega * SE^2. The phi prior is IG(a_0, s^2 (a_0 + 1)) with s^2 the
// empirical (log-)cost variance. A rank-deficient OLS design falls back to
// null mode and appends a message to `warnings`.
BaseMeasure build_base_measure(const Dataset& data, CostModel model, const BaseMeasureConfig& config,
                               std::vector<std::string>* warnings = nullptr);

struct OlsFit {
  std::vector<double> coef;
  std::vector<double> se;
  double sigma2 = 0.0;
  bool full_rank = false;
};
// Least squares of (log-)cost on (t, a, l).
OlsFit cost_ols(const Dataset& data, CostModel model);

}  // namespace bnpcea
