#pragma once

#include <span>
#include <vector>

#include "bnpcea/data.hpp"

namespace bnpcea {

// Cost regression parameters. beta is laid out as (T | A | L_1..L_q);
// phi is the variance of the Gaussian (or of log-cost for log-normal).
struct CostParams {
  std::vector<double> beta;
  double phi = 1.0;

  bool operator==(const CostParams&) const = default;
};

// Log-hazard-ratio coefficients laid out as (A | L_1..L_q).
struct SurvParams {
  std::vector<double> theta;

  bool operator==(const SurvParams&) const = default;
};

// Step baseline hazard on an equally spaced grid 0 < tau_1 < ... < tau_V.
// Interval v (0-based) is (tau_{v-1}, tau_v] with tau_{-1} = 0.
class PiecewiseHazard {
 public:
  PiecewiseHazard() = default;
  PiecewiseHazard(std::vector<double> taus, std::vector<double> lambda);

  std::size_t intervals() const { return taus_.size(); }
  const std::vector<double>& taus() const { return taus_; }
  const std::vector<double>& lambda() const { return lambda_; }
  double width() const { return width_; }
  double horizon() const { return taus_.back(); }
  double lower(std::size_t v) const { return v == 0 ? 0.0 : taus_[v - 1]; }

  void set_lambda(std::vector<double> lambda);
  void set_lambda(std::size_t v, double value);

  // Interval holding t, for 0 < t <= horizon. Throws DomainError otherwise.
  std::size_t interval_of(double t) const;
  // Baseline cumulative hazard at the lower edge of interval v (v may equal V).
  double cumulative_at_edge(std::size_t v) const { return cumulative_[v]; }
  // Baseline (eta = 0) cumulative hazard at t; Lambda_0(0) = 0.
  double baseline_cumulative(double t) const;

 private:
  void refresh();

  std::vector<double> taus_;
  std::vector<double> lambda_;
  std::vector<double> cumulative_;
  double width_ = 0.0;
};

// Cost design row (t, a, l_1..l_q) dotted with beta.
double cost_mean(double t, int a, std::span<const double> l, std::span<const double> beta);
// Survival linear predictor (a, l_1..l_q) dotted with theta.
double linear_predictor(int a, std::span<const double> l, std::span<const double> theta);

double cost_loglik(double y, double t, int a, std::span<const double> l, const CostParams& omega, CostModel model);

// Lambda(t) = sum_v lambda_v e^eta Delta_v(t).
double cumulative_hazard(double t, double eta, const PiecewiseHazard& hazard);

// delta = 1: log lambda_v(t) + eta - Lambda(t); delta = 0: -Lambda(t).
double surv_loglik(double t, int delta, double eta, const PiecewiseHazard& hazard);

double joint_loglik(const Subject& s, const CostParams& omega, const SurvParams& theta,
                    const PiecewiseHazard& hazard, CostModel model);

}  // namespace bnpcea
