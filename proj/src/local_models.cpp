#include "bnpcea/local_models.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bnpcea/errors.hpp"

namespace bnpcea {

PiecewiseHazard::PiecewiseHazard(std::vector<double> taus, std::vector<double> lambda)
    : taus_(std::move(taus)), lambda_(std::move(lambda)) {
  if (taus_.empty() || taus_.size() != lambda_.size()) {
    throw ValidationError("hazard grid and rate vector must be non-empty and of equal length");
  }
  double prev = 0.0;
  for (double tau : taus_) {
    if (!(tau > prev)) throw ValidationError("hazard grid must be strictly increasing and positive");
    prev = tau;
  }
  width_ = taus_.front();
  refresh();
}

void PiecewiseHazard::set_lambda(std::vector<double> lambda) {
  if (lambda.size() != taus_.size()) throw ValidationError("hazard rate vector has wrong length");
  lambda_ = std::move(lambda);
  refresh();
}

void PiecewiseHazard::set_lambda(std::size_t v, double value) {
  lambda_[v] = value;
  refresh();
}

void PiecewiseHazard::refresh() {
  cumulative_.assign(taus_.size() + 1, 0.0);
  for (std::size_t v = 0; v < taus_.size(); ++v) {
    cumulative_[v + 1] = cumulative_[v] + lambda_[v] * (taus_[v] - lower(v));
  }
}

std::size_t PiecewiseHazard::interval_of(double t) const {
  if (!(t > 0.0) || t > taus_.back()) {
    throw DomainError("time " + std::to_string(t) + " outside hazard grid (0, " + std::to_string(taus_.back()) + "]");
  }
  const std::size_t V = taus_.size();
  auto v = static_cast<std::size_t>(std::ceil(t / width_));
  v = v == 0 ? 0 : v - 1;
  if (v >= V) v = V - 1;
  while (v > 0 && t <= taus_[v - 1]) --v;
  while (v + 1 < V && t > taus_[v]) ++v;
  return v;
}

double PiecewiseHazard::baseline_cumulative(double t) const {
  if (t == 0.0) return 0.0;
  const std::size_t v = interval_of(t);
  return cumulative_[v] + lambda_[v] * (t - lower(v));
}

double cost_mean(double t, int a, std::span<const double> l, std::span<const double> beta) {
  double mu = beta[0] * t + beta[1] * a;
  for (std::size_t k = 0; k < l.size(); ++k) mu += beta[2 + k] * l[k];
  return mu;
}

double linear_predictor(int a, std::span<const double> l, std::span<const double> theta) {
  double eta = theta[0] * a;
  for (std::size_t k = 0; k < l.size(); ++k) eta += theta[1 + k] * l[k];
  return eta;
}

double cost_loglik(double y, double t, int a, std::span<const double> l, const CostParams& omega, CostModel model) {
  const double mu = cost_mean(t, a, l, omega.beta);
  double out = 0.0;
  if (model == CostModel::gaussian) {
    const double r = y - mu;
    out = -0.5 * std::log(2.0 * std::numbers::pi * omega.phi) - r * r / (2.0 * omega.phi);
  } else {
    const double ly = std::log(y);
    const double r = ly - mu;
    out = -ly - 0.5 * std::log(2.0 * std::numbers::pi * omega.phi) - r * r / (2.0 * omega.phi);
  }
  if (!std::isfinite(out)) throw NumericError("non-finite cost log-density");
  return out;
}

double cumulative_hazard(double t, double eta, const PiecewiseHazard& hazard) {
  if (t < 0.0) throw DomainError("negative time in cumulative hazard");
  return std::exp(eta) * hazard.baseline_cumulative(t);
}

double surv_loglik(double t, int delta, double eta, const PiecewiseHazard& hazard) {
  const double cum = cumulative_hazard(t, eta, hazard);
  if (delta == 0) return -cum;
  return std::log(hazard.lambda()[hazard.interval_of(t)]) + eta - cum;
}

double joint_loglik(const Subject& s, const CostParams& omega, const SurvParams& theta,
                    const PiecewiseHazard& hazard, CostModel model) {
  const double eta = linear_predictor(s.a, s.l, theta.theta);
  return cost_loglik(s.y, s.t, s.a, s.l, omega, model) + surv_loglik(s.t, s.delta, eta, hazard);
}

}  // namespace bnpcea
