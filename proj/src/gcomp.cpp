#include "bnpcea/gcomp.hpp"

#include <cmath>
#include <limits>

#include "bnpcea/edp_sampler.hpp"
#include "bnpcea/errors.hpp"
#include "bnpcea/stats.hpp"

namespace bnpcea {

namespace {

// expm1(x) / x, continuous at 0.
double exprel(double x) { return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

struct ArmMeans {
  double time;
  double cost;
};

ArmMeans arm_means(int a, std::span<const double> l, const CostParams& omega, const SurvParams& theta,
                   const PiecewiseHazard& hazard, CostModel model) {
  const double eta = linear_predictor(a, l, theta.theta);
  const double scale = std::exp(eta);
  const auto& lam = hazard.lambda();
  // Intercept of the cost mean excluding the time term.
  double lin = omega.beta[1] * a;
  for (std::size_t d = 0; d < l.size(); ++d) lin += omega.beta[2 + d] * l[d];
  const double beta_t = omega.beta[0];

  double rmst = 0.0;
  double log_surv = 0.0;  // log S at the lower edge of the current interval
  double lognormal_cost = 0.0;
  const double log_offset = lin + 0.5 * omega.phi;
  for (std::size_t v = 0; v < hazard.intervals(); ++v) {
    const double lo = hazard.lower(v);
    const double width = hazard.taus()[v] - lo;
    const double rate = lam[v] * scale;
    const double x = rate * width;
    const double surv = std::exp(log_surv);
    rmst += surv * width * exprel(-x);
    if (model == CostModel::lognormal && rate > 0.0 && surv > 0.0) {
      // Integral of exp(mu(t) + phi/2) rate S(t) over the interval.
      lognormal_cost += std::exp(log_offset + beta_t * lo + std::log(rate) + log_surv + std::log(width)) *
                        exprel((beta_t - rate) * width);
    }
    log_surv -= x;
  }
  double cost;
  if (model == CostModel::gaussian) {
    cost = beta_t * rmst + lin;
  } else {
    cost = lognormal_cost + std::exp(log_offset + beta_t * hazard.horizon() + log_surv);
  }
  if (!std::isfinite(rmst) || !std::isfinite(cost)) throw NumericError("non-finite expected outcome");
  return {rmst, cost};
}

}  // namespace

double restricted_mean(double eta, const PiecewiseHazard& hazard) {
  const double scale = std::exp(eta);
  double rmst = 0.0;
  double log_surv = 0.0;
  for (std::size_t v = 0; v < hazard.intervals(); ++v) {
    const double width = hazard.taus()[v] - hazard.lower(v);
    const double x = hazard.lambda()[v] * scale * width;
    rmst += std::exp(log_surv) * width * exprel(-x);
    log_surv -= x;
  }
  return rmst;
}

double expected_cost(int a, std::span<const double> l, const CostParams& omega, const SurvParams& theta,
                     const PiecewiseHazard& hazard, CostModel model) {
  return arm_means(a, l, omega, theta, hazard, model).cost;
}

double expected_mv(int a, std::span<const double> l, const CostParams& omega, const SurvParams& theta,
                   const PiecewiseHazard& hazard, double kappa, CostModel model) {
  const auto m = arm_means(a, l, omega, theta, hazard, model);
  return kappa * m.time - m.cost;
}

std::vector<Contrast> subject_contrasts(const Draw& draw, const Dataset& data, const PiecewiseHazard& hazard,
                                        CostModel model) {
  std::vector<Contrast> out(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& omega = draw.omega_of(i);
    const auto& theta = draw.theta_of(i);
    const auto treated = arm_means(1, data[i].l, omega, theta, hazard, model);
    const auto control = arm_means(0, data[i].l, omega, theta, hazard, model);
    out[i] = {treated.time - control.time, treated.cost - control.cost};
  }
  return out;
}

std::vector<double> draw_bootstrap_weights(std::size_t n, Rng& rng, BootstrapPrior prior) {
  if (n == 0) throw ValidationError("bootstrap weights need n >= 1");
  const double alpha = prior == BootstrapPrior::dir_inv_n ? 1.0 / static_cast<double>(n) : 1.0;
  return rng.dirichlet(n, alpha);
}

std::uint64_t bootstrap_seed(std::uint64_t chain_seed, std::int64_t iteration) {
  return mix_seed(mix_seed(chain_seed, 0xB0075742ULL), static_cast<std::uint64_t>(iteration));
}

void fill_estimands(Draw& draw, const Dataset& data, const std::vector<double>& taus, const RunConfig& config) {
  const auto hazard = draw.hazard(taus);
  const auto contrasts = subject_contrasts(draw, data, hazard, config.cost_model);
  Rng rng(bootstrap_seed(config.seed, draw.iteration));
  draw.weights = draw_bootstrap_weights(data.n(), rng, config.bootstrap);
  double dt = 0.0, dc = 0.0;
  for (std::size_t i = 0; i < contrasts.size(); ++i) {
    dt += draw.weights[i] * contrasts[i].d_time;
    dc += draw.weights[i] * contrasts[i].d_cost;
  }
  draw.delta_time = dt;
  draw.delta_cost = dc;
  draw.psi.clear();
  for (double kappa : config.kappa_grid) draw.psi.push_back(kappa * dt - dc);
}

IntervalSummary summarize_nmb(std::span<const double> draws) {
  if (draws.size() < 2) throw ValidationError("posterior summary needs at least 2 draws");
  return {mean(draws), quantile(draws, 0.025), quantile(draws, 0.975)};
}

std::vector<double> ceac(const DrawStore& store) {
  const std::size_t K = store.kappa_grid().size();
  std::vector<double> prob(K, 0.0);
  if (store.draws.empty()) return prob;
  for (const auto& d : store.draws)
    for (std::size_t k = 0; k < K; ++k) prob[k] += d.psi.at(k) > 0.0 ? 1.0 : 0.0;
  for (auto& p : prob) p /= static_cast<double>(store.draws.size());
  return prob;
}

std::vector<double> ceac(const DrawStore& store, std::span<const double> kappas) {
  std::vector<double> prob(kappas.size(), 0.0);
  if (store.draws.empty()) return prob;
  for (const auto& d : store.draws)
    for (std::size_t k = 0; k < kappas.size(); ++k) prob[k] += kappas[k] * d.delta_time - d.delta_cost > 0.0 ? 1.0 : 0.0;
  for (auto& p : prob) p /= static_cast<double>(store.draws.size());
  return prob;
}

IcerDraws icer(const DrawStore& store) {
  IcerDraws out;
  std::vector<double> kept;
  for (const auto& d : store.draws) {
    const bool flag = std::abs(d.delta_time) < IcerDraws::kIcerFloor;
    out.flagged.push_back(flag);
    if (flag) {
      ++out.flagged_count;
      out.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.ratio.push_back(d.delta_cost / d.delta_time);
      kept.push_back(out.ratio.back());
    }
  }
  if (kept.size() >= 2) out.summary = summarize_nmb(kept);
  return out;
}

std::vector<std::vector<double>> subject_psi_draws(const DrawStore& store, const Dataset& data, double kappa) {
  std::vector<std::vector<double>> out;
  out.reserve(store.draws.size());
  for (const auto& d : store.draws) {
    const auto contrasts = subject_contrasts(d, data, d.hazard(store.taus), store.config.cost_model);
    std::vector<double> row(contrasts.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = contrasts[i].psi(kappa);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<IteRow> ite_summary(const DrawStore& store, const Dataset& data, double kappa) {
  const auto psi = subject_psi_draws(store, data, kappa);
  std::vector<IteRow> rows(data.n());
  std::vector<double> col(psi.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t m = 0; m < psi.size(); ++m) col[m] = psi[m][i];
    rows[i].i = i;
    if (col.empty()) continue;
    rows[i].mean = mean(col);
    rows[i].lo = quantile(col, 0.025);
    rows[i].hi = quantile(col, 0.975);
  }
  return rows;
}

Dataset prepare_for_store(const Dataset& raw, const DrawStore& store) {
  Dataset data = prepare_dataset(raw, store.config);
  if (data.n() != store.n || data.q() != store.q) {
    throw ValidationError("dataset shape (n=" + std::to_string(data.n()) + ", q=" + std::to_string(data.q()) +
                          ") does not match the draw store (n=" + std::to_string(store.n) +
                          ", q=" + std::to_string(store.q) + ")");
  }
  return data;
}

}  // namespace bnpcea
