#include "bnpcea/edp_sampler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bnpcea/errors.hpp"
#include "bnpcea/gcomp.hpp"

namespace bnpcea {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Stream id of the chain RNG; bootstrap streams are keyed by iteration.
constexpr std::uint64_t kChainStream = 0xC4A1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace

// ---------------------------------------------------------------------------
// SubjectCache

SubjectCache::SubjectCache(const Dataset& data, CostModel model)
    : p_cost_(data.q() + 2), p_surv_(data.q() + 1) {
  const std::size_t n = data.n();
  x_.reserve(n * p_cost_);
  z_.reserve(n * p_surv_);
  for (const auto& s : data) {
    x_.push_back(s.t);
    x_.push_back(static_cast<double>(s.a));
    z_.push_back(static_cast<double>(s.a));
    for (double l : s.l) {
      x_.push_back(l);
      z_.push_back(l);
    }
    if (model == CostModel::lognormal) {
      y_.push_back(std::log(s.y));
      jacobian_.push_back(-std::log(s.y));
    } else {
      y_.push_back(s.y);
      jacobian_.push_back(0.0);
    }
    t_.push_back(s.t);
    delta_.push_back(s.delta);
  }
  cumhaz_.assign(n, 0.0);
  log_rate_.assign(n, 0.0);
}

void SubjectCache::refresh_hazard(const PiecewiseHazard& hazard) {
  for (std::size_t i = 0; i < n(); ++i) {
    const std::size_t v = hazard.interval_of(t_[i]);
    cumhaz_[i] = hazard.baseline_cumulative(t_[i]);
    log_rate_[i] = std::log(hazard.lambda()[v]);
  }
}

double SubjectCache::eta(std::size_t i, const SurvParams& theta) const { return dot(surv_row(i), theta.theta); }

double SubjectCache::cost_loglik(std::size_t i, const CostParams& omega) const {
  const double r = y_[i] - dot(cost_row(i), omega.beta);
  return temperature *
         (-0.5 * (std::log(2.0 * std::numbers::pi * omega.phi) + r * r / omega.phi) + jacobian_[i]);
}

double SubjectCache::surv_loglik(std::size_t i, const SurvParams& theta) const {
  const double e = eta(i, theta);
  return temperature * (delta_[i] * (log_rate_[i] + e) - cumhaz_[i] * std::exp(e));
}

// ---------------------------------------------------------------------------
// EDPState

std::size_t EDPState::clusters() const {
  return static_cast<std::size_t>(std::count_if(omegas.begin(), omegas.end(), [](const auto& o) { return o.active; }));
}

std::size_t EDPState::subclusters() const {
  std::size_t k = 0;
  for (const auto& o : omegas)
    if (o.active) k += o.active_subs;
  return k;
}

int EDPState::open_omega(CostParams omega) {
  std::size_t j = 0;
  while (j < omegas.size() && omegas[j].active) ++j;
  if (j == omegas.size()) omegas.emplace_back();
  auto& slot = omegas[j];
  slot.active = true;
  slot.omega = std::move(omega);
  slot.count = 0;
  slot.subs.clear();
  slot.active_subs = 0;
  return static_cast<int>(j);
}

int EDPState::open_theta(int j, SurvParams theta) {
  auto& subs = omegas[j].subs;
  std::size_t k = 0;
  while (k < subs.size() && subs[k].active) ++k;
  if (k == subs.size()) subs.emplace_back();
  subs[k] = ThetaSlot{true, std::move(theta), 0};
  ++omegas[j].active_subs;
  return static_cast<int>(k);
}

void EDPState::add(std::size_t i, ClusterLabel lab) {
  assignments[i] = lab;
  ++omegas[lab.j].count;
  ++omegas[lab.j].subs[lab.k].count;
}

void EDPState::remove(std::size_t i) {
  const ClusterLabel lab = assignments[i];
  auto& o = omegas[lab.j];
  auto& t = o.subs[lab.k];
  --o.count;
  if (--t.count == 0) {
    t.active = false;
    --o.active_subs;
  }
  if (o.count == 0) o.active = false;
  assignments[i] = {-1, -1};
}

void EDPState::check_invariants() const {
  std::vector<std::vector<std::size_t>> counts(omegas.size());
  for (std::size_t j = 0; j < omegas.size(); ++j) counts[j].assign(omegas[j].subs.size(), 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto [j, k] = assignments[i];
    if (j < 0 || static_cast<std::size_t>(j) >= omegas.size() || k < 0 ||
        static_cast<std::size_t>(k) >= omegas[j].subs.size()) {
      throw std::logic_error("subject " + std::to_string(i) + " has an out-of-range label");
    }
    if (!omegas[j].active || !omegas[j].subs[k].active) {
      throw std::logic_error("subject " + std::to_string(i) + " assigned to an inactive cluster");
    }
    ++counts[j][k];
  }
  std::size_t total = 0;
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    const auto& o = omegas[j];
    std::size_t nj = 0, active = 0;
    for (std::size_t k = 0; k < o.subs.size(); ++k) {
      const bool occupied = counts[j][k] > 0;
      if (o.active && occupied != o.subs[k].active) throw std::logic_error("subcluster activity mismatch");
      if (o.active && o.subs[k].active && o.subs[k].count != counts[j][k])
        throw std::logic_error("subcluster count mismatch");
      nj += counts[j][k];
      active += (o.active && o.subs[k].active) ? 1 : 0;
    }
    if ((nj > 0) != o.active) throw std::logic_error("cluster activity mismatch");
    if (o.active && (o.count != nj || o.active_subs != active)) throw std::logic_error("cluster count mismatch");
    total += nj;
  }
  if (total != assignments.size()) throw std::logic_error("occupancy does not sum to n");
}

EDPState EDPState::single(std::size_t n, CostParams omega, SurvParams theta, double alpha_omega,
                          double alpha_theta) {
  EDPState s;
  s.alpha_omega = alpha_omega;
  s.alpha_theta = alpha_theta;
  s.assignments.assign(n, {-1, -1});
  const int j = s.open_omega(std::move(omega));
  const int k = s.open_theta(j, std::move(theta));
  for (std::size_t i = 0; i < n; ++i) s.add(i, {j, k});
  return s;
}

Draw EDPState::snapshot(std::int64_t iteration) const {
  Draw d;
  d.iteration = iteration;
  d.assignments = assignments;
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    if (!omegas[j].active) continue;
    d.omegas[static_cast<int>(j)] = omegas[j].omega;
    for (std::size_t k = 0; k < omegas[j].subs.size(); ++k) {
      if (omegas[j].subs[k].active) d.thetas[{static_cast<int>(j), static_cast<int>(k)}] = omegas[j].subs[k].theta;
    }
  }
  d.alpha_omega = alpha_omega;
  d.alpha_theta = alpha_theta;
  return d;
}

// ---------------------------------------------------------------------------
// Memberships

namespace {

void fill_membership_weights(std::vector<MembershipOption>& out, const EDPState& state, const SubjectCache& cache,
                             std::size_t i, std::span<const SurvParams> aux_theta_per_j,
                             const CostParams& aux_omega, const SurvParams& aux_theta) {
  out.clear();
  const double log_alpha_theta = safe_log(state.alpha_theta);
  for (std::size_t j = 0; j < state.omegas.size(); ++j) {
    const auto& o = state.omegas[j];
    if (!o.active) continue;
    const double nj = static_cast<double>(o.count);
    const double cost = cache.cost_loglik(i, o.omega);
    const double head = std::log(nj) - std::log(nj + state.alpha_theta) + cost;
    for (std::size_t k = 0; k < o.subs.size(); ++k) {
      const auto& t = o.subs[k];
      if (!t.active) continue;
      out.push_back({{static_cast<int>(j), static_cast<int>(k)},
                     head + std::log(static_cast<double>(t.count)) + cache.surv_loglik(i, t.theta)});
    }
    out.push_back({{static_cast<int>(j), -1}, head + log_alpha_theta + cache.surv_loglik(i, aux_theta_per_j[j])});
  }
  out.push_back({{-1, -1},
                 safe_log(state.alpha_omega) + cache.cost_loglik(i, aux_omega) + cache.surv_loglik(i, aux_theta)});
}

}  // namespace

std::vector<MembershipOption> membership_weights(const EDPState& state, const SubjectCache& cache, std::size_t i,
                                                 std::span<const SurvParams> aux_theta_per_j,
                                                 const CostParams& aux_omega, const SurvParams& aux_theta) {
  std::vector<MembershipOption> out;
  fill_membership_weights(out, state, cache, i, aux_theta_per_j, aux_omega, aux_theta);
  return out;
}

void update_memberships(EDPState& state, const SubjectCache& cache, const BaseMeasure& base, Rng& rng) {
  std::vector<MembershipOption> options;
  std::vector<double> logw;
  std::vector<SurvParams> aux_theta_per_j;
  for (std::size_t i = 0; i < state.assignments.size(); ++i) {
    const ClusterLabel old = state.assignments[i];
    const bool omega_singleton = state.omegas[old.j].count == 1;
    const bool theta_singleton = state.omegas[old.j].subs[old.k].count == 1;
    // A subject alone in its (sub)cluster hands its parameters over as the
    // auxiliary of the matching "new" option; this keeps the scan reversible.
    SurvParams freed_theta;
    CostParams freed_omega;
    if (theta_singleton) freed_theta = state.theta(old);
    if (omega_singleton) freed_omega = state.omega(old.j);
    state.remove(i);

    aux_theta_per_j.resize(state.omegas.size());
    for (std::size_t j = 0; j < state.omegas.size(); ++j) {
      if (!state.omegas[j].active) continue;
      if (theta_singleton && !omega_singleton && static_cast<int>(j) == old.j) {
        aux_theta_per_j[j] = freed_theta;
      } else {
        aux_theta_per_j[j] = base.draw_theta(rng);
      }
    }
    CostParams aux_omega = omega_singleton ? freed_omega : base.draw_omega(rng);
    SurvParams aux_theta = omega_singleton ? freed_theta : base.draw_theta(rng);

    fill_membership_weights(options, state, cache, i, aux_theta_per_j, aux_omega, aux_theta);
    logw.resize(options.size());
    for (std::size_t o = 0; o < options.size(); ++o) logw[o] = options[o].log_weight;
    const bool any_finite = std::any_of(logw.begin(), logw.end(), [](double w) { return w > kNegInf; });
    // Only reachable with a zero concentration and no other subjects.
    const std::size_t pick = any_finite ? rng.categorical_log(logw) : options.size() - 1;

    ClusterLabel lab = options[pick].label;
    if (lab.j < 0) {
      lab.j = state.open_omega(std::move(aux_omega));
      lab.k = state.open_theta(lab.j, std::move(aux_theta));
    } else if (lab.k < 0) {
      lab.k = state.open_theta(lab.j, std::move(aux_theta_per_j[lab.j]));
    }
    state.add(i, lab);
  }
}

// ---------------------------------------------------------------------------
// Cluster parameters

namespace {

struct CostSuffStats {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double count = 0.0;
};

CostSuffStats cost_stats(std::span<const std::size_t> members, const SubjectCache& cache) {
  const auto p = static_cast<Eigen::Index>(cache.cost_dims());
  CostSuffStats s{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p), 0.0};
  for (std::size_t i : members) {
    const auto row = cache.cost_row(i);
    const Eigen::Map<const Eigen::VectorXd> x(row.data(), p);
    s.xtx.selfadjointView<Eigen::Lower>().rankUpdate(x);
    s.xty += x * cache.outcome(i);
  }
  s.xtx = s.xtx.selfadjointView<Eigen::Lower>();
  s.xtx *= cache.temperature;
  s.xty *= cache.temperature;
  s.count = cache.temperature * static_cast<double>(members.size());
  return s;
}

// Precision and precision-weighted mean of beta | phi.
void beta_precision(const CostSuffStats& s, const BaseMeasure& base, double phi, Eigen::MatrixXd& prec,
                    Eigen::VectorXd& rhs) {
  const auto p = s.xty.size();
  prec = s.xtx / phi;
  rhs = s.xty / phi;
  for (Eigen::Index d = 0; d < p; ++d) {
    prec(d, d) += 1.0 / base.beta_var[d];
    rhs(d) += base.beta_center[d] / base.beta_var[d];
  }
}

double residual_ss(std::span<const std::size_t> members, const SubjectCache& cache, std::span<const double> beta) {
  double rss = 0.0;
  for (std::size_t i : members) {
    const double r = cache.outcome(i) - dot(cache.cost_row(i), beta);
    rss += r * r;
  }
  return rss * cache.temperature;
}

}  // namespace

NormalConditional cost_beta_conditional(std::span<const std::size_t> members, const SubjectCache& cache,
                                        const BaseMeasure& base, double phi) {
  Eigen::MatrixXd prec;
  Eigen::VectorXd rhs;
  beta_precision(cost_stats(members, cache), base, phi, prec, rhs);
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericError("cost coefficient precision is not positive definite");
  const Eigen::VectorXd mean = llt.solve(rhs);
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(prec.rows(), prec.cols()));
  NormalConditional out;
  out.mean.assign(mean.data(), mean.data() + mean.size());
  out.cov.resize(cov.rows());
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    out.cov[r].resize(cov.cols());
    for (Eigen::Index c = 0; c < cov.cols(); ++c) out.cov[r][c] = cov(r, c);
  }
  return out;
}

InvGammaParams cost_phi_conditional(std::span<const std::size_t> members, const SubjectCache& cache,
                                    const BaseMeasure& base, std::span<const double> beta) {
  return {base.phi_shape + 0.5 * cache.temperature * static_cast<double>(members.size()),
          base.phi_scale + 0.5 * residual_ss(members, cache, beta)};
}

CostParams draw_cost_params(std::span<const std::size_t> members, const SubjectCache& cache, const BaseMeasure& base,
                            double current_phi, Rng& rng) {
  Eigen::MatrixXd prec;
  Eigen::VectorXd rhs;
  beta_precision(cost_stats(members, cache), base, current_phi, prec, rhs);
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericError("cost coefficient precision is not positive definite");
  const Eigen::VectorXd mean = llt.solve(rhs);
  Eigen::VectorXd z(prec.rows());
  for (Eigen::Index d = 0; d < z.size(); ++d) z(d) = rng.normal();
  // prec = L L^T, so L^{-T} z has covariance prec^{-1}.
  const Eigen::VectorXd beta = mean + llt.matrixU().solve(z);
  CostParams out;
  out.beta.assign(beta.data(), beta.data() + beta.size());
  const auto ig = cost_phi_conditional(members, cache, base, out.beta);
  out.phi = std::max(rng.inv_gamma(ig.shape, ig.scale), std::numeric_limits<double>::min());
  return out;
}

double theta_log_target(std::span<const std::size_t> members, const SubjectCache& cache, const BaseMeasure& base,
                        std::span<const double> theta) {
  SurvParams t{std::vector<double>(theta.begin(), theta.end())};
  double lp = base.theta_log_prior(theta);
  for (std::size_t i : members) lp += cache.surv_loglik(i, t);
  return lp;
}

void update_theta(SurvParams& theta, std::span<const std::size_t> members, const SubjectCache& cache,
                  const BaseMeasure& base, MHTuner& tuner, Rng& rng) {
  const std::size_t m = members.size();
  std::vector<double> eta(m);
  for (std::size_t r = 0; r < m; ++r) eta[r] = cache.eta(members[r], theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, m)));
  // Data part of the log target as a function of the linear predictors.
  auto data_term = [&](double shift, std::size_t d) {
    double ll = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = members[r];
      const double e = eta[r] + shift * cache.surv_row(i)[d];
      ll += cache.delta(i) * e - cache.base_cumhaz(i) * std::exp(e);
    }
    return cache.temperature * ll;
  };
  for (std::size_t d = 0; d < theta.theta.size(); ++d) {
    const double step = tuner.sd(d) * scale * rng.normal();
    const double cur = theta.theta[d];
    const double prop = cur + step;
    const double rc = cur - base.theta_center[d];
    const double rp = prop - base.theta_center[d];
    const double log_ratio = data_term(step, d) - data_term(0.0, d) - (rp * rp - rc * rc) / (2.0 * base.theta_var[d]);
    const bool accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
    if (accept) {
      theta.theta[d] = prop;
      for (std::size_t r = 0; r < m; ++r) eta[r] += step * cache.surv_row(members[r])[d];
    }
    tuner.record(d, accept);
  }
}

void update_cluster_params(EDPState& state, const SubjectCache& cache, const BaseMeasure& base, MHTuner& theta_tuner,
                           Rng& rng) {
  std::vector<std::vector<std::size_t>> omega_members(state.omegas.size());
  std::vector<std::vector<std::vector<std::size_t>>> theta_members(state.omegas.size());
  for (std::size_t j = 0; j < state.omegas.size(); ++j) theta_members[j].resize(state.omegas[j].subs.size());
  for (std::size_t i = 0; i < state.assignments.size(); ++i) {
    const auto [j, k] = state.assignments[i];
    omega_members[j].push_back(i);
    theta_members[j][k].push_back(i);
  }
  for (std::size_t j = 0; j < state.omegas.size(); ++j) {
    auto& o = state.omegas[j];
    if (!o.active) continue;
    if (omega_members[j].empty()) throw std::logic_error("parameter update requested for an empty cluster");
    o.omega = draw_cost_params(omega_members[j], cache, base, o.omega.phi, rng);
    for (std::size_t k = 0; k < o.subs.size(); ++k) {
      if (!o.subs[k].active) continue;
      if (theta_members[j][k].empty()) throw std::logic_error("parameter update requested for an empty subcluster");
      update_theta(o.subs[k].theta, theta_members[j][k], cache, base, theta_tuner, rng);
    }
  }
}

// ---------------------------------------------------------------------------
// Concentrations (Gam(1,1) priors)

double alpha_omega_log_posterior(double alpha, std::size_t clusters, std::size_t n) {
  if (!(alpha > 0.0)) return kNegInf;
  return -alpha + static_cast<double>(clusters) * std::log(alpha) + std::lgamma(alpha) -
         std::lgamma(alpha + static_cast<double>(n));
}

double alpha_theta_log_posterior(double alpha, std::span<const std::size_t> subclusters_per_j,
                                 std::span<const std::size_t> n_per_j) {
  if (!(alpha > 0.0)) return kNegInf;
  double lp = -alpha;
  const double lg = std::lgamma(alpha);
  for (std::size_t j = 0; j < n_per_j.size(); ++j) {
    lp += static_cast<double>(subclusters_per_j[j]) * std::log(alpha) + lg -
          std::lgamma(alpha + static_cast<double>(n_per_j[j]));
  }
  return lp;
}

void update_concentrations(EDPState& state, MHTuner& alpha_tuner, Rng& rng) {
  const double n = static_cast<double>(state.assignments.size());
  const double J = static_cast<double>(state.clusters());
  // Escobar & West (1995) with a = b = 1.
  const double eta = rng.beta(state.alpha_omega + 1.0, n);
  const double rate = 1.0 - std::log(eta);
  const double odds = J / (n * rate);
  const double shape = rng.uniform() < odds / (1.0 + odds) ? J + 1.0 : J;
  state.alpha_omega = std::max(rng.gamma(shape, rate), std::numeric_limits<double>::min());

  std::vector<std::size_t> ks, ns;
  for (const auto& o : state.omegas) {
    if (!o.active) continue;
    ks.push_back(o.active_subs);
    ns.push_back(o.count);
  }
  const double cur = state.alpha_theta;
  const double step = alpha_tuner.sd(0) * rng.normal();
  const double prop = cur * std::exp(step);
  const double log_ratio =
      alpha_theta_log_posterior(prop, ks, ns) - alpha_theta_log_posterior(cur, ks, ns) + step;
  const bool accept = std::isfinite(log_ratio) && (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
  if (accept) state.alpha_theta = prop;
  alpha_tuner.record(0, accept);
}

// ---------------------------------------------------------------------------
// Chain

Dataset prepare_dataset(const Dataset& raw, const RunConfig& config) {
  return config.add_intercept ? with_intercept(raw) : raw;
}

Sampler::Sampler(const Dataset& prepared, const RunConfig& config)
    : data_(prepared),
      config_(config),
      cache_(prepared, config.cost_model),
      rng_(mix_seed(config.seed, kChainStream)) {
  config_.validate();
  data_.require_fittable();
  base_ = build_base_measure(data_, config_.cost_model, config_.base, &warnings_);
  const auto V = config_.V > 0 ? static_cast<std::size_t>(config_.V) : default_interval_count(data_);
  hazard_ = HazardState::initial(build_grid(data_, V), config_.lambda_star, config_.b, config_.xi);
  exposure_ = make_exposure(data_, hazard_.hazard);
  cache_.refresh_hazard(hazard_.hazard);
  const auto window = static_cast<std::size_t>(config_.tune_window);
  c_tuner_ = MHTuner(V - 1, 1.0, window);
  theta_tuner_ = MHTuner(cache_.surv_dims(), 1.0, window);
  alpha_tuner_ = MHTuner(1, 1.0, window);
  initialise();
}

void Sampler::initialise() {
  const std::size_t n = data_.n();
  const auto groups = std::min<std::size_t>(static_cast<std::size_t>(config_.init_clusters), n);
  edp_ = EDPState{};
  edp_.alpha_omega = config_.alpha_omega;
  edp_.alpha_theta = config_.alpha_theta;
  edp_.assignments.assign(n, {-1, -1});
  std::vector<int> slot_of(groups, -1);
  SurvParams centre{base_.theta_center};
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = std::min(groups - 1, static_cast<std::size_t>(rng_.uniform() * static_cast<double>(groups)));
    if (slot_of[g] < 0) {
      slot_of[g] = edp_.open_omega(CostParams{base_.beta_center, base_.phi_mean()});
      edp_.open_theta(slot_of[g], centre);
    }
    edp_.add(i, {slot_of[g], 0});
  }
  // Start each cluster from its members' conditionals rather than a raw
  // prior draw, which can be wildly off under vague base measures.
  update_cluster_params(edp_, cache_, base_, theta_tuner_, rng_);
}

void Sampler::update_hazard() {
  update_c(hazard_, c_tuner_, rng_);
  update_u(hazard_, rng_, config_.grid_cap);
  std::vector<double> etas(data_.n());
  for (std::size_t i = 0; i < etas.size(); ++i) etas[i] = cache_.eta(i, edp_.theta(edp_.assignments[i]));
  update_lambda(hazard_, etas, exposure_, rng_);
  cache_.refresh_hazard(hazard_.hazard);
}

void Sampler::iterate() {
  update_memberships(edp_, cache_, base_, rng_);
  update_cluster_params(edp_, cache_, base_, theta_tuner_, rng_);
  if (config_.update_alpha) update_concentrations(edp_, alpha_tuner_, rng_);
  update_hazard();
  c_tuner_.end_iteration();
  theta_tuner_.end_iteration();
  alpha_tuner_.end_iteration();
  ++iteration_;
}

void Sampler::freeze_tuners() {
  c_tuner_.freeze();
  theta_tuner_.freeze();
  alpha_tuner_.freeze();
}

Draw Sampler::snapshot() const {
  Draw d = edp_.snapshot(iteration_ - 1);
  d.lambda = hazard_.hazard.lambda();
  d.u = hazard_.u;
  d.c = hazard_.c;
  return d;
}

SamplerDiagnostics Sampler::diagnostics() const {
  SamplerDiagnostics out;
  for (std::size_t v = 0; v < c_tuner_.dims(); ++v) out.c_acceptance.push_back(c_tuner_.acceptance_rate(v));
  for (std::size_t d = 0; d < theta_tuner_.dims(); ++d) out.theta_acceptance.push_back(theta_tuner_.acceptance_rate(d));
  out.alpha_theta_acceptance = alpha_tuner_.acceptance_rate(0);
  out.warnings = warnings_;
  return out;
}

DrawStore run_mcmc(const Dataset& raw, const RunConfig& config, const std::string& data_path,
                   const ProgressFn& progress) {
  config.validate();
  const Dataset data = prepare_dataset(raw, config);
  Sampler sampler(data, config);
  DrawStore store;
  store.config = config;
  store.data_path = data_path;
  store.n = data.n();
  store.q = data.q();
  store.taus = sampler.hazard().hazard.taus();
  for (std::int64_t m = 0; m < config.iters; ++m) {
    if (m == config.burnin) sampler.freeze_tuners();
    sampler.iterate();
    if (m >= config.burnin && (m - config.burnin) % config.thin == 0) {
      Draw d = sampler.snapshot();
      fill_estimands(d, data, store.taus, config);
      store.draws.push_back(std::move(d));
    }
    if (progress) progress(m + 1, config.iters);
  }
  store.diagnostics = sampler.diagnostics();
  return store;
}

}  // namespace bnpcea
