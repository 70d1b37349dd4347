#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "bnpcea/draw_store.hpp"
#include "bnpcea/edp_sampler.hpp"
#include "bnpcea/errors.hpp"
#include "bnpcea/simulator.hpp"
#include "bnpcea/subgroups.hpp"
#include "test_util.hpp"

using namespace bnpcea;

namespace {

BaseMeasure unit_base(std::size_t q) {
  BaseMeasure b;
  b.theta_center.assign(q + 1, 0.0);
  b.theta_var.assign(q + 1, 4.0);
  b.beta_center.assign(q + 2, 0.0);
  b.beta_var.assign(q + 2, 9.0);
  b.phi_shape = 3.0;
  b.phi_scale = 2.0;
  return b;
}

PiecewiseHazard flat_hazard(const Dataset& d, double rate) {
  return PiecewiseHazard(build_grid(d, 4), std::vector<double>(4, rate));
}

RunConfig quick_config(std::int64_t iters, std::int64_t burnin, std::int64_t thin, std::uint64_t seed) {
  RunConfig cfg;
  cfg.iters = iters;
  cfg.burnin = burnin;
  cfg.thin = thin;
  cfg.seed = seed;
  cfg.kappa_grid = {1.0};
  return cfg;
}

std::vector<double> probabilities(const std::vector<MembershipOption>& opts) {
  std::vector<double> lw;
  for (const auto& o : opts) lw.push_back(o.log_weight);
  const double norm = log_sum_exp(lw);
  std::vector<double> p;
  for (double w : lw) p.push_back(std::exp(w - norm));
  return p;
}

}  // namespace

TEST(Memberships, SingleSubjectOnlyNewCluster) {
  const auto d = testutil::toy_dataset(1, 1, 1);
  SubjectCache cache(d, CostModel::gaussian);
  cache.refresh_hazard(flat_hazard(d, 1.0));
  auto base = unit_base(1);
  auto state = EDPState::single(1, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}}, 1.0, 1.0);
  state.remove(0);
  const std::vector<SurvParams> aux_per_j;
  const auto opts = membership_weights(state, cache, 0, aux_per_j, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}});
  ASSERT_EQ(opts.size(), 1u);
  EXPECT_EQ(opts[0].label.j, -1);

  // The same holds through a full scan with any concentration, including zero.
  Rng rng(1);
  for (double alpha : {1.0, 0.0}) {
    auto s = EDPState::single(1, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}}, alpha, alpha);
    update_memberships(s, cache, base, rng);
    s.check_invariants();
    EXPECT_EQ(s.clusters(), 1u);
  }
}

TEST(Memberships, ZeroAlphaThetaKillsNewSubcluster) {
  const auto d = testutil::toy_dataset(6, 1, 2);
  SubjectCache cache(d, CostModel::gaussian);
  cache.refresh_hazard(flat_hazard(d, 1.0));
  auto state = EDPState::single(6, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}}, 1.0, 0.0);
  state.remove(2);
  const std::vector<SurvParams> aux(state.omegas.size(), SurvParams{{0, 0}});
  const auto opts = membership_weights(state, cache, 2, aux, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}});
  for (const auto& o : opts)
    if (o.label.j >= 0 && o.label.k < 0) EXPECT_EQ(o.log_weight, -INFINITY);
}

TEST(Memberships, TwoClusterEnumerationWithEqualLikelihoods) {
  // Clusters j=0 with subclusters of sizes 3 and 2, j=1 with one subcluster
  // of size 4; all share the same parameters, so only the counts matter.
  const auto d = testutil::toy_dataset(10, 1, 3);
  SubjectCache cache(d, CostModel::gaussian);
  cache.refresh_hazard(flat_hazard(d, 0.8));
  const CostParams omega{{0.3, -0.2, 0.1}, 1.5};
  const SurvParams theta{{0.4, -0.3}};
  const double a_w = 0.7, a_t = 1.9;
  EDPState s;
  s.alpha_omega = a_w;
  s.alpha_theta = a_t;
  s.assignments.assign(10, {-1, -1});
  const int j0 = s.open_omega(omega), j1 = s.open_omega(omega);
  const int k00 = s.open_theta(j0, theta), k01 = s.open_theta(j0, theta), k10 = s.open_theta(j1, theta);
  const ClusterLabel labels[10] = {{j0, k00}, {j0, k00}, {j0, k00}, {j0, k01}, {j0, k01},
                                   {j1, k10}, {j1, k10}, {j1, k10}, {j1, k10}, {j1, k10}};
  for (std::size_t i = 0; i < 10; ++i) s.add(i, labels[i]);
  s.check_invariants();
  s.remove(9);  // leaves j1 with 4 members

  const std::vector<SurvParams> aux(s.omegas.size(), theta);
  const auto opts = membership_weights(s, cache, 9, aux, omega, theta);
  const auto p = probabilities(opts);

  // Hand enumeration in the documented option order.
  const double w[6] = {5.0 * 3.0 / (5.0 + a_t), 5.0 * 2.0 / (5.0 + a_t), 5.0 * a_t / (5.0 + a_t),
                       4.0 * 4.0 / (4.0 + a_t), 4.0 * a_t / (4.0 + a_t), a_w};
  double total = 0.0;
  for (double x : w) total += x;
  ASSERT_EQ(opts.size(), 6u);
  for (int o = 0; o < 6; ++o) EXPECT_NEAR(p[o], w[o] / total, 1e-12) << "option " << o;
  EXPECT_EQ(opts[0].label, (ClusterLabel{j0, k00}));
  EXPECT_EQ(opts[2].label, (ClusterLabel{j0, -1}));
  EXPECT_EQ(opts[5].label, (ClusterLabel{-1, -1}));

  // Empirical frequencies through the sampler's categorical draw.
  Rng rng(4);
  std::vector<double> lw, counts(6, 0.0);
  for (const auto& o : opts) lw.push_back(o.log_weight);
  for (int m = 0; m < 200000; ++m) counts[rng.categorical_log(lw)] += 1.0;
  std::vector<double> probs(w, w + 6);
  for (auto& x : probs) x /= total;
  EXPECT_GT(testutil::chi_square_p(counts, probs), 0.01);
}

TEST(Memberships, ShiftOfAllLogWeightsLeavesDrawsUnchanged) {
  std::vector<double> lw{-3.0, -1.2, -7.5, 0.4};
  std::vector<double> shifted = lw;
  for (auto& x : shifted) x -= 1500.0;
  Rng a(8), b(8);
  for (int m = 0; m < 10000; ++m) EXPECT_EQ(a.categorical_log(lw), b.categorical_log(shifted));
}

TEST(Memberships, ZeroConcentrationsNeverOpenClusters) {
  const auto d = testutil::toy_dataset(30, 1, 5);
  SubjectCache cache(d, CostModel::gaussian);
  cache.refresh_hazard(flat_hazard(d, 1.0));
  const auto base = unit_base(1);
  auto s = EDPState::single(30, CostParams{{0, 0, 0}, 1.0}, SurvParams{{0, 0}}, 0.0, 0.0);
  MHTuner tuner(2, 1.0, 20);
  Rng rng(6);
  for (int m = 0; m < 200; ++m) {
    update_memberships(s, cache, base, rng);
    update_cluster_params(s, cache, base, tuner, rng);
    s.check_invariants();
    ASSERT_EQ(s.clusters(), 1u);
    ASSERT_EQ(s.subclusters(), 1u);
  }
}

TEST(Memberships, BookkeepingMatchesRecountEverySweep) {
  const auto d = testutil::toy_dataset(40, 2, 7);
  SubjectCache cache(d, CostModel::gaussian);
  cache.refresh_hazard(flat_hazard(d, 1.0));
  const auto base = unit_base(2);
  Rng rng(7);
  auto s = EDPState::single(40, base.draw_omega(rng), SurvParams{{0, 0, 0}}, 3.0, 3.0);
  MHTuner tuner(3, 1.0, 20);
  std::size_t max_clusters = 0;
  for (int m = 0; m < 300; ++m) {
    update_memberships(s, cache, base, rng);
    update_cluster_params(s, cache, base, tuner, rng);
    ASSERT_NO_THROW(s.check_invariants());
    std::size_t total = 0;
    for (const auto& o : s.omegas) {
      if (!o.active) continue;
      std::size_t sub = 0;
      for (const auto& t : o.subs) sub += t.active ? t.count : 0;
      EXPECT_EQ(sub, o.count);
      total += o.count;
    }
    EXPECT_EQ(total, 40u);
    max_clusters = std::max(max_clusters, s.clusters());
  }
  EXPECT_GT(max_clusters, 1u);
}

TEST(Memberships, BrokenBookkeepingIsDetected) {
  auto s = EDPState::single(4, CostParams{{0, 0}, 1.0}, SurvParams{{0}}, 1.0, 1.0);
  s.omegas[0].count = 5;
  EXPECT_THROW(s.check_invariants(), std::logic_error);
}

TEST(ClusterParams, EmptyClusterDrawsFromBase) {
  const auto d = testutil::toy_dataset(5, 1, 8);
  SubjectCache cache(d, CostModel::gaussian);
  const auto base = unit_base(1);
  Rng rng(9);
  std::vector<double> b0, phi;
  for (int m = 0; m < 100000; ++m) {
    const auto w = draw_cost_params({}, cache, base, 1.0, rng);
    b0.push_back(w.beta[0]);
    phi.push_back(w.phi);
  }
  EXPECT_NEAR(testutil::sample_mean(b0), 0.0, 3.0 * std::sqrt(9.0 / 1e5));
  EXPECT_NEAR(testutil::sample_var(b0), 9.0, 3.0 * 9.0 * std::sqrt(2.0 / 1e5));
  // IG(3, 2): mean 1, variance 1.
  EXPECT_NEAR(testutil::sample_mean(phi), 1.0, 4.0 * std::sqrt(1.0 / 1e5));
}

TEST(ClusterParams, SingleMemberConjugateConditionals) {
  const auto d = testutil::toy_dataset(3, 1, 10);
  SubjectCache cache(d, CostModel::gaussian);
  const auto base = unit_base(1);
  const std::size_t member = 1;
  const std::vector<std::size_t> members{member};
  const double phi = 0.8;

  // Closed form for one observation: precision x x' / phi + diag(1 / v).
  const auto& s = d[member];
  const double x[3] = {s.t, static_cast<double>(s.a), s.l[0]};
  Eigen::Matrix3d prec;
  Eigen::Vector3d rhs;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) prec(r, c) = x[r] * x[c] / phi + (r == c ? 1.0 / 9.0 : 0.0);
    rhs(r) = x[r] * s.y / phi;
  }
  const Eigen::Matrix3d cov = prec.inverse();
  const Eigen::Vector3d mean = cov * rhs;

  const auto cond = cost_beta_conditional(members, cache, base, phi);
  for (int r = 0; r < 3; ++r) {
    EXPECT_NEAR(cond.mean[r], mean(r), 1e-10);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(cond.cov[r][c], cov(r, c), 1e-10);
  }

  Rng rng(11);
  const int M = 100000;
  std::vector<std::vector<double>> beta(3);
  std::vector<double> pit;
  for (int m = 0; m < M; ++m) {
    const auto w = draw_cost_params(members, cache, base, phi, rng);
    for (int r = 0; r < 3; ++r) beta[r].push_back(w.beta[r]);
    // phi | beta is IG(a + 1/2, scale + r^2 / 2); its CDF at the draw is uniform.
    const double resid = s.y - (w.beta[0] * x[0] + w.beta[1] * x[1] + w.beta[2] * x[2]);
    boost::math::inverse_gamma_distribution<double> ig(3.5, 2.0 + 0.5 * resid * resid);
    pit.push_back(boost::math::cdf(ig, w.phi));
  }
  for (int r = 0; r < 3; ++r) {
    EXPECT_NEAR(testutil::sample_mean(beta[r]), mean(r), 3.0 * std::sqrt(cov(r, r) / M));
    EXPECT_NEAR(testutil::sample_var(beta[r]), cov(r, r), 3.0 * cov(r, r) * std::sqrt(2.0 / M));
  }
  EXPECT_LT(testutil::ks_distance(pit, [](double u) { return std::clamp(u, 0.0, 1.0); }), 0.01);
}

TEST(ClusterParams, ThetaUpdateMatchesGridConditional) {
  // Five subjects, no confounders: theta is the scalar treatment coefficient.
  std::vector<Subject> subjects{{1.0, 0.4, 1, 1, {}},
                                {1.0, 1.1, 1, 0, {}},
                                {1.0, 0.7, 0, 1, {}},
                                {1.0, 1.6, 1, 1, {}},
                                {1.0, 0.2, 1, 0, {}}};
  const Dataset d(subjects);
  SubjectCache cache(d, CostModel::gaussian);
  const PiecewiseHazard h({0.5, 1.0, 1.5, 2.0}, {0.6, 0.9, 1.3, 0.4});
  cache.refresh_hazard(h);
  auto base = unit_base(0);
  base.theta_center = {0.3};
  base.theta_var = {2.0};
  const std::vector<std::size_t> members{0, 1, 2, 3, 4};

  auto log_target = [&](double th) {
    double lp = -(th - 0.3) * (th - 0.3) / 4.0;
    for (const auto& s : subjects) {
      const double eta = th * s.a;
      lp += (s.delta ? std::log(h.lambda()[h.interval_of(s.t)]) + eta : 0.0) - std::exp(eta) * h.baseline_cumulative(s.t);
    }
    return lp;
  };
  const testutil::GridCdf cdf(log_target, -12.0, 12.0);

  SurvParams theta{{0.0}};
  MHTuner tuner(1, 1.0, 20);
  Rng rng(12);
  for (int m = 0; m < 5000; ++m) {
    update_theta(theta, members, cache, base, tuner, rng);
    tuner.end_iteration();
  }
  tuner.freeze();
  std::vector<double> draws;
  for (int m = 0; m < 100000; ++m) {
    for (int k = 0; k < 10; ++k) update_theta(theta, members, cache, base, tuner, rng);
    draws.push_back(theta.theta[0]);
  }
  EXPECT_LE(testutil::ks_distance(draws, [&](double x) { return cdf(x); }), 0.02);
  EXPECT_NEAR(theta_log_target(members, cache, base, std::vector<double>{0.7}) -
                  theta_log_target(members, cache, base, std::vector<double>{-0.2}),
              log_target(0.7) - log_target(-0.2), 1e-10);
}

namespace {

// Gam(1,1) prior times the partition likelihood written out directly.
double log_alpha_density(double a, const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
  double lp = -a;
  for (const auto& [k, n] : groups)
    // a^k Gamma(a) = a^(k-1) Gamma(a+1) stays finite as a -> 0 for one-cluster groups.
    lp += (k > 1 ? static_cast<double>(k - 1) * std::log(a) : 0.0) + std::lgamma(a + 1.0) -
          std::lgamma(a + static_cast<double>(n));
  return lp;
}

double quad_mean(const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
  // The Gam(1,1) factor leaves negligible mass beyond 60; tanh-sinh never
  // evaluates the endpoints, where log a + lgamma(a) is indeterminate.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double ref = log_alpha_density(1.0, groups);
  auto dens = [&](double a) { return std::exp(log_alpha_density(a, groups) - ref); };
  const double z = integrator.integrate(dens, 0.0, 60.0);
  const double m = integrator.integrate([&](double a) { return a * dens(a); }, 0.0, 60.0);
  return m / z;
}

}  // namespace

TEST(Concentrations, LogPosteriorsMatchStatedConditionals) {
  for (double a : {0.05, 0.5, 2.0, 9.0}) {
    EXPECT_NEAR(alpha_omega_log_posterior(a, 3, 50), log_alpha_density(a, {{3, 50}}), 1e-10);
    const std::vector<std::size_t> ks{2, 1, 4}, ns{10, 3, 20};
    EXPECT_NEAR(alpha_theta_log_posterior(a, ks, ns), log_alpha_density(a, {{2, 10}, {1, 3}, {4, 20}}), 1e-10);
  }
  EXPECT_EQ(alpha_omega_log_posterior(0.0, 1, 5), -INFINITY);
}

TEST(Concentrations, OneClusterPullsBelowPriorMean) {
  const double m = quad_mean({{1, 200}});
  EXPECT_LT(m, 1.0);

  auto s = EDPState::single(200, CostParams{{0, 0}, 1.0}, SurvParams{{0}}, 1.0, 1.0);
  MHTuner tuner(1, 1.0, 20);
  Rng rng(13);
  std::vector<double> aw, at;
  for (int it = 0; it < 60000; ++it) {
    update_concentrations(s, tuner, rng);
    if (it < 5000) {
      tuner.end_iteration();
      continue;
    }
    if (it == 5000) tuner.freeze();
    aw.push_back(s.alpha_omega);
    at.push_back(s.alpha_theta);
  }
  EXPECT_NEAR(testutil::sample_mean(aw), m, 3.0 * testutil::batch_means_se(aw));
  EXPECT_NEAR(testutil::sample_mean(at), m, 3.0 * testutil::batch_means_se(at));
  EXPECT_LT(testutil::sample_mean(aw), 1.0);
  EXPECT_LT(testutil::sample_mean(at), 1.0);
}

TEST(Concentrations, AllSingletonsFavourLargeAlpha) {
  const std::size_t n = 30;
  EXPECT_GT(alpha_omega_log_posterior(20.0, n, n), alpha_omega_log_posterior(0.5, n, n));
  // Same comparison by independent quadrature of the density's mass.
  using boost::math::quadrature::gauss_kronrod;
  auto dens = [&](double a) { return std::exp(log_alpha_density(a, {{n, n}})); };
  const double high = gauss_kronrod<double, 31>::integrate(dens, 10.0, 30.0);
  const double low = gauss_kronrod<double, 31>::integrate(dens, 0.01, 2.0);
  EXPECT_GT(high, low);
}

TEST(Concentrations, PriorOnlyChainReproducesGammaOneOne) {
  const auto d = testutil::toy_dataset(12, 1, 14);
  SubjectCache cache(d, CostModel::gaussian);
  cache.temperature = 0.0;
  const auto base = unit_base(1);
  Rng rng(15);
  auto s = EDPState::single(12, base.draw_omega(rng), base.draw_theta(rng), 1.0, 1.0);
  MHTuner theta_tuner(2, 1.0, 20), alpha_tuner(1, 1.0, 20);
  std::vector<double> aw, at;
  for (int it = 0; it < 80000; ++it) {
    update_memberships(s, cache, base, rng);
    update_cluster_params(s, cache, base, theta_tuner, rng);
    update_concentrations(s, alpha_tuner, rng);
    if (it < 2000) {
      theta_tuner.end_iteration();
      alpha_tuner.end_iteration();
      continue;
    }
    if (it == 2000) {
      theta_tuner.freeze();
      alpha_tuner.freeze();
    }
    aw.push_back(s.alpha_omega);
    at.push_back(s.alpha_theta);
  }
  for (const auto* series : {&aw, &at}) {
    std::vector<double> sq;
    for (double a : *series) sq.push_back(a * a);
    EXPECT_NEAR(testutil::sample_mean(*series), 1.0, 3.0 * testutil::batch_means_se(*series));
    // E[a^2] = 2 under Gam(1,1).
    EXPECT_NEAR(testutil::sample_mean(sq), 2.0, 3.0 * testutil::batch_means_se(sq));
  }
}

TEST(RunMcmc, OneRetainedDrawWhenItersIsBurninPlusOne) {
  DGPConfig dgp;
  dgp.n = 40;
  const auto sim = simulate(dgp);
  const auto store = run_mcmc(sim.data, quick_config(11, 10, 1, 3));
  ASSERT_EQ(store.draws.size(), 1u);
  EXPECT_EQ(store.draws[0].iteration, 10);
}

TEST(RunMcmc, RetentionFollowsBurninAndThin) {
  DGPConfig dgp;
  dgp.n = 30;
  const auto sim = simulate(dgp);
  const auto store = run_mcmc(sim.data, quick_config(25, 5, 3, 3));
  std::vector<std::int64_t> its;
  for (const auto& dr : store.draws) its.push_back(dr.iteration);
  EXPECT_EQ(its, (std::vector<std::int64_t>{5, 8, 11, 14, 17, 20, 23}));
}

TEST(RunMcmc, InconsistentConfigIsRejected) {
  const auto d = testutil::toy_dataset(10, 1, 1);
  EXPECT_THROW(run_mcmc(d, quick_config(10, 10, 1, 1)), ConfigError);
  EXPECT_THROW(run_mcmc(d, quick_config(10, 12, 1, 1)), ConfigError);
  EXPECT_THROW(run_mcmc(d, quick_config(10, 2, 0, 1)), ConfigError);
}

TEST(RunMcmc, FixedSeedIsBitIdentical) {
  DGPConfig dgp;
  dgp.n = 60;
  dgp.p_c = 0.5;
  const auto sim = simulate(dgp);
  auto cfg = quick_config(60, 20, 2, 77);
  std::ostringstream a, b, c;
  write_draw_store(a, run_mcmc(sim.data, cfg));
  write_draw_store(b, run_mcmc(sim.data, cfg));
  cfg.seed = 78;
  write_draw_store(c, run_mcmc(sim.data, cfg));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(RunMcmc, StateInvariantsHoldThroughChain) {
  DGPConfig dgp;
  dgp.n = 80;
  dgp.p_c = 0.5;
  const auto sim = simulate(dgp);
  auto cfg = quick_config(100, 50, 1, 5);
  Sampler sampler(prepare_dataset(sim.data, cfg), cfg);
  for (int m = 0; m < 100; ++m) {
    sampler.iterate();
    ASSERT_NO_THROW(sampler.edp().check_invariants());
    ASSERT_NO_THROW(sampler.hazard().check());
    const auto snap = sampler.snapshot();
    for (std::size_t i = 0; i < snap.assignments.size(); ++i) {
      ASSERT_TRUE(snap.omegas.count(snap.assignments[i].j));
      ASSERT_TRUE(snap.thetas.count(snap.assignments[i]));
    }
    for (const auto& [j, w] : snap.omegas) EXPECT_GT(w.phi, 0.0);
  }
}

TEST(RunMcmc, ExchangeableUnderSubjectPermutation) {
  // Co-clustering of a 4-subject dataset and of its reversal agree after
  // mapping subjects back, up to Monte-Carlo error.
  std::vector<Subject> subjects{{2.0, 0.5, 1, 0, {0.1}}, {2.2, 0.6, 1, 1, {-0.4}},
                                {9.0, 1.4, 0, 1, {1.2}}, {8.5, 1.2, 1, 0, {0.8}}};
  const Dataset d(subjects);
  std::vector<Subject> reversed(subjects.rbegin(), subjects.rend());
  const Dataset r(reversed);
  auto cfg = quick_config(40000, 2000, 1, 21);
  cfg.init_clusters = 1;
  const auto pa = coclustering(run_mcmc(d, cfg));
  const auto pb = coclustering(run_mcmc(r, cfg));
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_NEAR(pa.probability(i, j), pb.probability(3 - i, 3 - j), 0.04);
}

TEST(PrepareDataset, InterceptFlag) {
  const auto d = testutil::toy_dataset(5, 1, 1);
  RunConfig cfg;
  EXPECT_EQ(prepare_dataset(d, cfg).q(), 1u);
  cfg.add_intercept = true;
  EXPECT_EQ(prepare_dataset(d, cfg).q(), 2u);
}
