#include <gtest/gtest.h>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "bnpcea/errors.hpp"
#include "bnpcea/local_models.hpp"
#include "bnpcea/random.hpp"

using namespace bnpcea;

namespace {

PiecewiseHazard equal_grid(std::vector<double> lambda, double width) {
  std::vector<double> taus;
  for (std::size_t v = 0; v < lambda.size(); ++v) taus.push_back(width * static_cast<double>(v + 1));
  return PiecewiseHazard(taus, lambda);
}

// Step hazard integrated piece by piece with Gauss-Kronrod; no use of the
// class's cumulative bookkeeping.
double quad_cumhaz(double t, double eta, const std::vector<double>& taus, const std::vector<double>& lambda) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0, lo = 0.0;
  for (std::size_t v = 0; v < taus.size() && lo < t; ++v) {
    const double hi = std::min(t, taus[v]);
    const double rate = lambda[v] * std::exp(eta);
    total += gauss_kronrod<double, 15>::integrate([&](double) { return rate; }, lo, hi);
    lo = taus[v];
  }
  return total;
}

}  // namespace

TEST(CostLoglik, StandardNormalAtMode) {
  const CostParams omega{{0.0, 0.0, 0.0}, 1.0};
  const std::vector<double> l{0.7};
  EXPECT_NEAR(cost_loglik(0.0, 1.3, 1, l, omega, CostModel::gaussian), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(cost_loglik(0.0, 1.3, 1, l, omega, CostModel::gaussian), -0.9189385332046727, 1e-12);
}

TEST(CostLoglik, ZeroResidual) {
  const CostParams omega{{2.0, -3.0, 0.5, 1.5}, 2.5};
  const std::vector<double> l{0.3, -1.1};
  const double mu = 2.0 * 1.7 - 3.0 * 1 + 0.5 * 0.3 + 1.5 * -1.1;
  EXPECT_NEAR(cost_loglik(mu, 1.7, 1, l, omega, CostModel::gaussian), -0.5 * std::log(2 * std::numbers::pi * 2.5),
              1e-13);
}

TEST(CostLoglik, GaussianMatchesBoostDensity) {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const CostParams omega{{rng.normal(), rng.normal(), rng.normal()}, 0.1 + rng.exponential(1.0)};
    const std::vector<double> l{rng.normal()};
    const double t = rng.exponential(1.0), y = rng.normal(0, 3);
    const int a = rep % 2;
    const double mu = omega.beta[0] * t + omega.beta[1] * a + omega.beta[2] * l[0];
    boost::math::normal_distribution<double> ref(mu, std::sqrt(omega.phi));
    EXPECT_NEAR(cost_loglik(y, t, a, l, omega, CostModel::gaussian), std::log(boost::math::pdf(ref, y)), 1e-10);
  }
}

TEST(CostLoglik, LognormalMatchesBoostDensity) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const CostParams omega{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}, 0.05 + rng.exponential(2.0)};
    const std::vector<double> l{rng.normal(), rng.normal()};
    const double t = rng.exponential(1.0), y = std::exp(rng.normal(1, 2));
    const int a = rep % 2;
    const double mu = omega.beta[0] * t + omega.beta[1] * a + omega.beta[2] * l[0] + omega.beta[3] * l[1];
    boost::math::lognormal_distribution<long double> ref(mu, std::sqrt(static_cast<long double>(omega.phi)));
    const double expected = static_cast<double>(std::log(boost::math::pdf(ref, static_cast<long double>(y))));
    EXPECT_NEAR(cost_loglik(y, t, a, l, omega, CostModel::lognormal), expected, 1e-9 * (1 + std::abs(expected)));
  }
}

TEST(CostLoglik, GaussianLocationShiftInvariance) {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const CostParams omega{{rng.normal(), rng.normal(), rng.normal()}, 0.5 + rng.uniform()};
    const std::vector<double> l{rng.normal()};
    const double t = rng.exponential(1.0), y = rng.normal(), shift = rng.normal(0, 10);
    // Treated subject, so the A coefficient carries the shift of the mean.
    CostParams shifted = omega;
    shifted.beta[1] += shift;
    EXPECT_NEAR(cost_loglik(y, t, 1, l, omega, CostModel::gaussian),
                cost_loglik(y + shift, t, 1, l, shifted, CostModel::gaussian), 1e-9);
  }
}

TEST(CumulativeHazard, ConstantHazard) {
  const auto h = equal_grid({0.7}, 3.0);
  for (double t : {0.1, 1.0, 2.9, 3.0}) EXPECT_NEAR(cumulative_hazard(t, 0.0, h), 0.7 * t, 1e-14);
  EXPECT_EQ(cumulative_hazard(0.0, 0.0, h), 0.0);
}

TEST(CumulativeHazard, TwoIntervalIncrementRule) {
  const auto h = equal_grid({1.0, 2.0}, 1.0);
  EXPECT_DOUBLE_EQ(cumulative_hazard(1.5, 0.0, h), 2.0);
}

TEST(CumulativeHazard, BeyondGridIsDomainError) {
  const auto h = equal_grid({1.0, 2.0}, 1.0);
  EXPECT_THROW(cumulative_hazard(2.0001, 0.0, h), DomainError);
  EXPECT_THROW(surv_loglik(3.0, 1, 0.0, h), DomainError);
  EXPECT_THROW(surv_loglik(-1.0, 1, 0.0, h), DomainError);
}

TEST(CumulativeHazard, MatchesQuadratureOnRandomGrids) {
  Rng rng(12);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t V = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const double width = 0.05 + rng.exponential(1.0);
    std::vector<double> lambda(V), taus(V);
    for (std::size_t v = 0; v < V; ++v) {
      lambda[v] = rng.exponential(0.5);
      taus[v] = width * static_cast<double>(v + 1);
    }
    const PiecewiseHazard h(taus, lambda);
    const double t = taus.back() * rng.uniform(), eta = rng.normal();
    EXPECT_NEAR(cumulative_hazard(t, eta, h), quad_cumhaz(t, eta, taus, lambda),
                1e-10 * std::max(1.0, quad_cumhaz(t, eta, taus, lambda)));
  }
}

TEST(CumulativeHazard, ContinuousAndMonotone) {
  const auto h = equal_grid({0.3, 0.0, 2.0, 0.1, 5.0}, 0.4);
  double prev = 0.0;
  for (int s = 1; s <= 20000; ++s) {
    const double t = h.horizon() * s / 20000.0;
    const double v = cumulative_hazard(t, 0.2, h);
    EXPECT_GE(v, prev);
    EXPECT_LE(v - prev, 5.0 * std::exp(0.2) * h.horizon() / 20000.0 + 1e-12);
    prev = v;
  }
  for (double tau : h.taus())
    EXPECT_NEAR(cumulative_hazard(tau * (1 - 1e-12), 0.0, h), cumulative_hazard(tau, 0.0, h), 1e-9);
}

TEST(SurvLoglik, Exponential) {
  const auto h = equal_grid({1.7}, 5.0);
  EXPECT_NEAR(surv_loglik(2.0, 0, 0.0, h), -1.7 * 2.0, 1e-14);
  EXPECT_NEAR(surv_loglik(2.0, 1, 0.0, h), std::log(1.7) - 1.7 * 2.0, 1e-14);
}

TEST(SurvLoglik, SumMatchesProductForm) {
  // n = 5 subjects; the product of densities and survivor functions written
  // out directly, interval by interval.
  const std::vector<double> taus{0.5, 1.0, 1.5, 2.0}, lambda{0.4, 1.1, 0.2, 2.5};
  const PiecewiseHazard h(taus, lambda);
  const double t[5] = {0.3, 0.75, 1.2, 1.99, 1.0};
  const int delta[5] = {1, 0, 1, 1, 0};
  const double eta[5] = {0.2, -1.0, 0.0, 0.7, 1.3};
  double sum = 0.0, product = 1.0;
  for (int i = 0; i < 5; ++i) {
    sum += surv_loglik(t[i], delta[i], eta[i], h);
    double cum = 0.0, lo = 0.0;
    std::size_t at = 0;
    for (std::size_t v = 0; v < 4; ++v) {
      if (t[i] > lo) cum += lambda[v] * (std::min(t[i], taus[v]) - lo);
      if (t[i] > lo && t[i] <= taus[v]) at = v;
      lo = taus[v];
    }
    const double surv = std::exp(-cum * std::exp(eta[i]));
    product *= delta[i] ? lambda[at] * std::exp(eta[i]) * surv : surv;
  }
  EXPECT_NEAR(sum, std::log(product), 1e-12);
}

TEST(SurvLoglik, DensityNormalisesWithBoundaryMass) {
  using boost::math::quadrature::gauss_kronrod;
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t V = 2 + static_cast<std::size_t>(rng.uniform() * 8);
    std::vector<double> lambda(V), taus(V);
    for (std::size_t v = 0; v < V; ++v) {
      lambda[v] = rng.exponential(1.0);
      taus[v] = 0.3 * static_cast<double>(v + 1);
    }
    const PiecewiseHazard h(taus, lambda);
    const double eta = rng.normal();
    double mass = 0.0, lo = 0.0;
    for (double hi : taus) {
      mass += gauss_kronrod<double, 31>::integrate([&](double s) { return std::exp(surv_loglik(s, 1, eta, h)); }, lo,
                                                   hi, 10, 1e-12);
      lo = hi;
    }
    mass += std::exp(surv_loglik(h.horizon(), 0, eta, h));
    EXPECT_NEAR(mass, 1.0, 1e-6);
  }
}

TEST(JointLoglik, IsSumOfParts) {
  Rng rng(31);
  const auto h = equal_grid({0.5, 1.5, 0.8}, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Subject s;
    s.l = {rng.normal(), rng.normal()};
    s.a = rep % 2;
    s.delta = (rep / 2) % 2;
    s.t = 0.01 + 2.98 * rng.uniform();
    s.y = rng.normal(3, 2);
    const CostParams omega{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}, 0.2 + rng.uniform()};
    const SurvParams theta{{rng.normal(), rng.normal(), rng.normal()}};
    // Raw formulas, written out independently.
    const double mu = omega.beta[0] * s.t + omega.beta[1] * s.a + omega.beta[2] * s.l[0] + omega.beta[3] * s.l[1];
    const double cost = -0.5 * std::log(2 * std::numbers::pi * omega.phi) - (s.y - mu) * (s.y - mu) / (2 * omega.phi);
    const double eta = theta.theta[0] * s.a + theta.theta[1] * s.l[0] + theta.theta[2] * s.l[1];
    const double base = s.t <= 1 ? 0.5 * s.t : s.t <= 2 ? 0.5 + 1.5 * (s.t - 1) : 2.0 + 0.8 * (s.t - 2);
    const double rate = s.t <= 1 ? 0.5 : s.t <= 2 ? 1.5 : 0.8;
    const double surv = (s.delta ? std::log(rate) + eta : 0.0) - std::exp(eta) * base;
    EXPECT_NEAR(joint_loglik(s, omega, theta, h, CostModel::gaussian), cost + surv, 1e-10);
  }
}

TEST(PiecewiseHazard, IntervalOfEdges) {
  const auto h = equal_grid({1, 1, 1, 1}, 0.25);
  EXPECT_EQ(h.interval_of(0.25), 0u);
  EXPECT_EQ(h.interval_of(0.2500001), 1u);
  EXPECT_EQ(h.interval_of(1.0), 3u);
  EXPECT_EQ(h.interval_of(1e-300), 0u);
  EXPECT_THROW(h.interval_of(0.0), DomainError);
  EXPECT_THROW(PiecewiseHazard({1.0, 0.5}, {1.0, 1.0}), ValidationError);
}
