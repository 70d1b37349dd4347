#include "bnpcea/simulator.hpp"

#include <cmath>
#include <ostream>

#include "bnpcea/errors.hpp"
#include "bnpcea/random.hpp"

namespace bnpcea {

namespace {

constexpr double kWeibullShape = 10.0;
constexpr double kCostSd = 0.5;
constexpr std::uint64_t kSimStream = 0x5131;
constexpr std::uint64_t kOracleStream = 0x0AC1;

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double linear_predictor(const DGPConfig& cfg, int c, double l, int a) {
  return (1.0 - 2.0 * c) * l + c * cfg.surv_effect * a;
}

// Inverse-transform draw with S(t) = exp(-t^10 e^eta), from E = -log Z ~ Exp(1).
double weibull_time(double unit_exponential, double eta) {
  return std::pow(unit_exponential * std::exp(-eta), 1.0 / kWeibullShape);
}

double cost_mean(const DGPConfig& cfg, int c, double l, int a, double t) {
  return 5.0 + 5.0 * c + 0.1 * l + cfg.cost_effect * a + t;
}

struct Moments {
  double sum = 0.0, sum2 = 0.0;
  void add(double x) {
    sum += x;
    sum2 += x * x;
  }
  double mean(std::size_t n) const { return sum / static_cast<double>(n); }
  double se(std::size_t n) const {
    const double m = mean(n);
    const double var = (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

}  // namespace

void DGPConfig::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ConfigError("p_c must lie in [0, 1]");
  if (!(p_delta >= 0.0 && p_delta <= 1.0)) throw ConfigError("p_delta must lie in [0, 1]");
}

Simulation simulate(const DGPConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.seed, kSimStream));
  Simulation sim;
  std::vector<Subject> subjects;
  subjects.reserve(config.n);
  sim.truth.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const int c = rng.uniform() < config.p_c ? 1 : 0;
    const double l = rng.normal();
    const int a = rng.uniform() < expit(0.1 * l) ? 1 : 0;
    const double eta = linear_predictor(config, c, l, a);
    const double death = weibull_time(rng.exponential(1.0), eta);
    const double censor = weibull_time(rng.exponential(1.0), eta);
    const bool censored = censor < death && rng.uniform() < config.p_delta;
    Subject s;
    s.t = censored ? censor : death;
    s.delta = censored ? 0 : 1;
    s.a = a;
    s.l = {l};
    s.y = rng.normal(cost_mean(config, c, l, a, s.t), kCostSd);
    subjects.push_back(std::move(s));
    sim.truth.push_back({c, death, censor});
  }
  sim.data = Dataset(std::move(subjects), CostModel::gaussian);
  return sim;
}

void write_truth(std::ostream& out, const std::vector<LatentTruth>& truth) {
  out << "i,c,D,C\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ',' << truth[i].c << ',' << format_double(truth[i].death) << ',' << format_double(truth[i].censor)
        << '\n';
  }
}

OracleTruth oracle_truth(const DGPConfig& config, std::size_t reps) {
  config.validate();
  if (reps < 2) throw ConfigError("oracle needs at least 2 replicates");
  Rng rng(mix_seed(config.seed, kOracleStream));
  Moments psi, t1, t0, y1, y0;
  for (std::size_t r = 0; r < reps; ++r) {
    const int c = rng.uniform() < config.p_c ? 1 : 0;
    const double l = rng.normal();
    const double e = rng.exponential(1.0);
    const double d1 = weibull_time(e, linear_predictor(config, c, l, 1));
    const double d0 = weibull_time(e, linear_predictor(config, c, l, 0));
    const double m1 = cost_mean(config, c, l, 1, d1);
    const double m0 = cost_mean(config, c, l, 0, d0);
    t1.add(d1);
    t0.add(d0);
    y1.add(m1);
    y0.add(m0);
    psi.add(config.kappa * (d1 - d0) - (m1 - m0));
  }
  OracleTruth o;
  o.reps = reps;
  o.psi = psi.mean(reps);
  o.psi_se = psi.se(reps);
  o.time1 = t1.mean(reps);
  o.time0 = t0.mean(reps);
  o.time1_se = t1.se(reps);
  o.time0_se = t0.se(reps);
  o.cost1 = y1.mean(reps);
  o.cost0 = y0.mean(reps);
  o.cost1_se = y1.se(reps);
  o.cost0_se = y0.se(reps);
  return o;
}

}  // namespace bnpcea
