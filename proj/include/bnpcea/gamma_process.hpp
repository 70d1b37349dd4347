#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bnpcea/data.hpp"
#include "bnpcea/local_models.hpp"
#include "bnpcea/random.hpp"

namespace bnpcea {

// Parametric family the Gamma Process is centred on.
enum class LambdaStarFamily { exponential, weibull };

struct LambdaStarSpec {
  LambdaStarFamily family = LambdaStarFamily::exponential;
  // exponential: {rate}; weibull: {shape, scale} with Lambda*(t) = (t / scale)^shape.
  std::vector<double> params{1.0};

  double cumulative(double t) const;
};

LambdaStarFamily parse_lambda_star_family(const std::string& name);
std::string to_string(LambdaStarFamily family);

// Average prior rate on each interval: (Lambda*(tau_v) - Lambda*(tau_{v-1})) / width.
std::vector<double> lambda_star_rates(const LambdaStarSpec& spec, std::span<const double> taus);

// Equal-width grid with tau_V = (1 + 1e-6) max T.
std::vector<double> build_grid(double max_time, std::size_t intervals);
std::vector<double> build_grid(const Dataset& data, std::size_t intervals);
// min(50, number of distinct event times), floored at 2.
std::size_t default_interval_count(const Dataset& data);

// Dependent Gamma Process state: step hazard plus latent chains u, c.
// The prior on each rate is Gamma(shape = b * lambda*_v, rate = b).
struct HazardState {
  PiecewiseHazard hazard;
  std::vector<std::int64_t> u;
  std::vector<double> c;
  double b = 1.0;
  double xi = 1.0;
  std::vector<double> lambda_star;

  std::size_t intervals() const { return hazard.intervals(); }
  double shape_increment(std::size_t v) const { return b * lambda_star[v]; }

  // lambda = lambda*, u = 0, c = xi.
  static HazardState initial(std::vector<double> taus, const LambdaStarSpec& spec, double b, double xi);
  // Throws std::logic_error when positivity/integrality invariants are broken.
  void check() const;
};

// Per-coordinate random-walk scales tuned towards a target acceptance rate
// during burn-in, frozen afterwards.
class MHTuner {
 public:
  static constexpr double kTarget = 0.234;

  MHTuner() = default;
  MHTuner(std::size_t dims, double initial_sd, std::size_t window);

  std::size_t dims() const { return sds_.size(); }
  double sd(std::size_t d) const { return sds_[d]; }
  void set_sd(std::size_t d, double sd) { sds_[d] = sd; }
  bool frozen() const { return frozen_; }

  void record(std::size_t d, bool accepted);
  // Closes one sampler iteration; every `window` iterations the scales are
  // adjusted from the window's acceptance rates.
  void end_iteration();
  void freeze();

  // Acceptance rate since freeze() (or since construction if never frozen).
  double acceptance_rate(std::size_t d) const;
  std::uint64_t proposals(std::size_t d) const { return total_prop_[d]; }

 private:
  std::vector<double> sds_;
  std::vector<std::uint64_t> win_acc_, win_prop_, total_acc_, total_prop_;
  std::size_t window_ = 20;
  std::size_t iter_in_window_ = 0;
  bool frozen_ = false;
};

// Multiplies each scale by exp(+0.1) when its rate exceeds the target and by
// exp(-0.1) when below; rates exactly on target leave the scale unchanged.
std::vector<double> tune(std::span<const double> sds, std::span<const double> rates,
                         double target = MHTuner::kTarget);

// Fixed per-dataset bookkeeping for the grid: interval of each T_i, the
// partial exposure T_i - tau_{v_i - 1}, and deaths per interval.
struct HazardExposure {
  std::vector<std::size_t> interval;
  std::vector<double> partial;
  std::vector<std::int64_t> deaths;
};
HazardExposure make_exposure(const Dataset& data, const PiecewiseHazard& hazard);

// sum_i e^{eta_i} Delta_v(T_i) for every interval v.
std::vector<double> risk_exposure(std::span<const double> etas, const HazardExposure& exposure,
                                  const PiecewiseHazard& hazard);

// Unnormalised log density of c_v (v < V - 1, 0-based) given u, lambda.
double c_log_target(const HazardState& state, std::size_t v, double c);
void update_c(HazardState& state, MHTuner& tuner, Rng& rng);

// Normalised log pmf of u_v over {0..grid_cap} for v < V - 1 (0-based).
std::vector<double> u_log_pmf(const HazardState& state, std::size_t v, std::int64_t grid_cap = 10000);
void update_u(HazardState& state, Rng& rng, std::int64_t grid_cap = 10000);

// Gamma shape/rate of the full conditional of lambda_v.
struct GammaParams {
  double shape;
  double rate;
};
GammaParams lambda_conditional(const HazardState& state, std::size_t v, std::int64_t deaths, double exposure);
void update_lambda(HazardState& state, std::span<const double> etas, const HazardExposure& exposure, Rng& rng);

// Forward simulation of the prior chain: each row is one hazard path.
std::vector<std::vector<double>> prior_predictive_draws(const LambdaStarSpec& spec, double b, double xi,
                                                        std::span<const double> taus, std::size_t count, Rng& rng);

// CSV: v,tau_lo,tau_hi,lambda_mean,lambda_lo95,lambda_hi95 (v is 1-based).
void write_hazard_summary(std::ostream& out, std::span<const double> taus,
                          const std::vector<std::vector<double>>& lambda_draws);

}  // namespace bnpcea
