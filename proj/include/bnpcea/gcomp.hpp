#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnpcea/config.hpp"
#include "bnpcea/data.hpp"
#include "bnpcea/draw_store.hpp"
#include "bnpcea/local_models.hpp"
#include "bnpcea/random.hpp"

namespace bnpcea {

// E[min(T, tau_V)] under hazard lambda_v e^eta on the grid.
double restricted_mean(double eta, const PiecewiseHazard& hazard);

// Expected cost for covariate profile (a, l), with T truncated at the horizon.
// Log-normal cost integrates exp(mu(t) + phi/2) against the event density on
// each interval (closed form, the integrand is exponential in t) and adds the
// survivor mass at the horizon.
double expected_cost(int a, std::span<const double> l, const CostParams& omega, const SurvParams& theta,
                     const PiecewiseHazard& hazard, CostModel model);

// kappa E[T ^ tau_V] - E[Y].
double expected_mv(int a, std::span<const double> l, const CostParams& omega, const SurvParams& theta,
                   const PiecewiseHazard& hazard, double kappa, CostModel model);

// Arm contrasts of subject i under its own cluster parameters. Psi_i is
// affine in kappa, so storing the two differences covers every kappa.
struct Contrast {
  double d_time = 0.0;
  double d_cost = 0.0;
  double psi(double kappa) const { return kappa * d_time - d_cost; }
};

// `data` must be the prepared (intercept-augmented if configured) dataset.
std::vector<Contrast> subject_contrasts(const Draw& draw, const Dataset& data, const PiecewiseHazard& hazard,
                                        CostModel model);

std::vector<double> draw_bootstrap_weights(std::size_t n, Rng& rng,
                                           BootstrapPrior prior = BootstrapPrior::dir_inv_n);

// Seed of the bootstrap stream of iteration m; independent of the chain RNG
// so replaying a stored draw reproduces its weights exactly.
std::uint64_t bootstrap_seed(std::uint64_t chain_seed, std::int64_t iteration);

// Fills weights, delta_time, delta_cost and psi (one per kappa) of `draw`.
void fill_estimands(Draw& draw, const Dataset& data, const std::vector<double>& taus, const RunConfig& config);

struct IntervalSummary {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
// Posterior mean with 2.5% / 97.5% type-7 quantiles. Needs at least 2 draws.
IntervalSummary summarize_nmb(std::span<const double> draws);

// Fraction of positive Psi draws at each kappa of the store's grid.
std::vector<double> ceac(const DrawStore& store);
// Same curve evaluated at arbitrary kappas from the stored arm differences.
std::vector<double> ceac(const DrawStore& store, std::span<const double> kappas);

struct IcerDraws {
  std::vector<double> ratio;  // NaN where flagged
  std::vector<bool> flagged;  // |delta_time| < kIcerFloor
  std::size_t flagged_count = 0;
  IntervalSummary summary;    // over unflagged draws (zeros if fewer than 2)
  static constexpr double kIcerFloor = 1e-8;
};
IcerDraws icer(const DrawStore& store);

// Per-subject posterior summary of Psi_i at kappa.
struct IteRow {
  std::size_t i = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
std::vector<IteRow> ite_summary(const DrawStore& store, const Dataset& data, double kappa);

// Psi_i^(m) for every stored draw at kappa: rows are draws.
std::vector<std::vector<double>> subject_psi_draws(const DrawStore& store, const Dataset& data, double kappa);

// Prepared dataset for a stored run (re-applies the intercept flag and
// checks the shape against the store).
Dataset prepare_for_store(const Dataset& raw, const DrawStore& store);

}  // namespace bnpcea
