#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bnpcea/base_measure.hpp"
#include "bnpcea/config.hpp"
#include "bnpcea/data.hpp"
#include "bnpcea/draw_store.hpp"
#include "bnpcea/gamma_process.hpp"
#include "bnpcea/local_models.hpp"
#include "bnpcea/random.hpp"

namespace bnpcea {

// Per-subject quantities read on every sweep, laid out flat so the
// membership scan touches contiguous memory. Survival terms depend on the
// current hazard and are refreshed after each hazard update.
class SubjectCache {
 public:
  SubjectCache(const Dataset& data, CostModel model);

  std::size_t n() const { return delta_.size(); }
  std::size_t cost_dims() const { return p_cost_; }
  std::size_t surv_dims() const { return p_surv_; }
  std::span<const double> cost_row(std::size_t i) const { return {x_.data() + i * p_cost_, p_cost_}; }
  std::span<const double> surv_row(std::size_t i) const { return {z_.data() + i * p_surv_, p_surv_}; }
  double outcome(std::size_t i) const { return y_[i]; }
  int delta(std::size_t i) const { return delta_[i]; }
  double base_cumhaz(std::size_t i) const { return cumhaz_[i]; }

  void refresh_hazard(const PiecewiseHazard& hazard);

  double eta(std::size_t i, const SurvParams& theta) const;
  double cost_loglik(std::size_t i, const CostParams& omega) const;
  double surv_loglik(std::size_t i, const SurvParams& theta) const;

  // Scales every likelihood term; 0 gives prior-only runs used in testing.
  double temperature = 1.0;

 private:
  std::size_t p_cost_ = 0, p_surv_ = 0;
  std::vector<double> x_, z_, y_, jacobian_, t_, cumhaz_, log_rate_;
  std::vector<int> delta_;
};

struct ThetaSlot {
  bool active = false;
  SurvParams theta;
  std::size_t count = 0;
};

struct OmegaSlot {
  bool active = false;
  CostParams omega;
  std::size_t count = 0;
  std::vector<ThetaSlot> subs;
  std::size_t active_subs = 0;
};

// Nested partition with arena-allocated clusters. Ids are slot indices;
// freed slots are reused lowest-first.
struct EDPState {
  std::vector<ClusterLabel> assignments;
  std::vector<OmegaSlot> omegas;
  double alpha_omega = 1.0;
  double alpha_theta = 1.0;

  std::size_t clusters() const;
  std::size_t subclusters() const;
  int open_omega(CostParams omega);
  int open_theta(int j, SurvParams theta);
  const CostParams& omega(int j) const { return omegas[j].omega; }
  const SurvParams& theta(ClusterLabel lab) const { return omegas[lab.j].subs[lab.k].theta; }
  void add(std::size_t i, ClusterLabel lab);
  // Decrements counts and deactivates emptied slots.
  void remove(std::size_t i);

  // Recount from assignments; throws std::logic_error on any mismatch.
  void check_invariants() const;

  // Every subject in one cluster (0,0) with the given parameters.
  static EDPState single(std::size_t n, CostParams omega, SurvParams theta, double alpha_omega, double alpha_theta);
  // Copies tables and assignments into a Draw (hazard and estimands unset).
  Draw snapshot(std::int64_t iteration) const;
};

// One Neal-8 scan over subjects in ascending order with a single auxiliary
// parameter per "new" option.
void update_memberships(EDPState& state, const SubjectCache& cache, const BaseMeasure& base, Rng& rng);

// Log membership weights of subject i (already removed from the state), in
// the order: existing (j,k) pairs by (j,k), one new-k option per existing j,
// then new (j,k). Auxiliary parameters are supplied by the caller.
struct MembershipOption {
  ClusterLabel label;  // k = -1 for a new subcluster, j = -1 for a new cluster
  double log_weight = 0.0;
};
std::vector<MembershipOption> membership_weights(const EDPState& state, const SubjectCache& cache, std::size_t i,
                                                 std::span<const SurvParams> aux_theta_per_j,
                                                 const CostParams& aux_omega, const SurvParams& aux_theta);

// Semi-conjugate cost conditionals for a set of members.
struct NormalConditional {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
};
NormalConditional cost_beta_conditional(std::span<const std::size_t> members, const SubjectCache& cache,
                                        const BaseMeasure& base, double phi);
struct InvGammaParams {
  double shape;
  double scale;
};
InvGammaParams cost_phi_conditional(std::span<const std::size_t> members, const SubjectCache& cache,
                                    const BaseMeasure& base, std::span<const double> beta);
// Exact draw of beta | phi then phi | beta.
CostParams draw_cost_params(std::span<const std::size_t> members, const SubjectCache& cache, const BaseMeasure& base,
                            double current_phi, Rng& rng);

// Unnormalised log conditional of a subcluster's theta.
double theta_log_target(std::span<const std::size_t> members, const SubjectCache& cache, const BaseMeasure& base,
                        std::span<const double> theta);
// Component-wise random walk with scale tuner.sd(d) / sqrt(max(1, members)).
void update_theta(SurvParams& theta, std::span<const std::size_t> members, const SubjectCache& cache,
                  const BaseMeasure& base, MHTuner& tuner, Rng& rng);

void update_cluster_params(EDPState& state, const SubjectCache& cache, const BaseMeasure& base, MHTuner& theta_tuner,
                           Rng& rng);

// Gam(1,1) prior times the partition terms, as functions of alpha.
double alpha_omega_log_posterior(double alpha, std::size_t clusters, std::size_t n);
double alpha_theta_log_posterior(double alpha, std::span<const std::size_t> subclusters_per_j,
                                 std::span<const std::size_t> n_per_j);

// Escobar-West auxiliary update for alpha_omega, one MH step on log alpha_theta.
void update_concentrations(EDPState& state, MHTuner& alpha_tuner, Rng& rng);

// Applies the intercept flag of `config`.
Dataset prepare_dataset(const Dataset& raw, const RunConfig& config);

// The full chain. Owns its data, hazard, tuners and RNG.
class Sampler {
 public:
  Sampler(const Dataset& prepared, const RunConfig& config);

  // memberships, cluster parameters, concentrations, hazard (c, u, lambda).
  void iterate();
  std::int64_t iteration() const { return iteration_; }
  void freeze_tuners();

  const EDPState& edp() const { return edp_; }
  const HazardState& hazard() const { return hazard_; }
  const BaseMeasure& base() const { return base_; }
  const SubjectCache& cache() const { return cache_; }
  Draw snapshot() const;
  SamplerDiagnostics diagnostics() const;

 private:
  void initialise();
  void update_hazard();

  Dataset data_;
  RunConfig config_;
  BaseMeasure base_;
  SubjectCache cache_;
  HazardState hazard_;
  HazardExposure exposure_;
  EDPState edp_;
  MHTuner c_tuner_, theta_tuner_, alpha_tuner_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  std::vector<std::string> warnings_;
};

// Called after each iteration with (iterations done, total).
using ProgressFn = std::function<void(std::int64_t, std::int64_t)>;

// Validates, fits and returns retained draws with g-computation estimands.
// Iteration m (0-based) is kept when m >= burnin and (m - burnin) % thin == 0.
DrawStore run_mcmc(const Dataset& raw, const RunConfig& config, const std::string& data_path = "",
                   const ProgressFn& progress = {});

}  // namespace bnpcea
