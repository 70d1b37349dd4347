#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bnpcea/data.hpp"

namespace bnpcea {

// Two-component cost-survival data-generating process. Each subject has a
// latent class c ~ Ber(p_c); class 0 has hazard ratio e^L and no treatment
// effect on survival, class 1 has hazard ratio e^{-L + surv_effect A}. Event
// and censoring times are Weibull(shape 10) under proportional hazards;
// costs are Gaussian around 5 + 5c + 0.1L + cost_effect A + T.
struct DGPConfig {
  std::size_t n = 500;
  double p_c = 0.0;
  double p_delta = 0.1;
  double kappa = 1.0;
  std::uint64_t seed = 1;
  double cost_effect = -3.0;
  double surv_effect = 2.0;

  void validate() const;
};

struct LatentTruth {
  int c = 0;
  double death = 0.0;
  double censor = 0.0;
};

struct Simulation {
  Dataset data;
  std::vector<LatentTruth> truth;
};

// A subject is censored iff C < D and an independent uniform falls below
// p_delta; then (T, delta) = (C, 0), otherwise (D, 1).
Simulation simulate(const DGPConfig& config);

// CSV sidecar: i,c,D,C.
void write_truth(std::ostream& out, const std::vector<LatentTruth>& truth);

struct OracleTruth {
  double psi = 0.0;
  double psi_se = 0.0;
  double time1 = 0.0, time0 = 0.0;  // E[T^a]
  double time1_se = 0.0, time0_se = 0.0;
  double cost1 = 0.0, cost0 = 0.0;  // E[Y^a]
  double cost1_se = 0.0, cost0_se = 0.0;
  std::size_t reps = 0;
};

// Potential outcomes under both arms with common random numbers and no
// censoring. Costs enter through E[Y | c, L, T], which removes the Gaussian
// noise from the Monte-Carlo error without changing any expectation.
OracleTruth oracle_truth(const DGPConfig& config, std::size_t reps);

}  // namespace bnpcea
