#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bnpcea {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Thin wrapper around a 64-bit Mersenne Twister with the handful of
// distributions the samplers need. Gamma variates are generated on the log
// scale so that shapes far below one (Dir(1/n), near-flat hazard priors) do
// not silently underflow to zero.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Open interval (0, 1).
  double uniform();
  double normal() { return std_normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double rate);

  // log of a Gamma(shape, 1) variate.
  double log_gamma(double shape);
  // Gamma with shape/rate parameterisation.
  double gamma(double shape, double rate);
  // Inverse-Gamma with shape/scale parameterisation (mean scale/(shape-1)).
  double inv_gamma(double shape, double scale);
  double beta(double a, double b);
  std::uint64_t poisson(double mean);

  // Index drawn with probability proportional to exp(log_weights[k]).
  // Entries equal to -inf carry zero mass.
  std::size_t categorical_log(std::span<const double> log_weights);
  // Index drawn from a normalised or unnormalised nonnegative mass vector.
  std::size_t categorical(std::span<const double> weights);

  // Symmetric Dirichlet(alpha, ..., alpha) of dimension n.
  std::vector<double> dirichlet(std::size_t n, double alpha);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

// log(sum(exp(x))) with max subtraction; returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

}  // namespace bnpcea
