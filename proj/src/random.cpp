#include "bnpcea/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnpcea/errors.hpp"

namespace bnpcea {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (stream * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

double Rng::log_gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw NumericError("gamma variate requested with shape " + std::to_string(shape));
  }
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    return log_gamma(shape + 1.0) + std::log(uniform()) / shape;
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return std::log(d) + std::log(v);
    }
  }
}

double Rng::gamma(double shape, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw NumericError("gamma variate requested with rate " + std::to_string(rate));
  }
  return std::exp(log_gamma(shape) - std::log(rate));
}

double Rng::inv_gamma(double shape, double scale) {
  return std::exp(std::log(scale) - log_gamma(shape));
}

double Rng::beta(double a, double b) {
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  const double m = std::max(la, lb);
  return std::exp(la - m) / (std::exp(la - m) + std::exp(lb - m));
}

std::uint64_t Rng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw NumericError("poisson variate requested with mean " + std::to_string(mean));
  }
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::size_t Rng::categorical_log(std::span<const double> log_weights) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) m = std::max(m, v);
  if (!(m > -std::numeric_limits<double>::infinity()) || std::isnan(m)) {
    throw NumericError("categorical draw with no finite log weight");
  }
  double total = 0.0;
  for (double v : log_weights) total += std::exp(v - m);
  double target = uniform() * total;
  std::size_t last = 0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    const double w = std::exp(log_weights[k] - m);
    if (w <= 0.0) continue;
    last = k;
    target -= w;
    if (target <= 0.0) return k;
  }
  return last;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("categorical draw with zero or non-finite total mass");
  }
  double target = uniform() * total;
  std::size_t last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    last = k;
    target -= weights[k];
    if (target <= 0.0) return k;
  }
  return last;
}

std::vector<double> Rng::dirichlet(std::size_t n, double alpha) {
  std::vector<double> logs(n);
  for (auto& v : logs) v = log_gamma(alpha);
  const double lse = log_sum_exp(logs);
  std::vector<double> out(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logs[i] - lse);
    sum += out[i];
  }
  // Renormalise away the rounding left by exp/log.
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace bnpcea
