#include "bnpcea/subgroups.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "bnpcea/errors.hpp"

namespace bnpcea {

std::vector<std::uint8_t> adjacency(std::span<const ClusterLabel> assignments) {
  const std::size_t n = assignments.size();
  std::vector<std::uint8_t> c(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = assignments[i] == assignments[j] ? 1 : 0;
  return c;
}

CoClusterAccumulator::CoClusterAccumulator(std::size_t n)
    : CoClusterAccumulator(n, [](const ClusterLabel& a, const ClusterLabel& b) { return a == b; }) {}

CoClusterAccumulator::CoClusterAccumulator(std::size_t n, Key same)
    : n_(n), counts_(n * (n > 0 ? n - 1 : 0) / 2, 0), same_(std::move(same)) {}

void CoClusterAccumulator::add(std::span<const ClusterLabel> assignments) {
  if (assignments.size() != n_) throw ValidationError("assignment vector has the wrong length");
  for (std::size_t i = 1; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (same_(assignments[i], assignments[j])) ++counts_[index(i, j)];
  ++draws_;
}

std::uint64_t CoClusterAccumulator::count(std::size_t i, std::size_t j) const {
  if (i == j) return draws_;
  return i > j ? counts_[index(i, j)] : counts_[index(j, i)];
}

double CoClusterAccumulator::probability(std::size_t i, std::size_t j) const {
  if (draws_ == 0) return i == j ? 1.0 : 0.0;
  return static_cast<double>(count(i, j)) / static_cast<double>(draws_);
}

std::vector<double> CoClusterAccumulator::matrix() const {
  std::vector<double> p(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) p[i * n_ + j] = probability(i, j);
  return p;
}

CoClusterAccumulator coclustering(const DrawStore& store) {
  CoClusterAccumulator acc(store.n);
  for (const auto& d : store.draws) acc.add(d.assignments);
  return acc;
}

CoClusterAccumulator omega_coclustering(const DrawStore& store) {
  CoClusterAccumulator acc(store.n, [](const ClusterLabel& a, const ClusterLabel& b) { return a.j == b.j; });
  for (const auto& d : store.draws) acc.add(d.assignments);
  return acc;
}

ModePartition mode_partition(const DrawStore& store, const CoClusterAccumulator& p) {
  if (store.draws.empty()) throw ValidationError("mode partition needs at least one draw");
  const std::size_t n = p.n();
  const auto M = static_cast<std::int64_t>(p.draws());
  // Distances are compared as exact integers: sum over pairs of
  // (M * C_ij - count_ij)^2 = M^2 * ||C - P||^2 restricted to i > j.
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::size_t best_m = 0;
  for (std::size_t m = 0; m < store.draws.size(); ++m) {
    const auto& a = store.draws[m].assignments;
    std::int64_t dist = 0;
    for (std::size_t i = 1; i < n && dist < best; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const std::int64_t r = (a[i] == a[j] ? M : 0) - static_cast<std::int64_t>(p.count(i, j));
        dist += r * r;
      }
    }
    if (dist < best) {
      best = dist;
      best_m = m;
    }
  }
  ModePartition out;
  out.draw_index = best_m;
  out.iteration = store.draws[best_m].iteration;
  out.assignments = store.draws[best_m].assignments;
  // Both triangles contribute to the Frobenius norm.
  out.distance = M > 0 ? std::sqrt(2.0 * static_cast<double>(best)) / static_cast<double>(M) : 0.0;
  return out;
}

double dsi_value(std::span<const double> psi, std::span<const ClusterLabel> assignments, double centre) {
  std::map<ClusterLabel, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    auto& s = sums[assignments[i]];
    s.first += psi[i];
    ++s.second;
  }
  double between = 0.0, total = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto& s = sums[assignments[i]];
    const double cluster_mean = s.first / static_cast<double>(s.second);
    between += (cluster_mean - centre) * (cluster_mean - centre);
    total += (psi[i] - centre) * (psi[i] - centre);
  }
  if (!(total > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return between / total;
}

DsiDraws dsi(const DrawStore& store, const std::vector<std::vector<double>>& psi) {
  if (psi.size() != store.draws.size()) throw ValidationError("psi draws do not align with the store");
  DsiDraws out;
  for (std::size_t m = 0; m < psi.size(); ++m) {
    const auto& d = store.draws[m];
    const auto& row = psi[m];
    if (row.size() < 2) throw ValidationError("DSI needs at least 2 subjects");
    double grand = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      grand += row[i];
      weighted += d.weights.empty() ? row[i] / static_cast<double>(row.size()) : d.weights[i] * row[i];
    }
    grand /= static_cast<double>(row.size());
    // Differences at rounding level carry no signal; treat them as a zero total.
    double spread = 0.0, scale = 0.0;
    for (double v : row) {
      spread = std::max(spread, std::abs(v - grand));
      scale = std::max(scale, std::abs(v));
    }
    double value = std::numeric_limits<double>::quiet_NaN();
    if (spread > 1e-12 * std::max(1.0, scale)) value = dsi_value(row, d.assignments, grand);
    if (std::isnan(value)) ++out.missing;
    out.iteration.push_back(d.iteration);
    out.dsi.push_back(value);
    out.dsi_weighted.push_back(dsi_value(row, d.assignments, weighted));
  }
  return out;
}

std::vector<GraphEdge> export_graph(const CoClusterAccumulator& p, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw ConfigError("graph threshold must lie in [0, 1)");
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = i + 1; j < p.n(); ++j) {
      const double pij = p.probability(i, j);
      if (pij > threshold) edges.push_back({i, j, pij});
    }
  return edges;
}

std::vector<ClusterProfile> cluster_profiles(const ModePartition& mode, const Dataset& data,
                                             std::span<const double> posterior_mean_psi) {
  std::map<ClusterLabel, ClusterProfile> acc;
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto& c = acc[mode.assignments[i]];
    c.label = mode.assignments[i];
    if (c.mean_l.empty()) c.mean_l.assign(data.q(), 0.0);
    ++c.size;
    c.mean_a += data[i].a;
    for (std::size_t d = 0; d < data.q(); ++d) c.mean_l[d] += data[i].l[d];
    c.mean_psi += posterior_mean_psi[i];
  }
  std::vector<ClusterProfile> out;
  for (auto& [lab, c] : acc) {
    const double s = static_cast<double>(c.size);
    c.mean_a /= s;
    for (auto& v : c.mean_l) v /= s;
    c.mean_psi /= s;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace bnpcea
