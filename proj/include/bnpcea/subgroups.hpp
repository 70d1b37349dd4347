#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnpcea/draw_store.hpp"

namespace bnpcea {

// Dense n x n 0/1 matrix, row-major. Entry (i, j) is 1 iff subjects i and j
// share the same (omega, theta) pair.
std::vector<std::uint8_t> adjacency(std::span<const ClusterLabel> assignments);

// Streaming co-clustering counts over draws. Only the strict lower triangle
// is kept; the diagonal is identically one.
class CoClusterAccumulator {
 public:
  using Key = std::function<bool(const ClusterLabel&, const ClusterLabel&)>;

  explicit CoClusterAccumulator(std::size_t n);
  // Same-cluster test; default compares full (j, k) labels.
  CoClusterAccumulator(std::size_t n, Key same);

  void add(std::span<const ClusterLabel> assignments);

  std::size_t n() const { return n_; }
  std::size_t draws() const { return draws_; }
  std::uint64_t count(std::size_t i, std::size_t j) const;
  double probability(std::size_t i, std::size_t j) const;
  // Full symmetric P, row-major.
  std::vector<double> matrix() const;

 private:
  static std::size_t index(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }
  std::size_t n_;
  std::size_t draws_ = 0;
  std::vector<std::uint64_t> counts_;
  Key same_;
};

CoClusterAccumulator coclustering(const DrawStore& store);
// Diagnostic: co-membership in the outer cost cluster only.
CoClusterAccumulator omega_coclustering(const DrawStore& store);

struct ModePartition {
  std::size_t draw_index = 0;  // position in DrawStore::draws
  std::int64_t iteration = 0;
  std::vector<ClusterLabel> assignments;
  double distance = 0.0;  // Frobenius norm of C - P
};
// The stored draw closest to P; ties go to the earliest draw.
ModePartition mode_partition(const DrawStore& store, const CoClusterAccumulator& p);

// Between-cluster share of the variation of psi_i. `centre` is the constant
// both sums are taken around; NaN is returned when the total is zero.
double dsi_value(std::span<const double> psi, std::span<const ClusterLabel> assignments, double centre);

struct DsiDraws {
  std::vector<std::int64_t> iteration;
  std::vector<double> dsi;              // centred at the unweighted mean of psi_i
  std::vector<double> dsi_weighted;     // centred at the bootstrap-weighted Psi
  std::size_t missing = 0;
};
// psi[m][i] per stored draw m; weights come from the store.
DsiDraws dsi(const DrawStore& store, const std::vector<std::vector<double>>& psi);

struct GraphEdge {
  std::size_t i;
  std::size_t j;
  double p;
};
// Edges with P_ij > threshold, i < j, in row order.
std::vector<GraphEdge> export_graph(const CoClusterAccumulator& p, double threshold);

struct ClusterProfile {
  ClusterLabel label;
  std::size_t size = 0;
  double mean_a = 0.0;
  std::vector<double> mean_l;
  double mean_psi = 0.0;
};
std::vector<ClusterProfile> cluster_profiles(const ModePartition& mode, const Dataset& data,
                                             std::span<const double> posterior_mean_psi);

}  // namespace bnpcea
