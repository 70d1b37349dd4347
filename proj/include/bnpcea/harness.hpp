#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bnpcea/config.hpp"
#include "bnpcea/simulator.hpp"

namespace bnpcea {

struct EvalSetting {
  std::string name;  // e.g. "parametric/low"
  double p_c = 0.0;
  double p_delta = 0.1;
};

// parametric/low, parametric/high, bimodal/low, bimodal/high.
std::vector<EvalSetting> standard_settings();
EvalSetting find_setting(const std::string& name);

struct EvalOptions {
  std::vector<EvalSetting> settings;
  std::size_t replicates = 50;
  std::size_t n = 500;
  double kappa = 1.0;
  std::uint64_t seed = 1;
  std::size_t truth_reps = 1000000;
  // 0: BNPCEA_WORKERS, falling back to the hardware thread count.
  std::size_t workers = 0;
  RunConfig fit;  // seed and kappa_grid are overridden per replicate
};

struct ReplicateRecord {
  std::string setting;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double psi_true = 0.0;
  double psi_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t censored = 0;
};

struct SettingSummary {
  std::string setting;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  bool exclusions_flagged = false;  // failures above 5% of replicates
  double psi_true = 0.0;
  double mean_rel_bias = 0.0;      // mean of (hat - true) / |true|
  double mean_abs_rel_bias = 0.0;  // mean of |hat - true| / |true|
  double coverage = 0.0;
  double mean_width = 0.0;
};

struct EvalReport {
  std::vector<ReplicateRecord> records;
  std::vector<SettingSummary> summaries;
  std::string fingerprint;
};

// Aggregation is a pure function of the per-replicate records.
std::vector<SettingSummary> aggregate(const std::vector<ReplicateRecord>& records);

using ReplicateCallback = std::function<void(const ReplicateRecord&)>;
EvalReport evaluate(const EvalOptions& options, const ReplicateCallback& on_done = {});

std::size_t worker_count(std::size_t requested);

void write_records(std::ostream& out, const std::vector<ReplicateRecord>& records,
                   const std::string& comment = "");
std::vector<ReplicateRecord> read_records(std::istream& in, const std::string& source = "<records>");
void write_summaries(std::ostream& out, const std::vector<SettingSummary>& summaries,
                     const std::string& comment = "");

}  // namespace bnpcea
