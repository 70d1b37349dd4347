#include "bnpcea/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "bnpcea/edp_sampler.hpp"
#include "bnpcea/errors.hpp"
#include "bnpcea/gcomp.hpp"

namespace bnpcea {

std::vector<EvalSetting> standard_settings() {
  return {{"parametric/low", 0.0, 0.1},
          {"parametric/high", 0.0, 0.4},
          {"bimodal/low", 0.5, 0.1},
          {"bimodal/high", 0.5, 0.4}};
}

EvalSetting find_setting(const std::string& name) {
  for (const auto& s : standard_settings())
    if (s.name == name) return s;
  throw ConfigError("unknown setting '" + name + "'");
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BNPCEA_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw ConfigError("BNPCEA_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SettingSummary> aggregate(const std::vector<ReplicateRecord>& records) {
  std::vector<SettingSummary> out;
  auto find = [&](const std::string& name) -> SettingSummary& {
    for (auto& s : out)
      if (s.setting == name) return s;
    out.push_back({});
    out.back().setting = name;
    return out.back();
  };
  std::map<std::string, std::size_t> ok_count;
  for (const auto& r : records) {
    auto& s = find(r.setting);
    ++s.replicates;
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    const double scale = std::abs(r.psi_true);
    s.psi_true = r.psi_true;
    s.mean_rel_bias += (r.psi_hat - r.psi_true) / scale;
    s.mean_abs_rel_bias += std::abs(r.psi_hat - r.psi_true) / scale;
    s.coverage += (r.lo <= r.psi_true && r.psi_true <= r.hi) ? 1.0 : 0.0;
    s.mean_width += r.hi - r.lo;
    ++ok_count[r.setting];
  }
  for (auto& s : out) {
    const auto k = static_cast<double>(ok_count[s.setting]);
    if (k > 0) {
      s.mean_rel_bias /= k;
      s.mean_abs_rel_bias /= k;
      s.coverage /= k;
      s.mean_width /= k;
    }
    s.exclusions_flagged = static_cast<double>(s.failures) > 0.05 * static_cast<double>(s.replicates);
  }
  return out;
}

namespace {

struct Job {
  std::size_t setting;
  std::size_t replicate;
};

ReplicateRecord run_replicate(const EvalOptions& opt, const EvalSetting& setting, std::size_t setting_index,
                              std::size_t replicate, double psi_true) {
  ReplicateRecord rec;
  rec.setting = setting.name;
  rec.replicate = replicate;
  rec.seed = mix_seed(opt.seed, (static_cast<std::uint64_t>(setting_index) << 32) | replicate);
  rec.psi_true = psi_true;
  try {
    DGPConfig dgp;
    dgp.n = opt.n;
    dgp.p_c = setting.p_c;
    dgp.p_delta = setting.p_delta;
    dgp.kappa = opt.kappa;
    dgp.seed = rec.seed;
    const auto sim = simulate(dgp);
    for (const auto& s : sim.data) rec.censored += s.delta == 0 ? 1 : 0;
    RunConfig cfg = opt.fit;
    cfg.seed = mix_seed(rec.seed, 1);
    cfg.kappa_grid = {opt.kappa};
    const auto store = run_mcmc(sim.data, cfg);
    std::vector<double> psi;
    psi.reserve(store.draws.size());
    for (const auto& d : store.draws) psi.push_back(d.psi.at(0));
    const auto summary = summarize_nmb(psi);
    rec.psi_hat = summary.mean;
    rec.lo = summary.lo;
    rec.hi = summary.hi;
    rec.ok = std::isfinite(rec.psi_hat) && std::isfinite(rec.lo) && std::isfinite(rec.hi);
    if (!rec.ok) rec.error = "non-finite posterior summary";
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

EvalReport evaluate(const EvalOptions& options, const ReplicateCallback& on_done) {
  if (options.replicates < 2) throw ConfigError("evaluate needs at least 2 replicates");
  if (options.settings.empty()) throw ConfigError("evaluate needs at least one setting");
  options.fit.validate();

  std::vector<double> truths;
  for (const auto& s : options.settings) {
    DGPConfig dgp;
    dgp.p_c = s.p_c;
    dgp.p_delta = s.p_delta;
    dgp.kappa = options.kappa;
    dgp.seed = options.seed;
    truths.push_back(oracle_truth(dgp, options.truth_reps).psi);
  }

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < options.settings.size(); ++s)
    for (std::size_t r = 0; r < options.replicates; ++r) jobs.push_back({s, r});
  std::vector<ReplicateRecord> records(jobs.size());

  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
      const auto& job = jobs[idx];
      records[idx] = run_replicate(options, options.settings[job.setting], job.setting, job.replicate,
                                   truths[job.setting]);
      if (on_done) {
        std::lock_guard lock(callback_mutex);
        on_done(records[idx]);
      }
    }
  };
  const std::size_t workers = std::min(worker_count(options.workers), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  EvalReport report;
  report.records = std::move(records);
  report.summaries = aggregate(report.records);
  std::ostringstream fp;
  fp << "replicates=" << options.replicates << " n=" << options.n << " kappa=" << format_double(options.kappa)
     << " seed=" << options.seed << " truth_reps=" << options.truth_reps << ' ' << config_fingerprint(options.fit);
  report.fingerprint = fp.str();
  return report;
}

namespace {

std::string sanitize(std::string s) {
  for (auto& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kRecordHeader = "setting,replicate,seed,ok,psi_true,psi_hat,lo95,hi95,censored,error";

}  // namespace

void write_records(std::ostream& out, const std::vector<ReplicateRecord>& records, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.setting << ',' << r.replicate << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
        << format_double(r.psi_true) << ',' << format_double(r.psi_hat) << ',' << format_double(r.lo) << ','
        << format_double(r.hi) << ',' << r.censored << ',' << sanitize(r.error) << '\n';
  }
}

std::vector<ReplicateRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<ReplicateRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kRecordHeader) throw ParseError(source + ":" + std::to_string(lineno) + ": unexpected header");
      header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 10) throw ParseError(source + ":" + std::to_string(lineno) + ": expected 10 fields");
    try {
      ReplicateRecord r;
      r.setting = cells[0];
      r.replicate = std::stoul(cells[1]);
      r.seed = std::stoull(cells[2]);
      r.ok = cells[3] == "1";
      r.psi_true = parse_double(cells[4]);
      r.psi_hat = parse_double(cells[5]);
      r.lo = parse_double(cells[6]);
      r.hi = parse_double(cells[7]);
      r.censored = std::stoul(cells[8]);
      r.error = cells[9];
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_summaries(std::ostream& out, const std::vector<SettingSummary>& summaries, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "setting,replicates,failures,exclusions_flagged,psi_true,mean_rel_bias,mean_abs_rel_bias,coverage,"
         "mean_width\n";
  for (const auto& s : summaries) {
    out << s.setting << ',' << s.replicates << ',' << s.failures << ',' << (s.exclusions_flagged ? 1 : 0) << ','
        << format_double(s.psi_true) << ',' << format_double(s.mean_rel_bias) << ','
        << format_double(s.mean_abs_rel_bias) << ',' << format_double(s.coverage) << ','
        << format_double(s.mean_width) << '\n';
  }
}

}  // namespace bnpcea
