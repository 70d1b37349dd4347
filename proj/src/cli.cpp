#include "bnpcea/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "bnpcea/config.hpp"
#include "bnpcea/data.hpp"
#include "bnpcea/draw_store.hpp"
#include "bnpcea/edp_sampler.hpp"
#include "bnpcea/errors.hpp"
#include "bnpcea/gamma_process.hpp"
#include "bnpcea/gcomp.hpp"
#include "bnpcea/harness.hpp"
#include "bnpcea/simulator.hpp"
#include "bnpcea/stats.hpp"
#include "bnpcea/subgroups.hpp"

namespace bnpcea {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void provenance(std::ostream& out, const std::string& command, const std::string& detail) {
  out << "# bnpcea " << command << ' ' << detail << '\n';
}

// Config file, then repeated --set key=value, then dedicated flags.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;
  std::optional<std::int64_t> iters, burnin, thin;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app, bool with_chain_flags = true, bool with_seed = true) {
    app->add_option("--config", path, "flat key = value config file");
    app->add_option("--set", sets, "override one config key (key=value); repeatable");
    if (!with_chain_flags) return;
    if (with_seed) app->add_option("--seed", seed, "chain seed");
    app->add_option("--iters", iters, "total iterations");
    app->add_option("--burnin", burnin, "burn-in iterations");
    app->add_option("--thin", thin, "thinning interval");
  }

  RunConfig resolve(RunConfig base = {}) const {
    if (!path.empty()) base = config_from(read_key_values(path), base);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      base.apply(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) base.seed = *seed;
    if (iters) base.iters = *iters;
    if (burnin) base.burnin = *burnin;
    if (thin) base.thin = *thin;
    base.validate();
    return base;
  }
};

// Minimal reader for the tool's own CSV outputs.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split_csv(line);
    } else {
      t.rows.push_back(split_csv(line));
    }
  }
  if (t.header.empty()) throw ValidationError("'" + path + "' has no header");
  return t;
}

std::string first_data_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return line;
  throw ValidationError("'" + path + "' is empty");
}

struct StoreAndData {
  DrawStore store;
  Dataset data;  // prepared
};

StoreAndData load_store_and_data(const std::string& draws_path, const std::string& data_override) {
  StoreAndData sd;
  sd.store = load_draw_store(draws_path);
  const std::string data_path = data_override.empty() ? sd.store.data_path : data_override;
  if (data_path.empty()) throw ValidationError("draw store does not record its data file; pass --data");
  sd.data = prepare_for_store(load_dataset(data_path, sd.store.config.cost_model), sd.store);
  return sd;
}

std::string store_detail(const DrawStore& store) {
  return "data=" + store.data_path + " " + config_fingerprint(store.config);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  DGPConfig dgp;
  std::string out, truth;
};

void run_simulate(const SimulateArgs& a) {
  const auto sim = simulate(a.dgp);
  std::ostringstream detail;
  detail << "n=" << a.dgp.n << " pc=" << format_double(a.dgp.p_c) << " pdelta=" << format_double(a.dgp.p_delta)
         << " seed=" << a.dgp.seed << " cost_effect=" << format_double(a.dgp.cost_effect)
         << " surv_effect=" << format_double(a.dgp.surv_effect);
  {
    auto out = open_output(a.out);
    write_dataset(out, sim.data, {"bnpcea simulate " + detail.str()});
  }
  std::string truth = a.truth;
  if (truth.empty()) truth = (fs::path(a.out).parent_path() / "truth.csv").string();
  auto out = open_output(truth);
  provenance(out, "simulate", detail.str());
  write_truth(out, sim.truth);
}

struct FitArgs {
  std::string data, out, hazard_summary;
  ConfigArgs config;
  bool progress = false;
};

void run_fit(const FitArgs& a) {
  const RunConfig cfg = a.config.resolve();
  const Dataset data = load_dataset(a.data, cfg.cost_model);
  ProgressFn progress;
  if (a.progress) {
    progress = [](std::int64_t done, std::int64_t total) {
      if (done % 100 == 0 || done == total) std::cerr << "iteration " << done << '/' << total << '\n';
    };
  }
  const auto store = run_mcmc(data, cfg, a.data, progress);
  save_draw_store(a.out, store);
  for (const auto& w : store.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
  if (!a.hazard_summary.empty()) {
    std::vector<std::vector<double>> lambdas;
    for (const auto& d : store.draws) lambdas.push_back(d.lambda);
    auto out = open_output(a.hazard_summary);
    provenance(out, "fit", store_detail(store));
    write_hazard_summary(out, store.taus, lambdas);
  }
}

struct EstimateArgs {
  std::string draws, data, outdir = ".";
  std::vector<double> kappas;
  std::optional<double> ite_kappa;
};

void run_estimate(const EstimateArgs& a) {
  const auto sd = load_store_and_data(a.draws, a.data);
  const auto& store = sd.store;
  if (store.draws.size() < 2) throw ValidationError("estimate needs at least 2 retained draws");
  const std::vector<double> kappas = a.kappas.empty() ? store.kappa_grid() : a.kappas;
  const std::string detail = store_detail(store);

  {
    auto out = open_output(in_dir(a.outdir, "nmb_draws.csv"));
    provenance(out, "estimate", detail);
    out << "m,kappa,psi\n";
    for (double k : kappas)
      for (const auto& d : store.draws)
        out << d.iteration << ',' << format_double(k) << ',' << format_double(k * d.delta_time - d.delta_cost) << '\n';
  }
  const auto curve = ceac(store, kappas);
  {
    auto out = open_output(in_dir(a.outdir, "ceac.csv"));
    provenance(out, "estimate", detail);
    out << "kappa,prob\n";
    for (std::size_t k = 0; k < kappas.size(); ++k) out << format_double(kappas[k]) << ',' << format_double(curve[k]) << '\n';
  }
  {
    auto out = open_output(in_dir(a.outdir, "nmb_summary.csv"));
    provenance(out, "estimate", detail);
    out << "kappa,mean,lo95,hi95,prob_positive\n";
    std::vector<double> psi(store.draws.size());
    for (std::size_t k = 0; k < kappas.size(); ++k) {
      for (std::size_t m = 0; m < psi.size(); ++m) psi[m] = kappas[k] * store.draws[m].delta_time - store.draws[m].delta_cost;
      const auto s = summarize_nmb(psi);
      out << format_double(kappas[k]) << ',' << format_double(s.mean) << ',' << format_double(s.lo) << ','
          << format_double(s.hi) << ',' << format_double(curve[k]) << '\n';
    }
  }
  {
    const auto ic = icer(store);
    auto out = open_output(in_dir(a.outdir, "icer_draws.csv"));
    provenance(out, "estimate", detail + " flagged=" + std::to_string(ic.flagged_count));
    out << "m,delta_cost,delta_time,icer,flagged\n";
    for (std::size_t m = 0; m < store.draws.size(); ++m) {
      const auto& d = store.draws[m];
      out << d.iteration << ',' << format_double(d.delta_cost) << ',' << format_double(d.delta_time) << ','
          << (ic.flagged[m] ? std::string("NA") : format_double(ic.ratio[m])) << ',' << (ic.flagged[m] ? 1 : 0)
          << '\n';
    }
  }
  {
    const double k = a.ite_kappa ? *a.ite_kappa : kappas.front();
    const auto rows = ite_summary(store, sd.data, k);
    auto out = open_output(in_dir(a.outdir, "ite_summary.csv"));
    provenance(out, "estimate", detail + " kappa=" + format_double(k));
    out << "i,mean,lo95,hi95\n";
    for (const auto& r : rows)
      out << r.i << ',' << format_double(r.mean) << ',' << format_double(r.lo) << ',' << format_double(r.hi) << '\n';
  }
}

struct SubgroupArgs {
  std::string draws, data, outdir = ".";
  double kappa = 1.0;
  double threshold = 0.5;
};

void write_coclust(const std::string& path, const CoClusterAccumulator& p, const std::string& detail) {
  auto out = open_output(path);
  provenance(out, "subgroups", detail);
  out << "i,j,p\n";
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = 0; j <= i; ++j) out << i << ',' << j << ',' << format_double(p.probability(i, j)) << '\n';
}

void run_subgroups(const SubgroupArgs& a) {
  const auto sd = load_store_and_data(a.draws, a.data);
  const auto& store = sd.store;
  if (store.draws.empty()) throw ValidationError("subgroups needs at least one retained draw");
  const std::string detail = store_detail(store) + " kappa=" + format_double(a.kappa);

  const auto p = coclustering(store);
  write_coclust(in_dir(a.outdir, "coclust.csv"), p, detail);
  write_coclust(in_dir(a.outdir, "coclust_omega.csv"), omega_coclustering(store), detail);

  const auto mode = mode_partition(store, p);
  {
    auto out = open_output(in_dir(a.outdir, "mode_partition.csv"));
    provenance(out, "subgroups", detail + " source_iteration=" + std::to_string(mode.iteration) +
                                     " distance=" + format_double(mode.distance));
    out << "i,j,k\n";
    for (std::size_t i = 0; i < mode.assignments.size(); ++i)
      out << i << ',' << mode.assignments[i].j << ',' << mode.assignments[i].k << '\n';
  }

  const auto psi = subject_psi_draws(store, sd.data, a.kappa);
  const auto d = dsi(store, psi);
  {
    auto out = open_output(in_dir(a.outdir, "dsi_draws.csv"));
    provenance(out, "subgroups", detail + " missing=" + std::to_string(d.missing));
    out << "m,dsi,dsi_weighted_center\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
    for (std::size_t m = 0; m < d.dsi.size(); ++m)
      out << d.iteration[m] << ',' << cell(d.dsi[m]) << ',' << cell(d.dsi_weighted[m]) << '\n';
  }

  std::vector<double> mean_psi(store.n, 0.0);
  for (const auto& row : psi)
    for (std::size_t i = 0; i < row.size(); ++i) mean_psi[i] += row[i] / static_cast<double>(psi.size());
  {
    auto out = open_output(in_dir(a.outdir, "graph_edges.csv"));
    provenance(out, "subgroups", detail + " threshold=" + format_double(a.threshold));
    out << "i,j,p\n";
    for (const auto& e : export_graph(p, a.threshold)) out << e.i << ',' << e.j << ',' << format_double(e.p) << '\n';
  }
  {
    auto out = open_output(in_dir(a.outdir, "graph_nodes.csv"));
    provenance(out, "subgroups", detail);
    out << "i,j,k,mean_psi\n";
    for (std::size_t i = 0; i < store.n; ++i)
      out << i << ',' << mode.assignments[i].j << ',' << mode.assignments[i].k << ',' << format_double(mean_psi[i])
          << '\n';
  }
  {
    auto out = open_output(in_dir(a.outdir, "cluster_profiles.csv"));
    provenance(out, "subgroups", detail);
    out << "j,k,size,mean_a";
    for (std::size_t q = 0; q < sd.data.q(); ++q) out << ",mean_l" << q + 1;
    out << ",mean_psi\n";
    for (const auto& c : cluster_profiles(mode, sd.data, mean_psi)) {
      out << c.label.j << ',' << c.label.k << ',' << c.size << ',' << format_double(c.mean_a);
      for (double v : c.mean_l) out << ',' << format_double(v);
      out << ',' << format_double(c.mean_psi) << '\n';
    }
  }
}

struct EvaluateArgs {
  std::vector<std::string> settings{"parametric/low", "parametric/high", "bimodal/low", "bimodal/high"};
  std::size_t replicates = 50;
  std::size_t n = 500;
  double kappa = 1.0;
  std::uint64_t seed = 1;
  std::size_t truth_reps = 1000000;
  std::size_t workers = 0;
  std::string outdir = ".";
  ConfigArgs config;
  bool progress = false;
};

void run_evaluate(const EvaluateArgs& a) {
  EvalOptions opt;
  for (const auto& s : a.settings) opt.settings.push_back(find_setting(s));
  opt.replicates = a.replicates;
  opt.n = a.n;
  opt.kappa = a.kappa;
  opt.seed = a.seed;
  opt.truth_reps = a.truth_reps;
  opt.workers = a.workers;
  RunConfig base;
  base.add_intercept = true;
  opt.fit = a.config.resolve(base);
  ReplicateCallback cb;
  if (a.progress) {
    cb = [](const ReplicateRecord& r) {
      std::cerr << r.setting << " #" << r.replicate << (r.ok ? " ok" : " failed: " + r.error) << '\n';
    };
  }
  const auto report = evaluate(opt, cb);
  {
    auto out = open_output(in_dir(a.outdir, "eval_records.csv"));
    write_records(out, report.records, "bnpcea evaluate " + report.fingerprint);
  }
  auto out = open_output(in_dir(a.outdir, "eval_report.csv"));
  write_summaries(out, report.summaries, "bnpcea evaluate " + report.fingerprint);
  write_summaries(std::cout, report.summaries);
}

// ---------------------------------------------------------------------------

void summarize_store(std::ostream& os, const std::string& path) {
  const auto store = load_draw_store(path);
  os << "draw store: " << path << '\n';
  os << "  data: " << store.data_path << " (n=" << store.n << ", q=" << store.q << ")\n";
  os << "  intervals: " << store.taus.size() << ", horizon " << format_double(store.taus.empty() ? 0.0 : store.taus.back())
     << '\n';
  os << "  retained draws: " << store.draws.size() << '\n';
  if (store.draws.empty()) return;
  std::vector<double> J, K, ao, at;
  for (const auto& d : store.draws) {
    J.push_back(static_cast<double>(d.omegas.size()));
    K.push_back(static_cast<double>(d.thetas.size()));
    ao.push_back(d.alpha_omega);
    at.push_back(d.alpha_theta);
  }
  os << std::setprecision(4);
  os << "  mean clusters: " << mean(J) << " outer, " << mean(K) << " joint\n";
  os << "  mean alpha_omega " << mean(ao) << ", alpha_theta " << mean(at) << '\n';
  os << "  acceptance c:";
  for (double r : store.diagnostics.c_acceptance) os << ' ' << r;
  os << "\n  acceptance theta:";
  for (double r : store.diagnostics.theta_acceptance) os << ' ' << r;
  os << '\n';
  if (store.draws.size() >= 2) {
    const auto curve = ceac(store);
    os << "  kappa     mean NMB    2.5%       97.5%      P(NMB>0)\n";
    std::vector<double> psi(store.draws.size());
    for (std::size_t k = 0; k < store.kappa_grid().size(); ++k) {
      for (std::size_t m = 0; m < psi.size(); ++m) psi[m] = store.draws[m].psi.at(k);
      const auto s = summarize_nmb(psi);
      os << "  " << std::setw(8) << store.kappa_grid()[k] << "  " << std::setw(9) << s.mean << "  " << std::setw(9)
         << s.lo << "  " << std::setw(9) << s.hi << "  " << curve[k] << '\n';
    }
    const auto ic = icer(store);
    os << "  ICER mean " << ic.summary.mean << " [" << ic.summary.lo << ", " << ic.summary.hi << "], "
       << ic.flagged_count << " draws flagged\n";
  }
  for (const auto& w : store.diagnostics.warnings) os << "  warning: " << w << '\n';
}

void summarize_dataset(std::ostream& os, const std::string& path) {
  const auto data = load_dataset(path);
  std::size_t treated = 0;
  std::vector<double> y1, y0;
  for (const auto& s : data) {
    treated += s.a;
    (s.a ? y1 : y0).push_back(s.y);
  }
  os << std::setprecision(4);
  os << "dataset: " << path << '\n';
  os << "  n=" << data.n() << " q=" << data.q() << " treated=" << treated << '\n';
  os << "  deaths=" << data.deaths() << " censored fraction "
     << 1.0 - static_cast<double>(data.deaths()) / static_cast<double>(data.n()) << '\n';
  os << "  max time " << data.max_time() << ", distinct event times " << data.distinct_event_times() << '\n';
  os << "  mean cost treated " << mean(y1) << ", control " << mean(y0) << '\n';
}

void summarize_table(std::ostream& os, const std::string& path) {
  const auto t = read_table(path);
  os << "table: " << path << " (" << t.rows.size() << " rows)\n" << std::setprecision(6);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    std::vector<double> col;
    for (const auto& r : t.rows) {
      if (c >= r.size()) continue;
      try {
        col.push_back(parse_double(r[c]));
      } catch (const ParseError&) {
      }
    }
    os << "  " << t.header[c];
    if (!col.empty()) {
      os << ": mean " << mean(col) << ", min " << *std::min_element(col.begin(), col.end()) << ", max "
         << *std::max_element(col.begin(), col.end());
      if (col.size() != t.rows.size()) os << " (" << t.rows.size() - col.size() << " non-numeric)";
    }
    os << '\n';
  }
}

void run_summarize(const std::string& path, const std::string& out_path) {
  std::ostringstream os;
  const std::string first = first_data_line(path);
  if (!first.empty() && first[0] == '{') {
    summarize_store(os, path);
  } else if (first.rfind("y,t,delta,a", 0) == 0) {
    summarize_dataset(os, path);
  } else if (first.rfind("setting,replicate,seed", 0) == 0) {
    std::ifstream in(path);
    os << "evaluation records: " << path << '\n';
    write_summaries(os, aggregate(read_records(in, path)));
  } else {
    summarize_table(os, path);
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    auto out = open_output(out_path);
    out << os.str();
  }
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string what, out, draws, data, dsi, ite, mode;
  ConfigArgs config;
  double horizon = 1.0;
  std::size_t intervals = 10;
  std::size_t count = 20;
  std::uint64_t seed = 1;
};

void plot_prior_paths(const PlotArgs& a, std::ostream& out) {
  const RunConfig cfg = a.config.resolve();
  std::vector<double> taus;
  if (!a.data.empty()) {
    const auto data = load_dataset(a.data, cfg.cost_model);
    taus = build_grid(data, cfg.V > 0 ? static_cast<std::size_t>(cfg.V) : default_interval_count(data));
  } else {
    taus = build_grid(a.horizon, a.intervals);
  }
  Rng rng(mix_seed(a.seed, 0x9A7));
  const auto paths = prior_predictive_draws(cfg.lambda_star, cfg.b, cfg.xi, taus, a.count, rng);
  provenance(out, "plot-data", "what=prior-paths seed=" + std::to_string(a.seed) + ' ' + config_fingerprint(cfg));
  out << "path_id,t,lambda\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (std::size_t v = 0; v < taus.size(); ++v) {
      const double lo = v == 0 ? 0.0 : taus[v - 1];
      out << p << ',' << format_double(lo) << ',' << format_double(paths[p][v]) << '\n';
      out << p << ',' << format_double(taus[v]) << ',' << format_double(paths[p][v]) << '\n';
    }
  }
}

void plot_hazard(const PlotArgs& a, std::ostream& out) {
  const auto store = load_draw_store(a.draws);
  std::vector<std::vector<double>> lambdas;
  for (const auto& d : store.draws) lambdas.push_back(d.lambda);
  if (lambdas.empty()) throw ValidationError("draw store has no retained draws");
  provenance(out, "plot-data", "what=hazard " + store_detail(store));
  write_hazard_summary(out, store.taus, lambdas);
}

void plot_dsi(const PlotArgs& a, std::ostream& out) {
  const auto t = read_table(a.dsi);
  const auto c = t.column("dsi");
  provenance(out, "plot-data", "what=dsi source=" + a.dsi);
  out << "dsi\n";
  for (const auto& r : t.rows)
    if (c < r.size() && r[c] != "NA") out << r[c] << '\n';
}

void plot_ite(const PlotArgs& a, std::ostream& out) {
  const auto ite = read_table(a.ite);
  const auto mode = read_table(a.mode);
  const auto ci = ite.column("i"), cm = ite.column("mean"), cl = ite.column("lo95"), ch = ite.column("hi95");
  const auto mi = mode.column("i"), mj = mode.column("j"), mk = mode.column("k");
  std::map<std::size_t, std::pair<long, long>> label;
  for (const auto& r : mode.rows) label[std::stoul(r.at(mi))] = {std::stol(r.at(mj)), std::stol(r.at(mk))};
  // Dense 1-based cluster ids in (j, k) order.
  std::map<std::pair<long, long>, std::size_t> ids;
  for (const auto& [i, lab] : label) ids.emplace(lab, 0);
  std::size_t next = 1;
  for (auto& [lab, id] : ids) id = next++;
  struct Row {
    std::size_t i;
    double mean;
    std::string mean_s, lo, hi;
  };
  std::vector<Row> rows;
  for (const auto& r : ite.rows) rows.push_back({std::stoul(r.at(ci)), parse_double(r.at(cm)), r.at(cm), r.at(cl), r.at(ch)});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.mean < y.mean; });
  provenance(out, "plot-data", "what=ite source=" + a.ite + " mode=" + a.mode);
  out << "i,mean,lo,hi,cluster\n";
  for (const auto& r : rows) {
    const auto it = label.find(r.i);
    if (it == label.end()) throw ValidationError("subject " + std::to_string(r.i) + " missing from mode partition");
    out << r.i << ',' << r.mean_s << ',' << r.lo << ',' << r.hi << ',' << ids.at(it->second) << '\n';
  }
}

// Posterior predictive log event times (horizon-censored) for a subset of draws.
void plot_predictive(const PlotArgs& a, std::ostream& out) {
  const auto sd = load_store_and_data(a.draws, a.data);
  const auto& store = sd.store;
  if (store.draws.empty()) throw ValidationError("draw store has no retained draws");
  const std::size_t M = store.draws.size();
  const std::size_t take = std::min(a.count, M);
  Rng rng(mix_seed(a.seed, 0x9DE));
  provenance(out, "plot-data", "what=predictive seed=" + std::to_string(a.seed) + ' ' + store_detail(store));
  out << "m,i,a";
  for (std::size_t q = 0; q < sd.data.q(); ++q) out << ",l" << q + 1;
  out << ",log_t_observed,log_t_predicted,beyond_horizon\n";
  for (std::size_t s = 0; s < take; ++s) {
    const auto& d = store.draws[take == 1 ? M - 1 : s * (M - 1) / (take - 1)];
    const auto hazard = d.hazard(store.taus);
    for (std::size_t i = 0; i < sd.data.n(); ++i) {
      const auto& subj = sd.data[i];
      const double scale = std::exp(linear_predictor(subj.a, subj.l, d.theta_of(i).theta));
      // Invert the piecewise-linear cumulative hazard at an Exp(1) draw.
      double e = rng.exponential(1.0);
      double t = hazard.horizon();
      bool beyond = true;
      for (std::size_t v = 0; v < hazard.intervals(); ++v) {
        const double width = hazard.taus()[v] - hazard.lower(v);
        const double mass = hazard.lambda()[v] * scale * width;
        if (e <= mass) {
          t = hazard.lower(v) + e / (hazard.lambda()[v] * scale);
          beyond = false;
          break;
        }
        e -= mass;
      }
      out << d.iteration << ',' << i << ',' << subj.a;
      for (double l : subj.l) out << ',' << format_double(l);
      out << ',' << format_double(std::log(subj.t)) << ',' << format_double(std::log(t)) << ',' << (beyond ? 1 : 0)
          << '\n';
    }
  }
}

void run_plot(const PlotArgs& a) {
  std::ostringstream os;
  if (a.what == "prior-paths") {
    plot_prior_paths(a, os);
  } else if (a.what == "hazard") {
    if (a.draws.empty()) throw ValidationError("plot-data hazard needs --draws");
    plot_hazard(a, os);
  } else if (a.what == "dsi") {
    if (a.dsi.empty()) throw ValidationError("plot-data dsi needs --dsi");
    plot_dsi(a, os);
  } else if (a.what == "ite") {
    if (a.ite.empty() || a.mode.empty()) throw ValidationError("plot-data ite needs --ite and --mode");
    plot_ite(a, os);
  } else if (a.what == "predictive") {
    if (a.draws.empty()) throw ValidationError("plot-data predictive needs --draws");
    plot_predictive(a, os);
  }
  auto out = open_output(a.out);
  out << os.str();
}

constexpr const char* kPlotHelp =
    "Selectors and columns:\n"
    "  prior-paths  path_id,t,lambda   prior Gamma Process hazard paths (step edges)\n"
    "  hazard       v,tau_lo,tau_hi,lambda_mean,lambda_lo95,lambda_hi95\n"
    "  dsi          dsi                non-missing DSI draws from dsi_draws.csv\n"
    "  ite          i,mean,lo,hi,cluster  ITE table sorted by posterior mean\n"
    "  predictive   m,i,a,l1..lq,log_t_observed,log_t_predicted,beyond_horizon\n";

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bayesian nonparametric cost-effectiveness analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate a two-component cost-survival dataset");
  c_sim->add_option("--n", sim.dgp.n, "subjects")->capture_default_str();
  c_sim->add_option("--pc", sim.dgp.p_c, "latent class probability")->capture_default_str();
  c_sim->add_option("--pdelta", sim.dgp.p_delta, "censoring thinning probability")->capture_default_str();
  c_sim->add_option("--seed", sim.dgp.seed, "seed")->capture_default_str();
  c_sim->add_option("--cost-effect", sim.dgp.cost_effect, "treatment effect on cost")->capture_default_str();
  c_sim->add_option("--surv-effect", sim.dgp.surv_effect, "treatment log hazard ratio in class 1")
      ->capture_default_str();
  c_sim->add_option("--out", sim.out, "dataset CSV")->required();
  c_sim->add_option("--truth", sim.truth, "latent truth CSV (default: truth.csv next to --out)");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "run the MCMC sampler and store posterior draws");
  c_fit->add_option("--data", fit.data, "dataset CSV")->required();
  c_fit->add_option("--out", fit.out, "draw store (JSON lines)")->required();
  c_fit->add_option("--hazard-summary", fit.hazard_summary, "optional posterior hazard summary CSV");
  c_fit->add_flag("--progress", fit.progress, "report progress on stderr");
  fit.config.attach(c_fit);

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "NMB, CEAC, ICER and ITE outputs from a draw store");
  c_est->add_option("--draws", est.draws, "draw store")->required();
  c_est->add_option("--data", est.data, "dataset CSV (default: the one recorded in the store)");
  c_est->add_option("--kappa", est.kappas, "willingness-to-pay values (default: the store's grid)");
  c_est->add_option("--ite-kappa", est.ite_kappa, "kappa for ite_summary.csv (default: first kappa)");
  c_est->add_option("--outdir", est.outdir, "output directory")->capture_default_str();

  SubgroupArgs sub;
  auto* c_sub = app.add_subcommand("subgroups", "co-clustering, mode partition, DSI and graph export");
  c_sub->add_option("--draws", sub.draws, "draw store")->required();
  c_sub->add_option("--data", sub.data, "dataset CSV (default: the one recorded in the store)");
  c_sub->add_option("--kappa", sub.kappa, "willingness-to-pay for subject contrasts")->capture_default_str();
  c_sub->add_option("--threshold", sub.threshold, "minimum co-clustering probability for graph edges")
      ->capture_default_str();
  c_sub->add_option("--outdir", sub.outdir, "output directory")->capture_default_str();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "repeated simulate-fit-estimate study against oracle truth");
  c_ev->add_option("--settings", ev.settings, "settings among parametric/low, parametric/high, bimodal/low, bimodal/high");
  c_ev->add_option("--replicates", ev.replicates, "replicates per setting")->capture_default_str();
  c_ev->add_option("--n", ev.n, "subjects per replicate")->capture_default_str();
  c_ev->add_option("--kappa", ev.kappa, "willingness-to-pay")->capture_default_str();
  c_ev->add_option("--seed", ev.seed, "study seed")->capture_default_str();
  c_ev->add_option("--truth-reps", ev.truth_reps, "oracle Monte-Carlo replicates")->capture_default_str();
  c_ev->add_option("--workers", ev.workers, "parallel workers (default: BNPCEA_WORKERS or all cores)");
  c_ev->add_option("--outdir", ev.outdir, "output directory")->capture_default_str();
  c_ev->add_flag("--progress", ev.progress, "report each replicate on stderr");
  ev.config.attach(c_ev, true, false);
  c_ev->footer("The fit configuration defaults to add_intercept = 1; --config/--set override it.");

  std::string sum_path, sum_out;
  auto* c_sum = app.add_subcommand("summarize", "human-readable report of a dataset, draw store or CSV output");
  c_sum->add_option("path", sum_path, "artifact to summarize")->required();
  c_sum->add_option("--out", sum_out, "write the report here instead of stdout");

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot-data", "tidy CSVs for external plotting");
  c_plot->add_option("what", plot.what, "selector")
      ->required()
      ->check(CLI::IsMember({"prior-paths", "hazard", "dsi", "ite", "predictive"}));
  c_plot->add_option("--out", plot.out, "output CSV")->required();
  c_plot->add_option("--draws", plot.draws, "draw store (hazard, predictive)");
  c_plot->add_option("--data", plot.data, "dataset CSV (prior-paths grid, predictive)");
  c_plot->add_option("--dsi", plot.dsi, "dsi_draws.csv (dsi)");
  c_plot->add_option("--ite", plot.ite, "ite_summary.csv (ite)");
  c_plot->add_option("--mode", plot.mode, "mode_partition.csv (ite)");
  c_plot->add_option("--horizon", plot.horizon, "grid horizon when no --data (prior-paths)")->capture_default_str();
  c_plot->add_option("--intervals", plot.intervals, "grid size when no --data (prior-paths)")->capture_default_str();
  c_plot->add_option("--count", plot.count, "paths or draws to emit")->capture_default_str();
  c_plot->add_option("--seed", plot.seed, "seed for simulated paths")->capture_default_str();
  plot.config.attach(c_plot, false);
  c_plot->footer(kPlotHelp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_sim->parsed()) run_simulate(sim);
    else if (c_fit->parsed()) run_fit(fit);
    else if (c_est->parsed()) run_estimate(est);
    else if (c_sub->parsed()) run_subgroups(sub);
    else if (c_ev->parsed()) run_evaluate(ev);
    else if (c_sum->parsed()) run_summarize(sum_path, sum_out);
    else if (c_plot->parsed()) run_plot(plot);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace bnpcea
