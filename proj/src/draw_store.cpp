#include "bnpcea/draw_store.hpp"

#include <fstream>
#include <json.hpp>

#include "bnpcea/errors.hpp"

namespace bnpcea {

using nlohmann::json;

namespace {

json header_record(const DrawStore& store) {
  json cfg = json::object();
  for (const auto& [k, v] : store.config.to_pairs()) cfg[k] = v;
  return json{{"type", "header"},   {"config", cfg},     {"data_path", store.data_path},
              {"n", store.n},       {"q", store.q},      {"taus", store.taus}};
}

json draw_record(const Draw& d) {
  json assign = json::array();
  for (const auto& lab : d.assignments) assign.push_back({lab.j, lab.k});
  json omegas = json::array();
  for (const auto& [j, w] : d.omegas) omegas.push_back({{"j", j}, {"beta", w.beta}, {"phi", w.phi}});
  json thetas = json::array();
  for (const auto& [lab, s] : d.thetas) thetas.push_back({{"j", lab.j}, {"k", lab.k}, {"theta", s.theta}});
  return json{{"type", "draw"},
              {"m", d.iteration},
              {"assign", assign},
              {"omega", omegas},
              {"theta", thetas},
              {"alpha_omega", d.alpha_omega},
              {"alpha_theta", d.alpha_theta},
              {"lambda", d.lambda},
              {"u", d.u},
              {"c", d.c},
              {"weights", d.weights},
              {"psi", d.psi},
              {"delta_cost", d.delta_cost},
              {"delta_time", d.delta_time}};
}

Draw parse_draw(const json& r) {
  Draw d;
  d.iteration = r.at("m").get<std::int64_t>();
  for (const auto& a : r.at("assign")) d.assignments.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
  for (const auto& w : r.at("omega")) {
    d.omegas[w.at("j").get<int>()] = CostParams{w.at("beta").get<std::vector<double>>(), w.at("phi").get<double>()};
  }
  for (const auto& t : r.at("theta")) {
    d.thetas[{t.at("j").get<int>(), t.at("k").get<int>()}] = SurvParams{t.at("theta").get<std::vector<double>>()};
  }
  d.alpha_omega = r.at("alpha_omega").get<double>();
  d.alpha_theta = r.at("alpha_theta").get<double>();
  d.lambda = r.at("lambda").get<std::vector<double>>();
  d.u = r.at("u").get<std::vector<std::int64_t>>();
  d.c = r.at("c").get<std::vector<double>>();
  d.weights = r.at("weights").get<std::vector<double>>();
  d.psi = r.at("psi").get<std::vector<double>>();
  d.delta_cost = r.at("delta_cost").get<double>();
  d.delta_time = r.at("delta_time").get<double>();
  for (const auto& lab : d.assignments) {
    if (!d.thetas.count(lab) || !d.omegas.count(lab.j)) throw ParseError("draw references a cluster without parameters");
  }
  return d;
}

}  // namespace

void write_draw_store(std::ostream& out, const DrawStore& store) {
  out << header_record(store).dump() << '\n';
  for (const auto& d : store.draws) out << draw_record(d).dump() << '\n';
  const auto& diag = store.diagnostics;
  json tail{{"type", "diagnostics"},
            {"c_acceptance", diag.c_acceptance},
            {"theta_acceptance", diag.theta_acceptance},
            {"alpha_theta_acceptance", diag.alpha_theta_acceptance},
            {"warnings", diag.warnings}};
  out << tail.dump() << '\n';
}

void save_draw_store(const std::string& path, const DrawStore& store) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write draw store '" + path + "'");
  write_draw_store(out, store);
}

DrawStore read_draw_store(std::istream& in, const std::string& source) {
  DrawStore store;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json r = json::parse(line);
      const auto type = r.at("type").get<std::string>();
      if (type == "header") {
        KeyValues kv;
        for (const auto& [k, v] : r.at("config").items()) kv.emplace_back(k, v.get<std::string>());
        store.config = config_from(kv);
        store.data_path = r.at("data_path").get<std::string>();
        store.n = r.at("n").get<std::size_t>();
        store.q = r.at("q").get<std::size_t>();
        store.taus = r.at("taus").get<std::vector<double>>();
        have_header = true;
      } else if (type == "draw") {
        if (!have_header) throw ParseError("draw record before header");
        Draw d = parse_draw(r);
        if (d.assignments.size() != store.n) throw ParseError("draw has wrong number of assignments");
        store.draws.push_back(std::move(d));
      } else if (type == "diagnostics") {
        store.diagnostics.c_acceptance = r.at("c_acceptance").get<std::vector<double>>();
        store.diagnostics.theta_acceptance = r.at("theta_acceptance").get<std::vector<double>>();
        store.diagnostics.alpha_theta_acceptance = r.at("alpha_theta_acceptance").get<double>();
        store.diagnostics.warnings = r.at("warnings").get<std::vector<std::string>>();
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw ParseError(source + ": missing header record");
  return store;
}

DrawStore load_draw_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open draw store '" + path + "'");
  return read_draw_store(in, path);
}

}  // namespace bnpcea
