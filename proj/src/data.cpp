#include "bnpcea/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bnpcea/errors.hpp"

namespace bnpcea {

CostModel parse_cost_model(std::string_view name) {
  if (name == "gaussian") return CostModel::gaussian;
  if (name == "lognormal") return CostModel::lognormal;
  throw ConfigError("unknown cost model '" + std::string(name) + "' (expected gaussian or lognormal)");
}

std::string to_string(CostModel model) {
  return model == CostModel::gaussian ? "gaussian" : "lognormal";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::string row_ref(std::size_t row) { return "row " + std::to_string(row + 1); }

void validate_subject(const Subject& s, std::size_t row, std::size_t q, CostModel model) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw ValidationError(row_ref(row) + ", field " + field + ": " + why);
  };
  if (!std::isfinite(s.y)) fail("y", "cost must be finite");
  if (model == CostModel::lognormal && !(s.y > 0.0)) fail("y", "log-normal cost model requires y > 0");
  if (!(s.t > 0.0) || !std::isfinite(s.t)) fail("t", "observed time must be finite and > 0");
  if (s.delta != 0 && s.delta != 1) fail("delta", "event indicator must be 0 or 1");
  if (s.a != 0 && s.a != 1) fail("a", "treatment must be 0 or 1");
  if (s.l.size() != q) fail("l", "expected " + std::to_string(q) + " confounders");
  for (std::size_t k = 0; k < s.l.size(); ++k) {
    if (!std::isfinite(s.l[k])) fail("l" + std::to_string(k + 1), "confounder must be finite");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_flag(std::string_view text) {
  text = trim(text);
  int v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    // Accept integral values written as reals ("1.0").
    double d = parse_double(text);
    if (d != std::floor(d)) throw ParseError("not an integer: '" + std::string(text) + "'");
    return static_cast<int>(d);
  }
  return v;
}

}  // namespace

Dataset::Dataset(std::vector<Subject> subjects, CostModel model) : subjects_(std::move(subjects)) {
  q_ = subjects_.empty() ? 0 : subjects_.front().l.size();
  for (std::size_t i = 0; i < subjects_.size(); ++i) validate_subject(subjects_[i], i, q_, model);
}

double Dataset::max_time() const {
  double m = 0.0;
  for (const auto& s : subjects_) m = std::max(m, s.t);
  return m;
}

std::size_t Dataset::deaths() const {
  std::size_t d = 0;
  for (const auto& s : subjects_) d += static_cast<std::size_t>(s.delta);
  return d;
}

std::size_t Dataset::distinct_event_times() const {
  std::set<double> times;
  for (const auto& s : subjects_)
    if (s.delta == 1) times.insert(s.t);
  return times.size();
}

void Dataset::require_fittable() const {
  if (n() < 2) throw ValidationError("dataset needs at least 2 subjects, has " + std::to_string(n()));
  std::size_t treated = 0;
  for (const auto& s : subjects_) treated += static_cast<std::size_t>(s.a);
  if (treated == 0 || treated == n()) throw ValidationError("dataset needs at least one subject in each treatment arm");
  if (deaths() == 0) throw ValidationError("dataset needs at least one observed death (delta = 1)");
}

Dataset read_dataset(std::istream& in, CostModel model, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    for (auto f : split_commas(view)) header.emplace_back(trim(f));
    break;
  }
  if (header.empty()) throw ParseError(source + ": missing header row");
  if (header.size() < 4 || header[0] != "y" || header[1] != "t" || header[2] != "delta" || header[3] != "a") {
    throw ParseError(source + ":" + std::to_string(lineno) + ": header must start with y,t,delta,a");
  }
  const std::size_t q = header.size() - 4;
  for (std::size_t k = 0; k < q; ++k) {
    if (header[4 + k] != "l" + std::to_string(k + 1)) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected column l" + std::to_string(k + 1) +
                       ", found '" + header[4 + k] + "'");
    }
  }

  std::vector<Subject> subjects;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_commas(view);
    const std::string where = source + ":" + std::to_string(lineno) + " (" + row_ref(subjects.size()) + ")";
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    Subject s;
    try {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        if (trim(fields[k]).empty()) throw ParseError("missing value in column " + header[k]);
      }
      s.y = parse_double(fields[0]);
      s.t = parse_double(fields[1]);
      s.delta = parse_flag(fields[2]);
      s.a = parse_flag(fields[3]);
      s.l.resize(q);
      for (std::size_t k = 0; k < q; ++k) s.l[k] = parse_double(fields[4 + k]);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    validate_subject(s, subjects.size(), q, model);
    subjects.push_back(std::move(s));
  }
  return Dataset(std::move(subjects), model);
}

Dataset load_dataset(const std::string& path, CostModel model) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file '" + path + "'");
  return read_dataset(in, model, path);
}

void write_dataset(std::ostream& out, const Dataset& data, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "y,t,delta,a";
  for (std::size_t k = 0; k < data.q(); ++k) out << ",l" << (k + 1);
  out << '\n';
  for (const auto& s : data) {
    out << format_double(s.y) << ',' << format_double(s.t) << ',' << s.delta << ',' << s.a;
    for (double v : s.l) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_dataset(const std::string& path, const Dataset& data, const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file '" + path + "'");
  write_dataset(out, data, comments);
}

Dataset with_intercept(const Dataset& data) {
  std::vector<Subject> subjects(data.subjects());
  for (auto& s : subjects) s.l.insert(s.l.begin(), 1.0);
  return Dataset(std::move(subjects));
}

}  // namespace bnpcea
