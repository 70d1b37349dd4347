#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bnpcea {

enum class CostModel { gaussian, lognormal };

CostModel parse_cost_model(std::string_view name);
std::string to_string(CostModel model);

// One subject: cost y, observed time t, death indicator delta, treatment a,
// and q confounders l.
struct Subject {
  double y = 0.0;
  double t = 0.0;
  int delta = 0;
  int a = 0;
  std::vector<double> l;

  bool operator==(const Subject&) const = default;
};

// Immutable, validated collection of subjects. Row order is the subject id.
class Dataset {
 public:
  Dataset() = default;
  // Validates per-subject invariants; throws ValidationError naming the row.
  explicit Dataset(std::vector<Subject> subjects, CostModel model = CostModel::gaussian);

  std::size_t n() const { return subjects_.size(); }
  std::size_t q() const { return q_; }
  const Subject& operator[](std::size_t i) const { return subjects_[i]; }
  const std::vector<Subject>& subjects() const { return subjects_; }
  auto begin() const { return subjects_.begin(); }
  auto end() const { return subjects_.end(); }

  double max_time() const;
  std::size_t deaths() const;
  std::size_t distinct_event_times() const;

  // Dataset-level requirements of the sampler: n >= 2, both arms present,
  // at least one death. Throws ValidationError.
  void require_fittable() const;

  bool operator==(const Dataset& other) const { return q_ == other.q_ && subjects_ == other.subjects_; }

 private:
  std::vector<Subject> subjects_;
  std::size_t q_ = 0;
};

// CSV with header `y,t,delta,a,l1,...,lq`. Lines starting with '#' are
// provenance comments and are skipped.
Dataset read_dataset(std::istream& in, CostModel model = CostModel::gaussian,
                     const std::string& source = "<stream>");
Dataset load_dataset(const std::string& path, CostModel model = CostModel::gaussian);

void write_dataset(std::ostream& out, const Dataset& data, const std::vector<std::string>& comments = {});
void save_dataset(const std::string& path, const Dataset& data, const std::vector<std::string>& comments = {});

// Prepends a constant-1 confounder to every subject.
Dataset with_intercept(const Dataset& data);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace bnpcea
