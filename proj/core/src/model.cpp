#include "prefelicit/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace prefelicit {

namespace {

std::string join_messages(const std::vector<FieldError>& errors) {
  std::ostringstream os;
  os << "invalid input";
  for (const auto& e : errors) os << "; " << e.field << ": " << e.message;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : std::invalid_argument(join_messages(errors)), errors_(std::move(errors)) {}

PerformanceTable::PerformanceTable(std::vector<std::string> ids,
                                   std::vector<Criterion> criteria,
                                   Eigen::MatrixXd performances)
    : ids_(std::move(ids)),
      criteria_(std::move(criteria)),
      performances_(std::move(performances)) {
  std::vector<FieldError> errors;
  const auto n = static_cast<Eigen::Index>(ids_.size());
  const auto m = static_cast<Eigen::Index>(criteria_.size());
  if (n < 2) errors.push_back({"alternatives", "at least two alternatives are required"});
  if (m < 1) errors.push_back({"criteria", "at least one criterion is required"});
  if (performances_.rows() != n || performances_.cols() != m) {
    std::ostringstream os;
    os << "expected a " << n << "x" << m << " matrix, got " << performances_.rows()
       << "x" << performances_.cols();
    errors.push_back({"performances", os.str()});
  }
  std::set<std::string> seen;
  for (const auto& id : ids_) {
    if (id.empty()) errors.push_back({"alternatives", "empty id"});
    if (!seen.insert(id).second) errors.push_back({"alternatives", "duplicate id '" + id + "'"});
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& c = criteria_[j];
    const std::string field = "criteria[" + std::to_string(j) + "]";
    if (!(c.scale_min < c.scale_max)) errors.push_back({field, "scale_min must be below scale_max"});
    if (c.subintervals < 1) errors.push_back({field, "subintervals must be at least 1"});
  }
  if (errors.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double g = performances_(i, j);
        const auto& c = criteria_[j];
        if (!std::isfinite(g) || g < c.scale_min || g > c.scale_max) {
          std::ostringstream os;
          os << "performance of '" << ids_[i] << "' on '" << c.name << "' (" << g
             << ") outside [" << c.scale_min << ", " << c.scale_max << "]";
          errors.push_back({"performances", os.str()});
        }
      }
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  offsets_.reserve(criteria_.size());
  for (const auto& c : criteria_) {
    offsets_.push_back(dimension_);
    dimension_ += c.subintervals;
  }
  characteristics_.resize(n, dimension_);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd block(criteria_[j].subintervals);
      encode_performance(criteria_[j], performances_(i, j), block);
      characteristics_.row(i).segment(offsets_[j], block.size()) = block.transpose();
    }
  }
}

PerformanceTable PerformanceTable::with_observed_scales(
    std::vector<std::string> ids, std::vector<std::string> criterion_names,
    Eigen::MatrixXd performances, std::vector<int> subintervals) {
  if (subintervals.size() != criterion_names.size()) {
    throw ValidationError("criteria", "one sub-interval count per criterion is required");
  }
  if (performances.cols() != static_cast<Eigen::Index>(criterion_names.size())) {
    throw ValidationError("performances", "column count does not match criteria");
  }
  std::vector<Criterion> criteria;
  for (std::size_t j = 0; j < criterion_names.size(); ++j) {
    Criterion c;
    c.name = criterion_names[j];
    c.subintervals = subintervals[j];
    if (performances.rows() > 0) {
      c.scale_min = performances.col(static_cast<Eigen::Index>(j)).minCoeff();
      c.scale_max = performances.col(static_cast<Eigen::Index>(j)).maxCoeff();
    }
    if (!(c.scale_min < c.scale_max)) c.scale_max = c.scale_min + 1.0;
    criteria.push_back(std::move(c));
  }
  return PerformanceTable(std::move(ids), std::move(criteria), std::move(performances));
}

std::optional<int> PerformanceTable::index_of(const std::string& id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<int>(it - ids_.begin());
}

std::vector<double> criterion_knots(const Criterion& c) {
  std::vector<double> knots(static_cast<std::size_t>(c.subintervals) + 1);
  for (int k = 0; k <= c.subintervals; ++k) {
    knots[k] = c.scale_min + (static_cast<double>(k) / c.subintervals) * (c.scale_max - c.scale_min);
  }
  return knots;
}

std::vector<std::vector<double>> build_grid(const PerformanceTable& table) {
  std::vector<std::vector<double>> grid;
  grid.reserve(table.criteria().size());
  for (const auto& c : table.criteria()) grid.push_back(criterion_knots(c));
  return grid;
}

void encode_performance(const Criterion& c, double g, Eigen::Ref<Eigen::VectorXd> block) {
  const auto knots = criterion_knots(c);
  for (int k = 1; k <= c.subintervals; ++k) {
    const double lo = knots[k - 1];
    const double hi = knots[k];
    // The ">" case is tested first, so a value on an interior knot gets 1.
    if (g > hi) {
      block[k - 1] = 1.0;
    } else if (lo <= g) {
      block[k - 1] = (g - lo) / (hi - lo);
    } else {
      block[k - 1] = 0.0;
    }
  }
}

Eigen::VectorXd characteristic_vector(const PerformanceTable& table, int alt) {
  if (alt < 0 || alt >= table.size()) throw std::out_of_range("characteristic_vector: bad alternative");
  return table.characteristics().row(alt).transpose();
}

double comprehensive_value(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw std::invalid_argument("comprehensive_value: dimension mismatch");
  return u.dot(v);
}

bool dominates(const PerformanceTable& table, int a, int b) {
  bool strict = false;
  for (int j = 0; j < table.num_criteria(); ++j) {
    const double ga = table.performance(a, j);
    const double gb = table.performance(b, j);
    if (ga < gb) return false;
    if (ga > gb) strict = true;
  }
  return strict;
}

Question make_question(int a, int b) {
  if (a == b) throw std::invalid_argument("a question needs two distinct alternatives");
  return a < b ? Question{a, b} : Question{b, a};
}

PreferenceSet::PreferenceSet(std::vector<PreferenceStatement> statements) {
  statements_.reserve(statements.size());
  for (const auto& s : statements) add(s);
}

void PreferenceSet::add(PreferenceStatement s) {
  if (s.preferred == s.other) throw std::invalid_argument("statement compares an alternative with itself");
  if (contains(s.question())) {
    throw std::invalid_argument("pair (" + std::to_string(s.question().first) + ", " +
                                std::to_string(s.question().second) + ") was already asked");
  }
  statements_.push_back(s);
}

PreferenceSet PreferenceSet::with(PreferenceStatement s) const {
  PreferenceSet copy = *this;
  copy.add(s);
  return copy;
}

bool PreferenceSet::contains(Question q) const {
  return std::any_of(statements_.begin(), statements_.end(),
                     [&](const PreferenceStatement& s) { return s.question() == q; });
}

void PreferenceSet::validate(int n) const {
  for (const auto& s : statements_) {
    if (s.preferred < 0 || s.preferred >= n || s.other < 0 || s.other >= n) {
      throw std::out_of_range("preference statement refers to an unknown alternative");
    }
  }
}

std::vector<Question> candidate_questions(int n, const PreferenceSet& q) {
  return candidate_questions(n, q, {});
}

std::vector<Question> candidate_questions(int n, const PreferenceSet& q,
                                          const std::vector<Question>& excluded) {
  std::vector<Question> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Question c{i, j};
      if (q.contains(c)) continue;
      if (std::find(excluded.begin(), excluded.end(), c) != excluded.end()) continue;
      out.push_back(c);
    }
  }
  return out;
}

Eigen::MatrixXd statement_differences(const PerformanceTable& table, const PreferenceSet& q) {
  q.validate(table.size());
  Eigen::MatrixXd d(static_cast<Eigen::Index>(q.size()), table.dimension());
  const auto& v = table.characteristics();
  for (std::size_t r = 0; r < q.size(); ++r) {
    d.row(static_cast<Eigen::Index>(r)) = v.row(q[r].preferred) - v.row(q[r].other);
  }
  return d;
}

}  // namespace prefelicit
