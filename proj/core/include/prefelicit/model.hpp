#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace prefelicit {

/// Field-level problem found while validating user-supplied data.
struct FieldError {
  std::string field;
  std::string message;
};

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<FieldError> errors);
  ValidationError(std::string field, std::string message)
      : ValidationError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

struct Criterion {
  std::string name;
  double scale_min = 0.0;
  double scale_max = 1.0;
  int subintervals = 2;
};

/// n alternatives evaluated on m gain-type criteria, plus the piecewise-linear
/// grid used to encode them. The n x gamma characteristic matrix is computed
/// once at construction.
class PerformanceTable {
 public:
  PerformanceTable(std::vector<std::string> ids, std::vector<Criterion> criteria,
                   Eigen::MatrixXd performances);

  /// Builds a table whose criterion scales are the observed column min/max.
  /// A constant column gets the degenerate scale widened by one unit.
  static PerformanceTable with_observed_scales(
      std::vector<std::string> ids, std::vector<std::string> criterion_names,
      Eigen::MatrixXd performances, std::vector<int> subintervals);

  int size() const { return static_cast<int>(ids_.size()); }
  int num_criteria() const { return static_cast<int>(criteria_.size()); }
  /// gamma = sum of sub-interval counts.
  int dimension() const { return dimension_; }

  const std::string& id(int alt) const { return ids_.at(alt); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Criterion& criterion(int j) const { return criteria_.at(j); }
  const std::vector<Criterion>& criteria() const { return criteria_; }
  double performance(int alt, int j) const { return performances_(alt, j); }
  const Eigen::MatrixXd& performances() const { return performances_; }

  /// Row i is V(a_i).
  const Eigen::MatrixXd& characteristics() const { return characteristics_; }

  /// Offset of criterion j's block inside a characteristic vector.
  int block_offset(int j) const { return offsets_.at(j); }

  std::optional<int> index_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Criterion> criteria_;
  Eigen::MatrixXd performances_;
  std::vector<int> offsets_;
  int dimension_ = 0;
  Eigen::MatrixXd characteristics_;
};

/// Knots x_j^0..x_j^{gamma_j} of every criterion.
std::vector<std::vector<double>> build_grid(const PerformanceTable& table);

/// Knots for a single criterion.
std::vector<double> criterion_knots(const Criterion& c);

/// Encodes one performance on criterion c into its gamma_j block.
void encode_performance(const Criterion& c, double g, Eigen::Ref<Eigen::VectorXd> block);

Eigen::VectorXd characteristic_vector(const PerformanceTable& table, int alt);

double comprehensive_value(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

bool dominates(const PerformanceTable& table, int a, int b);

/// Unordered question (a ? b); always stored with first < second.
struct Question {
  int first = 0;
  int second = 1;

  auto operator<=>(const Question&) const = default;
};

Question make_question(int a, int b);

struct PreferenceStatement {
  int preferred = 0;
  int other = 1;

  Question question() const { return make_question(preferred, other); }
  PreferenceStatement flipped() const { return {other, preferred}; }
  bool operator==(const PreferenceStatement&) const = default;
};

/// Ordered strict comparisons; an unordered pair appears at most once.
class PreferenceSet {
 public:
  PreferenceSet() = default;
  explicit PreferenceSet(std::vector<PreferenceStatement> statements);

  void add(PreferenceStatement s);
  PreferenceSet with(PreferenceStatement s) const;
  bool contains(Question q) const;

  std::size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }
  const PreferenceStatement& operator[](std::size_t i) const { return statements_[i]; }
  const std::vector<PreferenceStatement>& statements() const { return statements_; }
  auto begin() const { return statements_.begin(); }
  auto end() const { return statements_.end(); }

  /// Checks every index against a table of n alternatives.
  void validate(int n) const;

  bool operator==(const PreferenceSet&) const = default;

 private:
  std::vector<PreferenceStatement> statements_;
};

/// All unordered pairs of {0..n-1} not yet in q, in lexicographic order.
std::vector<Question> candidate_questions(int n, const PreferenceSet& q);

/// Same, but also excluding the given additional questions.
std::vector<Question> candidate_questions(int n, const PreferenceSet& q,
                                          const std::vector<Question>& excluded);

/// Rows are V(preferred) - V(other), one per statement.
Eigen::MatrixXd statement_differences(const PerformanceTable& table,
                                      const PreferenceSet& q);

}  // namespace prefelicit
