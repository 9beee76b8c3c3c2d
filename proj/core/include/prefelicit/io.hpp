#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefelicit/inference.hpp"
#include "prefelicit/model.hpp"

namespace prefelicit {

/// Per-column settings from the sidecar JSON of a dataset.
struct ColumnConfig {
  std::string name;
  bool cost = false;  // cost-type columns are negated into gain-type
  int subintervals = 2;
  std::optional<double> scale_min;  // in the gain-type (negated) units
  std::optional<double> scale_max;
};

struct DatasetConfig {
  std::vector<ColumnConfig> columns;
  int default_subintervals = 2;

  /// {"default_subintervals": 2, "criteria": [{"name", "direction":
  /// "gain"|"cost", "subintervals", "scale_min", "scale_max"}]}. Criteria
  /// not listed use the defaults.
  static DatasetConfig from_json(const nlohmann::json& j);
};

struct RawTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

/// Header row "id,<criterion>,..."; one alternative per line. Throws
/// ValidationError with line-level messages.
RawTable read_performance_csv(std::istream& in);

/// Applies directions, sub-interval counts and scales (observed min/max
/// unless overridden).
PerformanceTable build_table(const RawTable& raw, const DatasetConfig& config);

PerformanceTable load_dataset(const std::string& csv_path, const std::string& config_path = {});

nlohmann::json to_json(const PerformanceTable& table);
/// Inverse of to_json; also accepts {"alternatives": [...], "criteria":
/// [{"name", "scale_min", "scale_max", "subintervals"}], "performances":
/// [[...]]} with scales optional (observed min/max).
PerformanceTable table_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PreferenceSet& q);
PreferenceSet preference_set_from_json(const nlohmann::json& j);

nlohmann::json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j, OptimizerConfig base = {});

/// {theta, alpha, elbo_trace, seed, config}.
nlohmann::json posterior_export(const FitResult& fit, const DirichletParams& alpha,
                                const OptimizerConfig& config, Estimator estimator);

std::vector<double> to_vector(const Eigen::VectorXd& v);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace prefelicit
