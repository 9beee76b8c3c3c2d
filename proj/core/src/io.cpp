#include "prefelicit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace prefelicit {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j) {
  DatasetConfig c;
  c.default_subintervals = j.value("default_subintervals", 2);
  if (j.contains("criteria")) {
    for (const auto& col : j.at("criteria")) {
      ColumnConfig cc;
      cc.name = col.at("name").get<std::string>();
      const std::string dir = col.value("direction", std::string("gain"));
      if (dir != "gain" && dir != "cost") {
        throw ValidationError("criteria." + cc.name, "direction must be 'gain' or 'cost'");
      }
      cc.cost = dir == "cost";
      cc.subintervals = col.value("subintervals", c.default_subintervals);
      if (col.contains("scale_min")) cc.scale_min = col.at("scale_min").get<double>();
      if (col.contains("scale_max")) cc.scale_max = col.at("scale_max").get<double>();
      c.columns.push_back(std::move(cc));
    }
  }
  return c;
}

RawTable read_performance_csv(std::istream& in) {
  RawTable raw;
  std::vector<FieldError> errors;
  std::string line;
  int line_no = 0;
  bool header = true;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (header) {
      if (cells.size() < 2 || cells[0] != "id") {
        throw ValidationError("csv", "header must start with 'id' followed by at least one criterion");
      }
      raw.columns.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != raw.columns.size() + 1) {
      errors.push_back({where, "expected " + std::to_string(raw.columns.size() + 1) + " cells, got " +
                                   std::to_string(cells.size())});
      continue;
    }
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto v = parse_number(cells[k]);
      if (!v) {
        errors.push_back({where, "column '" + raw.columns[k - 1] + "': '" + cells[k] + "' is not a number"});
        row.push_back(0.0);
      } else {
        row.push_back(*v);
      }
    }
    raw.ids.push_back(cells[0]);
    rows.push_back(std::move(row));
  }
  if (header) throw ValidationError("csv", "empty file");
  if (!errors.empty()) throw ValidationError(std::move(errors));
  raw.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(raw.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < raw.columns.size(); ++j) {
      raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return raw;
}

PerformanceTable build_table(const RawTable& raw, const DatasetConfig& config) {
  for (const auto& c : config.columns) {
    if (std::find(raw.columns.begin(), raw.columns.end(), c.name) == raw.columns.end()) {
      throw ValidationError("criteria." + c.name, "not a column of the dataset");
    }
  }
  Eigen::MatrixXd perf = raw.values;
  std::vector<Criterion> criteria;
  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto it = std::find_if(config.columns.begin(), config.columns.end(),
                                 [&](const ColumnConfig& c) { return c.name == raw.columns[j]; });
    Criterion c;
    c.name = raw.columns[j];
    c.subintervals = config.default_subintervals;
    if (it != config.columns.end()) {
      if (it->cost) perf.col(jj) = -perf.col(jj);
      c.subintervals = it->subintervals;
    }
    if (perf.rows() > 0) {
      c.scale_min = perf.col(jj).minCoeff();
      c.scale_max = perf.col(jj).maxCoeff();
    }
    if (it != config.columns.end()) {
      if (it->scale_min) c.scale_min = *it->scale_min;
      if (it->scale_max) c.scale_max = *it->scale_max;
    }
    if (c.scale_min == c.scale_max) c.scale_max = c.scale_min + 1.0;
    criteria.push_back(std::move(c));
  }
  return PerformanceTable(raw.ids, std::move(criteria), std::move(perf));
}

PerformanceTable load_dataset(const std::string& csv_path, const std::string& config_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  const RawTable raw = read_performance_csv(in);
  DatasetConfig config;
  if (!config_path.empty()) {
    std::ifstream cin(config_path);
    if (!cin) throw std::runtime_error("cannot open " + config_path);
    config = DatasetConfig::from_json(nlohmann::json::parse(cin));
  }
  return build_table(raw, config);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const PerformanceTable& table) {
  nlohmann::json j;
  j["alternatives"] = table.ids();
  auto& criteria = j["criteria"] = nlohmann::json::array();
  for (const auto& c : table.criteria()) {
    criteria.push_back({{"name", c.name},
                        {"scale_min", c.scale_min},
                        {"scale_max", c.scale_max},
                        {"subintervals", c.subintervals}});
  }
  j["performances"] = matrix_to_json(table.performances());
  return j;
}

PerformanceTable table_from_json(const nlohmann::json& j) {
  std::vector<FieldError> errors;
  if (!j.is_object()) throw ValidationError("table", "must be an object");
  for (const char* key : {"alternatives", "criteria", "performances"}) {
    if (!j.contains(key) || !j.at(key).is_array()) errors.push_back({std::string("table.") + key, "required array"});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  std::vector<std::string> ids;
  for (const auto& id : j.at("alternatives")) {
    if (!id.is_string()) throw ValidationError("table.alternatives", "ids must be strings");
    ids.push_back(id.get<std::string>());
  }
  const auto& crit = j.at("criteria");
  const auto& perf = j.at("performances");
  const auto n = static_cast<Eigen::Index>(perf.size());
  const auto m = static_cast<Eigen::Index>(crit.size());
  Eigen::MatrixXd values(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = perf.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) {
      throw ValidationError("table.performances[" + std::to_string(i) + "]",
                            "expected " + std::to_string(m) + " numbers");
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto& v = row.at(static_cast<std::size_t>(k));
      if (!v.is_number()) {
        throw ValidationError("table.performances[" + std::to_string(i) + "][" + std::to_string(k) + "]",
                              "not a number");
      }
      values(i, k) = v.get<double>();
    }
  }
  std::vector<Criterion> criteria;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& c = crit.at(static_cast<std::size_t>(k));
    const std::string field = "table.criteria[" + std::to_string(k) + "]";
    Criterion out;
    if (c.is_string()) {
      out.name = c.get<std::string>();
    } else if (c.is_object()) {
      out.name = c.value("name", "g" + std::to_string(k + 1));
      out.subintervals = c.value("subintervals", 2);
    } else {
      throw ValidationError(field, "expected a name or an object");
    }
    const bool has_min = c.is_object() && c.contains("scale_min");
    const bool has_max = c.is_object() && c.contains("scale_max");
    out.scale_min = has_min ? c.at("scale_min").get<double>() : (n > 0 ? values.col(k).minCoeff() : 0.0);
    out.scale_max = has_max ? c.at("scale_max").get<double>() : (n > 0 ? values.col(k).maxCoeff() : 1.0);
    if (!has_min && !has_max && out.scale_min == out.scale_max) out.scale_max = out.scale_min + 1.0;
    criteria.push_back(std::move(out));
  }
  return PerformanceTable(std::move(ids), std::move(criteria), std::move(values));
}

nlohmann::json to_json(const PreferenceSet& q) {
  auto out = nlohmann::json::array();
  for (const auto& s : q) out.push_back({{"preferred", s.preferred}, {"other", s.other}});
  return out;
}

PreferenceSet preference_set_from_json(const nlohmann::json& j) {
  PreferenceSet q;
  for (const auto& s : j) q.add({s.at("preferred").get<int>(), s.at("other").get<int>()});
  return q;
}

nlohmann::json to_json(const OptimizerConfig& c) {
  return {{"max_iters", c.max_iters},   {"grad_samples", c.grad_samples},
          {"learning_rate", c.learning_rate}, {"beta1", c.beta1},
          {"beta2", c.beta2},           {"eps", c.eps},
          {"rng_seed", c.rng_seed}};
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j, OptimizerConfig base) {
  base.max_iters = j.value("max_iters", base.max_iters);
  base.grad_samples = j.value("grad_samples", base.grad_samples);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.beta1 = j.value("beta1", base.beta1);
  base.beta2 = j.value("beta2", base.beta2);
  base.eps = j.value("eps", base.eps);
  base.rng_seed = j.value("rng_seed", base.rng_seed);
  base.validate();
  return base;
}

nlohmann::json posterior_export(const FitResult& fit, const DirichletParams& alpha,
                                const OptimizerConfig& config, Estimator estimator) {
  nlohmann::json j;
  j["theta"] = to_vector(fit.theta.values());
  j["alpha"] = to_vector(alpha.values());
  j["elbo_trace"] = fit.elbo_trace;
  j["seed"] = config.rng_seed;
  j["config"] = to_json(config);
  j["config"]["estimator"] = std::string(to_string(estimator));
  return j;
}

}  // namespace prefelicit
