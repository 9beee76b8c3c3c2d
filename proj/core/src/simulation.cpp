#include "prefelicit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace prefelicit {

Shape parse_shape(std::string_view name) {
  if (name == "linear") return Shape::linear;
  if (name == "concave") return Shape::concave;
  if (name == "convex") return Shape::convex;
  throw std::invalid_argument("unknown shape '" + std::string(name) + "'");
}

ShapeSetting parse_shape_setting(std::string_view name) {
  if (name == "mixture") return ShapeSetting::mixture;
  switch (parse_shape(name)) {
    case Shape::linear: return ShapeSetting::linear;
    case Shape::concave: return ShapeSetting::concave;
    case Shape::convex: return ShapeSetting::convex;
  }
  throw std::invalid_argument("unknown shape setting");
}

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::linear: return "linear";
    case Shape::concave: return "concave";
    case Shape::convex: return "convex";
  }
  return "?";
}

std::string_view to_string(ShapeSetting s) {
  switch (s) {
    case ShapeSetting::linear: return "linear";
    case ShapeSetting::concave: return "concave";
    case ShapeSetting::convex: return "convex";
    case ShapeSetting::mixture: return "mixture";
  }
  return "?";
}

double TrueModel::marginal(int j, double x) const {
  const double w = weights[j];
  if (shapes[j] == Shape::linear) return w * x;
  const double c = curvatures[j];
  return w * (-std::expm1(-c * x)) / (-std::expm1(-c));
}

void TrueModel::validate() const {
  const auto m = weights.size();
  if (m < 1 || curvatures.size() != m || static_cast<Eigen::Index>(shapes.size()) != m) {
    throw std::invalid_argument("TrueModel: inconsistent sizes");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("TrueModel: weights must lie on the simplex");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double c = curvatures[j];
    const bool ok = shapes[j] == Shape::linear ? true
                    : shapes[j] == Shape::concave ? c > 0.0
                                                  : c < 0.0;
    if (!ok) throw std::invalid_argument("TrueModel: curvature sign does not match shape");
  }
}

TrueModel gen_true_model(int m, ShapeSetting setting, Rng& rng) {
  if (m < 1) throw std::invalid_argument("gen_true_model: m must be positive");
  TrueModel model;
  model.weights = sample_dirichlet(Eigen::VectorXd::Ones(m), rng);
  model.curvatures = Eigen::VectorXd::Zero(m);
  model.shapes.resize(static_cast<std::size_t>(m));
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> curv(-10.0, 10.0);
  for (int j = 0; j < m; ++j) {
    Shape s = Shape::linear;
    switch (setting) {
      case ShapeSetting::linear: s = Shape::linear; break;
      case ShapeSetting::concave: s = Shape::concave; break;
      case ShapeSetting::convex: s = Shape::convex; break;
      case ShapeSetting::mixture: s = static_cast<Shape>(pick(rng)); break;
    }
    model.shapes[j] = s;
    if (s == Shape::linear) continue;
    double c = 0.0;
    do {
      c = curv(rng);
    } while (std::abs(c) < 1e-6);
    model.curvatures[j] = s == Shape::concave ? std::abs(c) : -std::abs(c);
  }
  return model;
}

double true_value(const TrueModel& model, const PerformanceTable& table, int alt) {
  if (model.num_criteria() != table.num_criteria()) {
    throw std::invalid_argument("true_value: criterion count mismatch");
  }
  double total = 0.0;
  for (int j = 0; j < table.num_criteria(); ++j) {
    const auto& c = table.criterion(j);
    const double x = (table.performance(alt, j) - c.scale_min) / (c.scale_max - c.scale_min);
    total += model.marginal(j, x);
  }
  return total;
}

Eigen::VectorXd true_values(const TrueModel& model, const PerformanceTable& table) {
  Eigen::VectorXd out(table.size());
  for (int i = 0; i < table.size(); ++i) out[i] = true_value(model, table, i);
  return out;
}

PerformanceTable gen_performance_table(int n, int m, Rng& rng, int subintervals) {
  if (n < 2 || m < 1) throw std::invalid_argument("gen_performance_table: need n >= 2 and m >= 1");
  Eigen::MatrixXd perf(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) perf(i, j) = uniform01(rng);
  }
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("a" + std::to_string(i + 1));
  std::vector<Criterion> criteria;
  for (int j = 0; j < m; ++j) criteria.push_back({"g" + std::to_string(j + 1), 0.0, 1.0, subintervals});
  return PerformanceTable(std::move(ids), std::move(criteria), std::move(perf));
}

PreferenceSet gen_comparisons(const TrueModel& model, const PerformanceTable& table, int count,
                              Rng& rng) {
  const int n = table.size();
  if (count < 0) throw std::invalid_argument("gen_comparisons: negative count");
  const Eigen::VectorXd u = true_values(model, table);
  std::vector<Question> pool;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u[i] != u[j]) pool.push_back({i, j});
    }
  }
  if (static_cast<int>(pool.size()) < count) {
    throw std::invalid_argument("gen_comparisons: only " + std::to_string(pool.size()) +
                                " non-tied pairs available, " + std::to_string(count) + " requested");
  }
  // Partial Fisher-Yates: the first `count` slots become a uniform sample
  // without replacement. Tied pairs were removed up front, which is the same
  // law as re-drawing them.
  PreferenceSet q;
  for (int k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[pick(rng)]);
    const Question p = pool[static_cast<std::size_t>(k)];
    q.add(u[p.first] > u[p.second] ? PreferenceStatement{p.first, p.second}
                                   : PreferenceStatement{p.second, p.first});
  }
  return q;
}

PreferenceSet inject_bias(const PreferenceSet& q, const TrueModel& model,
                          const PerformanceTable& table, double proportion) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw std::invalid_argument("inject_bias: proportion must lie in [0, 1]");
  }
  const Eigen::VectorXd u = true_values(model, table);
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  auto gap = [&](std::size_t k) { return std::abs(u[q[k].preferred] - u[q[k].other]); };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gap(a) < gap(b); });
  const auto flips = static_cast<std::size_t>(std::floor(proportion * static_cast<double>(q.size()) + 1e-9));
  std::vector<bool> flip(q.size(), false);
  for (std::size_t k = 0; k < flips && k < order.size(); ++k) flip[order[k]] = true;
  std::vector<PreferenceStatement> out;
  out.reserve(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out.push_back(flip[k] ? q[k].flipped() : q[k]);
  return PreferenceSet(std::move(out));
}

SimulatedAnswer simulated_answer(const TrueModel& model, const PerformanceTable& table,
                                 Question pair, Rng& rng, AnswerMode mode) {
  if (pair.first == pair.second || pair.first < 0 || pair.second < 0 ||
      pair.first >= table.size() || pair.second >= table.size()) {
    throw std::invalid_argument("simulated_answer: invalid pair");
  }
  const double a = true_value(model, table, pair.first);
  const double b = true_value(model, table, pair.second);
  SimulatedAnswer out;
  if (mode == AnswerMode::bradley_terry) {
    const double p = 1.0 / (1.0 + std::exp(b - a));
    out.statement = uniform01(rng) < p ? PreferenceStatement{pair.first, pair.second}
                                       : PreferenceStatement{pair.second, pair.first};
    return out;
  }
  if (a == b) {
    out.tie_broken = true;
    out.statement = {std::min(pair.first, pair.second), std::max(pair.first, pair.second)};
  } else {
    out.statement = a > b ? PreferenceStatement{pair.first, pair.second}
                          : PreferenceStatement{pair.second, pair.first};
  }
  return out;
}

nlohmann::json to_json(const TrueModel& model) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
  j["curvatures"] =
      std::vector<double>(model.curvatures.data(), model.curvatures.data() + model.curvatures.size());
  auto& shapes = j["shapes"] = nlohmann::json::array();
  for (Shape s : model.shapes) shapes.push_back(std::string(to_string(s)));
  return j;
}

TrueModel true_model_from_json(const nlohmann::json& j) {
  TrueModel model;
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto c = j.at("curvatures").get<std::vector<double>>();
  model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  model.curvatures = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  for (const auto& s : j.at("shapes")) model.shapes.push_back(parse_shape(s.get<std::string>()));
  model.validate();
  return model;
}

}  // namespace prefelicit
