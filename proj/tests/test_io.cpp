#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prefelicit/io.hpp"
#include "support.hpp"

using namespace prefelicit;

namespace {

RawTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_performance_csv(in);
}

std::vector<FieldError> csv_errors(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.errors();
  }
  ADD_FAILURE() << "no ValidationError for:\n" << text;
  return {};
}

}  // namespace

TEST(Csv, ParsesHeaderRowsQuotesAndLineEndings) {
  const auto raw = parse("\xEF\xBB\xBFid,price,\"speed, km/h\"\r\ncar a, 3.5 ,120\r\n\n\"b \"\"x\"\"\",-1e2,0\n");
  ASSERT_EQ(raw.columns, (std::vector<std::string>{"price", "speed, km/h"}));
  ASSERT_EQ(raw.ids, (std::vector<std::string>{"car a", "b \"x\""}));
  EXPECT_EQ(raw.values(0, 0), 3.5);
  EXPECT_EQ(raw.values(0, 1), 120.0);
  EXPECT_EQ(raw.values(1, 0), -100.0);
}

TEST(Csv, ReportsEveryBadLine) {
  const auto errs = csv_errors("id,g1,g2\na,1,2\nb,1\nc,x,2\nd,1,2,3\n");
  ASSERT_EQ(errs.size(), 3u);
  EXPECT_EQ(errs[0].field, "line 3");
  EXPECT_EQ(errs[1].field, "line 4");
  EXPECT_NE(errs[1].message.find("g1"), std::string::npos);
  EXPECT_EQ(errs[2].field, "line 5");
}

TEST(Csv, RejectsBadHeadersAndEmptyInput) {
  EXPECT_EQ(csv_errors("").at(0).field, "csv");
  EXPECT_EQ(csv_errors("name,g1\na,1\n").at(0).field, "csv");
  EXPECT_EQ(csv_errors("id\na\n").at(0).field, "csv");
  EXPECT_EQ(csv_errors("id,g1\na,1.5x\n").at(0).field, "line 2");
  EXPECT_EQ(csv_errors("id,g1\na,\n").at(0).field, "line 2");
}

TEST(BuildTable, ObservedScalesAndDefaults) {
  const auto raw = parse("id,g1,g2\na,1,5\nb,3,5\nc,2,5\n");
  const auto t = build_table(raw, DatasetConfig{});
  EXPECT_EQ(t.criterion(0).scale_min, 1.0);
  EXPECT_EQ(t.criterion(0).scale_max, 3.0);
  // Constant column gets a unit-width scale so the encoding stays defined.
  EXPECT_EQ(t.criterion(1).scale_min, 5.0);
  EXPECT_EQ(t.criterion(1).scale_max, 6.0);
  EXPECT_EQ(t.criterion(0).subintervals, 2);
  EXPECT_EQ(t.dimension(), 4);
  EXPECT_EQ(t.ids(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(BuildTable, CostColumnsNegatedAndOverridesApplied) {
  const auto raw = parse("id,price,quality\na,10,0.2\nb,30,0.9\n");
  const auto config = DatasetConfig::from_json(nlohmann::json::parse(R"({
    "default_subintervals": 3,
    "criteria": [
      {"name": "price", "direction": "cost", "subintervals": 1, "scale_min": -40},
      {"name": "quality", "scale_max": 1.0}
    ]})"));
  const auto t = build_table(raw, config);
  EXPECT_EQ(t.performance(0, 0), -10.0);
  EXPECT_EQ(t.performance(1, 0), -30.0);
  EXPECT_EQ(t.criterion(0).scale_min, -40.0);
  EXPECT_EQ(t.criterion(0).scale_max, -10.0);
  EXPECT_EQ(t.criterion(0).subintervals, 1);
  EXPECT_EQ(t.criterion(1).scale_min, 0.2);
  EXPECT_EQ(t.criterion(1).scale_max, 1.0);
  EXPECT_EQ(t.criterion(1).subintervals, 3);
}

TEST(BuildTable, ConfigErrors) {
  const auto raw = parse("id,g1\na,1\nb,2\n");
  DatasetConfig c;
  c.columns.push_back({"missing", false, 2, {}, {}});
  EXPECT_THROW(build_table(raw, c), ValidationError);
  EXPECT_THROW(DatasetConfig::from_json(nlohmann::json::parse(R"({"criteria":[{"name":"g1","direction":"up"}]})")),
               ValidationError);
}

TEST(LoadDataset, ReadsFilesFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "prefelicit_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "d.csv") << "id,cost,gain\nx,4,1\ny,2,3\n";
    std::ofstream(dir / "d.json") << R"({"criteria":[{"name":"cost","direction":"cost"}]})";
  }
  const auto t = load_dataset((dir / "d.csv").string(), (dir / "d.json").string());
  EXPECT_EQ(t.performance(0, 0), -4.0);
  EXPECT_EQ(t.performance(1, 1), 3.0);
  EXPECT_THROW(load_dataset((dir / "nope.csv").string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(TableJson, RoundTripIsExact) {
  const auto t = support::unit_table({{0.1, 0.7, 0.3}, {0.9, 0.2, 0.4}}, {1, 2, 3});
  const auto back = table_from_json(nlohmann::json::parse(to_json(t).dump()));
  EXPECT_EQ(back.ids(), t.ids());
  EXPECT_EQ(back.performances(), t.performances());
  EXPECT_EQ(back.characteristics(), t.characteristics());
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(back.criterion(j).name, t.criterion(j).name);
    EXPECT_EQ(back.criterion(j).subintervals, t.criterion(j).subintervals);
  }
}

TEST(TableJson, NameOnlyCriteriaUseObservedScales) {
  const auto t = table_from_json(nlohmann::json::parse(
      R"({"alternatives":["a","b"],"criteria":["g",{"name":"h","scale_min":0}],"performances":[[2,3],[4,5]]})"));
  EXPECT_EQ(t.criterion(0).scale_min, 2.0);
  EXPECT_EQ(t.criterion(0).scale_max, 4.0);
  EXPECT_EQ(t.criterion(1).scale_min, 0.0);
  EXPECT_EQ(t.criterion(1).scale_max, 5.0);
}

TEST(TableJson, FieldLevelErrors) {
  const auto fields = [](const std::string& text) {
    std::vector<std::string> out;
    try {
      table_from_json(nlohmann::json::parse(text));
    } catch (const ValidationError& e) {
      for (const auto& f : e.errors()) out.push_back(f.field);
    }
    return out;
  };
  EXPECT_EQ(fields("{}"), (std::vector<std::string>{"table.alternatives", "table.criteria", "table.performances"}));
  EXPECT_EQ(fields(R"({"alternatives":["a"],"criteria":["g"],"performances":[[1,2]]})"),
            (std::vector<std::string>{"table.performances[0]"}));
  EXPECT_EQ(fields(R"({"alternatives":["a"],"criteria":["g"],"performances":[["x"]]})"),
            (std::vector<std::string>{"table.performances[0][0]"}));
  EXPECT_EQ(fields(R"({"alternatives":[1],"criteria":["g"],"performances":[[1]]})"),
            (std::vector<std::string>{"table.alternatives"}));
  EXPECT_EQ(fields("[1]"), (std::vector<std::string>{"table"}));
}

TEST(PreferenceJson, RoundTripAndRejectsRepeats) {
  const PreferenceSet q({{2, 0}, {1, 3}});
  EXPECT_EQ(preference_set_from_json(to_json(q)), q);
  EXPECT_EQ(to_json(q).dump(), R"([{"other":0,"preferred":2},{"other":3,"preferred":1}])");
  EXPECT_ANY_THROW(preference_set_from_json(nlohmann::json::parse(
      R"([{"preferred":0,"other":1},{"preferred":1,"other":0}])")));
}

TEST(OptimizerJson, RoundTripPartialOverrideAndValidation) {
  OptimizerConfig c = OptimizerConfig::rollout();
  c.rng_seed = 123456789012345ULL;
  c.learning_rate = 0.05;
  const auto back = optimizer_config_from_json(to_json(c));
  EXPECT_EQ(back.max_iters, 100);
  EXPECT_EQ(back.grad_samples, 1000);
  EXPECT_EQ(back.learning_rate, 0.05);
  EXPECT_EQ(back.rng_seed, c.rng_seed);
  const auto partial = optimizer_config_from_json({{"max_iters", 7}}, c);
  EXPECT_EQ(partial.max_iters, 7);
  EXPECT_EQ(partial.grad_samples, 1000);
  EXPECT_ANY_THROW(optimizer_config_from_json({{"grad_samples", 0}}));
}

TEST(PosteriorExport, CarriesThetaAlphaTraceSeedAndEstimator) {
  const auto t = support::unit_table({{0.9, 0.1}, {0.2, 0.8}});
  OptimizerConfig c = OptimizerConfig::rollout();
  c.max_iters = 20;
  c.rng_seed = 77;
  const auto alpha = DirichletParams::uniform(2);
  const auto fit = fit_posterior(t, PreferenceSet({{0, 1}}), alpha, c, Estimator::reparam);
  const auto j = posterior_export(fit, alpha, c, Estimator::reparam);
  EXPECT_EQ(j.at("theta").get<std::vector<double>>(), to_vector(fit.theta.values()));
  EXPECT_EQ(j.at("alpha").get<std::vector<double>>(), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(j.at("elbo_trace").size(), 20u);
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 77u);
  EXPECT_EQ(j.at("config").at("max_iters").get<int>(), 20);
  EXPECT_EQ(j.at("config").at("estimator").get<std::string>(), std::string(to_string(Estimator::reparam)));
}

TEST(MatrixJson, RowMajorNesting) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(matrix_to_json(m).dump(), "[[1.0,2.0,3.0],[4.0,5.0,6.0]]");
  EXPECT_EQ(matrix_to_json(Eigen::MatrixXd(0, 0)).dump(), "[]");
}
