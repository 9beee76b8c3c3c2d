#include "prefelicit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "prefelicit/io.hpp"
#include "prefelicit/metrics.hpp"

#ifndef PREFELICIT_VERSION
#define PREFELICIT_VERSION "unknown"
#endif

namespace prefelicit {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

// Quotes a CSV cell when needed.
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::uint64_t tag_of(double proportion) {
  return static_cast<std::uint64_t>(std::llround(proportion * 1e6));
}

template <typename T, typename Parse>
std::vector<T> parse_list(const nlohmann::json& j, Parse parse) {
  std::vector<T> out;
  for (const auto& v : j) out.push_back(parse(v.get<std::string>()));
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

nlohmann::json run_manifest(std::string_view study, const nlohmann::json& plan,
                            std::uint64_t base_seed, std::size_t records,
                            const nlohmann::json& extra) {
  nlohmann::json j;
  j["study"] = std::string(study);
  j["version"] = PREFELICIT_VERSION;
  j["base_seed"] = base_seed;
  j["records"] = records;
  j["plan"] = plan;
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  return j;
}

// ---- inference study ------------------------------------------------------

InferenceMethod parse_inference_method(std::string_view name) {
  if (name == "sor") return InferenceMethod::sor;
  return parse_estimator(name) == Estimator::reparam ? InferenceMethod::rt : InferenceMethod::score;
}

std::string_view to_string(InferenceMethod m) {
  switch (m) {
    case InferenceMethod::rt: return "rt";
    case InferenceMethod::score: return "score";
    case InferenceMethod::sor: return "sor";
  }
  return "?";
}

InferenceStudyPlan InferenceStudyPlan::full() {
  InferenceStudyPlan p;
  p.shapes = {ShapeSetting::linear, ShapeSetting::concave, ShapeSetting::convex, ShapeSetting::mixture};
  p.comparisons = {20, 40, 60, 80};
  p.biases = {0.0, 0.1, 0.2, 0.3};
  p.repetitions = 20;
  return p;
}

InferenceStudyPlan InferenceStudyPlan::from_json(const nlohmann::json& j, InferenceStudyPlan p) {
  if (j.contains("shapes")) p.shapes = parse_list<ShapeSetting>(j.at("shapes"), parse_shape_setting);
  if (j.contains("comparisons")) p.comparisons = j.at("comparisons").get<std::vector<int>>();
  if (j.contains("biases")) p.biases = j.at("biases").get<std::vector<double>>();
  if (j.contains("methods")) p.methods = parse_list<InferenceMethod>(j.at("methods"), parse_inference_method);
  p.repetitions = j.value("repetitions", p.repetitions);
  p.alternatives = j.value("alternatives", p.alternatives);
  p.criteria = j.value("criteria", p.criteria);
  p.subintervals = j.value("subintervals", p.subintervals);
  p.base_seed = j.value("base_seed", p.base_seed);
  if (j.contains("fit")) p.fit = optimizer_config_from_json(j.at("fit"), p.fit);
  p.posterior_samples = j.value("posterior_samples", p.posterior_samples);
  if (j.contains("sor")) {
    const auto& s = j.at("sor");
    p.sor.delta = s.value("delta", p.sor.delta);
    p.sor.samples = s.value("samples", p.sor.samples);
    p.sor.sampler.burn_in = s.value("burn_in", p.sor.sampler.burn_in);
    p.sor.sampler.thinning = s.value("thinning", p.sor.sampler.thinning);
  }
  p.validate();
  return p;
}

nlohmann::json InferenceStudyPlan::to_json() const {
  nlohmann::json j;
  j["study"] = "inference";
  auto& shapes_j = j["shapes"] = nlohmann::json::array();
  for (auto s : shapes) shapes_j.push_back(std::string(prefelicit::to_string(s)));
  j["comparisons"] = comparisons;
  j["biases"] = biases;
  auto& methods_j = j["methods"] = nlohmann::json::array();
  for (auto m : methods) methods_j.push_back(std::string(prefelicit::to_string(m)));
  j["repetitions"] = repetitions;
  j["alternatives"] = alternatives;
  j["criteria"] = criteria;
  j["subintervals"] = subintervals;
  j["base_seed"] = base_seed;
  j["fit"] = prefelicit::to_json(fit);
  j["posterior_samples"] = posterior_samples;
  j["sor"] = {{"delta", sor.delta},
              {"samples", sor.samples},
              {"burn_in", sor.sampler.burn_in},
              {"thinning", sor.sampler.thinning}};
  return j;
}

void InferenceStudyPlan::validate() const {
  if (shapes.empty() || comparisons.empty() || biases.empty() || methods.empty()) {
    throw std::invalid_argument("inference plan: every factor needs at least one level");
  }
  if (repetitions < 1) throw std::invalid_argument("inference plan: repetitions must be >= 1");
  if (alternatives < 2 || criteria < 1 || subintervals < 1) {
    throw std::invalid_argument("inference plan: invalid problem size");
  }
  const int pairs = alternatives * (alternatives - 1) / 2;
  for (int c : comparisons) {
    if (c < 0 || c > pairs) throw std::invalid_argument("inference plan: comparison count out of range");
  }
  for (double b : biases) {
    if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("inference plan: bias must lie in [0, 1)");
  }
  if (posterior_samples < 1) throw std::invalid_argument("inference plan: posterior_samples must be >= 1");
  fit.validate();
}

std::vector<InferenceRecord> run_inference_study(const InferenceStudyPlan& plan, int workers) {
  plan.validate();
  struct Cell {
    ShapeSetting shape;
    int comparisons;
    double bias;
    int repetition;
  };
  std::vector<Cell> cells;
  for (auto shape : plan.shapes) {
    for (int f2 : plan.comparisons) {
      for (double f3 : plan.biases) {
        for (int r = 0; r < plan.repetitions; ++r) cells.push_back({shape, f2, f3, r});
      }
    }
  }
  const std::size_t per_cell = plan.methods.size();
  std::vector<InferenceRecord> records(cells.size() * per_cell);

  parallel_for(static_cast<int>(cells.size()), workers, [&](int index) {
    const Cell& cell = cells[static_cast<std::size_t>(index)];
    // The instance depends on (shape, F2, repetition) only, so every bias
    // level and method sees the same decision maker and comparisons.
    const std::uint64_t instance_seed =
        derive_seed(plan.base_seed, {hash_tag("inference"), static_cast<std::uint64_t>(cell.shape),
                                     static_cast<std::uint64_t>(cell.comparisons),
                                     static_cast<std::uint64_t>(cell.repetition)});
    const std::string instance_id = std::string(to_string(cell.shape)) + "_F" +
                                    std::to_string(cell.comparisons) + "_r" +
                                    std::to_string(cell.repetition);
    for (std::size_t k = 0; k < per_cell; ++k) {
      const InferenceMethod method = plan.methods[k];
      InferenceRecord& rec = records[static_cast<std::size_t>(index) * per_cell + k];
      rec.instance_id = instance_id;
      rec.method = std::string(to_string(method));
      rec.shape = std::string(to_string(cell.shape));
      rec.comparisons = cell.comparisons;
      rec.bias = cell.bias;
      rec.repetition = cell.repetition;
      rec.seed = derive_seed(instance_seed, {hash_tag(rec.method), tag_of(cell.bias)});
      try {
        Rng gen(instance_seed);
        const PerformanceTable table =
            gen_performance_table(plan.alternatives, plan.criteria, gen, plan.subintervals);
        const TrueModel model = gen_true_model(plan.criteria, cell.shape, gen);
        const PreferenceSet clean = gen_comparisons(model, table, cell.comparisons, gen);
        const PreferenceSet q = inject_bias(clean, model, table, cell.bias);
        const Eigen::VectorXd truth = true_values(model, table);
        Rng rng(rec.seed);
        if (method == InferenceMethod::sor) {
          const SorResult sor = run_sor(table, q, rng, plan.sor);
          rec.statements_used = static_cast<int>(sor.kept.size());
          rec.asp = asp(sor.poi, truth);
        } else {
          OptimizerConfig cfg = plan.fit;
          cfg.rng_seed = rec.seed;
          const auto alpha = DirichletParams::uniform(table.dimension());
          const Estimator est = method == InferenceMethod::rt ? Estimator::reparam : Estimator::score;
          const FitResult fit = fit_posterior(table, q, alpha, cfg, est);
          const PosteriorSamples draws = sample_posterior(fit.theta, plan.posterior_samples, rng);
          rec.statements_used = static_cast<int>(q.size());
          rec.asp = asp(compute_pwi(draws, table), truth);
        }
      } catch (const std::exception& e) {
        rec.status = std::string("error: ") + e.what();
      }
    }
  });
  return records;
}

void write_csv(std::ostream& out, const std::vector<InferenceRecord>& records) {
  out << "instance_id,seed,method,shape,comparisons,bias,repetition,statements_used,asp,status\n";
  for (const auto& r : records) {
    out << csv_cell(r.instance_id) << ',' << r.seed << ',' << r.method << ',' << r.shape << ','
        << r.comparisons << ',' << fmt_double(r.bias) << ',' << r.repetition << ','
        << r.statements_used << ',' << fmt_optional(r.asp) << ',' << csv_cell(r.status) << '\n';
  }
}

// ---- policy study ---------------------------------------------------------

PolicyKind parse_policy(std::string_view name) {
  if (name == "mcts") return PolicyKind::mcts;
  if (name == "h_pwi") return PolicyKind::h_pwi;
  if (name == "h_rai") return PolicyKind::h_rai;
  if (name == "h_pwi2" || name == "h_pwi-2") return PolicyKind::h_pwi2;
  if (name == "h_rai2" || name == "h_rai-2") return PolicyKind::h_rai2;
  if (name == "h_dvf") return PolicyKind::h_dvf;
  if (name == "h_rand") return PolicyKind::h_rand;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::mcts: return "mcts";
    case PolicyKind::h_pwi: return "h_pwi";
    case PolicyKind::h_rai: return "h_rai";
    case PolicyKind::h_pwi2: return "h_pwi2";
    case PolicyKind::h_rai2: return "h_rai2";
    case PolicyKind::h_dvf: return "h_dvf";
    case PolicyKind::h_rand: return "h_rand";
  }
  return "?";
}

PolicyStudyPlan PolicyStudyPlan::full() {
  PolicyStudyPlan p;
  p.sizes.clear();
  for (int n = 6; n <= 10; ++n) p.sizes.emplace_back(n, 3);
  for (int m = 2; m <= 5; ++m) {
    if (m != 3) p.sizes.emplace_back(8, m);
  }
  p.policies = {PolicyKind::mcts,   PolicyKind::h_pwi, PolicyKind::h_rai, PolicyKind::h_pwi2,
                PolicyKind::h_rai2, PolicyKind::h_dvf, PolicyKind::h_rand};
  p.mcts_budget = 300;
  p.posterior_fit = OptimizerConfig{};
  return p;
}

PolicyStudyPlan PolicyStudyPlan::from_json(const nlohmann::json& j, PolicyStudyPlan p) {
  if (j.contains("sizes")) {
    p.sizes.clear();
    for (const auto& s : j.at("sizes")) p.sizes.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
  }
  p.instances = j.value("instances", p.instances);
  p.horizon = j.value("horizon", p.horizon);
  if (j.contains("checkpoints")) p.checkpoints = j.at("checkpoints").get<std::vector<int>>();
  if (j.contains("policies")) p.policies = parse_list<PolicyKind>(j.at("policies"), parse_policy);
  p.subintervals = j.value("subintervals", p.subintervals);
  if (j.contains("shape")) p.shape = parse_shape_setting(j.at("shape").get<std::string>());
  p.base_seed = j.value("base_seed", p.base_seed);
  p.mcts_budget = j.value("mcts_budget", p.mcts_budget);
  p.exploration = j.value("exploration", p.exploration);
  if (j.contains("refit")) p.selection.refit = optimizer_config_from_json(j.at("refit"), p.selection.refit);
  if (j.contains("estimator")) p.selection.estimator = parse_estimator(j.at("estimator").get<std::string>());
  p.selection.predictive_samples = j.value("predictive_samples", p.selection.predictive_samples);
  if (j.contains("posterior_fit")) p.posterior_fit = optimizer_config_from_json(j.at("posterior_fit"), p.posterior_fit);
  p.metric_samples = j.value("metric_samples", p.metric_samples);
  p.validate();
  return p;
}

nlohmann::json PolicyStudyPlan::to_json() const {
  nlohmann::json j;
  j["study"] = "policy";
  auto& sizes_j = j["sizes"] = nlohmann::json::array();
  for (auto [n, m] : sizes) sizes_j.push_back({n, m});
  j["instances"] = instances;
  j["horizon"] = horizon;
  j["checkpoints"] = checkpoints;
  auto& pol = j["policies"] = nlohmann::json::array();
  for (auto p : policies) pol.push_back(std::string(prefelicit::to_string(p)));
  j["subintervals"] = subintervals;
  j["shape"] = std::string(prefelicit::to_string(shape));
  j["base_seed"] = base_seed;
  j["mcts_budget"] = mcts_budget;
  j["exploration"] = exploration;
  j["refit"] = prefelicit::to_json(selection.refit);
  j["estimator"] = std::string(prefelicit::to_string(selection.estimator));
  j["predictive_samples"] = selection.predictive_samples;
  j["posterior_fit"] = prefelicit::to_json(posterior_fit);
  j["metric_samples"] = metric_samples;
  return j;
}

void PolicyStudyPlan::validate() const {
  if (sizes.empty() || policies.empty()) throw std::invalid_argument("policy plan: sizes and policies required");
  for (auto [n, m] : sizes) {
    if (n < 2 || m < 1) throw std::invalid_argument("policy plan: invalid problem size");
    if (horizon > n * (n - 1) / 2) throw std::invalid_argument("policy plan: horizon exceeds the number of pairs");
  }
  if (instances < 1 || horizon < 1) throw std::invalid_argument("policy plan: instances and horizon must be >= 1");
  for (int c : checkpoints) {
    if (c < 1 || c > horizon) throw std::invalid_argument("policy plan: checkpoint outside [1, horizon]");
  }
  if (mcts_budget < 1 || metric_samples < 1) throw std::invalid_argument("policy plan: budget and samples must be >= 1");
  selection.refit.validate();
  posterior_fit.validate();
}

Question choose_question(PolicyKind policy, const PosteriorContext& ctx, const PolicyConfig& mcts,
                         int round, Rng& rng) {
  switch (policy) {
    case PolicyKind::mcts: return select_question(ctx, mcts, round).question;
    case PolicyKind::h_pwi: return h_myopic(ctx, UncertaintyMetric::pwi);
    case PolicyKind::h_rai: return h_myopic(ctx, UncertaintyMetric::rai);
    case PolicyKind::h_pwi2: return h_depth2(ctx, UncertaintyMetric::pwi);
    case PolicyKind::h_rai2: return h_depth2(ctx, UncertaintyMetric::rai);
    case PolicyKind::h_dvf: return h_dvf(ctx);
    case PolicyKind::h_rand: return h_rand(ctx.table().size(), ctx.preferences(), rng);
  }
  throw std::invalid_argument("choose_question: unknown policy");
}

std::vector<PolicyRecord> run_policy_study(const PolicyStudyPlan& plan, int workers) {
  plan.validate();
  std::vector<int> checkpoints = plan.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  struct Job {
    int n;
    int m;
    int instance;
    PolicyKind policy;
  };
  std::vector<Job> jobs;
  for (auto [n, m] : plan.sizes) {
    for (int i = 0; i < plan.instances; ++i) {
      for (auto p : plan.policies) jobs.push_back({n, m, i, p});
    }
  }
  const std::size_t per_job = checkpoints.size();
  std::vector<PolicyRecord> records(jobs.size() * per_job);

  parallel_for(static_cast<int>(jobs.size()), workers, [&](int index) {
    const Job& job = jobs[static_cast<std::size_t>(index)];
    const std::uint64_t instance_seed =
        derive_seed(plan.base_seed, {hash_tag("policy"), static_cast<std::uint64_t>(job.n),
                                     static_cast<std::uint64_t>(job.m),
                                     static_cast<std::uint64_t>(job.instance)});
    const std::string policy_name(to_string(job.policy));
    const std::string instance_id = "n" + std::to_string(job.n) + "_m" + std::to_string(job.m) + "_i" +
                                    std::to_string(job.instance);
    PolicyRecord* out = &records[static_cast<std::size_t>(index) * per_job];
    for (std::size_t k = 0; k < per_job; ++k) {
      out[k].instance_id = instance_id;
      out[k].seed = instance_seed;
      out[k].alternatives = job.n;
      out[k].criteria = job.m;
      out[k].policy = policy_name;
      out[k].round = checkpoints[k];
    }
    try {
      Rng gen(instance_seed);
      const PerformanceTable table = gen_performance_table(job.n, job.m, gen, plan.subintervals);
      const TrueModel model = gen_true_model(job.m, plan.shape, gen);
      const DirichletParams alpha = plan.selection.prior(table.dimension());
      const std::uint64_t policy_seed = derive_seed(instance_seed, {hash_tag(policy_name)});
      Rng policy_rng(derive_seed(policy_seed, {hash_tag("rand")}));
      Rng answer_rng(derive_seed(instance_seed, {hash_tag("answers")}));
      PolicyConfig mcts;
      mcts.budget = plan.mcts_budget;
      mcts.exploration = plan.exploration;
      mcts.horizon = plan.horizon;
      mcts.rng_seed = policy_seed;

      PreferenceSet q;
      DirichletParams theta = alpha;
      std::size_t next = 0;
      for (int t = 1; t <= plan.horizon && next < per_job; ++t) {
        const PosteriorContext ctx(table, q, theta, plan.selection,
                                   derive_seed(policy_seed, {static_cast<std::uint64_t>(t)}));
        const Question pick = choose_question(job.policy, ctx, mcts, t, policy_rng);
        q.add(simulated_answer(model, table, pick, answer_rng).statement);

        // Round posteriors share their seed across policies.
        OptimizerConfig cfg = plan.posterior_fit;
        cfg.rng_seed = derive_seed(instance_seed, {hash_tag("fit"), static_cast<std::uint64_t>(t)});
        theta = fit_posterior(table, q, alpha, cfg, plan.selection.estimator, &theta).theta;

        if (checkpoints[next] == t) {
          Rng draws(derive_seed(instance_seed, {hash_tag("metrics"), static_cast<std::uint64_t>(t)}));
          const auto summary =
              summarize_uncertainty(theta, sample_posterior(theta, plan.metric_samples, draws), table);
          PolicyRecord& rec = out[next++];
          rec.question = std::to_string(pick.first) + "-" + std::to_string(pick.second);
          rec.f_var = summary.f_var;
          rec.f_pwi = summary.f_pwi;
          rec.f_rai = summary.f_rai;
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < per_job; ++k) {
        if (!out[k].f_var) out[k].status = std::string("error: ") + e.what();
      }
    }
  });
  return records;
}

void write_csv(std::ostream& out, const std::vector<PolicyRecord>& records) {
  out << "instance_id,seed,alternatives,criteria,policy,round,question,f_var,f_pwi,f_rai,status\n";
  for (const auto& r : records) {
    out << csv_cell(r.instance_id) << ',' << r.seed << ',' << r.alternatives << ',' << r.criteria << ','
        << r.policy << ',' << r.round << ',' << r.question << ',' << fmt_optional(r.f_var) << ','
        << fmt_optional(r.f_pwi) << ',' << fmt_optional(r.f_rai) << ',' << csv_cell(r.status) << '\n';
  }
}

// ---- gradient-variance study ----------------------------------------------

GradVarPlan GradVarPlan::from_json(const nlohmann::json& j, GradVarPlan p) {
  p.configurations = j.value("configurations", p.configurations);
  p.alternatives = j.value("alternatives", p.alternatives);
  p.criteria = j.value("criteria", p.criteria);
  p.subintervals = j.value("subintervals", p.subintervals);
  p.statements = j.value("statements", p.statements);
  p.grad_samples = j.value("grad_samples", p.grad_samples);
  p.repeats = j.value("repeats", p.repeats);
  p.theta_min = j.value("theta_min", p.theta_min);
  p.theta_max = j.value("theta_max", p.theta_max);
  p.base_seed = j.value("base_seed", p.base_seed);
  p.validate();
  return p;
}

nlohmann::json GradVarPlan::to_json() const {
  return {{"study", "gradvar"},           {"configurations", configurations},
          {"alternatives", alternatives}, {"criteria", criteria},
          {"subintervals", subintervals}, {"statements", statements},
          {"grad_samples", grad_samples}, {"repeats", repeats},
          {"theta_min", theta_min},       {"theta_max", theta_max},
          {"base_seed", base_seed}};
}

void GradVarPlan::validate() const {
  if (configurations < 1 || repeats < 2 || grad_samples < 2) {
    throw std::invalid_argument("gradvar plan: need configurations >= 1, repeats >= 2, grad_samples >= 2");
  }
  if (alternatives < 2 || criteria < 1 || subintervals < 1) throw std::invalid_argument("gradvar plan: invalid size");
  if (statements < 0 || statements > alternatives * (alternatives - 1) / 2) {
    throw std::invalid_argument("gradvar plan: statement count out of range");
  }
  if (!(theta_min > 0.0 && theta_max >= theta_min)) throw std::invalid_argument("gradvar plan: invalid theta range");
}

std::vector<GradVarRecord> run_gradient_variance_study(const GradVarPlan& plan, int workers) {
  plan.validate();
  std::vector<GradVarRecord> records(static_cast<std::size_t>(plan.configurations));
  parallel_for(plan.configurations, workers, [&](int c) {
    GradVarRecord& rec = records[static_cast<std::size_t>(c)];
    rec.config_id = c;
    rec.seed = derive_seed(plan.base_seed, {hash_tag("gradvar"), static_cast<std::uint64_t>(c)});
    Rng gen(rec.seed);
    const PerformanceTable table = gen_performance_table(plan.alternatives, plan.criteria, gen, plan.subintervals);
    const TrueModel model = gen_true_model(plan.criteria, ShapeSetting::linear, gen);
    const PreferenceSet q = gen_comparisons(model, table, plan.statements, gen);
    const PreferenceLikelihood lik(table, q);
    const int g = table.dimension();
    Eigen::VectorXd theta_v(g);
    for (int k = 0; k < g; ++k) theta_v[k] = plan.theta_min + (plan.theta_max - plan.theta_min) * uniform01(gen);
    const DirichletParams theta(theta_v);
    const PhiVector phi = PhiVector::from_theta(theta);
    const auto alpha = DirichletParams::uniform(g);

    Eigen::MatrixXd rt(plan.repeats, g);
    Eigen::MatrixXd score(plan.repeats, g);
    for (int r = 0; r < plan.repeats; ++r) {
      Rng rng_rt(derive_seed(rec.seed, {hash_tag("rt"), static_cast<std::uint64_t>(r)}));
      Rng rng_sc(derive_seed(rec.seed, {hash_tag("score"), static_cast<std::uint64_t>(r)}));
      rt.row(r) = rt_gradient(phi, lik, alpha, plan.grad_samples, rng_rt).transpose();
      const Eigen::VectorXd gs = score_gradient(theta, lik, alpha, plan.grad_samples, rng_sc);
      score.row(r) = (2.0 * phi.values.array() * gs.array()).matrix().transpose();
    }
    auto column_variance = [&](const Eigen::MatrixXd& m) {
      const Eigen::RowVectorXd mean = m.colwise().mean();
      return ((m.rowwise() - mean).array().square().colwise().sum() / (m.rows() - 1)).matrix().eval();
    };
    const Eigen::RowVectorXd var_rt = column_variance(rt);
    const Eigen::RowVectorXd var_sc = column_variance(score);
    rec.gamma = g;
    rec.statements = static_cast<int>(q.size());
    rec.rt_mean_variance = var_rt.mean();
    rec.score_mean_variance = var_sc.mean();
    for (int k = 0; k < g; ++k) rec.ratios.push_back(var_rt[k] / var_sc[k]);
    rec.median_ratio = median(rec.ratios);
  });
  return records;
}

double overall_median_ratio(const std::vector<GradVarRecord>& records) {
  std::vector<double> all;
  for (const auto& r : records) all.insert(all.end(), r.ratios.begin(), r.ratios.end());
  return median(std::move(all));
}

void write_csv(std::ostream& out, const std::vector<GradVarRecord>& records) {
  out << "config_id,seed,gamma,statements,rt_mean_variance,score_mean_variance,median_ratio\n";
  for (const auto& r : records) {
    out << r.config_id << ',' << r.seed << ',' << r.gamma << ',' << r.statements << ','
        << fmt_double(r.rt_mean_variance) << ',' << fmt_double(r.score_mean_variance) << ','
        << fmt_double(r.median_ratio) << '\n';
  }
}

}  // namespace prefelicit
