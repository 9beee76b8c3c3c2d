#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prefelicit/experiments.hpp"
#include "prefelicit/http_api.hpp"
#include "prefelicit/io.hpp"
#include "prefelicit/session.hpp"

namespace pf = prefelicit;
using nlohmann::json;

namespace {

struct StudyArgs {
  std::string plan_path;
  std::string out_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool full = false;
};

void add_study_options(CLI::App& cmd, StudyArgs& a) {
  cmd.add_option("--plan", a.plan_path, "JSON plan; fields left out keep their defaults")
      ->check(CLI::ExistingFile);
  cmd.add_option("--out", a.out_path, "CSV output, one record per row")->required();
  cmd.add_option("--manifest", a.manifest_path, "JSON run manifest (default: <out>.manifest.json)");
  cmd.add_option("--seed", a.seed, "Base seed (overrides the plan)");
  cmd.add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd.add_flag("--full", a.full, "Start from the full-scale grid instead of the desk-scale one");
}

json read_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

template <class Plan>
Plan load_plan(const StudyArgs& a, Plan base) {
  Plan plan = Plan::from_json(read_json(a.plan_path), std::move(base));
  if (a.seed) plan.base_seed = *a.seed;
  plan.validate();
  return plan;
}

template <class Plan, class Records>
void write_outputs(const StudyArgs& a, std::string_view study, const Plan& plan, const Records& records) {
  std::ofstream out(a.out_path);
  if (!out) throw std::runtime_error("cannot write " + a.out_path);
  pf::write_csv(out, records);
  const std::string manifest = a.manifest_path.empty() ? a.out_path + ".manifest.json" : a.manifest_path;
  std::ofstream m(manifest);
  if (!m) throw std::runtime_error("cannot write " + manifest);
  m << pf::run_manifest(study, plan.to_json(), plan.base_seed, records.size()).dump(2) << '\n';
  std::cerr << records.size() << " records -> " << a.out_path << " (manifest " << manifest << ")\n";
}

int serve(const pf::ServerOptions& cli_server, const pf::SessionManagerOptions& cli_manager) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  pf::SessionManager manager(cli_manager);
  pf::HttpServer server(manager, cli_server);
  const int port = server.bind();
  std::cerr << "listening on " << cli_server.host << ":" << port << " with "
            << manager.ids().size() << " recovered session(s)\n";
  std::thread([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  }).detach();
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian preference elicitation: studies, fits and the session server"};
  app.require_subcommand(1);

  StudyArgs infer_args;
  auto* infer = app.add_subcommand("infer-study", "Preference-inference study (ASP of RT, score and SOR)");
  add_study_options(*infer, infer_args);

  StudyArgs policy_args;
  auto* policy = app.add_subcommand("policy-study", "Questioning-policy study (f_VAR, f_PWI, f_RAI by round)");
  add_study_options(*policy, policy_args);

  StudyArgs grad_args;
  auto* grad = app.add_subcommand("gradvar", "Gradient-variance comparison of the two estimators");
  add_study_options(*grad, grad_args);

  std::string table_csv;
  std::string dataset_config;
  std::string statements_path;
  std::string posterior_out;
  std::string estimator = "rt";
  pf::OptimizerConfig fit_cfg;
  auto* fit = app.add_subcommand("fit", "Fit the posterior for a dataset and a set of statements");
  fit->add_option("--table", table_csv, "Performance CSV (id,criterion,...)")->required()->check(CLI::ExistingFile);
  fit->add_option("--dataset-config", dataset_config, "Sidecar JSON with directions and sub-intervals")
      ->check(CLI::ExistingFile);
  fit->add_option("--statements", statements_path, "JSON [{preferred, other}] with alternative indices")
      ->check(CLI::ExistingFile);
  fit->add_option("--estimator", estimator, "rt or score")->check(CLI::IsMember({"rt", "score"}));
  fit->add_option("--iters", fit_cfg.max_iters, "Adam iterations");
  fit->add_option("--samples", fit_cfg.grad_samples, "Gradient draws per iteration");
  fit->add_option("--seed", fit_cfg.rng_seed, "Seed");
  fit->add_option("--out", posterior_out, "Posterior export JSON (default: stdout)");

  pf::ServerOptions server_opts;
  pf::SessionManagerOptions manager_opts;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> data_dir;
  std::optional<std::uint64_t> server_seed;
  std::optional<int> workers;
  auto* srv = app.add_subcommand("serve", "Run the live-session HTTP API");
  srv->add_option("--host", host, "Bind address (env PREFELICIT_BIND_ADDRESS)");
  srv->add_option("--port", port, "Port, 0 for any (env PREFELICIT_PORT)");
  srv->add_option("--data-dir", data_dir, "Session storage (env PREFELICIT_DATA_DIR)");
  srv->add_option("--server-seed", server_seed, "Seed for session streams (env PREFELICIT_SERVER_SEED)");
  srv->add_option("--workers", workers, "Background fit workers (env PREFELICIT_WORKERS)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) {
      const auto plan = load_plan(infer_args, infer_args.full ? pf::InferenceStudyPlan::full() : pf::InferenceStudyPlan{});
      write_outputs(infer_args, "inference", plan, pf::run_inference_study(plan, infer_args.workers));
    } else if (*policy) {
      const auto plan = load_plan(policy_args, policy_args.full ? pf::PolicyStudyPlan::full() : pf::PolicyStudyPlan{});
      write_outputs(policy_args, "policy", plan, pf::run_policy_study(plan, policy_args.workers));
    } else if (*grad) {
      // The gradient-variance study has no separate full-scale grid.
      const auto plan = load_plan(grad_args, pf::GradVarPlan{});
      const auto records = pf::run_gradient_variance_study(plan, grad_args.workers);
      write_outputs(grad_args, "gradvar", plan, records);
      std::cerr << "median RT/score variance ratio: " << pf::overall_median_ratio(records) << '\n';
    } else if (*fit) {
      const pf::PerformanceTable table = pf::load_dataset(table_csv, dataset_config);
      pf::PreferenceSet q;
      if (!statements_path.empty()) q = pf::preference_set_from_json(read_json(statements_path));
      const auto est = pf::parse_estimator(estimator);
      const auto alpha = pf::DirichletParams::uniform(table.dimension());
      const auto result = pf::fit_posterior(table, q, alpha, fit_cfg, est);
      const std::string text = pf::posterior_export(result, alpha, fit_cfg, est).dump(2);
      if (posterior_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream(posterior_out) << text << '\n';
      }
    } else if (*srv) {
      pf::apply_environment(server_opts, manager_opts);
      if (host) server_opts.host = *host;
      if (port) server_opts.port = *port;
      if (data_dir) manager_opts.data_dir = *data_dir;
      if (server_seed) manager_opts.server_seed = *server_seed;
      if (workers) manager_opts.workers = *workers;
      return serve(server_opts, manager_opts);
    }
  } catch (const pf::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& f : e.errors()) std::cerr << "  " << f.field << ": " << f.message << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
