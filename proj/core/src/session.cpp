#include "prefelicit/session.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "prefelicit/io.hpp"
#include "prefelicit/metrics.hpp"

namespace prefelicit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::awaiting_answer: return "awaiting_answer";
    case SessionStatus::fitting: return "fitting";
    case SessionStatus::selecting: return "selecting";
    case SessionStatus::done: return "done";
    case SessionStatus::failed: return "failed";
  }
  return "unknown";
}

// ---- config ----------------------------------------------------------------

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& path, T fallback,
        std::vector<FieldError>& errors) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    errors.push_back({path + key, "has the wrong type"});
    return fallback;
  }
}

OptimizerConfig optimizer_field(const json& j, const char* key, const std::string& path,
                                OptimizerConfig fallback, std::vector<FieldError>& errors) {
  if (!j.contains(key)) return fallback;
  try {
    return optimizer_config_from_json(j.at(key), fallback);
  } catch (const std::exception& e) {
    errors.push_back({path + key, e.what()});
    return fallback;
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& path,
                    std::vector<FieldError>& errors) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      errors.push_back({path + key, "unknown key"});
    }
  }
}

}  // namespace

SessionConfig SessionConfig::from_json(const json& j) {
  SessionConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ValidationError("config", "must be an object");
  std::vector<FieldError> errors;
  reject_unknown(j, {"fit", "estimator", "mcts_budget", "exploration", "selection", "metric_samples", "seed"},
                 "config.", errors);
  c.fit = optimizer_field(j, "fit", "config.", c.fit, errors);
  if (j.contains("estimator")) {
    try {
      c.estimator = parse_estimator(j.at("estimator").get<std::string>());
    } catch (const std::exception& e) {
      errors.push_back({"config.estimator", e.what()});
    }
  }
  c.mcts_budget = field(j, "mcts_budget", "config.", c.mcts_budget, errors);
  c.exploration = field(j, "exploration", "config.", c.exploration, errors);
  c.metric_samples = field(j, "metric_samples", "config.", c.metric_samples, errors);
  if (j.contains("seed")) {
    if (j.at("seed").is_number_unsigned()) {
      c.seed = j.at("seed").get<std::uint64_t>();
    } else {
      errors.push_back({"config.seed", "must be a non-negative integer"});
    }
  }
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    if (!s.is_object()) {
      errors.push_back({"config.selection", "must be an object"});
    } else {
      reject_unknown(s, {"refit", "predictive_samples", "alpha"}, "config.selection.", errors);
      c.selection.refit = optimizer_field(s, "refit", "config.selection.", c.selection.refit, errors);
      c.selection.predictive_samples =
          field(s, "predictive_samples", "config.selection.", c.selection.predictive_samples, errors);
      const auto alpha = field(s, "alpha", "config.selection.", std::vector<double>{}, errors);
      c.selection.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  c.validate();
  return c;
}

json SessionConfig::to_json() const {
  json j;
  j["fit"] = prefelicit::to_json(fit);
  j["estimator"] = std::string(to_string(estimator));
  j["mcts_budget"] = mcts_budget;
  j["exploration"] = exploration;
  j["metric_samples"] = metric_samples;
  j["selection"] = {{"refit", prefelicit::to_json(selection.refit)},
                    {"predictive_samples", selection.predictive_samples}};
  if (selection.alpha.size() > 0) j["selection"]["alpha"] = to_vector(selection.alpha);
  if (seed) j["seed"] = *seed;
  return j;
}

void SessionConfig::validate() const {
  std::vector<FieldError> errors;
  if (mcts_budget < 1) errors.push_back({"config.mcts_budget", "must be at least 1"});
  if (!(exploration >= 0.0)) errors.push_back({"config.exploration", "must be non-negative"});
  if (metric_samples < 1) errors.push_back({"config.metric_samples", "must be at least 1"});
  if (selection.predictive_samples < 1) {
    errors.push_back({"config.selection.predictive_samples", "must be at least 1"});
  }
  if ((selection.alpha.array() <= 0.0).any()) {
    errors.push_back({"config.selection.alpha", "entries must be positive"});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

SessionSeeds session_seeds(std::uint64_t seed, int answered) {
  const auto round = static_cast<std::uint64_t>(answered);
  return {derive_seed(seed, {hash_tag("fit"), round}),
          derive_seed(seed, {hash_tag("select"), round}),
          derive_seed(seed, {hash_tag("context"), round}),
          derive_seed(seed, {hash_tag("metrics"), round})};
}

// ---- state transitions -----------------------------------------------------

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DirichletParams prior_of(const SessionState& s) {
  return s.config.selection.prior(s.table->dimension());
}

void refresh_metrics(SessionState& s) {
  const int answered = static_cast<int>(s.posteriors.size()) - 1;
  Rng rng(session_seeds(s.seed, answered).metrics);
  const PosteriorSamples samples = sample_posterior(s.theta(), s.config.metric_samples, rng);
  const Eigen::MatrixXd values = samples.values(*s.table);
  s.pwi = compute_pwi(values);
  s.rai = compute_rai(values);
  s.metrics.resize(static_cast<std::size_t>(answered));
  s.metrics.push_back({answered, f_var(s.theta()), f_pwi(s.pwi), f_rai(s.rai)});
}

// The single place where events change a session, shared by live requests
// and by log replay.
void apply_event(SessionState& s, const json& ev) {
  const std::string type = ev.at("type").get<std::string>();
  if (ev.contains("at")) s.updated_at = ev.at("at").get<std::string>();
  if (type == "created") {
    s.id = ev.at("id").get<std::string>();
    s.table = std::make_shared<const PerformanceTable>(table_from_json(ev.at("table")));
    s.horizon = ev.at("horizon").get<int>();
    s.config = SessionConfig::from_json(ev.at("config"));
    s.seed = ev.at("seed").get<std::uint64_t>();
    s.created_at = s.updated_at;
    s.posteriors = {prior_of(s)};
    s.status = SessionStatus::selecting;
    refresh_metrics(s);
  } else if (type == "answer") {
    const PreferenceStatement st{ev.at("preferred").get<int>(), ev.at("other").get<int>()};
    s.history.add(st);
    const std::string key = ev.value("idempotency_key", std::string());
    if (!key.empty()) s.idempotency[key] = st;
    s.pending.reset();
    s.status = SessionStatus::fitting;
  } else if (type == "posterior") {
    const auto answered = ev.at("answered").get<std::size_t>();
    const auto theta = ev.at("theta").get<std::vector<double>>();
    s.posteriors.resize(answered);
    s.posteriors.emplace_back(
        Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
    s.elbo_trace = ev.value("elbo_trace", std::vector<double>{});
    refresh_metrics(s);
    s.status = s.answered() >= s.horizon ? SessionStatus::done : SessionStatus::selecting;
  } else if (type == "question") {
    const auto pair = ev.at("pair").get<std::vector<int>>();
    s.pending = make_question(pair.at(0), pair.at(1));
    s.asked.push_back(*s.pending);
    s.status = SessionStatus::awaiting_answer;
  } else if (type == "failed") {
    s.error = ev.at("message").get<std::string>();
    s.status = SessionStatus::failed;
  } else {
    throw std::runtime_error("unknown session event '" + type + "'");
  }
}

void write_file_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

// ---- manager ---------------------------------------------------------------

struct SessionManager::Entry {
  fs::path dir;  // empty when not persisted
  std::mutex write_mu;
  mutable std::mutex state_mu;
  mutable std::condition_variable settled;
  std::shared_ptr<const SessionState> state;
  // Set while a fit/selection runner owns the session.
  std::atomic<bool> running{false};

  std::shared_ptr<const SessionState> load() const {
    std::lock_guard lock(state_mu);
    return state;
  }
};

class SessionManager::Workers {
 public:
  explicit Workers(int count) {
    for (int i = 0; i < count; ++i) threads_.emplace_back([this] { run(); });
  }
  ~Workers() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  void post(std::function<void()> job) {
    {
      std::lock_guard lock(mu_);
      jobs_.push_back(std::move(job));
    }
    cv_.notify_one();
  }

 private:
  void run() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
        // Queued jobs are dropped on shutdown; recovery reruns them.
        if (stop_) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      job();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  std::vector<std::thread> threads_;
  bool stop_ = false;
};

SessionManager::SessionManager(SessionManagerOptions options) : options_(std::move(options)) {
  if (options_.workers < 0) throw std::invalid_argument("SessionManager: workers must be non-negative");
  if (options_.workers > 0) workers_ = std::make_unique<Workers>(options_.workers);
  if (!options_.data_dir.empty()) {
    fs::create_directories(options_.data_dir);
    load_existing();
  }
}

SessionManager::~SessionManager() { workers_.reset(); }

std::string SessionManager::new_id() {
  std::lock_guard lock(id_mu_);
  static thread_local std::random_device device;
  for (;;) {
    const auto nanos = static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    const std::uint64_t token =
        derive_seed(options_.server_seed, {++id_counter_, nanos, (std::uint64_t{device()} << 32) | device()});
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << token;
    std::shared_lock read(sessions_mu_);
    if (!sessions_.count(out.str())) return out.str();
  }
}

std::shared_ptr<SessionManager::Entry> SessionManager::entry(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(sessions_mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

std::shared_ptr<const SessionState> SessionManager::state(const std::string& id) const {
  return entry(id)->load();
}

std::shared_ptr<const SessionState> SessionManager::wait_settled(const std::string& id) const {
  const auto e = entry(id);
  std::unique_lock lock(e->state_mu);
  e->settled.wait(lock, [&] {
    return e->state->status != SessionStatus::fitting && e->state->status != SessionStatus::selecting;
  });
  return e->state;
}

void SessionManager::commit(Entry& e, json event) {
  event["at"] = now_iso8601();
  auto next = std::make_shared<SessionState>(*e.load());
  apply_event(*next, event);
  if (!e.dir.empty()) {
    std::ofstream log(e.dir / "events.jsonl", std::ios::app);
    log << event.dump() << '\n';
    log.flush();
    if (!log) throw std::runtime_error("cannot append to the event log of session " + next->id);
    json snapshot = session_export(*next);
    write_file_atomically(e.dir / "snapshot.json", snapshot.dump(2));
  }
  {
    std::lock_guard lock(e.state_mu);
    e.state = std::move(next);
  }
  e.settled.notify_all();
}

std::string SessionManager::create(const PerformanceTable& table, int horizon,
                                   const SessionConfig& config) {
  config.validate();
  std::vector<FieldError> errors;
  const int n = table.size();
  if (n < 2) errors.push_back({"table.alternatives", "at least two alternatives are required"});
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  if (horizon < 1) {
    errors.push_back({"horizon", "must be at least 1"});
  } else if (horizon > pairs) {
    errors.push_back({"horizon", "exceeds the " + std::to_string(pairs) + " distinct pairs of the table"});
  }
  if (config.selection.alpha.size() > 0 && config.selection.alpha.size() != table.dimension()) {
    errors.push_back({"config.selection.alpha",
                      "must have " + std::to_string(table.dimension()) + " entries"});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  const std::string id = new_id();
  auto e = std::make_shared<Entry>();
  e->state = std::make_shared<const SessionState>();
  if (!options_.data_dir.empty()) {
    e->dir = options_.data_dir / id;
    fs::create_directories(e->dir);
  }
  const std::uint64_t seed = config.seed ? *config.seed : derive_seed(options_.server_seed, {hash_tag(id)});
  {
    std::lock_guard lock(e->write_mu);
    commit(*e, {{"type", "created"},
                {"id", id},
                {"table", to_json(table)},
                {"horizon", horizon},
                {"config", config.to_json()},
                {"seed", seed}});
  }
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[id] = e;
  }
  schedule(e);
  return id;
}

std::shared_ptr<const SessionState> SessionManager::submit_answer(const std::string& id,
                                                                  int preferred, int other,
                                                                  const std::string& idempotency_key) {
  const auto e = entry(id);
  {
    std::lock_guard lock(e->write_mu);
    const auto s = e->load();
    if (!idempotency_key.empty()) {
      const auto it = s->idempotency.find(idempotency_key);
      if (it != s->idempotency.end()) {
        if (it->second == PreferenceStatement{preferred, other}) return s;
        throw ConflictError("idempotency key '" + idempotency_key + "' was used for a different answer");
      }
    }
    if (s->status != SessionStatus::awaiting_answer) {
      throw ConflictError("session is " + std::string(to_string(s->status)) + ", not awaiting an answer");
    }
    if (preferred == other || !s->pending || make_question(preferred, other) != *s->pending) {
      throw ConflictError("answer does not match the pending question");
    }
    commit(*e, {{"type", "answer"},
                {"round", s->round()},
                {"preferred", preferred},
                {"other", other},
                {"idempotency_key", idempotency_key}});
  }
  schedule(e);
  return e->load();
}

void SessionManager::schedule(const std::shared_ptr<Entry>& e) {
  const auto status = e->load()->status;
  if (status != SessionStatus::fitting && status != SessionStatus::selecting) return;
  if (e->running.exchange(true)) return;
  if (workers_) {
    workers_->post([this, e] { advance(e); });
  } else {
    advance(e);
  }
}

// Runs the pending fit and/or selection. Submissions are rejected while the
// session is fitting or selecting, so this is the only writer until it
// publishes an awaiting_answer, done or failed state.
void SessionManager::advance(const std::shared_ptr<Entry>& e) {
  try {
    for (;;) {
      const auto s = e->load();
      const SessionSeeds seeds = session_seeds(s->seed, s->answered());
      if (s->status == SessionStatus::fitting) {
        OptimizerConfig cfg = s->config.fit;
        cfg.rng_seed = seeds.fit;
        const DirichletParams warm = s->theta();
        const FitResult fit =
            fit_posterior(*s->table, s->history, prior_of(*s), cfg, s->config.estimator, &warm);
        std::lock_guard lock(e->write_mu);
        if (e->load() != s) continue;
        commit(*e, {{"type", "posterior"},
                    {"answered", s->answered()},
                    {"theta", to_vector(fit.theta.values())},
                    {"elbo_trace", fit.elbo_trace}});
      } else if (s->status == SessionStatus::selecting) {
        const PosteriorContext ctx(*s->table, s->history, s->theta(), s->config.selection, seeds.context);
        PolicyConfig policy;
        policy.budget = s->config.mcts_budget;
        policy.exploration = s->config.exploration;
        policy.horizon = s->horizon;
        policy.rng_seed = seeds.selection;
        const Question q = select_question(ctx, policy, s->round()).question;
        std::lock_guard lock(e->write_mu);
        if (e->load() != s) continue;
        commit(*e, {{"type", "question"}, {"round", s->round()}, {"pair", {q.first, q.second}}});
      } else {
        // Hand back ownership, then retake it if an answer slipped in.
        e->running = false;
        const auto again = e->load()->status;
        if (again != SessionStatus::fitting && again != SessionStatus::selecting) return;
        if (e->running.exchange(true)) return;
      }
    }
  } catch (const std::exception& ex) {
    std::lock_guard lock(e->write_mu);
    try {
      commit(*e, {{"type", "failed"}, {"message", ex.what()}});
    } catch (const std::exception&) {
      // Persistence itself failed; keep the in-memory state consistent.
      auto next = std::make_shared<SessionState>(*e->load());
      next->status = SessionStatus::failed;
      next->error = ex.what();
      {
        std::lock_guard state_lock(e->state_mu);
        e->state = std::move(next);
      }
      e->settled.notify_all();
    }
    e->running = false;
  }
}

void SessionManager::load_existing() {
  for (const auto& dir : fs::directory_iterator(options_.data_dir)) {
    const fs::path log_path = dir.path() / "events.jsonl";
    if (!dir.is_directory() || !fs::exists(log_path)) continue;
    auto state = std::make_shared<SessionState>();
    std::ifstream in(log_path);
    std::string line;
    bool any = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json ev;
      try {
        ev = json::parse(line);
      } catch (const json::parse_error&) {
        break;  // torn final write
      }
      apply_event(*state, ev);
      any = true;
    }
    if (!any) continue;
    auto e = std::make_shared<Entry>();
    e->dir = dir.path();
    e->state = state;
    sessions_[state->id] = e;
  }
  for (const auto& [id, e] : sessions_) schedule(e);
}

// ---- views -----------------------------------------------------------------

nlohmann::json session_view(const SessionState& s) {
  const PerformanceTable& t = *s.table;
  json j;
  j["id"] = s.id;
  j["status"] = std::string(to_string(s.status));
  j["round"] = s.round();
  j["horizon"] = s.horizon;
  j["answered"] = s.answered();
  j["progress"] = static_cast<double>(s.answered()) / s.horizon;
  j["alternatives"] = t.ids();
  auto& criteria = j["criteria"] = json::array();
  for (const auto& c : t.criteria()) {
    criteria.push_back({{"name", c.name}, {"scale_min", c.scale_min}, {"scale_max", c.scale_max}});
  }
  if (s.pending) {
    auto row = [&](int a) {
      std::vector<double> perf;
      for (int k = 0; k < t.num_criteria(); ++k) perf.push_back(t.performance(a, k));
      return json{{"index", a}, {"id", t.id(a)}, {"performances", perf}};
    };
    j["question"] = {{"round", s.round()},
                     {"pair", {s.pending->first, s.pending->second}},
                     {"alternatives", {row(s.pending->first), row(s.pending->second)}}};
  } else {
    j["question"] = nullptr;
  }
  auto& history = j["history"] = json::array();
  for (const auto& st : s.history) {
    history.push_back({{"preferred", st.preferred},
                       {"other", st.other},
                       {"preferred_id", t.id(st.preferred)},
                       {"other_id", t.id(st.other)}});
  }
  j["posterior"] = {{"theta", to_vector(s.theta().values())},
                    {"mean", to_vector(s.theta().mean())},
                    {"concentration", s.theta().concentration()},
                    {"variance", posterior_variance(s.theta())}};
  j["pwi"] = matrix_to_json(s.pwi);
  j["rai"] = matrix_to_json(s.rai);
  const MetricPoint& last = s.metrics.back();
  j["metrics"] = {{"f_var", last.f_var}, {"f_pwi", last.f_pwi}, {"f_rai", last.f_rai}};
  auto& series = j["metric_history"] = json::array();
  for (const auto& m : s.metrics) {
    series.push_back({{"answered", m.answered}, {"f_var", m.f_var}, {"f_pwi", m.f_pwi}, {"f_rai", m.f_rai}});
  }
  j["error"] = s.error ? json(*s.error) : json(nullptr);
  j["created_at"] = s.created_at;
  j["updated_at"] = s.updated_at;
  return j;
}

nlohmann::json session_export(const SessionState& s) {
  json j;
  j["id"] = s.id;
  j["status"] = std::string(to_string(s.status));
  j["horizon"] = s.horizon;
  j["table"] = to_json(*s.table);
  j["config"] = s.config.to_json();
  j["statements"] = to_json(s.history);
  auto& questions = j["questions"] = json::array();
  for (const auto& q : s.asked) questions.push_back({q.first, q.second});
  j["pending_question"] = s.pending ? json{s.pending->first, s.pending->second} : json(nullptr);
  j["theta"] = to_vector(s.theta().values());
  j["alpha"] = to_vector(prior_of(s).values());
  j["elbo_trace"] = s.elbo_trace;
  auto& posteriors = j["posteriors"] = json::array();
  for (const auto& p : s.posteriors) posteriors.push_back(to_vector(p.values()));
  auto& seeds = j["seeds"];
  seeds["session"] = s.seed;
  auto& rounds = seeds["rounds"] = json::array();
  for (int a = 0; a <= std::min(s.answered(), s.horizon); ++a) {
    const SessionSeeds r = session_seeds(s.seed, a);
    rounds.push_back({{"answered", a},
                      {"fit", r.fit},
                      {"selection", r.selection},
                      {"context", r.context},
                      {"metrics", r.metrics}});
  }
  auto& series = j["metric_history"] = json::array();
  for (const auto& m : s.metrics) {
    series.push_back({{"answered", m.answered}, {"f_var", m.f_var}, {"f_pwi", m.f_pwi}, {"f_rai", m.f_rai}});
  }
  j["created_at"] = s.created_at;
  j["updated_at"] = s.updated_at;
  return j;
}

}  // namespace prefelicit
