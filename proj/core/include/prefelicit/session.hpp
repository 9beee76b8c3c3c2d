#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefelicit/context.hpp"
#include "prefelicit/inference.hpp"
#include "prefelicit/mcts.hpp"
#include "prefelicit/model.hpp"

namespace prefelicit {

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The request is well-formed but clashes with the session's current state.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SessionStatus { awaiting_answer, fitting, selecting, done, failed };

std::string_view to_string(SessionStatus s);

struct SessionConfig {
  /// Posterior fit after every answer.
  OptimizerConfig fit;
  Estimator estimator = Estimator::reparam;
  int mcts_budget = 300;
  double exploration = 1.0 / 1.4142135623730951;
  /// Rollout refits and predictive draws inside question selection.
  InferenceSettings selection;
  /// Posterior draws behind the PWI/RAI matrices and metrics of the view.
  int metric_samples = 4000;
  /// Overrides the seed derived from (server seed, session id).
  std::optional<std::uint64_t> seed;

  /// Unknown keys are rejected; missing ones keep the defaults above.
  static SessionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct MetricPoint {
  int answered = 0;
  double f_var = 0.0;
  double f_pwi = 0.0;
  double f_rai = 0.0;
};

/// Immutable snapshot of one session. Writers build a new snapshot and swap
/// it in; readers never wait for a fit.
struct SessionState {
  std::string id;
  std::shared_ptr<const PerformanceTable> table;
  SessionConfig config;
  int horizon = 1;
  std::uint64_t seed = 0;
  PreferenceSet history;
  std::vector<Question> asked;
  /// Posterior after 0, 1, ... answers; back() is the current one.
  std::vector<DirichletParams> posteriors;
  std::vector<double> elbo_trace;  // of the latest fit
  std::optional<Question> pending;
  SessionStatus status = SessionStatus::selecting;
  std::vector<MetricPoint> metrics;
  Eigen::MatrixXd pwi;
  Eigen::MatrixXd rai;
  std::map<std::string, PreferenceStatement> idempotency;
  std::optional<std::string> error;
  std::string created_at;
  std::string updated_at;

  int answered() const { return static_cast<int>(history.size()); }
  /// Current 1-based round t; stays at the horizon once done.
  int round() const { return std::min(answered() + 1, horizon); }
  const DirichletParams& theta() const { return posteriors.back(); }
};

struct SessionSeeds {
  std::uint64_t fit = 0;
  std::uint64_t selection = 0;
  std::uint64_t context = 0;
  std::uint64_t metrics = 0;
};

/// Streams used after `answered` answers of a session seeded with `seed`.
SessionSeeds session_seeds(std::uint64_t seed, int answered);

struct SessionManagerOptions {
  /// Empty keeps sessions in memory only.
  std::filesystem::path data_dir;
  std::uint64_t server_seed = 0;
  /// Background workers for fits and question selection; 0 runs them inline
  /// inside the calling request.
  int workers = 1;
};

/// Hosts the interactive loop: create (posterior = prior, first question by
/// MCTS), answer (refit, then select or finish), and read-only views.
///
/// Each session is persisted as an append-only event log
/// (<data_dir>/<id>/events.jsonl) plus a snapshot.json rewritten after every
/// change. Fitted posteriors are logged, so replaying the log restores the
/// exact state; interrupted fits or selections are rerun from their seeds.
class SessionManager {
 public:
  explicit SessionManager(SessionManagerOptions options);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Returns the new session id. Throws ValidationError on bad input.
  std::string create(const PerformanceTable& table, int horizon, const SessionConfig& config);

  /// Alternatives are given by index. A repeated idempotency key with the same
  /// answer is a no-op; with a different answer it is a conflict.
  std::shared_ptr<const SessionState> submit_answer(const std::string& id, int preferred,
                                                    int other,
                                                    const std::string& idempotency_key = {});

  std::shared_ptr<const SessionState> state(const std::string& id) const;
  std::vector<std::string> ids() const;

  /// Blocks until the session is neither fitting nor selecting.
  std::shared_ptr<const SessionState> wait_settled(const std::string& id) const;

  const SessionManagerOptions& options() const { return options_; }

 private:
  struct Entry;
  class Workers;

  std::shared_ptr<Entry> entry(const std::string& id) const;
  void load_existing();
  void schedule(const std::shared_ptr<Entry>& e);
  void advance(const std::shared_ptr<Entry>& e);
  /// Stamps, applies, persists and publishes one event. Caller holds the
  /// entry's write lock.
  void commit(Entry& e, nlohmann::json event);
  std::string new_id();

  SessionManagerOptions options_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex id_mu_;
  std::uint64_t id_counter_ = 0;
  std::unique_ptr<Workers> workers_;
};

/// get_state payload: question with performance rows, progress, posterior
/// summary, PWI/RAI matrices and the metric history.
nlohmann::json session_view(const SessionState& s);

/// Full transcript: statements, questions, per-round posteriors, config and
/// seeds.
nlohmann::json session_export(const SessionState& s);

}  // namespace prefelicit
