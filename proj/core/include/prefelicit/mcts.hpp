#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefelicit/context.hpp"
#include "prefelicit/model.hpp"
#include "prefelicit/random.hpp"

namespace prefelicit {

struct PolicyConfig {
  int budget = 300;
  double exploration = 1.0 / std::sqrt(2.0);
  /// Total number of interaction rounds T.
  int horizon = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct QuestionTreeNode {
  /// Empty for the root.
  std::optional<Question> question;
  int parent = -1;
  int depth = 0;
  int visits = 0;
  double total_reward = 0.0;
  std::vector<int> children;
  std::vector<Question> untried;

  double mean_reward() const { return visits > 0 ? total_reward / visits : 0.0; }
};

/// Arena-backed UCT tree over unordered questions. Node 0 is the root.
class QuestionTree {
 public:
  /// root_candidates: the unasked pairs at the root. max_depth: the number
  /// of questions still to be asked, T - t + 1.
  QuestionTree(std::vector<Question> root_candidates, int max_depth);

  const QuestionTreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int max_depth() const { return max_depth_; }

  bool is_terminal(int id) const;
  bool is_expandable(int id) const { return !is_terminal(id) && !node(id).untried.empty(); }

  /// Moves one uniformly chosen untried question into a new child.
  int expand(int id, Rng& rng);

  /// Questions from the root down to id (root excluded).
  std::vector<Question> path(int id) const;

  void backpropagate(int id, double delta);

  /// Depth-limited dump {question, N, V, depth, children}.
  nlohmann::json to_json(int depth_limit = 3) const;

 private:
  nlohmann::json node_json(int id, int depth_limit) const;

  std::vector<QuestionTreeNode> nodes_;
  std::vector<Question> root_candidates_;
  int max_depth_;
};

/// UCB1 score V/N + 2c sqrt(2 ln N_root / N); +inf for an unvisited child
/// when c > 0.
double ucb_score(const QuestionTreeNode& child, int root_visits, double c);

/// Child of `id` maximising ucb_score; ties go to the earliest child.
int best_child(const QuestionTree& tree, int id, double c);

/// Two-branch expected variance reduction of asking `pair` at the root.
double question_value(const PosteriorContext& ctx, Question pair);

/// Completes the node's path to the tree's depth bound with random unasked
/// questions, answers every question from the root predictive, refits and
/// returns the normalised variance reduction clamped to [0, 1].
double simulate(const QuestionTree& tree, int id, const PosteriorContext& ctx, Rng& rng);

struct SelectionResult {
  Question question;
  QuestionTree tree;
};

/// UCT search from the context's root. `round` is the 1-based index t of the
/// question about to be asked. Throws std::runtime_error when no candidate
/// pairs remain.
SelectionResult select_question(const PosteriorContext& ctx, const PolicyConfig& config, int round);

}  // namespace prefelicit
