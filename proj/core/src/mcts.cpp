#include "prefelicit/mcts.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace prefelicit {

void PolicyConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("policy: budget must be at least 1");
  if (!(exploration >= 0.0)) throw std::invalid_argument("policy: exploration must be non-negative");
  if (horizon < 1) throw std::invalid_argument("policy: horizon must be at least 1");
}

QuestionTree::QuestionTree(std::vector<Question> root_candidates, int max_depth)
    : root_candidates_(std::move(root_candidates)), max_depth_(max_depth) {
  QuestionTreeNode root;
  root.untried = root_candidates_;
  nodes_.push_back(std::move(root));
}

bool QuestionTree::is_terminal(int id) const { return node(id).depth >= max_depth_; }

int QuestionTree::expand(int id, Rng& rng) {
  auto& parent = nodes_.at(static_cast<std::size_t>(id));
  if (is_terminal(id) || parent.untried.empty()) throw std::logic_error("expand: node is not expandable");
  std::uniform_int_distribution<std::size_t> pick(0, parent.untried.size() - 1);
  const std::size_t k = pick(rng);
  const Question q = parent.untried[k];
  parent.untried.erase(parent.untried.begin() + static_cast<std::ptrdiff_t>(k));

  QuestionTreeNode child;
  child.question = q;
  child.parent = id;
  child.depth = parent.depth + 1;
  const int child_id = size();
  parent.children.push_back(child_id);
  nodes_.push_back(std::move(child));

  if (!is_terminal(child_id)) {
    const auto asked = path(child_id);
    auto& untried = nodes_.back().untried;
    for (const Question& c : root_candidates_) {
      if (std::find(asked.begin(), asked.end(), c) == asked.end()) untried.push_back(c);
    }
  }
  return child_id;
}

std::vector<Question> QuestionTree::path(int id) const {
  std::vector<Question> out;
  for (int cur = id; cur > 0; cur = node(cur).parent) out.push_back(*node(cur).question);
  std::reverse(out.begin(), out.end());
  return out;
}

void QuestionTree::backpropagate(int id, double delta) {
  for (int cur = id; cur >= 0; cur = node(cur).parent) {
    auto& n = nodes_[static_cast<std::size_t>(cur)];
    n.visits += 1;
    n.total_reward += delta;
  }
}

nlohmann::json QuestionTree::node_json(int id, int depth_limit) const {
  const auto& n = node(id);
  nlohmann::json j;
  if (n.question) {
    j["question"] = {n.question->first, n.question->second};
  } else {
    j["question"] = nullptr;
  }
  j["N"] = n.visits;
  j["V"] = n.total_reward;
  j["depth"] = n.depth;
  j["children"] = nlohmann::json::array();
  if (n.depth < depth_limit) {
    for (int c : n.children) j["children"].push_back(node_json(c, depth_limit));
  }
  return j;
}

nlohmann::json QuestionTree::to_json(int depth_limit) const { return node_json(0, depth_limit); }

double ucb_score(const QuestionTreeNode& child, int root_visits, double c) {
  if (child.visits == 0) {
    return c > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const double mean = child.total_reward / child.visits;
  if (c == 0.0) return mean;
  const double log_root = std::log(static_cast<double>(std::max(root_visits, 1)));
  return mean + 2.0 * c * std::sqrt(2.0 * log_root / child.visits);
}

int best_child(const QuestionTree& tree, int id, double c) {
  const auto& n = tree.node(id);
  if (n.children.empty()) throw std::logic_error("best_child: node has no children");
  const int root_visits = tree.node(0).visits;
  int best = n.children.front();
  double best_score = ucb_score(tree.node(best), root_visits, c);
  for (std::size_t k = 1; k < n.children.size(); ++k) {
    const double s = ucb_score(tree.node(n.children[k]), root_visits, c);
    if (s > best_score) {
      best_score = s;
      best = n.children[k];
    }
  }
  return best;
}

double question_value(const PosteriorContext& ctx, Question pair) {
  const double v0 = ctx.root_variance();
  const PreferenceStatement ij{pair.first, pair.second};
  const PreferenceSet& q = ctx.preferences();
  const double v_ij = posterior_variance(ctx.refit(q.with(ij)));
  const double v_ji = posterior_variance(ctx.refit(q.with(ij.flipped())));
  return ctx.predictive(pair.first, pair.second) * (v0 - v_ij) +
         ctx.predictive(pair.second, pair.first) * (v0 - v_ji);
}

double simulate(const QuestionTree& tree, int id, const PosteriorContext& ctx, Rng& rng) {
  std::vector<Question> questions = tree.path(id);
  std::vector<Question> pool = candidate_questions(ctx.table().size(), ctx.preferences(), questions);
  while (static_cast<int>(questions.size()) < tree.max_depth() && !pool.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t k = pick(rng);
    questions.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  if (questions.empty()) return 0.0;

  PreferenceSet q = ctx.preferences();
  for (const Question& pair : questions) {
    const bool first_wins = uniform01(rng) < ctx.predictive(pair.first, pair.second);
    q.add(first_wins ? PreferenceStatement{pair.first, pair.second}
                     : PreferenceStatement{pair.second, pair.first});
  }
  const double v0 = ctx.root_variance();
  const double v1 = posterior_variance(ctx.refit(q));
  return std::clamp((v0 - v1) / v0, 0.0, 1.0);
}

SelectionResult select_question(const PosteriorContext& ctx, const PolicyConfig& config, int round) {
  config.validate();
  if (round < 1 || round > config.horizon) throw std::invalid_argument("select_question: round outside [1, horizon]");
  std::vector<Question> candidates = ctx.candidates();
  if (candidates.empty()) throw std::runtime_error("select_question: every pair has already been asked");

  const int max_depth =
      std::min(config.horizon - round + 1, static_cast<int>(candidates.size()));
  QuestionTree tree(candidates, max_depth);
  if (candidates.size() == 1) {
    return {candidates.front(), std::move(tree)};
  }

  Rng rng(derive_seed(config.rng_seed, {hash_tag("mcts"), static_cast<std::uint64_t>(round)}));
  for (int iter = 0; iter < config.budget; ++iter) {
    int id = 0;
    while (!tree.is_terminal(id) && !tree.is_expandable(id)) {
      id = best_child(tree, id, config.exploration);
    }
    if (tree.is_expandable(id)) id = tree.expand(id, rng);
    const double delta = simulate(tree, id, ctx, rng);
    tree.backpropagate(id, delta);
  }
  const int chosen = best_child(tree, 0, 0.0);
  return {*tree.node(chosen).question, std::move(tree)};
}

}  // namespace prefelicit
