#pragma once

#include <optional>
#include <vector>

#include "gepa/rng.hpp"
#include "gepa/types.hpp"

namespace gepa {

struct FrontierMember {
  Prompt prompt;
  ScoreVector scores;
};

// Pareto set of non-dominated prompts over (algebra accuracy, gpqa accuracy).
// Members are kept sorted by prompt id so iteration and sampling order are
// canonical. All member score vectors cover the identical instance-id set.
class Frontier {
 public:
  Frontier() = default;
  Frontier(std::optional<std::size_t> capacity, double weight_algebra, double weight_gpqa)
      : capacity_(capacity), weight_algebra_(weight_algebra), weight_gpqa_(weight_gpqa) {}

  const std::vector<FrontierMember>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  std::optional<std::size_t> capacity() const { return capacity_; }
  double weight_algebra() const { return weight_algebra_; }
  double weight_gpqa() const { return weight_gpqa_; }

  const FrontierMember* find(const std::string& prompt_id) const;

  friend Frontier update_frontier(const Frontier& f, FrontierMember candidate);

 private:
  std::vector<FrontierMember> members_;
  std::optional<std::size_t> capacity_;
  double weight_algebra_ = 0.5;
  double weight_gpqa_ = 0.5;
};

// Strict Pareto domination on the two task-level accuracies: a >= b on both
// components and strictly greater on at least one. Throws coverage_mismatch
// when the vectors do not score the same instance set, unscored_task when a
// task aggregate is undefined on either side.
bool dominates(const ScoreVector& a, const ScoreVector& b);

// Returns a new frontier: candidate joins iff no member dominates it, and
// every member it dominates is dropped. With a capacity bound, the member
// ranking last under scalarization is evicted.
Frontier update_frontier(const Frontier& f, FrontierMember candidate);

// Uniformly random frontier member when the frontier is non-empty, otherwise
// a uniformly random population member.
const Prompt& sample_candidate(const Frontier& f, const std::vector<Prompt>& population, Rng& rng);

// Draws `algebra_count` + `gpqa_count` distinct instances without
// replacement, algebra pool first. Deterministic given the rng state.
std::vector<TaskInstance> sample_batch(const std::vector<TaskInstance>& algebra_pool,
                                       const std::vector<TaskInstance>& gpqa_pool,
                                       int algebra_count, int gpqa_count, Rng& rng);

// Highest scalarized member; ties broken by lower iteration_born, then id.
const FrontierMember& best_member(const Frontier& f);
double best_scalarized(const Frontier& f);

}  // namespace gepa
