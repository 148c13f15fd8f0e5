#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gepa {

enum class PromptOrigin { seed, evolved, imported };
enum class Task { algebra, gpqa };

const char* to_string(PromptOrigin origin);
const char* to_string(Task task);
PromptOrigin prompt_origin_from_string(const std::string& s);
Task task_from_string(const std::string& s);

// A candidate instruction text with lineage metadata.
struct Prompt {
  std::string id;
  std::string text;
  std::optional<std::string> parent_id;
  int iteration_born = 0;
  PromptOrigin origin = PromptOrigin::seed;
};

void validate(const Prompt& prompt);

struct Choice {
  std::string label;  // single character, e.g. "A"
  std::string text;
};

// One evaluation item: a formal theorem to prove or a multiple-choice question.
struct TaskInstance {
  std::string id;
  Task task = Task::algebra;
  std::string statement;
  std::optional<std::string> answer_key;     // gpqa only
  std::vector<Choice> choices;               // gpqa only
  std::optional<std::string> prover_header;  // preamble prepended to the proof file
};

void validate(const TaskInstance& instance);

// Per-task accuracy aggregates. A task with zero scored instances is
// represented as nullopt, never as 0.0.
struct TaskAccuracies {
  std::optional<double> algebra;
  std::optional<double> gpqa;
};

struct ScoredInstance {
  Task task = Task::algebra;
  int score = 0;  // binary outcome
};

// Binary outcomes for one prompt, keyed by instance id.
struct ScoreVector {
  std::string prompt_id;
  std::map<std::string, ScoredInstance> scores;

  TaskAccuracies by_task() const;
  bool covers_both_tasks() const;
  std::vector<std::string> instance_ids() const;
  bool same_coverage(const ScoreVector& other) const;
};

struct OptimizationConfig {
  int iterations = 1;      // optimization steps to run
  int sample_algebra = 1;  // minibatch size drawn from the algebra pool
  int sample_gpqa = 1;     // minibatch size drawn from the gpqa pool
  std::uint64_t rng_seed = 0;
  // Fixed instance set all frontier comparisons are scored on. Empty means
  // "the full training pools", resolved when pools are attached.
  std::vector<std::string> frontier_eval_set;
  // Scalarization is used for tie-breaking and reporting only, never for
  // domination. Weights must be non-negative and sum to 1.
  double weight_algebra = 0.5;
  double weight_gpqa = 0.5;
  std::optional<std::size_t> frontier_capacity;
};

void validate(const OptimizationConfig& config);

double scalarized(const TaskAccuracies& acc, double weight_algebra, double weight_gpqa);

}  // namespace gepa
