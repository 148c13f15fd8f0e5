#include "gepa/types.hpp"

#include <algorithm>
#include <cmath>

#include "gepa/error.hpp"

namespace gepa {

const char* to_string(PromptOrigin origin) {
  switch (origin) {
    case PromptOrigin::seed: return "seed";
    case PromptOrigin::evolved: return "evolved";
    case PromptOrigin::imported: return "imported";
  }
  return "unknown";
}

const char* to_string(Task task) { return task == Task::algebra ? "algebra" : "gpqa"; }

PromptOrigin prompt_origin_from_string(const std::string& s) {
  if (s == "seed") return PromptOrigin::seed;
  if (s == "evolved") return PromptOrigin::evolved;
  if (s == "imported") return PromptOrigin::imported;
  raise(ErrorKind::format, "unknown prompt origin '" + s + "'");
}

Task task_from_string(const std::string& s) {
  if (s == "algebra") return Task::algebra;
  if (s == "gpqa") return Task::gpqa;
  raise(ErrorKind::format, "unknown task '" + s + "'");
}

void validate(const Prompt& prompt) {
  if (prompt.id.empty()) raise(ErrorKind::invalid_argument, "prompt id is empty");
  if (prompt.text.empty()) raise(ErrorKind::invalid_argument, "prompt '" + prompt.id + "' has empty text");
  const bool root = prompt.origin == PromptOrigin::seed || prompt.origin == PromptOrigin::imported;
  if (root && prompt.parent_id.has_value())
    raise(ErrorKind::invalid_argument, "prompt '" + prompt.id + "' has origin " +
                                           to_string(prompt.origin) + " but carries a parent_id");
  if (!root && !prompt.parent_id.has_value())
    raise(ErrorKind::invalid_argument, "evolved prompt '" + prompt.id + "' is missing parent_id");
  if (prompt.iteration_born < 0)
    raise(ErrorKind::invalid_argument, "prompt '" + prompt.id + "' has negative iteration_born");
  if ((prompt.origin == PromptOrigin::seed) != (prompt.iteration_born == 0))
    raise(ErrorKind::invalid_argument,
          "prompt '" + prompt.id + "': iteration_born must be 0 exactly for seed prompts");
}

void validate(const TaskInstance& instance) {
  if (instance.id.empty()) raise(ErrorKind::invalid_argument, "instance id is empty");
  if (instance.statement.empty())
    raise(ErrorKind::invalid_argument, "instance '" + instance.id + "' has empty statement");
  if (instance.task == Task::gpqa) {
    if (instance.choices.empty())
      raise(ErrorKind::invalid_argument, "gpqa instance '" + instance.id + "' has no choices");
    if (!instance.answer_key.has_value())
      raise(ErrorKind::invalid_argument, "gpqa instance '" + instance.id + "' has no answer_key");
    for (const Choice& c : instance.choices) {
      if (c.label.size() != 1)
        raise(ErrorKind::invalid_argument,
              "instance '" + instance.id + "': choice label '" + c.label + "' is not a single character");
    }
    const bool key_known = std::any_of(instance.choices.begin(), instance.choices.end(),
                                       [&](const Choice& c) { return c.label == *instance.answer_key; });
    if (!key_known)
      raise(ErrorKind::invalid_argument, "gpqa instance '" + instance.id + "': answer_key '" +
                                             *instance.answer_key + "' is not among the choice labels");
  } else {
    if (instance.answer_key.has_value() || !instance.choices.empty())
      raise(ErrorKind::invalid_argument,
            "algebra instance '" + instance.id + "' must not carry answer_key or choices");
  }
}

TaskAccuracies ScoreVector::by_task() const {
  int algebra_n = 0, algebra_sum = 0, gpqa_n = 0, gpqa_sum = 0;
  for (const auto& [id, entry] : scores) {
    if (entry.task == Task::algebra) {
      ++algebra_n;
      algebra_sum += entry.score;
    } else {
      ++gpqa_n;
      gpqa_sum += entry.score;
    }
  }
  TaskAccuracies acc;
  if (algebra_n > 0) acc.algebra = static_cast<double>(algebra_sum) / algebra_n;
  if (gpqa_n > 0) acc.gpqa = static_cast<double>(gpqa_sum) / gpqa_n;
  return acc;
}

bool ScoreVector::covers_both_tasks() const {
  const TaskAccuracies acc = by_task();
  return acc.algebra.has_value() && acc.gpqa.has_value();
}

std::vector<std::string> ScoreVector::instance_ids() const {
  std::vector<std::string> ids;
  ids.reserve(scores.size());
  for (const auto& [id, entry] : scores) ids.push_back(id);
  return ids;
}

bool ScoreVector::same_coverage(const ScoreVector& other) const {
  if (scores.size() != other.scores.size()) return false;
  auto it = other.scores.begin();
  for (const auto& [id, entry] : scores) {
    if (it->first != id) return false;
    ++it;
  }
  return true;
}

void validate(const OptimizationConfig& config) {
  if (config.iterations < 1) raise(ErrorKind::config, "optimization.iterations must be >= 1");
  if (config.sample_algebra < 1) raise(ErrorKind::config, "optimization.sample_algebra must be >= 1");
  if (config.sample_gpqa < 1) raise(ErrorKind::config, "optimization.sample_gpqa must be >= 1");
  if (config.weight_algebra < 0 || config.weight_gpqa < 0)
    raise(ErrorKind::config, "scalarization weights must be non-negative");
  if (std::abs(config.weight_algebra + config.weight_gpqa - 1.0) > 1e-9)
    raise(ErrorKind::config, "scalarization weights must sum to 1");
  if (config.frontier_capacity.has_value() && *config.frontier_capacity < 1)
    raise(ErrorKind::config, "frontier_capacity must be >= 1 when set");
}

double scalarized(const TaskAccuracies& acc, double weight_algebra, double weight_gpqa) {
  if (!acc.algebra.has_value() || !acc.gpqa.has_value())
    raise(ErrorKind::unscored_task, "scalarization needs both task accuracies");
  return weight_algebra * *acc.algebra + weight_gpqa * *acc.gpqa;
}

}  // namespace gepa
