#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gepa/dataset.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/evolution.hpp"
#include "gepa/pareto.hpp"
#include "gepa/rng.hpp"
#include "gepa/types.hpp"

namespace gepa {

// One completed iteration's full trace.
struct StepRecord {
  int iteration = 0;
  std::string sampled_prompt_id;
  std::vector<std::string> batch_instance_ids;  // in sampled order
  ScoreVector minibatch_scores;
  std::vector<std::string> error_instance_ids;  // exactly the zero-score instances
  CritiqueRecord critique;
  Prompt child;
  ScoreVector child_eval_scores;
  std::vector<std::pair<std::string, TaskAccuracies>> frontier_after;
  std::string rng_state_digest;
};

// A failed iteration attempt; optimizer state is unchanged and a resumed run
// retries the same iteration.
struct ErrorRecord {
  int iteration = 0;
  std::string message;
  std::string rng_state_digest;
};

using RunRecord = std::variant<StepRecord, ErrorRecord>;

struct RunLogHeader {
  int format_version = 1;
  OptimizationConfig config;  // with the frontier eval set resolved
  std::string pool_digest;
  Prompt seed_prompt;
  ScoreVector seed_eval_scores;
};

struct RunState {
  OptimizationConfig config;
  std::vector<Prompt> population;  // sorted by id
  Frontier frontier;
  int completed_iterations = 0;
  std::vector<RunRecord> records;
  Rng rng{0};
};

// In-run memo of outcomes keyed by (prompt id, instance id); avoids
// re-generating completions when minibatch and frontier-eval instances
// overlap for the same prompt.
class OutcomeCache {
 public:
  const EvaluationOutcome* get(const std::string& prompt_id, const std::string& instance_id) const;
  void put(const std::string& prompt_id, const EvaluationOutcome& outcome);
  std::size_t size() const { return cache_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, EvaluationOutcome> cache_;
};

struct OptimizerContext {
  Pools pools;
  EvaluationContext eval;         // backend, prover, retry, parallelism
  PromptTemplates templates = PromptTemplates::defaults();
  CritiqueOptions critique_options;
  GenerationOptions evolve_options{0.8};  // critic/evolver temperature
  OutcomeCache cache;
  std::function<void(const std::string&)> progress;  // optional status sink
};

// Empty frontier_eval_set means the full training pools.
std::vector<std::string> resolve_eval_set(const OptimizationConfig& config, const Pools& pools);
void validate_against_pools(const OptimizationConfig& config, const Pools& pools);

// Scores the seed on the frontier eval set and seats it as the first
// frontier member, making the first iteration's frontier update well-defined.
RunState init_run_state(const OptimizationConfig& config, const Prompt& seed, OptimizerContext& ctx);

struct StepResult {
  RunState state;
  bool aborted = false;
};

// One iteration: sample candidate and minibatch, evaluate, critique, evolve,
// score the child on the frontier eval set, update the frontier, then set
// population = frontier + child. Backend failures abort the iteration,
// leaving state unchanged apart from an appended error record.
StepResult step(RunState state, OptimizerContext& ctx);

struct RunResult {
  Frontier frontier;
  std::string log_path;
  bool aborted = false;
};

// Runs up to config.iterations steps with a persistent line-delimited log at
// out_dir/run_log.jsonl; writes the seed as gepa_optimized_baseline.txt and
// the best frontier member as gepa_optimized_final.txt.
RunResult run(const OptimizationConfig& config, const Prompt& seed, OptimizerContext& ctx,
              const std::string& out_dir);

// Continues an interrupted run from the last intact record. Refuses on any
// config or pool digest mismatch, printing a field-by-field diff. An empty
// or missing log behaves as a fresh run.
RunResult resume(const std::string& log_path, const OptimizationConfig& config, const Prompt& seed,
                 OptimizerContext& ctx, const std::string& out_dir);

// --- run log access (also used by the analysis module) ---

struct ParsedRunLog {
  std::optional<RunLogHeader> header;  // absent for an empty log
  std::vector<RunRecord> records;
  bool torn_final_line = false;
  std::uint64_t intact_bytes = 0;
};

// Parses a run log. A truncated final line is dropped; a malformed line
// anywhere else is a format error with its line number.
ParsedRunLog parse_run_log(const std::string& path);

std::string header_to_line(const RunLogHeader& header);
std::string record_to_line(const RunRecord& record);

// Rebuilds RunState by replaying records from the seed; re-executes the rng
// draws and cross-checks sampled ids, digests and frontier snapshots.
RunState replay(const ParsedRunLog& log, const Pools& pools);

}  // namespace gepa
