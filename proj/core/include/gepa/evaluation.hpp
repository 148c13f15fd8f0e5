#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gepa/backend.hpp"
#include "gepa/types.hpp"

namespace gepa {

enum class FailureReason {
  wrong_answer,
  no_answer_found,
  proof_rejected,
  prover_timeout,
  prover_crash,
  backend_error,
};

const char* to_string(FailureReason reason);
FailureReason failure_reason_from_string(const std::string& s);

struct FailureDetail {
  FailureReason reason = FailureReason::wrong_answer;
  std::string message;
};

// score = 1 implies no failure detail; score = 0 implies one is present.
struct EvaluationOutcome {
  std::string instance_id;
  int score = 0;
  std::string completion_text;
  std::optional<FailureDetail> failure;
  std::int64_t latency_ms = 0;
};

void validate(const EvaluationOutcome& outcome);

struct ProverConfig {
  std::vector<std::string> command;  // argv template; "{file}" expands to the proof file path
  std::string workdir;
  double timeout_s = 60.0;
  std::set<int> accept_exit_codes = {0};
  std::string file_extension = ".lean";
};

struct RetryPolicy {
  int max_retries = 3;
  double base_backoff_s = 1.0;  // doubles per retry: 1s, 2s, 4s
};

struct EvaluationContext {
  Backend* backend = nullptr;
  ProverConfig prover;
  RetryPolicy retry;
  int parallelism = 4;
  double temperature = 0.0;
};

// Last occurrence of a marker phrase ("final answer" / "answer", optionally
// followed by colon/whitespace/parentheses) immediately preceding a valid
// label bounded by non-alphanumerics. Falls back to the last standalone
// parenthesized label like "(C)". Total: never throws on arbitrary text.
std::optional<std::string> extract_final_answer(const std::string& completion,
                                                const std::vector<std::string>& valid_labels);

struct GradedAnswer {
  int score = 0;
  std::optional<FailureDetail> failure;
};

GradedAnswer check_answer(const std::string& completion, const TaskInstance& instance);

// Extracts the proof body (first fenced code block, else the whole
// completion), writes prover_header + statement + body to a temp file and
// runs the prover command on it under the configured deadline.
GradedAnswer verify_proof(const std::string& completion, const TaskInstance& instance,
                          const ProverConfig& prover);

// First fenced code block's contents, or the input unchanged when no
// complete fence pair exists.
std::string extract_proof_body(const std::string& completion);

// The user message sent for one instance: the statement, plus rendered
// choices for multiple-choice items.
std::string render_user_text(const TaskInstance& instance);

// Never throws for task-level failures; every failure mode is encoded in the
// outcome (backend transport failures surface as backend_error after the
// retry budget is exhausted).
EvaluationOutcome evaluate(const Prompt& prompt, const TaskInstance& instance,
                           const EvaluationContext& ctx);

struct BatchEvaluation {
  ScoreVector scores;
  std::vector<EvaluationOutcome> outcomes;  // in batch order
};

// Evaluates instances with bounded parallelism; aggregation is keyed by
// instance id and therefore order-independent.
BatchEvaluation evaluate_batch(const Prompt& prompt, const std::vector<TaskInstance>& batch,
                               const EvaluationContext& ctx);

}  // namespace gepa
