#include "gepa/evaluation.hpp"

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "gepa/error.hpp"
#include "gepa/subprocess.hpp"

namespace gepa {

const char* to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::wrong_answer: return "wrong_answer";
    case FailureReason::no_answer_found: return "no_answer_found";
    case FailureReason::proof_rejected: return "proof_rejected";
    case FailureReason::prover_timeout: return "prover_timeout";
    case FailureReason::prover_crash: return "prover_crash";
    case FailureReason::backend_error: return "backend_error";
  }
  return "unknown";
}

FailureReason failure_reason_from_string(const std::string& s) {
  if (s == "wrong_answer") return FailureReason::wrong_answer;
  if (s == "no_answer_found") return FailureReason::no_answer_found;
  if (s == "proof_rejected") return FailureReason::proof_rejected;
  if (s == "prover_timeout") return FailureReason::prover_timeout;
  if (s == "prover_crash") return FailureReason::prover_crash;
  if (s == "backend_error") return FailureReason::backend_error;
  raise(ErrorKind::format, "unknown failure reason '" + s + "'");
}

void validate(const EvaluationOutcome& outcome) {
  if (outcome.score != 0 && outcome.score != 1)
    raise(ErrorKind::invalid_argument, "outcome score must be binary");
  if (outcome.score == 1 && outcome.failure.has_value())
    raise(ErrorKind::invalid_argument, "outcome '" + outcome.instance_id + "' scored 1 but has failure detail");
  if (outcome.score == 0 && !outcome.failure.has_value())
    raise(ErrorKind::invalid_argument, "outcome '" + outcome.instance_id + "' scored 0 without failure detail");
  if (outcome.latency_ms < 0) raise(ErrorKind::invalid_argument, "negative latency");
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool is_marker_separator(char c) {
  return c == ':' || c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_valid_label(char c, const std::vector<std::string>& labels) {
  for (const std::string& l : labels) {
    if (l.size() == 1 && l[0] == c) return true;
  }
  return false;
}

// Label character at `pos` bounded by non-alphanumerics on both sides.
bool bounded_label_at(const std::string& text, std::size_t pos, const std::vector<std::string>& labels) {
  if (pos >= text.size()) return false;
  if (!is_valid_label(text[pos], labels)) return false;
  if (pos > 0 && is_alnum(text[pos - 1])) return false;
  if (pos + 1 < text.size() && is_alnum(text[pos + 1])) return false;
  return true;
}

}  // namespace

std::optional<std::string> extract_final_answer(const std::string& completion,
                                                const std::vector<std::string>& valid_labels) {
  static const std::string marker = "answer";
  std::optional<std::size_t> best;  // position of the matched label

  // Marked occurrences: "answer" (which also terminates "final answer"),
  // then an optional run of colon/whitespace/parentheses, then the label.
  for (std::size_t i = 0; i + marker.size() <= completion.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < marker.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(completion[i + k])) != marker[k]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    std::size_t p = i + marker.size();
    while (p < completion.size() && is_marker_separator(completion[p])) ++p;
    if (bounded_label_at(completion, p, valid_labels)) best = p;
  }
  if (best) return std::string(1, completion[*best]);

  // Fallback: last standalone parenthesized label, e.g. "(C)".
  for (std::size_t i = completion.size(); i >= 3; --i) {
    const std::size_t open = i - 3;
    if (completion[open] == '(' && completion[open + 2] == ')' &&
        is_valid_label(completion[open + 1], valid_labels))
      return std::string(1, completion[open + 1]);
  }
  return std::nullopt;
}

GradedAnswer check_answer(const std::string& completion, const TaskInstance& instance) {
  if (instance.task != Task::gpqa)
    raise(ErrorKind::invalid_argument, "check_answer on non-gpqa instance '" + instance.id + "'");
  std::vector<std::string> labels;
  labels.reserve(instance.choices.size());
  for (const Choice& c : instance.choices) labels.push_back(c.label);

  const std::optional<std::string> extracted = extract_final_answer(completion, labels);
  if (!extracted.has_value())
    return {0, FailureDetail{FailureReason::no_answer_found, "no recognizable answer in completion"}};
  if (*extracted == *instance.answer_key) return {1, std::nullopt};
  return {0, FailureDetail{FailureReason::wrong_answer,
                           "answered '" + *extracted + "', expected '" + *instance.answer_key + "'"}};
}

std::string extract_proof_body(const std::string& completion) {
  const std::size_t open = completion.find("```");
  if (open == std::string::npos) return completion;
  const std::size_t body_start = completion.find('\n', open);
  if (body_start == std::string::npos) return completion;
  const std::size_t close = completion.find("```", body_start + 1);
  if (close == std::string::npos) return completion;
  std::string body = completion.substr(body_start + 1, close - body_start - 1);
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

namespace {

class TempProofFile {
 public:
  TempProofFile(const std::string& content, const std::string& extension) {
    static std::atomic<unsigned> counter{0};
    const unsigned n = counter.fetch_add(1);
    path_ = (std::filesystem::temp_directory_path() /
             ("gepa-proof-" + std::to_string(getpid()) + "-" + std::to_string(n) + extension))
                .string();
    std::ofstream out(path_, std::ios::binary);
    if (!out) raise(ErrorKind::io, "cannot write proof file '" + path_ + "'");
    out << content;
  }

  ~TempProofFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::vector<std::string> expand_command(const std::vector<std::string>& tpl, const std::string& file) {
  std::vector<std::string> argv;
  argv.reserve(tpl.size() + 1);
  bool substituted = false;
  for (std::string arg : tpl) {
    for (std::size_t pos = arg.find("{file}"); pos != std::string::npos; pos = arg.find("{file}", pos)) {
      arg.replace(pos, 6, file);
      pos += file.size();
      substituted = true;
    }
    argv.push_back(std::move(arg));
  }
  if (!substituted) argv.push_back(file);  // no placeholder: pass the path as the last argument
  return argv;
}

}  // namespace

GradedAnswer verify_proof(const std::string& completion, const TaskInstance& instance,
                          const ProverConfig& prover) {
  if (instance.task != Task::algebra)
    raise(ErrorKind::invalid_argument, "verify_proof on non-algebra instance '" + instance.id + "'");
  if (prover.command.empty()) raise(ErrorKind::config, "prover command is empty");

  std::string content;
  if (instance.prover_header.has_value()) content += *instance.prover_header + "\n";
  content += instance.statement + "\n";
  content += extract_proof_body(completion) + "\n";

  TempProofFile file(content, prover.file_extension);
  const CommandResult result =
      run_command(expand_command(prover.command, file.path()), prover.timeout_s, prover.workdir);

  if (result.spawn_failed)
    return {0, FailureDetail{FailureReason::prover_crash, "prover failed to start: " + result.spawn_error}};
  if (result.timed_out)
    return {0, FailureDetail{FailureReason::prover_timeout,
                             "prover exceeded " + std::to_string(prover.timeout_s) + "s deadline"}};
  if (prover.accept_exit_codes.count(result.exit_code) > 0) return {1, std::nullopt};
  return {0, FailureDetail{FailureReason::proof_rejected,
                           "prover exit code " + std::to_string(result.exit_code) +
                               (result.output.empty() ? "" : "; output: " + result.output)}};
}

std::string render_user_text(const TaskInstance& instance) {
  if (instance.task == Task::algebra || instance.choices.empty()) return instance.statement;
  std::string text = instance.statement;
  text += "\n";
  for (const Choice& c : instance.choices) {
    text += "\n(" + c.label + ") " + c.text;
  }
  return text;
}

EvaluationOutcome evaluate(const Prompt& prompt, const TaskInstance& instance,
                           const EvaluationContext& ctx) {
  if (ctx.backend == nullptr) raise(ErrorKind::config, "evaluation context has no backend");
  const auto start = std::chrono::steady_clock::now();

  EvaluationOutcome outcome;
  outcome.instance_id = instance.id;

  std::string completion;
  bool generated = false;
  for (int attempt = 0;; ++attempt) {
    try {
      completion = ctx.backend->generate(prompt.text, render_user_text(instance),
                                         GenerationOptions{ctx.temperature});
      generated = true;
      break;
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= ctx.retry.max_retries) {
        outcome.score = 0;
        outcome.failure = FailureDetail{FailureReason::backend_error, e.what()};
        break;
      }
      const double backoff = ctx.retry.base_backoff_s * static_cast<double>(1 << attempt);
      if (backoff > 0) std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    }
  }

  if (generated) {
    outcome.completion_text = completion;
    const GradedAnswer graded = instance.task == Task::algebra
                                    ? verify_proof(completion, instance, ctx.prover)
                                    : check_answer(completion, instance);
    outcome.score = graded.score;
    outcome.failure = graded.failure;
  }

  if (ctx.backend->deterministic()) {
    outcome.latency_ms = 0;
  } else {
    outcome.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  }
  validate(outcome);
  return outcome;
}

BatchEvaluation evaluate_batch(const Prompt& prompt, const std::vector<TaskInstance>& batch,
                               const EvaluationContext& ctx) {
  if (batch.empty()) raise(ErrorKind::invalid_argument, "evaluate_batch with empty batch");

  std::vector<EvaluationOutcome> outcomes(batch.size());
  const std::size_t width = std::min<std::size_t>(std::max(ctx.parallelism, 1), batch.size());
  std::atomic<std::size_t> next{0};
  // evaluate() encodes task failures in the outcome, but a contract violation
  // (say, a misconfigured prover) still throws; capture it rather than
  // letting it escape a worker thread and terminate the process.
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(width);
  for (std::size_t w = 0; w < width; ++w) {
    workers.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= batch.size()) return;
        try {
          outcomes[i] = evaluate(prompt, batch[i], ctx);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);

  BatchEvaluation result;
  result.scores.prompt_id = prompt.id;
  for (std::size_t i = 0; i < batch.size(); ++i)
    result.scores.scores[batch[i].id] = ScoredInstance{batch[i].task, outcomes[i].score};
  result.outcomes = std::move(outcomes);
  return result;
}

}  // namespace gepa
