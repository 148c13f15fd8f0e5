#include "gepa/evolution.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "gepa/error.hpp"

namespace gepa {

namespace {

std::string excerpt(const std::string& text, std::size_t cap) {
  if (text.size() <= cap) return text;
  return text.substr(0, cap) + "…";
}

const TaskInstance* find_instance(const std::vector<TaskInstance>& batch, const std::string& id) {
  for (const TaskInstance& inst : batch) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::string format_entry(const EvaluationOutcome& outcome, const std::vector<TaskInstance>& batch,
                         const CritiqueOptions& options) {
  const TaskInstance* inst = find_instance(batch, outcome.instance_id);
  std::string entry = "- [" + std::string(inst != nullptr ? to_string(inst->task) : "unknown") +
                      " " + outcome.instance_id;
  if (outcome.failure.has_value()) entry += " " + std::string(to_string(outcome.failure->reason));
  entry += "]";
  if (inst != nullptr) entry += " statement: " + excerpt(inst->statement, options.statement_excerpt);
  if (outcome.failure.has_value() && !outcome.failure->message.empty())
    entry += " | detail: " + excerpt(outcome.failure->message, options.completion_excerpt);
  if (!outcome.completion_text.empty())
    entry += " | completion: " + excerpt(outcome.completion_text, options.completion_excerpt);
  return entry + "\n";
}

std::string join_under_budget(const std::vector<std::string>& entries, std::size_t budget) {
  std::string digest;
  for (const std::string& e : entries) {
    if (digest.size() + e.size() > budget) break;
    digest += e;
  }
  if (!digest.empty() && digest.back() == '\n') digest.pop_back();
  return digest;
}

// The digest budget caps the whole composed user message, so the digest
// itself gets whatever the template and prompt text leave over.
CritiqueOptions adjusted_for_overhead(const CritiqueOptions& options, const std::string& user_tpl,
                                      const std::string& digest_key, const Prompt& prompt) {
  const std::string scaffold = substitute(substitute(user_tpl, "prompt", prompt.text), digest_key, "");
  CritiqueOptions adjusted = options;
  adjusted.digest_budget = scaffold.size() < options.digest_budget
                               ? options.digest_budget - scaffold.size()
                               : 0;
  return adjusted;
}

CritiqueRecord run_critic(Backend& backend, const std::string& system_text, const std::string& user_tpl,
                          const std::string& digest_key, const Prompt& prompt,
                          const std::string& digest, int iteration, const GenerationOptions& gen) {
  std::string user = substitute(user_tpl, "prompt", prompt.text);
  user = substitute(user, digest_key, digest);
  const std::string reply = backend.generate(system_text, user, gen);
  if (reply.empty())
    raise(ErrorKind::evolution_failed, "critic returned an empty reply for prompt '" + prompt.id + "'");
  CritiqueRecord record;
  record.prompt_id = prompt.id;
  record.error_log_digest = digest;
  record.critique_text = reply;
  record.iteration = iteration;
  return record;
}

}  // namespace

std::string build_error_digest(const std::vector<EvaluationOutcome>& failures,
                               const std::vector<TaskInstance>& batch, const CritiqueOptions& options) {
  std::vector<std::string> entries;
  entries.reserve(failures.size());
  // Most recent first: failures arrive in batch order, so walk backwards.
  for (auto it = failures.rbegin(); it != failures.rend(); ++it)
    entries.push_back(format_entry(*it, batch, options));
  return join_under_budget(entries, options.digest_budget);
}

std::string build_success_digest(const std::vector<EvaluationOutcome>& successes,
                                 const std::vector<TaskInstance>& batch, const CritiqueOptions& options) {
  std::vector<EvaluationOutcome> ordered = successes;
  std::sort(ordered.begin(), ordered.end(), [](const EvaluationOutcome& a, const EvaluationOutcome& b) {
    if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
    return a.instance_id < b.instance_id;
  });
  std::vector<std::string> entries;
  entries.reserve(ordered.size());
  for (const EvaluationOutcome& o : ordered) entries.push_back(format_entry(o, batch, options));
  return join_under_budget(entries, options.digest_budget);
}

CritiqueRecord critique(Backend& backend, const PromptTemplates& templates,
                        const CritiqueOptions& options, const Prompt& prompt,
                        const std::vector<EvaluationOutcome>& failures,
                        const std::vector<TaskInstance>& batch, int iteration,
                        const GenerationOptions& gen) {
  if (failures.empty())
    raise(ErrorKind::invalid_argument, "critique requires at least one failure; use critique_no_errors");
  const std::string digest = build_error_digest(
      failures, batch, adjusted_for_overhead(options, templates.critic_user, "errors", prompt));
  return run_critic(backend, templates.critic_system, templates.critic_user, "errors", prompt, digest,
                    iteration, gen);
}

CritiqueRecord critique_no_errors(Backend& backend, const PromptTemplates& templates,
                                  const CritiqueOptions& options, const Prompt& prompt,
                                  const std::vector<EvaluationOutcome>& successes,
                                  const std::vector<TaskInstance>& batch, int iteration,
                                  const GenerationOptions& gen) {
  const std::string digest = build_success_digest(
      successes, batch,
      adjusted_for_overhead(options, templates.critic_no_error_user, "successes", prompt));
  return run_critic(backend, templates.critic_system, templates.critic_no_error_user, "successes",
                    prompt, digest, iteration, gen);
}

std::string strip_code_fences(const std::string& reply) {
  // Trim whitespace, then peel one surrounding fence pair if present.
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  };
  std::string text = trim(reply);
  if (text.rfind("```", 0) == 0 && text.size() >= 6 && text.compare(text.size() - 3, 3, "```") == 0) {
    std::size_t body_start = text.find('\n');
    if (body_start == std::string::npos || body_start > text.size() - 3) return trim(text.substr(3, text.size() - 6));
    return trim(text.substr(body_start + 1, text.size() - 3 - (body_start + 1)));
  }
  return text;
}

Prompt evolve(Backend& backend, const PromptTemplates& templates, const Prompt& parent,
              const CritiqueRecord& critique, int iteration, const GenerationOptions& gen) {
  if (critique.prompt_id != parent.id)
    raise(ErrorKind::invalid_argument, "critique for '" + critique.prompt_id +
                                           "' does not belong to prompt '" + parent.id + "'");
  std::string user = substitute(templates.evolve_user, "prompt", parent.text);
  user = substitute(user, "critique", critique.critique_text);
  const std::string reply = backend.generate(templates.evolve_system, user, gen);
  const std::string text = strip_code_fences(reply);
  if (text.empty())
    raise(ErrorKind::evolution_failed,
          "evolver returned an empty prompt for parent '" + parent.id + "'");

  Prompt child;
  char id[32];
  std::snprintf(id, sizeof(id), "evolved-%04d", iteration);
  child.id = id;
  child.text = text;
  child.parent_id = parent.id;
  child.iteration_born = iteration;
  child.origin = PromptOrigin::evolved;
  validate(child);
  return child;
}

}  // namespace gepa
