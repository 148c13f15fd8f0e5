#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gepa/backend.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/templates.hpp"
#include "gepa/types.hpp"

namespace gepa {

struct CritiqueRecord {
  std::string prompt_id;
  std::string error_log_digest;  // the failure summary text fed to the critic
  std::string critique_text;
  int iteration = 0;
};

struct CritiqueOptions {
  std::size_t digest_budget = 8192;       // byte cap on the composed critic user message
  std::size_t statement_excerpt = 512;    // per-entry statement cap
  std::size_t completion_excerpt = 512;   // per-entry completion cap
};

// Failure summaries, most recent first (last batch position first); entries
// are appended until the byte budget would be exceeded.
std::string build_error_digest(const std::vector<EvaluationOutcome>& failures,
                               const std::vector<TaskInstance>& batch, const CritiqueOptions& options);

// Success summaries for the no-error critique variant, ordered by
// (latency, instance id) ascending.
std::string build_success_digest(const std::vector<EvaluationOutcome>& successes,
                                 const std::vector<TaskInstance>& batch, const CritiqueOptions& options);

// Asks the critic to diagnose the prompt from its failures.
CritiqueRecord critique(Backend& backend, const PromptTemplates& templates,
                        const CritiqueOptions& options, const Prompt& prompt,
                        const std::vector<EvaluationOutcome>& failures,
                        const std::vector<TaskInstance>& batch, int iteration,
                        const GenerationOptions& gen);

// Zero-error variant: asks for a generality critique built from the
// lowest-latency correct outcomes.
CritiqueRecord critique_no_errors(Backend& backend, const PromptTemplates& templates,
                                  const CritiqueOptions& options, const Prompt& prompt,
                                  const std::vector<EvaluationOutcome>& successes,
                                  const std::vector<TaskInstance>& batch, int iteration,
                                  const GenerationOptions& gen);

// Rewrites the prompt from the critique. The reply is stripped of
// surrounding code fences; an empty result raises evolution_failed.
Prompt evolve(Backend& backend, const PromptTemplates& templates, const Prompt& parent,
              const CritiqueRecord& critique, int iteration, const GenerationOptions& gen);

std::string strip_code_fences(const std::string& reply);

}  // namespace gepa
