#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gepa/backend.hpp"
#include "gepa/dataset.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/types.hpp"

namespace gepa {

// The four prompt roles of the transfer protocol, in report row order.
enum class PromptRole { hand_simple, hand_cot, gepa_baseline, gepa_final };

const char* to_string(PromptRole role);
const char* display_name(PromptRole role);  // e.g. "Hand-Crafted Simple"
PromptRole prompt_role_from_string(const std::string& s);
const std::vector<PromptRole>& all_prompt_roles();

struct MatrixCell {
  std::string model_name;
  PromptRole role = PromptRole::hand_simple;
  Task benchmark = Task::algebra;
  std::optional<double> accuracy;  // nullopt = incomplete
  int instance_count = 0;
  std::vector<std::string> outcome_digests;
  std::string error;  // why the cell is incomplete
};

struct TransferOptions {
  std::string cache_dir;  // empty disables caching
  ProverConfig prover;
  RetryPolicy retry;
  int parallelism = 4;
};

struct BuildStats {
  int evaluated = 0;
  int cache_hits = 0;
  int incomplete_cells = 0;
};

// One cell per (profile, role, benchmark). Outcomes are cached per
// (profile, prompt text, instance id) so reruns only fill gaps; transport
// failures mark the cell incomplete instead of masquerading as zeros and are
// never cached.
std::vector<MatrixCell> build_matrix(const std::map<PromptRole, Prompt>& prompts,
                                     const std::vector<BackendProfile>& profiles,
                                     const std::map<std::string, Backend*>& backends,
                                     const Pools& pools, const TransferOptions& options,
                                     BuildStats* stats = nullptr);

struct RenderedTable {
  std::string text;  // fixed-width, maxima per (model, benchmark) marked with '*'
  std::string csv;
  bool complete = true;
};

// Pure function of the cells: grouped by model in first-seen order, rows in
// role order, percentages with exactly two decimals, per-column maxima
// bold-marked (ties all marked). Incomplete cells render as an em dash.
RenderedTable render_table(const std::vector<MatrixCell>& cells);

std::string format_percent(double fraction);  // 0.9444.. -> "94.44%"

// Cache key for one evaluation: digest of (profile name, prompt text,
// instance id).
std::string transfer_cache_key(const std::string& profile_name, const std::string& prompt_text,
                               const std::string& instance_id);

}  // namespace gepa
