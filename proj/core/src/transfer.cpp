#include "gepa/transfer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gepa/digest.hpp"
#include "gepa/error.hpp"
#include "serialize.hpp"

namespace gepa {

using detail::json;

const char* to_string(PromptRole role) {
  switch (role) {
    case PromptRole::hand_simple: return "hand_simple";
    case PromptRole::hand_cot: return "hand_cot";
    case PromptRole::gepa_baseline: return "gepa_baseline";
    case PromptRole::gepa_final: return "gepa_final";
  }
  return "unknown";
}

const char* display_name(PromptRole role) {
  switch (role) {
    case PromptRole::hand_simple: return "Hand-Crafted Simple";
    case PromptRole::hand_cot: return "Hand-Crafted CoT";
    case PromptRole::gepa_baseline: return "GEPA Optimized Baseline";
    case PromptRole::gepa_final: return "GEPA Optimized Final";
  }
  return "unknown";
}

PromptRole prompt_role_from_string(const std::string& s) {
  if (s == "hand_simple") return PromptRole::hand_simple;
  if (s == "hand_cot") return PromptRole::hand_cot;
  if (s == "gepa_baseline") return PromptRole::gepa_baseline;
  if (s == "gepa_final") return PromptRole::gepa_final;
  raise(ErrorKind::format, "unknown prompt role '" + s + "'");
}

const std::vector<PromptRole>& all_prompt_roles() {
  static const std::vector<PromptRole> roles = {PromptRole::hand_simple, PromptRole::hand_cot,
                                                PromptRole::gepa_baseline, PromptRole::gepa_final};
  return roles;
}

std::string transfer_cache_key(const std::string& profile_name, const std::string& prompt_text,
                               const std::string& instance_id) {
  std::uint64_t h = fnv1a64(profile_name);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(prompt_text, h);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(instance_id, h);
  return hex64(h);
}

namespace {

std::string outcome_digest(const EvaluationOutcome& outcome) {
  return digest_hex(detail::to_json(outcome).dump());
}

std::optional<EvaluationOutcome> cache_read(const std::string& dir, const std::string& key) {
  if (dir.empty()) return std::nullopt;
  std::ifstream in(dir + "/" + key + ".json", std::ios::binary);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("outcome")) return std::nullopt;  // damaged entry = miss
  try {
    return detail::outcome_from_json(j.at("outcome"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void cache_write(const std::string& dir, const std::string& key, const std::string& profile,
                 const std::string& instance_id, const EvaluationOutcome& outcome) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + key + ".json";
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write cache entry '" + tmp + "'");
    out << json{{"profile", profile}, {"instance_id", instance_id}, {"outcome", detail::to_json(outcome)}}
               .dump()
        << '\n';
  }
  std::filesystem::rename(tmp, path);  // atomic per entry
}

const std::vector<TaskInstance>& benchmark_pool(const Pools& pools, Task benchmark) {
  return benchmark == Task::algebra ? pools.algebra : pools.gpqa;
}

}  // namespace

std::vector<MatrixCell> build_matrix(const std::map<PromptRole, Prompt>& prompts,
                                     const std::vector<BackendProfile>& profiles,
                                     const std::map<std::string, Backend*>& backends,
                                     const Pools& pools, const TransferOptions& options,
                                     BuildStats* stats) {
  for (PromptRole role : all_prompt_roles()) {
    if (prompts.find(role) == prompts.end())
      raise(ErrorKind::config, std::string("missing prompt for role ") + to_string(role));
  }
  if (pools.algebra.empty() || pools.gpqa.empty())
    raise(ErrorKind::config, "transfer evaluation needs non-empty pools for both benchmarks");

  BuildStats local;
  BuildStats& s = stats != nullptr ? *stats : local;

  std::vector<MatrixCell> cells;
  for (const BackendProfile& profile : profiles) {
    const auto backend_it = backends.find(profile.name);
    Backend* backend = backend_it == backends.end() ? nullptr : backend_it->second;

    for (PromptRole role : all_prompt_roles()) {
      const Prompt& prompt = prompts.at(role);
      for (Task benchmark : {Task::algebra, Task::gpqa}) {
        MatrixCell cell;
        cell.model_name = profile.name;
        cell.role = role;
        cell.benchmark = benchmark;
        const std::vector<TaskInstance>& pool = benchmark_pool(pools, benchmark);
        cell.instance_count = static_cast<int>(pool.size());

        if (backend == nullptr) {
          cell.error = "no backend registered for profile '" + profile.name + "'";
          ++s.incomplete_cells;
          cells.push_back(std::move(cell));
          continue;
        }

        EvaluationContext eval;
        eval.backend = backend;
        eval.prover = options.prover;
        eval.retry = options.retry;
        eval.parallelism = options.parallelism;
        eval.temperature = profile.eval_temperature;

        std::vector<TaskInstance> pending;
        std::vector<EvaluationOutcome> outcomes;
        outcomes.reserve(pool.size());
        for (const TaskInstance& inst : pool) {
          const std::string key = transfer_cache_key(profile.name, prompt.text, inst.id);
          if (auto hit = cache_read(options.cache_dir, key); hit.has_value()) {
            outcomes.push_back(std::move(*hit));
            ++s.cache_hits;
          } else {
            pending.push_back(inst);
          }
        }
        if (!pending.empty()) {
          const BatchEvaluation fresh = evaluate_batch(prompt, pending, eval);
          for (const EvaluationOutcome& o : fresh.outcomes) {
            ++s.evaluated;
            const bool transport_failure =
                o.failure.has_value() && o.failure->reason == FailureReason::backend_error;
            if (!transport_failure)
              cache_write(options.cache_dir,
                          transfer_cache_key(profile.name, prompt.text, o.instance_id), profile.name,
                          o.instance_id, o);
            outcomes.push_back(o);
          }
        }

        int correct = 0;
        bool incomplete = false;
        for (const EvaluationOutcome& o : outcomes) {
          if (o.failure.has_value() && o.failure->reason == FailureReason::backend_error) {
            incomplete = true;
            cell.error = "backend failure on instance '" + o.instance_id + "': " + o.failure->message;
          }
          correct += o.score;
        }
        std::sort(outcomes.begin(), outcomes.end(),
                  [](const EvaluationOutcome& a, const EvaluationOutcome& b) {
                    return a.instance_id < b.instance_id;
                  });
        for (const EvaluationOutcome& o : outcomes) cell.outcome_digests.push_back(outcome_digest(o));

        if (incomplete) {
          ++s.incomplete_cells;
        } else {
          cell.accuracy = pool.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pool.size());
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return buf;
}

namespace {

struct RowView {
  const MatrixCell* algebra = nullptr;
  const MatrixCell* gpqa = nullptr;
};

std::string cell_text(const MatrixCell* cell, bool bold) {
  if (cell == nullptr || !cell->accuracy.has_value()) return "—";
  const std::string value = format_percent(*cell->accuracy);
  return bold ? "*" + value + "*" : value;
}

std::string pad_right(const std::string& s, std::size_t width) {
  // Width in display columns; the em dash and '…' are multi-byte single-column.
  std::size_t columns = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++columns;
  }
  std::string out = s;
  while (columns < width) {
    out += ' ';
    ++columns;
  }
  return out;
}

}  // namespace

RenderedTable render_table(const std::vector<MatrixCell>& cells) {
  // Group by model in first-seen order.
  std::vector<std::string> models;
  std::map<std::string, std::map<PromptRole, RowView>> grid;
  for (const MatrixCell& cell : cells) {
    if (grid.find(cell.model_name) == grid.end()) models.push_back(cell.model_name);
    RowView& row = grid[cell.model_name][cell.role];
    (cell.benchmark == Task::algebra ? row.algebra : row.gpqa) = &cell;
  }

  RenderedTable table;
  std::size_t model_width = std::string("Model").size();
  for (const std::string& m : models) model_width = std::max(model_width, m.size());
  std::size_t method_width = std::string("Method").size();
  for (PromptRole role : all_prompt_roles())
    method_width = std::max(method_width, std::string(display_name(role)).size());
  const std::size_t value_width = 10;  // fits "*100.00%*"

  std::string text;
  text += pad_right("Model", model_width + 2) + pad_right("Method", method_width + 2) +
          pad_right("Algebra", value_width + 2) + "GPQA\n";
  std::string csv = "model,method,algebra,gpqa\n";

  int incomplete = 0;
  for (const std::string& model : models) {
    // Column maxima within this model block, per benchmark; ties all marked.
    std::optional<double> max_algebra, max_gpqa;
    for (PromptRole role : all_prompt_roles()) {
      const RowView& row = grid[model][role];
      if (row.algebra != nullptr && row.algebra->accuracy.has_value())
        max_algebra = std::max(max_algebra.value_or(0.0), *row.algebra->accuracy);
      if (row.gpqa != nullptr && row.gpqa->accuracy.has_value())
        max_gpqa = std::max(max_gpqa.value_or(0.0), *row.gpqa->accuracy);
    }

    bool first_row = true;
    for (PromptRole role : all_prompt_roles()) {
      const RowView& row = grid[model][role];
      const bool algebra_bold = row.algebra != nullptr && row.algebra->accuracy.has_value() &&
                                max_algebra.has_value() && *row.algebra->accuracy == *max_algebra;
      const bool gpqa_bold = row.gpqa != nullptr && row.gpqa->accuracy.has_value() &&
                             max_gpqa.has_value() && *row.gpqa->accuracy == *max_gpqa;
      if (row.algebra == nullptr || !row.algebra->accuracy.has_value()) ++incomplete;
      if (row.gpqa == nullptr || !row.gpqa->accuracy.has_value()) ++incomplete;

      text += pad_right(first_row ? model : "", model_width + 2);
      text += pad_right(display_name(role), method_width + 2);
      text += pad_right(cell_text(row.algebra, algebra_bold), value_width + 2);
      text += cell_text(row.gpqa, gpqa_bold);
      text += '\n';

      csv += model + "," + display_name(role) + "," +
             (row.algebra != nullptr && row.algebra->accuracy.has_value()
                  ? format_percent(*row.algebra->accuracy)
                  : "") +
             "," +
             (row.gpqa != nullptr && row.gpqa->accuracy.has_value() ? format_percent(*row.gpqa->accuracy)
                                                                    : "") +
             "\n";
      first_row = false;
    }
  }

  if (incomplete > 0) {
    text += "warning: " + std::to_string(incomplete) + " incomplete cell(s); rerun to fill gaps\n";
    table.complete = false;
  }
  table.text = std::move(text);
  table.csv = std::move(csv);
  return table;
}

}  // namespace gepa
