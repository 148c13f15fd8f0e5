#pragma once

// Helpers shared by the unit, integration and acceptance suites.

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gepa/backend.hpp"
#include "gepa/dataset.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/optimizer.hpp"
#include "gepa/pareto.hpp"
#include "gepa/templates.hpp"
#include "gepa/transfer.hpp"
#include "gepa/types.hpp"

namespace gepa::test {

inline Prompt make_seed(const std::string& id, const std::string& text) {
  Prompt p;
  p.id = id;
  p.text = text;
  p.origin = PromptOrigin::seed;
  p.iteration_born = 0;
  return p;
}

inline Prompt make_child(const std::string& id, const std::string& text, const std::string& parent,
                         int iteration) {
  Prompt p;
  p.id = id;
  p.text = text;
  p.parent_id = parent;
  p.iteration_born = iteration;
  p.origin = PromptOrigin::evolved;
  return p;
}

// Score vector over a fixed 4-algebra + 4-gpqa instance set whose per-task
// accuracies land on the k/4 grid {0, 0.25, 0.5, 0.75, 1}.
inline ScoreVector grid_vector(const std::string& prompt_id, int algebra_quarters, int gpqa_quarters) {
  ScoreVector v;
  v.prompt_id = prompt_id;
  for (int i = 0; i < 4; ++i) {
    v.scores["a" + std::to_string(i)] = ScoredInstance{Task::algebra, i < algebra_quarters ? 1 : 0};
    v.scores["g" + std::to_string(i)] = ScoredInstance{Task::gpqa, i < gpqa_quarters ? 1 : 0};
  }
  return v;
}

// All-pairs non-dominated filter; the independent oracle for update_frontier.
inline std::vector<FrontierMember> brute_force_frontier(const std::vector<FrontierMember>& candidates) {
  std::vector<FrontierMember> front;
  for (const FrontierMember& m : candidates) {
    bool dominated = false;
    for (const FrontierMember& other : candidates) {
      if (other.prompt.id != m.prompt.id && dominates(other.scores, m.scores)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(m);
  }
  std::sort(front.begin(), front.end(),
            [](const FrontierMember& a, const FrontierMember& b) { return a.prompt.id < b.prompt.id; });
  return front;
}

inline std::vector<std::string> member_ids(const std::vector<FrontierMember>& members) {
  std::vector<std::string> ids;
  ids.reserve(members.size());
  for (const FrontierMember& m : members) ids.push_back(m.prompt.id);
  return ids;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = (std::filesystem::temp_directory_path() /
             (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++)))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// ---- rigged trigger-token landscape ----------------------------------------
//
// Instance i scores 1 exactly when the prompt contains its trigger token.
// The critic names one missing token from the failure digest; the evolver
// appends it. Drives the closed-loop optimizer oracle.

inline PromptTemplates trigger_templates() {
  PromptTemplates t;
  t.critic_system = "CRITIC_SYS";
  t.critic_user = "P:{prompt}\nERRORS:{errors}";
  t.critic_no_error_user = "P:{prompt}\nNOERR:{successes}";
  t.evolve_system = "EVOLVE_SYS";
  t.evolve_user = "P:{prompt}\nCRIT:{critique}";
  return t;
}

inline Pools trigger_pools(int algebra_count = 3, int gpqa_count = 3) {
  Pools pools;
  for (int i = 0; i < algebra_count; ++i) {
    TaskInstance inst;
    inst.id = "alg" + std::to_string(i);
    inst.task = Task::algebra;
    inst.statement = "[algebra] prove the identity; requires token TOK_a" + std::to_string(i);
    pools.algebra.push_back(inst);
  }
  for (int i = 0; i < gpqa_count; ++i) {
    TaskInstance inst;
    inst.id = "gp" + std::to_string(i);
    inst.task = Task::gpqa;
    inst.statement = "[gpqa] pick the right option; requires token TOK_g" + std::to_string(i);
    inst.choices = {Choice{"A", "yes"}, Choice{"B", "no"}};
    inst.answer_key = "A";
    pools.gpqa.push_back(inst);
  }
  return pools;
}

class TriggerBackend : public Backend {
 public:
  std::string generate(const std::string& system_text, const std::string& user_text,
                       const GenerationOptions&) override {
    if (system_text == "CRITIC_SYS") {
      const std::size_t errors = user_text.find("ERRORS:");
      if (errors == std::string::npos) return "all good; keep steady";
      const std::string token = find_token(user_text, errors);
      return token.empty() ? "all good; keep steady" : "ADD " + token;
    }
    if (system_text == "EVOLVE_SYS") {
      const std::size_t crit = user_text.find("\nCRIT:");
      std::string prompt = user_text.substr(2, crit - 2);  // after "P:"
      const std::string token = find_token(user_text, crit);
      return token.empty() ? prompt + " steady" : prompt + " " + token;
    }
    // Task evaluation: the candidate prompt is the system text.
    const std::string token = find_token(user_text, 0);
    const bool has = !token.empty() && system_text.find(token) != std::string::npos;
    if (user_text.find("[algebra]") != std::string::npos)
      return has ? "```\nPASS\n```" : "```\nFAIL\n```";
    return std::string("Final answer: ") + (has ? "A" : "B");
  }

  std::vector<double> embed(const std::string& text) override { return pseudo_embedding(text, 16); }
  bool deterministic() const override { return true; }

 private:
  static std::string find_token(const std::string& text, std::size_t from) {
    const std::size_t pos = text.find("TOK_", from);
    if (pos == std::string::npos) return {};
    std::size_t end = pos + 4;
    while (end < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[end])) != 0 || text[end] == '_'))
      ++end;
    return text.substr(pos, end - pos);
  }
};

// Stub prover accepting proofs that contain PASS.
inline ProverConfig trigger_prover(const TempDir& dir) {
  const std::string script = dir.file("stub_prover.sh");
  write_file(script, "#!/bin/sh\ngrep -q PASS \"$1\"\n");
  ProverConfig prover;
  prover.command = {"/bin/sh", script, "{file}"};
  prover.timeout_s = 10.0;
  return prover;
}

inline OptimizerContext trigger_context(const TempDir& dir, Backend& backend) {
  OptimizerContext ctx;
  ctx.pools = trigger_pools();
  ctx.eval.backend = &backend;
  ctx.eval.prover = trigger_prover(dir);
  ctx.eval.retry.base_backoff_s = 0.0;
  ctx.templates = trigger_templates();
  return ctx;
}

inline OptimizationConfig trigger_config(int iterations, std::uint64_t seed) {
  OptimizationConfig config;
  config.iterations = iterations;
  config.sample_algebra = 3;
  config.sample_gpqa = 3;
  config.rng_seed = seed;
  return config;
}

// ---- benchmark-table fixture ------------------------------------------------
//
// Cell set with 36 instances per benchmark; correct counts chosen so the
// rendered percentages and tie-bolding match the reference table.

inline std::vector<MatrixCell> table1_fixture_cells() {
  struct Row {
    const char* model;
    PromptRole role;
    int algebra_correct;
    int gpqa_correct;
  };
  const std::vector<Row> rows = {
      {"DeepSeek-V3.2", PromptRole::hand_simple, 31, 33},
      {"DeepSeek-V3.2", PromptRole::hand_cot, 35, 33},
      {"DeepSeek-V3.2", PromptRole::gepa_baseline, 33, 32},
      {"DeepSeek-V3.2", PromptRole::gepa_final, 36, 34},
      {"GPT-5.4-mini", PromptRole::hand_simple, 18, 33},
      {"GPT-5.4-mini", PromptRole::hand_cot, 17, 33},
      {"GPT-5.4-mini", PromptRole::gepa_baseline, 18, 32},
      {"GPT-5.4-mini", PromptRole::gepa_final, 22, 33},
      {"GLM 5", PromptRole::hand_simple, 33, 33},
      {"GLM 5", PromptRole::hand_cot, 35, 31},
      {"GLM 5", PromptRole::gepa_baseline, 33, 32},
      {"GLM 5", PromptRole::gepa_final, 34, 33},
      {"Claude Sonnet 4.6", PromptRole::hand_simple, 11, 28},
      {"Claude Sonnet 4.6", PromptRole::hand_cot, 19, 30},
      {"Claude Sonnet 4.6", PromptRole::gepa_baseline, 18, 29},
      {"Claude Sonnet 4.6", PromptRole::gepa_final, 18, 29},
  };
  std::vector<MatrixCell> cells;
  for (const Row& row : rows) {
    for (Task benchmark : {Task::algebra, Task::gpqa}) {
      MatrixCell cell;
      cell.model_name = row.model;
      cell.role = row.role;
      cell.benchmark = benchmark;
      cell.instance_count = 36;
      const int correct = benchmark == Task::algebra ? row.algebra_correct : row.gpqa_correct;
      cell.accuracy = static_cast<double>(correct) / 36.0;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace gepa::test
