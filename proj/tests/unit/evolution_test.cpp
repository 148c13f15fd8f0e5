#include "doctest.h"
#include "gepa/error.hpp"
#include "gepa/evolution.hpp"
#include "gepa/optimizer.hpp"
#include "gepa/templates.hpp"
#include "test_support.hpp"

using namespace gepa;
using namespace gepa::test;

namespace {

EvaluationOutcome failed_outcome(const std::string& id, FailureReason reason,
                                 const std::string& completion, std::int64_t latency = 0) {
  EvaluationOutcome o;
  o.instance_id = id;
  o.score = 0;
  o.completion_text = completion;
  o.failure = FailureDetail{reason, std::string(to_string(reason)) + " detail"};
  o.latency_ms = latency;
  return o;
}

EvaluationOutcome passed_outcome(const std::string& id, std::int64_t latency) {
  EvaluationOutcome o;
  o.instance_id = id;
  o.score = 1;
  o.completion_text = "ok";
  o.latency_ms = latency;
  return o;
}

}  // namespace

TEST_CASE("critic meta-prompt contains statement excerpt and failure reason") {
  Pools pools = trigger_pools(1, 1);
  std::vector<TaskInstance> batch = {pools.gpqa[0]};
  const std::vector<EvaluationOutcome> failures = {
      failed_outcome(pools.gpqa[0].id, FailureReason::wrong_answer, "Final answer: B")};

  const std::string digest = build_error_digest(failures, batch, CritiqueOptions{});
  CHECK(digest.find(pools.gpqa[0].statement) != std::string::npos);
  CHECK(digest.find("wrong_answer") != std::string::npos);
  CHECK(digest.find("gpqa") != std::string::npos);
  CHECK(digest.find("Final answer: B") != std::string::npos);
}

TEST_CASE("error digest stays under budget, most recent first") {
  Pools pools = trigger_pools(1, 1);
  std::vector<TaskInstance> batch;
  std::vector<EvaluationOutcome> failures;
  for (int i = 0; i < 50; ++i) {
    TaskInstance inst = pools.algebra[0];
    inst.id = "inst" + std::to_string(i);
    inst.statement = "statement number " + std::to_string(i) + std::string(200, 'x');
    batch.push_back(inst);
    failures.push_back(failed_outcome(inst.id, FailureReason::proof_rejected, "body"));
  }
  CritiqueOptions options;
  options.digest_budget = 8192;
  const std::string digest = build_error_digest(failures, batch, options);
  CHECK(digest.size() <= 8192);
  CHECK(digest.find("inst49") != std::string::npos);   // most recent kept
  CHECK(digest.find("inst0]") == std::string::npos);   // oldest truncated away
  const auto pos49 = digest.find("inst49");
  const auto pos48 = digest.find("inst48");
  REQUIRE(pos48 != std::string::npos);
  CHECK(pos49 < pos48);  // most-recent-first ordering
}

TEST_CASE("success digest orders by latency then id") {
  Pools pools = trigger_pools(2, 2);
  std::vector<TaskInstance> batch = {pools.algebra[0], pools.algebra[1], pools.gpqa[0]};
  const std::vector<EvaluationOutcome> successes = {passed_outcome("alg0", 30),
                                                    passed_outcome("alg1", 10),
                                                    passed_outcome("gp0", 10)};
  const std::string digest = build_success_digest(successes, batch, CritiqueOptions{});
  const auto p_alg1 = digest.find("alg1");
  const auto p_gp0 = digest.find("gp0");
  const auto p_alg0 = digest.find("alg0");
  REQUIRE(p_alg1 != std::string::npos);
  CHECK(p_alg1 < p_gp0);  // latency 10 ties broken by id
  CHECK(p_gp0 < p_alg0);  // latency 30 last
}

TEST_CASE("critique templates are pure functions of their inputs") {
  // Golden composition with fixed inputs and the default templates.
  ScriptedBackend backend;
  const PromptTemplates templates = PromptTemplates::defaults();
  const Prompt prompt = make_seed("seed", "Solve carefully.");
  Pools pools = trigger_pools(1, 1);
  const std::vector<TaskInstance> batch = {pools.algebra[0]};
  const std::vector<EvaluationOutcome> failures = {
      failed_outcome("alg0", FailureReason::proof_rejected, "```\nFAIL\n```")};

  const std::string expected_digest =
      "- [algebra alg0 proof_rejected] statement: [algebra] prove the identity; requires token "
      "TOK_a0 | detail: proof_rejected detail | completion: ```\nFAIL\n```";
  CHECK(build_error_digest(failures, batch, CritiqueOptions{}) == expected_digest);

  const std::string expected_user =
      "Current prompt:\nSolve carefully.\n\nFailed cases:\n" + expected_digest +
      "\n\nIdentify why these failures happened and which instructions are missing or misleading.";
  backend.add_entry(templates.critic_system, expected_user, "the critique");

  const CritiqueRecord record =
      critique(backend, templates, CritiqueOptions{}, prompt, failures, batch, 3, {});
  CHECK(record.critique_text == "the critique");
  CHECK(record.prompt_id == "seed");
  CHECK(record.iteration == 3);
  CHECK(record.error_log_digest == expected_digest);
}

TEST_CASE("critique requires failures; the no-error variant handles success digests") {
  ScriptedBackend backend;
  backend.set_default_response("critique text");
  const Prompt prompt = make_seed("seed", "p");
  Pools pools = trigger_pools(1, 1);
  const std::vector<TaskInstance> batch = {pools.algebra[0]};
  CHECK_THROWS_AS(critique(backend, PromptTemplates::defaults(), CritiqueOptions{}, prompt, {}, batch,
                           1, {}),
                  Error);
  const CritiqueRecord record = critique_no_errors(backend, PromptTemplates::defaults(),
                                                   CritiqueOptions{}, prompt,
                                                   {passed_outcome("alg0", 5)}, batch, 1, {});
  CHECK(record.critique_text == "critique text");
  CHECK(record.error_log_digest.find("alg0") != std::string::npos);
}

TEST_CASE("the composed critic meta-prompt respects the byte budget") {
  // Capture what actually reaches the backend.
  class CapturingBackend : public Backend {
   public:
    std::string last_system, last_user;
    std::string generate(const std::string& system_text, const std::string& user_text,
                         const GenerationOptions&) override {
      last_system = system_text;
      last_user = user_text;
      return "noted";
    }
    std::vector<double> embed(const std::string& text) override { return pseudo_embedding(text, 4); }
    bool deterministic() const override { return true; }
  };

  CapturingBackend backend;
  const Prompt prompt = make_seed("seed", std::string(300, 'p'));
  Pools pools = trigger_pools(1, 1);
  std::vector<TaskInstance> batch;
  std::vector<EvaluationOutcome> failures;
  for (int i = 0; i < 50; ++i) {
    TaskInstance inst = pools.algebra[0];
    inst.id = "inst" + std::to_string(i);
    inst.statement = "case " + std::to_string(i) + " " + std::string(400, 's');
    batch.push_back(inst);
    failures.push_back(failed_outcome(inst.id, FailureReason::proof_rejected, std::string(200, 'c')));
  }
  CritiqueOptions options;
  options.digest_budget = 8192;
  critique(backend, PromptTemplates::defaults(), options, prompt, failures, batch, 1, {});
  CHECK(backend.last_user.size() <= 8192);
  CHECK(backend.last_user.find("inst49") != std::string::npos);  // most recent failure kept
}

TEST_CASE("template asset files match the built-in defaults") {
  const PromptTemplates from_files = PromptTemplates::load_dir(GEPA_TEMPLATE_ASSET_DIR);
  const PromptTemplates defaults = PromptTemplates::defaults();
  CHECK(from_files.critic_system == defaults.critic_system);
  CHECK(from_files.critic_user == defaults.critic_user);
  CHECK(from_files.critic_no_error_user == defaults.critic_no_error_user);
  CHECK(from_files.evolve_system == defaults.evolve_system);
  CHECK(from_files.evolve_user == defaults.evolve_user);
}

TEST_CASE("load_dir overrides only the files present") {
  TempDir dir("gepa-templates");
  write_file(dir.file("evolve_system.txt"), "custom rewrite instructions\n");
  const PromptTemplates loaded = PromptTemplates::load_dir(dir.path());
  CHECK(loaded.evolve_system == "custom rewrite instructions");
  CHECK(loaded.critic_user == PromptTemplates::defaults().critic_user);
  CHECK_THROWS_AS(PromptTemplates::load_dir(dir.path() + "/missing"), Error);
}

TEST_CASE("strip_code_fences") {
  CHECK(strip_code_fences("```\nNEW\n```") == "NEW");
  CHECK(strip_code_fences("```text\nNEW PROMPT\nLINE TWO\n```") == "NEW PROMPT\nLINE TWO");
  CHECK(strip_code_fences("  plain reply  ") == "plain reply");
  CHECK(strip_code_fences("   \n\t ") == "");
}

TEST_CASE("evolve builds the child with lineage and strips fences") {
  ScriptedBackend backend;
  backend.set_default_response("```\nNEW\n```");
  const Prompt parent = make_seed("seed", "OLD");
  CritiqueRecord crit;
  crit.prompt_id = "seed";
  crit.critique_text = "be better";
  crit.iteration = 2;

  const Prompt child = evolve(backend, PromptTemplates::defaults(), parent, crit, 2, {});
  CHECK(child.text == "NEW");
  CHECK(child.parent_id.has_value());
  CHECK(*child.parent_id == "seed");
  CHECK(child.iteration_born == 2);
  CHECK(child.origin == PromptOrigin::evolved);
  CHECK(child.id == "evolved-0002");
}

TEST_CASE("evolve rejects whitespace-only replies") {
  ScriptedBackend backend;
  backend.set_default_response("   \n  ");
  const Prompt parent = make_seed("seed", "OLD");
  CritiqueRecord crit;
  crit.prompt_id = "seed";
  crit.critique_text = "x";
  CHECK_THROWS_AS(evolve(backend, PromptTemplates::defaults(), parent, crit, 1, {}), Error);
  try {
    evolve(backend, PromptTemplates::defaults(), parent, crit, 1, {});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::evolution_failed);
  }
}

TEST_CASE("evolve refuses a critique from another prompt") {
  ScriptedBackend backend;
  backend.set_default_response("text");
  CritiqueRecord crit;
  crit.prompt_id = "other";
  CHECK_THROWS_AS(evolve(backend, PromptTemplates::defaults(), make_seed("seed", "x"), crit, 1, {}),
                  Error);
}

TEST_CASE("critique record round-trips through a run-log line byte-identically") {
  CritiqueRecord crit;
  crit.prompt_id = "seed";
  crit.error_log_digest = "- [gpqa gp0 wrong_answer] statement: s | completion: c";
  crit.critique_text = "add reasoning steps\nand unicode: αβγ";
  crit.iteration = 7;

  StepRecord record;
  record.iteration = 7;
  record.sampled_prompt_id = "seed";
  record.batch_instance_ids = {"gp0"};
  record.minibatch_scores.prompt_id = "seed";
  record.minibatch_scores.scores["gp0"] = ScoredInstance{Task::gpqa, 0};
  record.error_instance_ids = {"gp0"};
  record.critique = crit;
  record.child = make_child("evolved-0007", "child text", "seed", 7);
  record.child_eval_scores = grid_vector("evolved-0007", 2, 2);
  record.frontier_after = {{"evolved-0007", record.child_eval_scores.by_task()}};
  record.rng_state_digest = "00aa";

  const std::string line1 = record_to_line(RunRecord{record});
  TempDir dir("gepa-roundtrip");
  write_file(dir.file("log.jsonl"),
             header_to_line(RunLogHeader{1, trigger_config(1, 0), "digest",
                                         make_seed("seed", "text"), grid_vector("seed", 0, 0)}) +
                 "\n" + line1 + "\n");
  const ParsedRunLog parsed = parse_run_log(dir.file("log.jsonl"));
  REQUIRE(parsed.records.size() == 1);
  const std::string line2 = record_to_line(parsed.records[0]);
  CHECK(line1 == line2);
}
