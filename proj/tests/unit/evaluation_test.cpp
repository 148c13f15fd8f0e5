#include <algorithm>
#include <atomic>

#include "doctest.h"
#include "gepa/error.hpp"
#include "gepa/evaluation.hpp"
#include "test_support.hpp"

using namespace gepa;
using namespace gepa::test;

namespace {

TaskInstance gpqa_instance(const std::string& id, const std::string& key = "C") {
  TaskInstance inst;
  inst.id = id;
  inst.task = Task::gpqa;
  inst.statement = "[gpqa] question " + id;
  inst.choices = {{"A", "one"}, {"B", "two"}, {"C", "three"}, {"D", "four"}};
  inst.answer_key = key;
  return inst;
}

TaskInstance algebra_instance(const std::string& id) {
  TaskInstance inst;
  inst.id = id;
  inst.task = Task::algebra;
  inst.statement = "[algebra] theorem " + id;
  return inst;
}

EvaluationContext scripted_context(Backend& backend, const TempDir& dir) {
  EvaluationContext ctx;
  ctx.backend = &backend;
  ctx.prover = trigger_prover(dir);
  ctx.retry.base_backoff_s = 0.0;
  return ctx;
}

Prompt prompt() { return make_seed("seed", "solve it"); }

}  // namespace

TEST_CASE("evaluate dispatches by task and encodes outcomes") {
  TempDir dir("gepa-eval");
  ScriptedBackend backend;
  backend.add_rule({std::nullopt, std::string("[gpqa]"), "Final answer: C"});
  backend.add_rule({std::nullopt, std::string("[algebra]"), "```\nPASS\n```"});
  EvaluationContext ctx = scripted_context(backend, dir);

  const EvaluationOutcome right = evaluate(prompt(), gpqa_instance("g1"), ctx);
  CHECK(right.score == 1);
  CHECK(right.latency_ms == 0);  // deterministic backend pins latency
  CHECK(right.completion_text == "Final answer: C");

  const EvaluationOutcome wrong = evaluate(prompt(), gpqa_instance("g2", "A"), ctx);
  CHECK(wrong.score == 0);
  CHECK(wrong.failure->reason == FailureReason::wrong_answer);

  const EvaluationOutcome proof = evaluate(prompt(), algebra_instance("a1"), ctx);
  CHECK(proof.score == 1);
}

TEST_CASE("evaluate retries transient transport failures") {
  TempDir dir("gepa-eval");

  class FlakyBackend : public Backend {
   public:
    int failures_left;
    std::atomic<int> calls{0};
    explicit FlakyBackend(int failures) : failures_left(failures) {}
    std::string generate(const std::string&, const std::string&, const GenerationOptions&) override {
      ++calls;
      if (failures_left-- > 0) throw BackendError(BackendErrorKind::transport, "connection reset");
      return "Final answer: C";
    }
    std::vector<double> embed(const std::string& text) override { return pseudo_embedding(text, 4); }
    bool deterministic() const override { return true; }
  };

  SUBCASE("recovers within the retry budget") {
    FlakyBackend backend(2);
    EvaluationContext ctx = scripted_context(backend, dir);
    ctx.retry.max_retries = 3;
    const EvaluationOutcome outcome = evaluate(prompt(), gpqa_instance("g"), ctx);
    CHECK(outcome.score == 1);
    CHECK(backend.calls == 3);
  }

  SUBCASE("exhaustion yields backend_error, never an exception") {
    FlakyBackend backend(100);
    EvaluationContext ctx = scripted_context(backend, dir);
    ctx.retry.max_retries = 3;
    const EvaluationOutcome outcome = evaluate(prompt(), gpqa_instance("g"), ctx);
    CHECK(outcome.score == 0);
    REQUIRE(outcome.failure.has_value());
    CHECK(outcome.failure->reason == FailureReason::backend_error);
    CHECK(backend.calls == 4);  // initial attempt + three retries
  }

  SUBCASE("scripted misses are not retried") {
    ScriptedBackend backend;
    EvaluationContext ctx = scripted_context(backend, dir);
    const EvaluationOutcome outcome = evaluate(prompt(), gpqa_instance("g"), ctx);
    CHECK(outcome.score == 0);
    CHECK(outcome.failure->reason == FailureReason::backend_error);
  }
}

TEST_CASE("evaluate_batch aggregates per task") {
  TempDir dir("gepa-eval");

  SUBCASE("all-correct backend, batch of 5 scores (1.0, 1.0)") {
    ScriptedBackend backend;
    backend.add_rule({std::nullopt, std::string("[gpqa]"), "Final answer: C"});
    backend.add_rule({std::nullopt, std::string("[algebra]"), "```\nPASS\n```"});
    EvaluationContext ctx = scripted_context(backend, dir);
    const std::vector<TaskInstance> batch = {algebra_instance("a1"), algebra_instance("a2"),
                                             gpqa_instance("g1"), gpqa_instance("g2"),
                                             gpqa_instance("g3")};
    const BatchEvaluation result = evaluate_batch(prompt(), batch, ctx);
    const TaskAccuracies acc = result.scores.by_task();
    CHECK(*acc.algebra == 1.0);
    CHECK(*acc.gpqa == 1.0);
    CHECK(result.outcomes.size() == 5);
  }

  SUBCASE("backend failing exactly the gpqa items scores (1.0, 0.0)") {
    ScriptedBackend backend;
    backend.add_rule({std::nullopt, std::string("[gpqa]"), "Final answer: D"});  // key is C
    backend.add_rule({std::nullopt, std::string("[algebra]"), "```\nPASS\n```"});
    EvaluationContext ctx = scripted_context(backend, dir);
    const std::vector<TaskInstance> batch = {algebra_instance("a1"), algebra_instance("a2"),
                                             algebra_instance("a3"), gpqa_instance("g1"),
                                             gpqa_instance("g2"),    gpqa_instance("g3")};
    const BatchEvaluation result = evaluate_batch(prompt(), batch, ctx);
    const TaskAccuracies acc = result.scores.by_task();
    CHECK(*acc.algebra == 1.0);
    CHECK(*acc.gpqa == 0.0);
  }
}

TEST_CASE("shuffled batch order leaves the score vector identical") {
  TempDir dir("gepa-eval");
  ScriptedBackend backend;
  backend.add_rule({std::nullopt, std::string("g1"), "Final answer: C"});
  backend.add_rule({std::nullopt, std::string("[gpqa]"), "Final answer: B"});
  backend.add_rule({std::nullopt, std::string("a1"), "```\nPASS\n```"});
  backend.add_rule({std::nullopt, std::string("[algebra]"), "```\nFAIL\n```"});
  EvaluationContext ctx = scripted_context(backend, dir);
  ctx.parallelism = 3;

  std::vector<TaskInstance> batch = {algebra_instance("a1"), algebra_instance("a2"),
                                     gpqa_instance("g1"), gpqa_instance("g2")};
  const BatchEvaluation forward = evaluate_batch(prompt(), batch, ctx);
  std::reverse(batch.begin(), batch.end());
  const BatchEvaluation backward = evaluate_batch(prompt(), batch, ctx);

  REQUIRE(forward.scores.scores.size() == backward.scores.scores.size());
  auto it = backward.scores.scores.begin();
  for (const auto& [id, entry] : forward.scores.scores) {
    CHECK(id == it->first);
    CHECK(entry.score == it->second.score);
    CHECK(entry.task == it->second.task);
    ++it;
  }

  // Sum of scores bounded by batch size; aggregates within [0, 1].
  int total = 0;
  for (const auto& [id, entry] : forward.scores.scores) total += entry.score;
  CHECK(total <= static_cast<int>(batch.size()));
  const TaskAccuracies acc = forward.scores.by_task();
  CHECK(*acc.algebra >= 0.0);
  CHECK(*acc.algebra <= 1.0);
  CHECK(*acc.gpqa >= 0.0);
  CHECK(*acc.gpqa <= 1.0);
}

TEST_CASE("evaluate_batch rejects an empty batch") {
  TempDir dir("gepa-eval");
  ScriptedBackend backend;
  EvaluationContext ctx = scripted_context(backend, dir);
  CHECK_THROWS_AS(evaluate_batch(prompt(), {}, ctx), Error);
}

TEST_CASE("a throwing evaluation surfaces cleanly from worker threads") {
  TempDir dir("gepa-eval");
  ScriptedBackend backend;
  backend.add_rule({std::nullopt, std::string("[algebra]"), "```\nx\n```"});
  EvaluationContext ctx = scripted_context(backend, dir);
  ctx.prover.command.clear();  // contract violation inside the worker
  const std::vector<TaskInstance> batch = {algebra_instance("a1"), algebra_instance("a2")};
  CHECK_THROWS_AS(evaluate_batch(prompt(), batch, ctx), Error);
}

TEST_CASE("user text rendering includes choices for multiple-choice items") {
  const TaskInstance gp = gpqa_instance("g");
  const std::string text = render_user_text(gp);
  CHECK(text.find(gp.statement) == 0);
  CHECK(text.find("(A) one") != std::string::npos);
  CHECK(text.find("(D) four") != std::string::npos);
  CHECK(render_user_text(algebra_instance("a")) == "[algebra] theorem a");
}
