#include <filesystem>

#include "doctest.h"
#include "gepa/error.hpp"
#include "gepa/transfer.hpp"
#include "test_support.hpp"

using namespace gepa;
using namespace gepa::test;

namespace {

std::map<PromptRole, Prompt> role_prompts() {
  std::map<PromptRole, Prompt> prompts;
  for (PromptRole role : all_prompt_roles()) {
    Prompt p;
    p.id = to_string(role);
    p.text = std::string("prompt for ") + to_string(role) + " TOK_a0 TOK_a1 TOK_g0 TOK_g1";
    p.origin = PromptOrigin::imported;
    p.iteration_born = 1;
    prompts[role] = std::move(p);
  }
  return prompts;
}

BackendProfile profile_named(const std::string& name) {
  BackendProfile p;
  p.name = name;
  return p;
}

}  // namespace

TEST_CASE("build_matrix yields one cell per (profile, role, benchmark)") {
  TempDir dir("gepa-transfer");
  TriggerBackend backend;
  const Pools pools = trigger_pools(2, 2);

  TransferOptions options;
  options.prover = trigger_prover(dir);
  options.retry.base_backoff_s = 0;

  std::map<std::string, Backend*> backends{{"model-a", &backend}};
  const auto cells = build_matrix(role_prompts(), {profile_named("model-a")}, backends, pools,
                                  options, nullptr);
  CHECK(cells.size() == 8);  // 1 profile x 4 roles x 2 benchmarks
  for (const MatrixCell& cell : cells) {
    REQUIRE(cell.accuracy.has_value());
    CHECK(*cell.accuracy == 1.0);  // prompts carry every trigger token
    CHECK(cell.instance_count == 2);
    CHECK(cell.outcome_digests.size() == 2);
  }
}

TEST_CASE("cache makes reruns fill only deleted gaps") {
  TempDir dir("gepa-transfer");
  TriggerBackend backend;
  const Pools pools = trigger_pools(2, 2);

  TransferOptions options;
  options.cache_dir = dir.file("cache");
  options.prover = trigger_prover(dir);
  options.retry.base_backoff_s = 0;
  std::map<std::string, Backend*> backends{{"model-a", &backend}};
  const auto prompts = role_prompts();
  const std::vector<BackendProfile> profiles = {profile_named("model-a")};

  BuildStats first;
  build_matrix(prompts, profiles, backends, pools, options, &first);
  CHECK(first.evaluated == 16);  // 4 roles x 4 instances
  CHECK(first.cache_hits == 0);

  BuildStats second;
  build_matrix(prompts, profiles, backends, pools, options, &second);
  CHECK(second.evaluated == 0);
  CHECK(second.cache_hits == 16);

  // Delete one cell's cache (gepa_final x algebra): only it re-evaluates.
  int removed = 0;
  for (const TaskInstance& inst : pools.algebra) {
    const std::string key =
        transfer_cache_key("model-a", prompts.at(PromptRole::gepa_final).text, inst.id);
    removed += std::filesystem::remove(options.cache_dir + "/" + key + ".json") ? 1 : 0;
  }
  CHECK(removed == 2);

  BuildStats third;
  build_matrix(prompts, profiles, backends, pools, options, &third);
  CHECK(third.evaluated == 2);
  CHECK(third.cache_hits == 14);
}

TEST_CASE("backend failures mark cells incomplete and are not cached") {
  TempDir dir("gepa-transfer");

  class OfflineBackend : public Backend {
   public:
    std::string generate(const std::string&, const std::string&, const GenerationOptions&) override {
      throw BackendError(BackendErrorKind::scripted_miss, "offline");
    }
    std::vector<double> embed(const std::string& text) override { return pseudo_embedding(text, 4); }
    bool deterministic() const override { return true; }
  };

  OfflineBackend backend;
  const Pools pools = trigger_pools(1, 1);
  TransferOptions options;
  options.cache_dir = dir.file("cache");
  options.prover = trigger_prover(dir);
  options.retry.base_backoff_s = 0;
  std::map<std::string, Backend*> backends{{"model-a", &backend}};

  BuildStats stats;
  const auto cells = build_matrix(role_prompts(), {profile_named("model-a")}, backends, pools,
                                  options, &stats);
  CHECK(stats.incomplete_cells == 8);
  for (const MatrixCell& cell : cells) {
    CHECK_FALSE(cell.accuracy.has_value());
    CHECK_FALSE(cell.error.empty());
  }
  CHECK_FALSE(std::filesystem::exists(options.cache_dir));  // nothing cached

  const RenderedTable table = render_table(cells);
  CHECK_FALSE(table.complete);
  CHECK(table.text.find("—") != std::string::npos);
  CHECK(table.text.find("warning") != std::string::npos);
}

TEST_CASE("percent formatting uses exactly two decimals") {
  CHECK(format_percent(1.0) == "100.00%");
  CHECK(format_percent(0.5) == "50.00%");
  CHECK(format_percent(31.0 / 36.0) == "86.11%");
  CHECK(format_percent(33.0 / 36.0) == "91.67%");
  CHECK(format_percent(11.0 / 36.0) == "30.56%");
}

TEST_CASE("rendered table reproduces the reference fixture byte-for-byte") {
  const RenderedTable table = render_table(table1_fixture_cells());
  const std::string golden = read_file(std::string(GEPA_TEST_DATA_DIR) + "/table1_golden.txt");
  REQUIRE_FALSE(golden.empty());
  CHECK(table.text == golden);
  CHECK(table.complete);

  // Spot-check the headline value and the tie-bolding contract.
  CHECK(table.text.find("*100.00%*") != std::string::npos);
  std::size_t bold_9167 = 0;
  for (std::size_t pos = table.text.find("*91.67%*"); pos != std::string::npos;
       pos = table.text.find("*91.67%*", pos + 1))
    ++bold_9167;
  // GPT block bolds three 91.67% cells, GLM block two more.
  CHECK(bold_9167 == 5);
}

TEST_CASE("table rendering is a pure function of the cells") {
  const RenderedTable a = render_table(table1_fixture_cells());
  const RenderedTable b = render_table(table1_fixture_cells());
  CHECK(a.text == b.text);
  CHECK(a.csv == b.csv);
  CHECK(a.csv.rfind("model,method,algebra,gpqa\n", 0) == 0);
}

TEST_CASE("cell accuracy equals the mean of its outcome scores exactly") {
  TempDir dir("gepa-transfer");
  TriggerBackend backend;
  const Pools pools = trigger_pools(3, 3);
  TransferOptions options;
  options.prover = trigger_prover(dir);
  options.retry.base_backoff_s = 0;
  std::map<std::string, Backend*> backends{{"m", &backend}};

  // Prompts with partial token coverage: 1 of 3 algebra, 2 of 3 gpqa.
  std::map<PromptRole, Prompt> prompts;
  for (PromptRole role : all_prompt_roles()) {
    Prompt p;
    p.id = to_string(role);
    p.text = "partial TOK_a0 TOK_g0 TOK_g1";
    p.origin = PromptOrigin::imported;
    p.iteration_born = 1;
    prompts[role] = std::move(p);
  }
  const auto cells = build_matrix(prompts, {profile_named("m")}, backends, pools, options, nullptr);
  for (const MatrixCell& cell : cells) {
    REQUIRE(cell.accuracy.has_value());
    if (cell.benchmark == Task::algebra)
      CHECK(*cell.accuracy == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    else
      CHECK(*cell.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
}
