#include "doctest.h"
#include "gepa/config.hpp"
#include "gepa/error.hpp"
#include "test_support.hpp"

using namespace gepa;
using namespace gepa::test;

namespace {

std::string minimal_config_json() {
  return R"({
    "optimization": {"iterations": 4, "sample_algebra": 2, "sample_gpqa": 2, "rng_seed": 7},
    "datasets": {"algebra_path": "alg.jsonl", "gpqa_path": "gp.jsonl"},
    "prover": {"command": ["/bin/true", "{file}"], "timeout_s": 12.5, "accept_exit_codes": [0, 4]},
    "backends": [
      {"name": "scripted-main", "kind": "scripted", "script_path": "script.json"},
      {"name": "remote", "kind": "http", "endpoint": "http://localhost:9/v1",
       "model_id": "m", "auth_env_var": "REMOTE_KEY", "eval_temperature": 0.0,
       "evolve_temperature": 0.9}
    ],
    "optimizer_profile": "scripted-main",
    "seed_prompt": {"id": "seed", "text": "be careful"},
    "evaluation": {"parallelism": 2, "max_retries": 1, "retry_backoff_s": 0.0},
    "transfer": {
      "prompt_paths": {"hand_simple": "p1.txt", "hand_cot": "p2.txt",
                        "gepa_baseline": "p3.txt", "gepa_final": "p4.txt"},
      "profiles": ["scripted-main"],
      "cache_dir": "cache"
    }
  })";
}

}  // namespace

TEST_CASE("run config round-trips the document fields") {
  TempDir dir("gepa-config");
  write_file(dir.file("config.json"), minimal_config_json());
  const RunConfig config = load_run_config(dir.file("config.json"));

  CHECK(config.optimization.iterations == 4);
  CHECK(config.optimization.rng_seed == 7);
  CHECK(config.algebra_path == "alg.jsonl");
  CHECK(config.prover.timeout_s == 12.5);
  CHECK(config.prover.accept_exit_codes == std::set<int>{0, 4});
  REQUIRE(config.backends.size() == 2);
  CHECK(config.backends[0].kind == "scripted");
  CHECK(config.backends[1].profile.evolve_temperature == 0.9);
  CHECK(config.backends[1].profile.auth_env_var == "REMOTE_KEY");
  CHECK(config.optimizer_profile == "scripted-main");
  CHECK(config.evaluation.retry.max_retries == 1);
  CHECK(config.transfer.prompt_paths.size() == 4);
}

TEST_CASE("overrides touch only declared keys") {
  TempDir dir("gepa-config");
  write_file(dir.file("config.json"), minimal_config_json());
  RunConfig config = load_run_config(dir.file("config.json"));

  apply_override(config, "optimization.iterations", "9");
  CHECK(config.optimization.iterations == 9);
  apply_override(config, "optimization.rng_seed", "123456789012345");
  CHECK(config.optimization.rng_seed == 123456789012345ull);
  apply_override(config, "optimization.frontier_eval_set", "a1,g1,g2");
  CHECK(config.optimization.frontier_eval_set == std::vector<std::string>{"a1", "g1", "g2"});
  apply_override(config, "optimization.frontier_capacity", "3");
  CHECK(config.optimization.frontier_capacity == std::size_t{3});
  apply_override(config, "optimization.frontier_capacity", "none");
  CHECK_FALSE(config.optimization.frontier_capacity.has_value());

  CHECK_THROWS_WITH_AS(apply_override(config, "no.such.key", "1"), doctest::Contains("no.such.key"),
                       Error);
  CHECK_THROWS_AS(apply_override(config, "optimization.iterations", "banana"), Error);
}

TEST_CASE("every schema key is applicable") {
  TempDir dir("gepa-config");
  write_file(dir.file("config.json"), minimal_config_json());
  RunConfig config = load_run_config(dir.file("config.json"));
  for (const ConfigKey& key : config_schema()) {
    std::string value = "1";
    const std::string type = key.type;
    if (type == "path" || type == "string" || type == "name") value = "x";
    if (type == "id list") value = "a,b";
    if (type == "real") value = "0.5";
    CHECK_NOTHROW(apply_override(config, key.key, value));
  }
}

TEST_CASE("seed prompt comes from inline text or file") {
  TempDir dir("gepa-config");
  write_file(dir.file("config.json"), minimal_config_json());
  RunConfig config = load_run_config(dir.file("config.json"));
  CHECK(load_seed_prompt(config).text == "be careful");

  write_file(dir.file("seed.txt"), "from a file\n");
  config.seed_prompt.path = dir.file("seed.txt");
  CHECK(load_seed_prompt(config).text == "from a file");

  config.seed_prompt.path.clear();
  config.seed_prompt.text.clear();
  CHECK_THROWS_AS(load_seed_prompt(config), Error);
}

TEST_CASE("backend set builds scripted backends and reports unknown names") {
  TempDir dir("gepa-config");
  write_file(dir.file("script.json"), R"({"default_response": "hi", "embedding_dim": 4})");

  BackendSettings settings;
  settings.profile.name = "s";
  settings.kind = "scripted";
  settings.script_path = dir.file("script.json");

  BackendSet backends({settings});
  CHECK(backends.get("s").generate("a", "b", {}) == "hi");
  CHECK(&backends.get("s") == &backends.get("s"));  // cached
  CHECK_THROWS_AS(backends.get("missing"), Error);
  CHECK(backends.profile("s").name == "s");
}

TEST_CASE("record_path wraps a backend with a capture recorder") {
  TempDir dir("gepa-config");
  write_file(dir.file("script.json"), R"({"default_response": "ok"})");

  BackendSettings settings;
  settings.profile.name = "s";
  settings.kind = "scripted";
  settings.script_path = dir.file("script.json");
  settings.record_path = dir.file("capture.jsonl");

  BackendSet backends({settings});
  backends.get("s").generate("sys", "usr", {});
  const std::string capture = read_file(dir.file("capture.jsonl"));
  CHECK(capture.find("\"sys\"") != std::string::npos);
  CHECK(capture.find("\"ok\"") != std::string::npos);

  auto replay = ScriptedBackend::load(dir.file("capture.jsonl"));
  CHECK(replay->generate("sys", "usr", {}) == "ok");
}

TEST_CASE("config errors carry the offending location") {
  TempDir dir("gepa-config");
  write_file(dir.file("bad.json"), "{nope");
  CHECK_THROWS_WITH_AS(load_run_config(dir.file("bad.json")), doctest::Contains("bad.json"), Error);

  write_file(dir.file("badkind.json"),
             R"({"backends":[{"name":"x","kind":"telepathy","endpoint":"http://h"}]})");
  CHECK_THROWS_WITH_AS(load_run_config(dir.file("badkind.json")), doctest::Contains("telepathy"),
                       Error);
}
