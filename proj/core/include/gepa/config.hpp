#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gepa/backend.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/evolution.hpp"
#include "gepa/transfer.hpp"
#include "gepa/types.hpp"

namespace gepa {

struct SeedPromptConfig {
  std::string id = "seed";
  std::string path;  // file with the seed text; wins over inline text when both set
  std::string text;
};

struct BackendSettings {
  BackendProfile profile;
  std::string kind = "http";  // "http" | "scripted"
  std::string script_path;    // scripted: response script or capture file
  std::string record_path;    // non-empty: wrap with a capture recorder
};

struct EvaluationSettings {
  int parallelism = 4;
  RetryPolicy retry;
};

struct TransferSettings {
  std::map<PromptRole, std::string> prompt_paths;
  std::vector<std::string> profiles;
  std::string cache_dir = "transfer_cache";
};

struct AnalysisSettings {
  std::string embed_profile;  // defaults to optimizer_profile
};

// The single-document run configuration; a run is archivable as this file
// plus the datasets and prompt files it references.
struct RunConfig {
  OptimizationConfig optimization;
  std::string algebra_path;
  std::string gpqa_path;
  ProverConfig prover;
  std::vector<BackendSettings> backends;
  std::string optimizer_profile;
  SeedPromptConfig seed_prompt;
  std::string templates_dir;
  EvaluationSettings evaluation;
  CritiqueOptions critique;
  TransferSettings transfer;
  AnalysisSettings analysis;
};

RunConfig load_run_config(const std::string& path);

// Applies one `--set key=value` override. Unknown keys are config errors;
// only keys listed in config_schema() are accepted.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

struct ConfigKey {
  const char* key;
  const char* type;
  const char* description;
};

const std::vector<ConfigKey>& config_schema();

Prompt load_seed_prompt(const RunConfig& config);

// Owns the configured backends, constructed lazily by name.
class BackendSet {
 public:
  explicit BackendSet(std::vector<BackendSettings> settings);

  Backend& get(const std::string& name);
  const BackendProfile& profile(const std::string& name) const;
  std::map<std::string, Backend*> live_map();  // instantiates every profile

 private:
  std::vector<BackendSettings> settings_;
  std::map<std::string, std::unique_ptr<Backend>> owned_;
  std::map<std::string, std::unique_ptr<Backend>> recorders_;
};

}  // namespace gepa
