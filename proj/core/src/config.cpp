#include "gepa/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gepa/error.hpp"
#include "serialize.hpp"

namespace gepa {

using detail::json;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::config, "cannot open file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

BackendSettings backend_settings_from_json(const json& j) {
  BackendSettings s;
  s.profile.name = j.at("name").get<std::string>();
  s.kind = j.value("kind", "http");
  if (s.kind != "http" && s.kind != "scripted")
    raise(ErrorKind::config, "backend '" + s.profile.name + "': unknown kind '" + s.kind + "'");
  s.profile.endpoint = j.value("endpoint", "");
  s.profile.model_id = j.value("model_id", "");
  s.profile.auth_env_var = j.value("auth_env_var", "");
  s.profile.max_tokens = j.value("max_tokens", 1024);
  s.profile.eval_temperature = j.value("eval_temperature", 0.0);
  s.profile.evolve_temperature = j.value("evolve_temperature", 0.8);
  s.profile.request_timeout_s = j.value("request_timeout_s", 60.0);
  s.profile.embedding_dim = j.value("embedding_dim", 0);
  s.profile.rate_limit_per_s = j.value("rate_limit_per_s", 0.0);
  s.script_path = j.value("script_path", "");
  s.record_path = j.value("record_path", "");
  if (s.kind == "http" && s.profile.endpoint.empty())
    raise(ErrorKind::config, "backend '" + s.profile.name + "': http backend needs an endpoint");
  if (s.kind == "scripted" && s.script_path.empty())
    raise(ErrorKind::config, "backend '" + s.profile.name + "': scripted backend needs script_path");
  return s;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const std::string content = read_text_file(path);
  json j = json::parse(content, nullptr, false);
  if (j.is_discarded()) raise(ErrorKind::config, path + ": invalid JSON");

  RunConfig config;
  try {
    if (j.contains("optimization"))
      config.optimization = detail::optimization_config_from_json(j.at("optimization"));

    const json datasets = j.value("datasets", json::object());
    config.algebra_path = datasets.value("algebra_path", "");
    config.gpqa_path = datasets.value("gpqa_path", "");

    if (j.contains("prover")) {
      const json& p = j.at("prover");
      if (p.contains("command")) config.prover.command = p.at("command").get<std::vector<std::string>>();
      config.prover.workdir = p.value("workdir", "");
      config.prover.timeout_s = p.value("timeout_s", 60.0);
      if (p.contains("accept_exit_codes")) {
        config.prover.accept_exit_codes.clear();
        for (int code : p.at("accept_exit_codes").get<std::vector<int>>())
          config.prover.accept_exit_codes.insert(code);
      }
      config.prover.file_extension = p.value("file_extension", ".lean");
    }

    for (const json& b : j.value("backends", json::array()))
      config.backends.push_back(backend_settings_from_json(b));
    config.optimizer_profile = j.value("optimizer_profile", "");

    if (j.contains("seed_prompt")) {
      const json& s = j.at("seed_prompt");
      config.seed_prompt.id = s.value("id", "seed");
      config.seed_prompt.path = s.value("path", "");
      config.seed_prompt.text = s.value("text", "");
    }

    config.templates_dir = j.value("templates_dir", "");

    if (j.contains("evaluation")) {
      const json& e = j.at("evaluation");
      config.evaluation.parallelism = e.value("parallelism", 4);
      config.evaluation.retry.max_retries = e.value("max_retries", 3);
      config.evaluation.retry.base_backoff_s = e.value("retry_backoff_s", 1.0);
    }

    if (j.contains("critique")) {
      const json& c = j.at("critique");
      config.critique.digest_budget = c.value("digest_budget", std::size_t{8192});
      config.critique.statement_excerpt = c.value("statement_excerpt", std::size_t{512});
      config.critique.completion_excerpt = c.value("completion_excerpt", std::size_t{512});
    }

    if (j.contains("transfer")) {
      const json& t = j.at("transfer");
      const json prompt_paths = t.value("prompt_paths", json::object());
      for (const auto& [role, p] : prompt_paths.items())
        config.transfer.prompt_paths[prompt_role_from_string(role)] = p.get<std::string>();
      if (t.contains("profiles"))
        config.transfer.profiles = t.at("profiles").get<std::vector<std::string>>();
      config.transfer.cache_dir = t.value("cache_dir", "transfer_cache");
    }

    if (j.contains("analysis"))
      config.analysis.embed_profile = j.at("analysis").value("embed_profile", "");
  } catch (const json::exception& e) {
    raise(ErrorKind::config, path + ": " + e.what());
  }
  return config;
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    raise(ErrorKind::config, "override " + key + ": '" + value + "' is not an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    raise(ErrorKind::config, "override " + key + ": '" + value + "' is not an unsigned integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    raise(ErrorKind::config, "override " + key + ": '" + value + "' is not a number");
  }
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"optimization.iterations", "int", "number of optimization steps to run"},
      {"optimization.sample_algebra", "int", "algebra minibatch size per step"},
      {"optimization.sample_gpqa", "int", "gpqa minibatch size per step"},
      {"optimization.rng_seed", "uint64", "seed for all sampling"},
      {"optimization.frontier_eval_set", "id list", "comma-separated instance ids; empty = full pools"},
      {"optimization.weight_algebra", "real", "scalarization weight for algebra (tie-breaking only)"},
      {"optimization.weight_gpqa", "real", "scalarization weight for gpqa (tie-breaking only)"},
      {"optimization.frontier_capacity", "int|none", "optional frontier size bound"},
      {"datasets.algebra_path", "path", "JSONL file with algebra instances"},
      {"datasets.gpqa_path", "path", "JSONL file with gpqa instances"},
      {"prover.timeout_s", "real", "prover subprocess deadline in seconds"},
      {"prover.workdir", "path", "working directory for the prover"},
      {"prover.file_extension", "string", "extension of the generated proof file"},
      {"optimizer_profile", "name", "backend profile used for optimization, critique and evolution"},
      {"seed_prompt.id", "string", "identifier of the seed prompt"},
      {"seed_prompt.path", "path", "file with the seed prompt text"},
      {"seed_prompt.text", "string", "inline seed prompt text"},
      {"templates_dir", "path", "directory with meta-prompt template overrides"},
      {"evaluation.parallelism", "int", "bounded evaluation parallelism"},
      {"evaluation.max_retries", "int", "backend transport retries"},
      {"evaluation.retry_backoff_s", "real", "base backoff before the first retry"},
      {"critique.digest_budget", "int", "byte budget for the composed critic user message"},
      {"transfer.cache_dir", "path", "transfer evaluation cache directory"},
      {"analysis.embed_profile", "name", "backend profile used for prompt embeddings"},
  };
  return schema;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "optimization.iterations") {
    config.optimization.iterations = parse_int(key, value);
  } else if (key == "optimization.sample_algebra") {
    config.optimization.sample_algebra = parse_int(key, value);
  } else if (key == "optimization.sample_gpqa") {
    config.optimization.sample_gpqa = parse_int(key, value);
  } else if (key == "optimization.rng_seed") {
    config.optimization.rng_seed = parse_u64(key, value);
  } else if (key == "optimization.frontier_eval_set") {
    config.optimization.frontier_eval_set = split_csv(value);
  } else if (key == "optimization.weight_algebra") {
    config.optimization.weight_algebra = parse_double(key, value);
  } else if (key == "optimization.weight_gpqa") {
    config.optimization.weight_gpqa = parse_double(key, value);
  } else if (key == "optimization.frontier_capacity") {
    if (value == "none")
      config.optimization.frontier_capacity.reset();
    else
      config.optimization.frontier_capacity = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "datasets.algebra_path") {
    config.algebra_path = value;
  } else if (key == "datasets.gpqa_path") {
    config.gpqa_path = value;
  } else if (key == "prover.timeout_s") {
    config.prover.timeout_s = parse_double(key, value);
  } else if (key == "prover.workdir") {
    config.prover.workdir = value;
  } else if (key == "prover.file_extension") {
    config.prover.file_extension = value;
  } else if (key == "optimizer_profile") {
    config.optimizer_profile = value;
  } else if (key == "seed_prompt.id") {
    config.seed_prompt.id = value;
  } else if (key == "seed_prompt.path") {
    config.seed_prompt.path = value;
  } else if (key == "seed_prompt.text") {
    config.seed_prompt.text = value;
  } else if (key == "templates_dir") {
    config.templates_dir = value;
  } else if (key == "evaluation.parallelism") {
    config.evaluation.parallelism = parse_int(key, value);
  } else if (key == "evaluation.max_retries") {
    config.evaluation.retry.max_retries = parse_int(key, value);
  } else if (key == "evaluation.retry_backoff_s") {
    config.evaluation.retry.base_backoff_s = parse_double(key, value);
  } else if (key == "critique.digest_budget") {
    config.critique.digest_budget = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "transfer.cache_dir") {
    config.transfer.cache_dir = value;
  } else if (key == "analysis.embed_profile") {
    config.analysis.embed_profile = value;
  } else {
    raise(ErrorKind::config, "unknown override key '" + key + "' (see --help for declared keys)");
  }
}

Prompt load_seed_prompt(const RunConfig& config) {
  Prompt seed;
  seed.id = config.seed_prompt.id.empty() ? "seed" : config.seed_prompt.id;
  seed.origin = PromptOrigin::seed;
  seed.iteration_born = 0;
  if (!config.seed_prompt.path.empty()) {
    seed.text = read_text_file(config.seed_prompt.path);
    while (!seed.text.empty() && (seed.text.back() == '\n' || seed.text.back() == '\r'))
      seed.text.pop_back();
  } else {
    seed.text = config.seed_prompt.text;
  }
  if (seed.text.empty())
    raise(ErrorKind::config, "seed prompt is empty; set seed_prompt.path or seed_prompt.text");
  validate(seed);
  return seed;
}

BackendSet::BackendSet(std::vector<BackendSettings> settings) : settings_(std::move(settings)) {}

Backend& BackendSet::get(const std::string& name) {
  if (auto it = recorders_.find(name); it != recorders_.end()) return *it->second;
  if (auto it = owned_.find(name); it != owned_.end()) return *it->second;

  const BackendSettings* found = nullptr;
  for (const BackendSettings& s : settings_) {
    if (s.profile.name == name) {
      found = &s;
      break;
    }
  }
  if (found == nullptr) raise(ErrorKind::config, "no backend profile named '" + name + "'");

  std::unique_ptr<Backend> backend;
  if (found->kind == "scripted") {
    backend = ScriptedBackend::load(found->script_path);
  } else {
    backend = std::make_unique<HttpBackend>(found->profile);
  }
  Backend& inner = *backend;
  owned_[name] = std::move(backend);
  if (!found->record_path.empty()) {
    recorders_[name] = std::make_unique<RecordingBackend>(inner, found->record_path);
    return *recorders_[name];
  }
  return inner;
}

const BackendProfile& BackendSet::profile(const std::string& name) const {
  for (const BackendSettings& s : settings_) {
    if (s.profile.name == name) return s.profile;
  }
  raise(ErrorKind::config, "no backend profile named '" + name + "'");
}

std::map<std::string, Backend*> BackendSet::live_map() {
  std::map<std::string, Backend*> out;
  for (const BackendSettings& s : settings_) out[s.profile.name] = &get(s.profile.name);
  return out;
}

}  // namespace gepa
