// gepa: evolutionary multi-objective prompt optimization pipeline.
// Subcommands: optimize, evaluate, transfer, analyze, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gepa/analysis.hpp"
#include "gepa/config.hpp"
#include "gepa/dataset.hpp"
#include "gepa/error.hpp"
#include "gepa/optimizer.hpp"
#include "gepa/transfer.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file (JSON)")->required();
  cmd->add_option("--set", args.overrides, "override a declared config key, e.g. --set optimization.iterations=5");
  cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "shorthand for --set optimization.rng_seed=N");
  cmd->add_flag("-v,--verbose", args.verbose, "progress output on stderr");
}

gepa::RunConfig load_config_with_overrides(const CommonArgs& args) {
  gepa::RunConfig config = gepa::load_run_config(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      gepa::raise(gepa::ErrorKind::config, "--set expects key=value, got '" + kv + "'");
    gepa::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed.has_value()) config.optimization.rng_seed = *args.seed;
  return config;
}

gepa::Pools load_pools_checked(const gepa::RunConfig& config) {
  if (config.algebra_path.empty())
    gepa::raise(gepa::ErrorKind::config, "datasets.algebra_path is not set");
  if (config.gpqa_path.empty())
    gepa::raise(gepa::ErrorKind::config, "datasets.gpqa_path is not set");
  return gepa::load_pools(config.algebra_path, config.gpqa_path);
}

gepa::PromptTemplates load_templates(const gepa::RunConfig& config) {
  if (config.templates_dir.empty()) return gepa::PromptTemplates::defaults();
  return gepa::PromptTemplates::load_dir(config.templates_dir);
}

std::string format_accuracy(const std::optional<double>& value) {
  if (!value.has_value()) return "unscored";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *value);
  return buf;
}

void print_frontier(const gepa::Frontier& frontier) {
  std::cout << "frontier (" << frontier.size() << " member" << (frontier.size() == 1 ? "" : "s")
            << "):\n";
  for (const gepa::FrontierMember& m : frontier.members()) {
    const gepa::TaskAccuracies acc = m.scores.by_task();
    std::cout << "  " << m.prompt.id << "  algebra=" << format_accuracy(acc.algebra)
              << "  gpqa=" << format_accuracy(acc.gpqa) << "  born=" << m.prompt.iteration_born
              << "\n";
  }
  const gepa::FrontierMember& best = gepa::best_member(frontier);
  std::cout << "best (scalarized): " << best.prompt.id << "\n";
}

gepa::OptimizerContext make_optimizer_context(const gepa::RunConfig& config, gepa::Pools pools,
                                              gepa::BackendSet& backends, bool verbose) {
  if (config.optimizer_profile.empty())
    gepa::raise(gepa::ErrorKind::config, "optimizer_profile is not set");
  const gepa::BackendProfile& profile = backends.profile(config.optimizer_profile);

  gepa::OptimizerContext ctx;
  ctx.pools = std::move(pools);
  ctx.eval.backend = &backends.get(config.optimizer_profile);
  ctx.eval.prover = config.prover;
  ctx.eval.retry = config.evaluation.retry;
  ctx.eval.parallelism = config.evaluation.parallelism;
  ctx.eval.temperature = profile.eval_temperature;
  ctx.templates = load_templates(config);
  ctx.critique_options = config.critique;
  ctx.evolve_options.temperature = profile.evolve_temperature;
  if (verbose) {
    ctx.progress = [](const std::string& message) { std::cerr << "[gepa] " << message << "\n"; };
  }
  return ctx;
}

int cmd_optimize(const CommonArgs& args, bool resume_run) {
  const gepa::RunConfig config = load_config_with_overrides(args);
  gepa::Pools pools = load_pools_checked(config);
  const gepa::Prompt seed = gepa::load_seed_prompt(config);
  gepa::BackendSet backends(config.backends);
  gepa::OptimizerContext ctx = make_optimizer_context(config, std::move(pools), backends, args.verbose);

  const std::string log_path = args.out_dir + "/run_log.jsonl";
  const gepa::RunResult result =
      resume_run ? gepa::resume(log_path, config.optimization, seed, ctx, args.out_dir)
                 : gepa::run(config.optimization, seed, ctx, args.out_dir);

  print_frontier(result.frontier);
  std::cout << "run log: " << result.log_path << "\n";
  std::cout << "baseline prompt: " << args.out_dir << "/gepa_optimized_baseline.txt\n";
  std::cout << "final prompt: " << args.out_dir << "/gepa_optimized_final.txt\n";
  if (result.aborted) {
    std::cerr << "run aborted before completing all iterations; resume with --resume\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_evaluate(const CommonArgs& args, const std::string& prompt_path, std::string profile_name) {
  const gepa::RunConfig config = load_config_with_overrides(args);
  gepa::Pools pools = load_pools_checked(config);
  gepa::BackendSet backends(config.backends);
  if (profile_name.empty()) profile_name = config.optimizer_profile;
  if (profile_name.empty())
    gepa::raise(gepa::ErrorKind::config, "no profile given and optimizer_profile is not set");

  gepa::Prompt prompt;
  prompt.id = "evaluated";
  prompt.origin = gepa::PromptOrigin::imported;
  prompt.iteration_born = 1;  // imported prompts carry a nonzero birth marker
  {
    std::ifstream in(prompt_path, std::ios::binary);
    if (!in) gepa::raise(gepa::ErrorKind::config, "cannot open prompt file '" + prompt_path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    prompt.text = buffer.str();
    while (!prompt.text.empty() && (prompt.text.back() == '\n' || prompt.text.back() == '\r'))
      prompt.text.pop_back();
  }
  gepa::validate(prompt);

  gepa::EvaluationContext eval;
  eval.backend = &backends.get(profile_name);
  eval.prover = config.prover;
  eval.retry = config.evaluation.retry;
  eval.parallelism = config.evaluation.parallelism;
  eval.temperature = backends.profile(profile_name).eval_temperature;

  std::vector<gepa::TaskInstance> all = pools.algebra;
  all.insert(all.end(), pools.gpqa.begin(), pools.gpqa.end());
  if (all.empty()) gepa::raise(gepa::ErrorKind::config, "both pools are empty");
  const gepa::BatchEvaluation result = gepa::evaluate_batch(prompt, all, eval);

  const gepa::TaskAccuracies acc = result.scores.by_task();
  std::cout << "algebra accuracy: " << format_accuracy(acc.algebra) << "\n";
  std::cout << "gpqa accuracy: " << format_accuracy(acc.gpqa) << "\n";
  return kExitOk;
}

std::map<gepa::PromptRole, gepa::Prompt> load_role_prompts(const gepa::RunConfig& config) {
  std::map<gepa::PromptRole, gepa::Prompt> prompts;
  for (gepa::PromptRole role : gepa::all_prompt_roles()) {
    const auto it = config.transfer.prompt_paths.find(role);
    if (it == config.transfer.prompt_paths.end())
      gepa::raise(gepa::ErrorKind::config,
                  std::string("transfer.prompt_paths is missing role '") + gepa::to_string(role) + "'");
    std::ifstream in(it->second, std::ios::binary);
    if (!in)
      gepa::raise(gepa::ErrorKind::config, "cannot open prompt file '" + it->second + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    gepa::Prompt prompt;
    prompt.id = gepa::to_string(role);
    prompt.origin = gepa::PromptOrigin::imported;
    prompt.iteration_born = 1;
    prompt.text = buffer.str();
    while (!prompt.text.empty() && (prompt.text.back() == '\n' || prompt.text.back() == '\r'))
      prompt.text.pop_back();
    gepa::validate(prompt);
    prompts[role] = std::move(prompt);
  }
  return prompts;
}

json cell_to_json(const gepa::MatrixCell& cell) {
  json j{{"model_name", cell.model_name},
         {"role", gepa::to_string(cell.role)},
         {"benchmark", gepa::to_string(cell.benchmark)},
         {"instance_count", cell.instance_count},
         {"outcome_digests", cell.outcome_digests},
         {"error", cell.error}};
  j["accuracy"] = cell.accuracy.has_value() ? json(*cell.accuracy) : json(nullptr);
  return j;
}

gepa::MatrixCell cell_from_json(const json& j) {
  gepa::MatrixCell cell;
  cell.model_name = j.at("model_name").get<std::string>();
  cell.role = gepa::prompt_role_from_string(j.at("role").get<std::string>());
  cell.benchmark = gepa::task_from_string(j.at("benchmark").get<std::string>());
  if (j.contains("accuracy") && !j.at("accuracy").is_null())
    cell.accuracy = j.at("accuracy").get<double>();
  cell.instance_count = j.value("instance_count", 0);
  if (j.contains("outcome_digests"))
    cell.outcome_digests = j.at("outcome_digests").get<std::vector<std::string>>();
  cell.error = j.value("error", "");
  return cell;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) gepa::raise(gepa::ErrorKind::io, "cannot write '" + path + "'");
  out << content;
}

int render_and_emit(const std::vector<gepa::MatrixCell>& cells, const std::string& out_dir,
                    bool strict) {
  const gepa::RenderedTable table = gepa::render_table(cells);
  std::cout << table.text;
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/transfer_report.txt", table.text);
  write_file(out_dir + "/transfer_report.csv", table.csv);

  json cells_json = json::array();
  for (const gepa::MatrixCell& cell : cells) cells_json.push_back(cell_to_json(cell));
  write_file(out_dir + "/transfer_cells.json", cells_json.dump(2) + "\n");

  if (!table.complete && strict) {
    std::cerr << "incomplete cells with --strict\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_transfer(const CommonArgs& args, bool strict) {
  const gepa::RunConfig config = load_config_with_overrides(args);
  const gepa::Pools pools = load_pools_checked(config);
  const std::map<gepa::PromptRole, gepa::Prompt> prompts = load_role_prompts(config);

  if (config.transfer.profiles.empty())
    gepa::raise(gepa::ErrorKind::config, "transfer.profiles is empty");
  gepa::BackendSet backends(config.backends);
  std::vector<gepa::BackendProfile> profiles;
  std::map<std::string, gepa::Backend*> backend_map;
  for (const std::string& name : config.transfer.profiles) {
    profiles.push_back(backends.profile(name));
    backend_map[name] = &backends.get(name);
  }

  gepa::TransferOptions options;
  options.cache_dir = config.transfer.cache_dir;
  options.prover = config.prover;
  options.retry = config.evaluation.retry;
  options.parallelism = config.evaluation.parallelism;

  gepa::BuildStats stats;
  const std::vector<gepa::MatrixCell> cells =
      gepa::build_matrix(prompts, profiles, backend_map, pools, options, &stats);
  if (args.verbose)
    std::cerr << "[gepa] evaluated " << stats.evaluated << ", cache hits " << stats.cache_hits << "\n";
  return render_and_emit(cells, args.out_dir, strict);
}

int cmd_report(const CommonArgs& args, bool strict) {
  const std::string cells_path = args.out_dir + "/transfer_cells.json";
  std::ifstream in(cells_path, std::ios::binary);
  if (!in)
    gepa::raise(gepa::ErrorKind::config,
                "no cell set at '" + cells_path + "'; run the transfer subcommand first");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) gepa::raise(gepa::ErrorKind::format, cells_path + ": invalid JSON");
  std::vector<gepa::MatrixCell> cells;
  for (const json& c : j) cells.push_back(cell_from_json(c));
  return render_and_emit(cells, args.out_dir, strict);
}

int cmd_analyze(const CommonArgs& args, const std::string& log_path, const std::string& kind) {
  const gepa::ParsedRunLog log = gepa::parse_run_log(log_path);
  if (!log.header)
    gepa::raise(gepa::ErrorKind::format, "run log '" + log_path + "' is empty or missing");
  std::filesystem::create_directories(args.out_dir);

  if (kind == "length") {
    const gepa::Trajectory trajectory = gepa::length_trajectory(log);
    const std::vector<std::string> paths = gepa::emit_trajectory(trajectory, args.out_dir);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", gepa::final_to_seed_ratio(trajectory));
    std::cout << "points: " << trajectory.iterations.size() << "\n";
    std::cout << "final/seed length ratio: " << buf << "\n";
    for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
    return kExitOk;
  }

  // kind == "embedding" (the option set is restricted by the parser)
  const gepa::RunConfig config = load_config_with_overrides(args);
  gepa::BackendSet backends(config.backends);
  std::string profile_name = config.analysis.embed_profile;
  if (profile_name.empty()) profile_name = config.optimizer_profile;
  if (profile_name.empty())
    gepa::raise(gepa::ErrorKind::config, "analysis.embed_profile is not set");
  gepa::Backend& backend = backends.get(profile_name);

  gepa::EmbeddingTrace trace;
  for (const auto& [iteration, text] : gepa::prompt_sequence(log)) {
    trace.iterations.push_back(iteration);
    trace.vectors.push_back(backend.embed(text));
  }
  gepa::validate(trace);

  const gepa::PcaResult pca = gepa::pca_project(trace);
  const gepa::DriftMetrics metrics = gepa::drift_metrics(trace);
  const std::optional<int> jump = gepa::detect_jump(trace);
  const std::vector<std::string> paths = gepa::emit_embedding(pca.trace, metrics, args.out_dir);

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", metrics.direction_consistency);
  std::cout << "points: " << trace.iterations.size() << "\n";
  std::cout << "direction consistency: " << buf << "\n";
  if (jump.has_value())
    std::cout << "jump at iteration " << *jump << "\n";
  else
    std::cout << "jump: none\n";
  for (const std::string& warning : metrics.warnings) std::cerr << "warning: " << warning << "\n";
  for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
  return kExitOk;
}

std::string schema_footer() {
  std::string footer = "Config override keys (--set key=value):\n";
  for (const gepa::ConfigKey& key : gepa::config_schema()) {
    footer += "  " + std::string(key.key) + " (" + key.type + "): " + key.description + "\n";
  }
  return footer;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolutionary multi-objective prompt optimization"};
  app.require_subcommand(1);
  app.footer(schema_footer());

  CommonArgs optimize_args;
  bool resume_run = false;
  CLI::App* optimize = app.add_subcommand("optimize", "run the optimization loop");
  add_common(optimize, optimize_args);
  optimize->add_flag("--resume", resume_run, "continue from the run log in --out");

  CommonArgs evaluate_args;
  std::string prompt_path;
  std::string profile_name;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score one prompt on the full pools");
  add_common(evaluate, evaluate_args);
  evaluate->add_option("--prompt", prompt_path, "prompt text file")->required();
  evaluate->add_option("--profile", profile_name, "backend profile (default: optimizer_profile)");

  CommonArgs transfer_args;
  bool transfer_strict = false;
  CLI::App* transfer = app.add_subcommand("transfer", "build the prompts x models x benchmarks matrix");
  add_common(transfer, transfer_args);
  transfer->add_flag("--strict", transfer_strict, "nonzero exit when any cell is incomplete");

  CommonArgs report_args;
  bool report_strict = false;
  CLI::App* report = app.add_subcommand("report", "re-render the transfer report from saved cells");
  report->add_option("--config", report_args.config_path, "run configuration file (unused, accepted for symmetry)");
  report->add_option("--out", report_args.out_dir, "output directory")->capture_default_str();
  report->add_flag("--strict", report_strict, "nonzero exit when any cell is incomplete");

  CommonArgs analyze_args;
  std::string log_path;
  std::string kind;
  CLI::App* analyze = app.add_subcommand("analyze", "post-hoc run-log analysis");
  add_common(analyze, analyze_args);
  analyze->add_option("--log", log_path, "run log to analyze")->required();
  analyze->add_option("kind", kind, "length | embedding")
      ->required()
      ->check(CLI::IsMember({"length", "embedding"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(optimize_args, resume_run);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args, prompt_path, profile_name);
    if (transfer->parsed()) return cmd_transfer(transfer_args, transfer_strict);
    if (report->parsed()) return cmd_report(report_args, report_strict);
    if (analyze->parsed()) return cmd_analyze(analyze_args, log_path, kind);
  } catch (const gepa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == gepa::ErrorKind::config ? kExitUsage : kExitRuntime;
  } catch (const gepa::BackendError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
