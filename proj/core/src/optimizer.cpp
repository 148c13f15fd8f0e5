#include "gepa/optimizer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gepa/error.hpp"

namespace gepa {

const EvaluationOutcome* OutcomeCache::get(const std::string& prompt_id,
                                           const std::string& instance_id) const {
  auto it = cache_.find({prompt_id, instance_id});
  return it == cache_.end() ? nullptr : &it->second;
}

void OutcomeCache::put(const std::string& prompt_id, const EvaluationOutcome& outcome) {
  cache_[{prompt_id, outcome.instance_id}] = outcome;
}

std::vector<std::string> resolve_eval_set(const OptimizationConfig& config, const Pools& pools) {
  if (!config.frontier_eval_set.empty()) return config.frontier_eval_set;
  return pools.all_ids();
}

void validate_against_pools(const OptimizationConfig& config, const Pools& pools) {
  validate(config);
  if (static_cast<std::size_t>(config.sample_algebra) > pools.algebra.size())
    raise(ErrorKind::config, "sample_algebra " + std::to_string(config.sample_algebra) +
                                 " exceeds algebra pool size " + std::to_string(pools.algebra.size()));
  if (static_cast<std::size_t>(config.sample_gpqa) > pools.gpqa.size())
    raise(ErrorKind::config, "sample_gpqa " + std::to_string(config.sample_gpqa) +
                                 " exceeds gpqa pool size " + std::to_string(pools.gpqa.size()));
  bool has_algebra = false, has_gpqa = false;
  for (const std::string& id : config.frontier_eval_set) {
    const TaskInstance* inst = pools.find(id);
    if (inst == nullptr)
      raise(ErrorKind::config, "frontier_eval_set id '" + id + "' is not in the pools");
    (inst->task == Task::algebra ? has_algebra : has_gpqa) = true;
  }
  if (!config.frontier_eval_set.empty() && (!has_algebra || !has_gpqa))
    raise(ErrorKind::config,
          "frontier_eval_set must cover both tasks; frontier vectors may not leave a task unscored");
}

namespace {

std::vector<TaskInstance> eval_set_instances(const OptimizationConfig& config, const Pools& pools) {
  std::vector<TaskInstance> instances;
  instances.reserve(config.frontier_eval_set.size());
  for (const std::string& id : config.frontier_eval_set) {
    const TaskInstance* inst = pools.find(id);
    if (inst == nullptr) raise(ErrorKind::config, "frontier_eval_set id '" + id + "' is not in the pools");
    instances.push_back(*inst);
  }
  return instances;
}

BatchEvaluation evaluate_cached(const Prompt& prompt, const std::vector<TaskInstance>& instances,
                                OptimizerContext& ctx) {
  std::vector<EvaluationOutcome> outcomes(instances.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (const EvaluationOutcome* hit = ctx.cache.get(prompt.id, instances[i].id); hit != nullptr) {
      outcomes[i] = *hit;
    } else {
      misses.push_back(i);
    }
  }
  if (!misses.empty()) {
    std::vector<TaskInstance> pending;
    pending.reserve(misses.size());
    for (std::size_t i : misses) pending.push_back(instances[i]);
    BatchEvaluation fresh = evaluate_batch(prompt, pending, ctx.eval);
    for (std::size_t k = 0; k < misses.size(); ++k) {
      outcomes[misses[k]] = fresh.outcomes[k];
      ctx.cache.put(prompt.id, fresh.outcomes[k]);
    }
  }
  BatchEvaluation result;
  result.scores.prompt_id = prompt.id;
  for (std::size_t i = 0; i < instances.size(); ++i)
    result.scores.scores[instances[i].id] = ScoredInstance{instances[i].task, outcomes[i].score};
  result.outcomes = std::move(outcomes);
  return result;
}

ScoreVector score_on_eval_set(const Prompt& prompt, OptimizerContext& ctx,
                              const OptimizationConfig& config) {
  return evaluate_cached(prompt, eval_set_instances(config, ctx.pools), ctx).scores;
}

std::vector<std::pair<std::string, TaskAccuracies>> frontier_snapshot(const Frontier& f) {
  std::vector<std::pair<std::string, TaskAccuracies>> out;
  out.reserve(f.size());
  for (const FrontierMember& m : f.members()) out.emplace_back(m.prompt.id, m.scores.by_task());
  return out;
}

std::vector<Prompt> rebuild_population(const Frontier& frontier, const Prompt& child) {
  std::vector<Prompt> population;
  population.reserve(frontier.size() + 1);
  for (const FrontierMember& m : frontier.members()) population.push_back(m.prompt);
  if (frontier.find(child.id) == nullptr) {
    auto pos = std::lower_bound(population.begin(), population.end(), child.id,
                                [](const Prompt& p, const std::string& id) { return p.id < id; });
    population.insert(pos, child);
  }
  return population;
}

void note(OptimizerContext& ctx, const std::string& message) {
  if (ctx.progress) ctx.progress(message);
}

}  // namespace

RunState init_run_state(const OptimizationConfig& config, const Prompt& seed, OptimizerContext& ctx) {
  validate(seed);
  if (seed.origin != PromptOrigin::seed)
    raise(ErrorKind::invalid_argument, "initial prompt must have origin seed");
  validate_against_pools(config, ctx.pools);
  if (config.frontier_eval_set.empty())
    raise(ErrorKind::invalid_state, "frontier_eval_set must be resolved before initialization");

  RunState state;
  state.config = config;
  state.rng = Rng(config.rng_seed);
  state.frontier = Frontier(config.frontier_capacity, config.weight_algebra, config.weight_gpqa);
  note(ctx, "scoring seed prompt on " + std::to_string(config.frontier_eval_set.size()) +
                " frontier eval instances");
  const ScoreVector seed_scores = score_on_eval_set(seed, ctx, config);
  state.frontier = update_frontier(state.frontier, FrontierMember{seed, seed_scores});
  state.population = {seed};
  return state;
}

StepResult step(RunState state, OptimizerContext& ctx) {
  const int iteration = state.completed_iterations + 1;
  if (iteration > state.config.iterations)
    raise(ErrorKind::invalid_state, "all " + std::to_string(state.config.iterations) +
                                        " iterations are already complete");

  const double best_before = state.frontier.empty() ? 0.0 : best_scalarized(state.frontier);

  // Draw order is fixed: candidate, then batch. Evaluation and evolution
  // never touch the rng, so intra-batch concurrency cannot perturb replay.
  const Prompt sampled = sample_candidate(state.frontier, state.population, state.rng);
  const std::vector<TaskInstance> batch =
      sample_batch(ctx.pools.algebra, ctx.pools.gpqa, state.config.sample_algebra,
                   state.config.sample_gpqa, state.rng);
  const std::string rng_digest = state.rng.state_digest();

  try {
    const BatchEvaluation minibatch = evaluate_cached(sampled, batch, ctx);

    std::vector<EvaluationOutcome> failures;
    std::vector<EvaluationOutcome> successes;
    for (const EvaluationOutcome& o : minibatch.outcomes)
      (o.score == 0 ? failures : successes).push_back(o);

    const CritiqueRecord crit =
        failures.empty()
            ? critique_no_errors(*ctx.eval.backend, ctx.templates, ctx.critique_options, sampled,
                                 successes, batch, iteration, ctx.evolve_options)
            : critique(*ctx.eval.backend, ctx.templates, ctx.critique_options, sampled, failures,
                       batch, iteration, ctx.evolve_options);

    const Prompt child = evolve(*ctx.eval.backend, ctx.templates, sampled, crit, iteration,
                                ctx.evolve_options);
    const ScoreVector child_scores = score_on_eval_set(child, ctx, state.config);

    state.frontier = update_frontier(state.frontier, FrontierMember{child, child_scores});
    state.population = rebuild_population(state.frontier, child);
    state.completed_iterations = iteration;

    if (best_scalarized(state.frontier) + 1e-12 < best_before)
      raise(ErrorKind::invalid_state, "frontier best scalarized score decreased");

    StepRecord record;
    record.iteration = iteration;
    record.sampled_prompt_id = sampled.id;
    for (const TaskInstance& inst : batch) record.batch_instance_ids.push_back(inst.id);
    record.minibatch_scores = minibatch.scores;
    for (const auto& [id, entry] : minibatch.scores.scores)
      if (entry.score == 0) record.error_instance_ids.push_back(id);
    record.critique = crit;
    record.child = child;
    record.child_eval_scores = child_scores;
    record.frontier_after = frontier_snapshot(state.frontier);
    record.rng_state_digest = rng_digest;
    state.records.emplace_back(std::move(record));

    note(ctx, "iteration " + std::to_string(iteration) + ": sampled " + sampled.id +
                  ", frontier size " + std::to_string(state.frontier.size()));
    return {std::move(state), false};
  } catch (const BackendError& e) {
    state.records.emplace_back(ErrorRecord{iteration, e.what(), rng_digest});
    note(ctx, "iteration " + std::to_string(iteration) + " aborted: " + e.what());
    return {std::move(state), true};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::evolution_failed) throw;
    state.records.emplace_back(ErrorRecord{iteration, e.what(), rng_digest});
    note(ctx, "iteration " + std::to_string(iteration) + " aborted: " + e.what());
    return {std::move(state), true};
  }
}

namespace {

class RunLogWriter {
 public:
  static RunLogWriter create(const std::string& path, const RunLogHeader& header) {
    RunLogWriter w(path, std::ios::trunc);
    w.write_line(header_to_line(header));
    return w;
  }

  static RunLogWriter append_to(const std::string& path) { return RunLogWriter(path, std::ios::app); }

  void append(const RunRecord& record) { write_line(record_to_line(record)); }

 private:
  RunLogWriter(const std::string& path, std::ios::openmode mode) : out_(path, std::ios::binary | mode) {
    if (!out_) raise(ErrorKind::io, "cannot open run log '" + path + "'");
  }

  void write_line(const std::string& line) {
    out_ << line << '\n';
    out_.flush();  // records must survive a crash of the next iteration
  }

  std::ofstream out_;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
}

void emit_prompt_files(const std::string& out_dir, const Prompt& seed, const Frontier& frontier) {
  write_text_file(out_dir + "/gepa_optimized_baseline.txt", seed.text + "\n");
  write_text_file(out_dir + "/gepa_optimized_final.txt", best_member(frontier).prompt.text + "\n");
}

RunResult run_loop(RunState state, OptimizerContext& ctx, RunLogWriter writer,
                   const Prompt& seed, const std::string& out_dir, const std::string& log_path) {
  bool aborted = false;
  while (state.completed_iterations < state.config.iterations) {
    StepResult result = step(std::move(state), ctx);
    state = std::move(result.state);
    writer.append(state.records.back());
    if (result.aborted) {
      aborted = true;
      break;
    }
  }
  emit_prompt_files(out_dir, seed, state.frontier);
  return {state.frontier, log_path, aborted};
}

OptimizationConfig resolved_config(const OptimizationConfig& config, const Pools& pools) {
  OptimizationConfig out = config;
  out.frontier_eval_set = resolve_eval_set(config, pools);
  return out;
}

}  // namespace

RunResult run(const OptimizationConfig& config, const Prompt& seed, OptimizerContext& ctx,
              const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const OptimizationConfig cfg = resolved_config(config, ctx.pools);
  RunState state = init_run_state(cfg, seed, ctx);

  RunLogHeader header;
  header.config = cfg;
  header.pool_digest = pool_digest(ctx.pools);
  header.seed_prompt = seed;
  header.seed_eval_scores = state.frontier.members().front().scores;

  const std::string log_path = out_dir + "/run_log.jsonl";
  RunLogWriter writer = RunLogWriter::create(log_path, header);
  return run_loop(std::move(state), ctx, std::move(writer), seed, out_dir, log_path);
}

namespace {

std::string diff_configs(const OptimizationConfig& a, const OptimizationConfig& b) {
  std::ostringstream diff;
  auto field = [&](const std::string& name, const std::string& log_value, const std::string& now) {
    if (log_value != now) diff << "  " << name << ": log=" << log_value << " supplied=" << now << "\n";
  };
  field("iterations", std::to_string(a.iterations), std::to_string(b.iterations));
  field("sample_algebra", std::to_string(a.sample_algebra), std::to_string(b.sample_algebra));
  field("sample_gpqa", std::to_string(a.sample_gpqa), std::to_string(b.sample_gpqa));
  field("rng_seed", std::to_string(a.rng_seed), std::to_string(b.rng_seed));
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const std::string& x : v) s += x + ",";
    return s;
  };
  field("frontier_eval_set", join(a.frontier_eval_set), join(b.frontier_eval_set));
  field("weight_algebra", std::to_string(a.weight_algebra), std::to_string(b.weight_algebra));
  field("weight_gpqa", std::to_string(a.weight_gpqa), std::to_string(b.weight_gpqa));
  field("frontier_capacity",
        a.frontier_capacity ? std::to_string(*a.frontier_capacity) : "none",
        b.frontier_capacity ? std::to_string(*b.frontier_capacity) : "none");
  return diff.str();
}

}  // namespace

RunState replay(const ParsedRunLog& log, const Pools& pools) {
  if (!log.header) raise(ErrorKind::invalid_state, "cannot replay an empty run log");
  const RunLogHeader& header = *log.header;

  RunState state;
  state.config = header.config;
  state.rng = Rng(header.config.rng_seed);
  state.frontier =
      Frontier(header.config.frontier_capacity, header.config.weight_algebra, header.config.weight_gpqa);
  state.frontier = update_frontier(state.frontier, FrontierMember{header.seed_prompt, header.seed_eval_scores});
  state.population = {header.seed_prompt};

  for (const RunRecord& record : log.records) {
    if (const auto* error = std::get_if<ErrorRecord>(&record)) {
      // The failed attempt consumed no durable state; check its draws on a clone.
      Rng probe = state.rng;
      sample_candidate(state.frontier, state.population, probe);
      sample_batch(pools.algebra, pools.gpqa, state.config.sample_algebra, state.config.sample_gpqa,
                   probe);
      if (probe.state_digest() != error->rng_state_digest)
        raise(ErrorKind::digest_mismatch, "replay diverged at failed iteration " +
                                              std::to_string(error->iteration));
      state.records.push_back(record);
      continue;
    }

    const auto& step_record = std::get<StepRecord>(record);
    const Prompt sampled = sample_candidate(state.frontier, state.population, state.rng);
    if (sampled.id != step_record.sampled_prompt_id)
      raise(ErrorKind::digest_mismatch,
            "replay sampled '" + sampled.id + "' but the log recorded '" +
                step_record.sampled_prompt_id + "' at iteration " + std::to_string(step_record.iteration));
    const std::vector<TaskInstance> batch =
        sample_batch(pools.algebra, pools.gpqa, state.config.sample_algebra, state.config.sample_gpqa,
                     state.rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch[i].id != step_record.batch_instance_ids.at(i))
        raise(ErrorKind::digest_mismatch,
              "replay batch diverged at iteration " + std::to_string(step_record.iteration));
    }
    if (state.rng.state_digest() != step_record.rng_state_digest)
      raise(ErrorKind::digest_mismatch,
            "rng state diverged at iteration " + std::to_string(step_record.iteration));

    state.frontier =
        update_frontier(state.frontier, FrontierMember{step_record.child, step_record.child_eval_scores});
    const std::vector<std::pair<std::string, TaskAccuracies>> snapshot = frontier_snapshot(state.frontier);
    if (snapshot.size() != step_record.frontier_after.size())
      raise(ErrorKind::digest_mismatch,
            "frontier size diverged at iteration " + std::to_string(step_record.iteration));
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
      if (snapshot[i].first != step_record.frontier_after[i].first)
        raise(ErrorKind::digest_mismatch,
              "frontier membership diverged at iteration " + std::to_string(step_record.iteration));
    }
    state.population = rebuild_population(state.frontier, step_record.child);
    state.completed_iterations = step_record.iteration;
    state.records.push_back(record);
  }
  return state;
}

RunResult resume(const std::string& log_path, const OptimizationConfig& config, const Prompt& seed,
                 OptimizerContext& ctx, const std::string& out_dir) {
  const ParsedRunLog log = parse_run_log(log_path);
  if (!log.header) return run(config, seed, ctx, out_dir);  // empty log: fresh run

  const OptimizationConfig cfg = resolved_config(config, ctx.pools);
  const std::string diff = diff_configs(log.header->config, cfg);
  if (!diff.empty())
    raise(ErrorKind::digest_mismatch, "run log config does not match the supplied config:\n" + diff);
  const std::string pools_now = pool_digest(ctx.pools);
  if (log.header->pool_digest != pools_now)
    raise(ErrorKind::digest_mismatch, "pool digest mismatch: log=" + log.header->pool_digest +
                                          " supplied=" + pools_now);
  if (log.header->seed_prompt.text != seed.text || log.header->seed_prompt.id != seed.id)
    raise(ErrorKind::digest_mismatch, "seed prompt does not match the one recorded in the log");

  if (log.torn_final_line) {
    std::filesystem::resize_file(log_path, log.intact_bytes);
  }

  RunState state = replay(log, ctx.pools);
  RunLogWriter writer = RunLogWriter::append_to(log_path);
  return run_loop(std::move(state), ctx, std::move(writer), log.header->seed_prompt, out_dir, log_path);
}

}  // namespace gepa
