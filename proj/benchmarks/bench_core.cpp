#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gepa/analysis.hpp"
#include "gepa/evaluation.hpp"
#include "gepa/pareto.hpp"
#include "gepa/types.hpp"

namespace {

using namespace gepa;

ScoreVector random_vector(std::mt19937_64& rng, const std::string& id, int instances_per_task) {
  ScoreVector v;
  v.prompt_id = id;
  for (int i = 0; i < instances_per_task; ++i) {
    v.scores["a" + std::to_string(i)] = ScoredInstance{Task::algebra, static_cast<int>(rng() % 2)};
    v.scores["g" + std::to_string(i)] = ScoredInstance{Task::gpqa, static_cast<int>(rng() % 2)};
  }
  return v;
}

Prompt child_prompt(const std::string& id, int born) {
  Prompt p;
  p.id = id;
  p.text = "candidate " + id;
  p.parent_id = "seed";
  p.iteration_born = born;
  p.origin = PromptOrigin::evolved;
  return p;
}

void BM_update_frontier(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::vector<FrontierMember> candidates;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
    candidates.push_back({child_prompt("c" + std::to_string(i), i + 1),
                          random_vector(rng, "c" + std::to_string(i), 16)});
  for (auto _ : state) {
    Frontier frontier;
    for (const FrontierMember& m : candidates) frontier = update_frontier(frontier, m);
    benchmark::DoNotOptimize(frontier.size());
  }
}
BENCHMARK(BM_update_frontier)->Arg(32)->Arg(128)->Arg(512);

void BM_dominates(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const ScoreVector a = random_vector(rng, "a", 64);
  const ScoreVector b = random_vector(rng, "b", 64);
  for (auto _ : state) benchmark::DoNotOptimize(dominates(a, b));
}
BENCHMARK(BM_dominates);

void BM_extract_final_answer(benchmark::State& state) {
  std::string text;
  while (text.size() < static_cast<std::size_t>(state.range(0)))
    text += "reasoning about answers without concluding anything yet; ";
  text += "Final answer: C";
  const std::vector<std::string> labels = {"A", "B", "C", "D"};
  for (auto _ : state) benchmark::DoNotOptimize(extract_final_answer(text, labels));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_extract_final_answer)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

void BM_pca_project(benchmark::State& state) {
  std::mt19937_64 rng(3);
  EmbeddingTrace trace;
  const int points = static_cast<int>(state.range(0));
  for (int i = 0; i < points; ++i) {
    std::vector<double> v(64);
    for (double& x : v)
      x = static_cast<double>(rng() >> 11) / static_cast<double>(1ull << 53) - 0.5;
    trace.iterations.push_back(i);
    trace.vectors.push_back(std::move(v));
  }
  for (auto _ : state) {
    const PcaResult result = pca_project(trace);
    benchmark::DoNotOptimize(result.variance1);
  }
}
BENCHMARK(BM_pca_project)->Arg(32)->Arg(256);

void BM_drift_metrics(benchmark::State& state) {
  std::mt19937_64 rng(5);
  EmbeddingTrace trace;
  std::vector<double> current(64, 0.0);
  current[0] = 4.0;
  for (int i = 0; i < 512; ++i) {
    for (double& x : current)
      x += 0.01 * (static_cast<double>(rng() >> 11) / static_cast<double>(1ull << 53) - 0.5);
    trace.iterations.push_back(i);
    trace.vectors.push_back(current);
  }
  for (auto _ : state) {
    const DriftMetrics metrics = drift_metrics(trace);
    benchmark::DoNotOptimize(metrics.direction_consistency);
  }
}
BENCHMARK(BM_drift_metrics);

}  // namespace

BENCHMARK_MAIN();
