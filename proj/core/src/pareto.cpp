#include "gepa/pareto.hpp"

#include <algorithm>

#include "gepa/error.hpp"

namespace gepa {

namespace {

void require_comparable(const ScoreVector& a, const ScoreVector& b) {
  if (!a.same_coverage(b))
    raise(ErrorKind::coverage_mismatch, "score vectors for '" + a.prompt_id + "' and '" +
                                            b.prompt_id + "' cover different instance sets");
}

TaskAccuracies require_both_tasks(const ScoreVector& v) {
  const TaskAccuracies acc = v.by_task();
  if (!acc.algebra.has_value() || !acc.gpqa.has_value())
    raise(ErrorKind::unscored_task,
          "score vector for '" + v.prompt_id + "' leaves a task unscored");
  return acc;
}

// Total order used when reporting the best member and, inverted, when a
// capacity bound forces an eviction.
bool ranks_before(const FrontierMember& a, const FrontierMember& b, double wa, double wg) {
  const double sa = scalarized(a.scores.by_task(), wa, wg);
  const double sb = scalarized(b.scores.by_task(), wa, wg);
  if (sa != sb) return sa > sb;
  if (a.prompt.iteration_born != b.prompt.iteration_born)
    return a.prompt.iteration_born < b.prompt.iteration_born;
  return a.prompt.id < b.prompt.id;
}

}  // namespace

bool dominates(const ScoreVector& a, const ScoreVector& b) {
  require_comparable(a, b);
  const TaskAccuracies aa = require_both_tasks(a);
  const TaskAccuracies bb = require_both_tasks(b);
  const bool ge = *aa.algebra >= *bb.algebra && *aa.gpqa >= *bb.gpqa;
  const bool gt = *aa.algebra > *bb.algebra || *aa.gpqa > *bb.gpqa;
  return ge && gt;
}

const FrontierMember* Frontier::find(const std::string& prompt_id) const {
  auto it = std::lower_bound(members_.begin(), members_.end(), prompt_id,
                             [](const FrontierMember& m, const std::string& id) { return m.prompt.id < id; });
  if (it != members_.end() && it->prompt.id == prompt_id) return &*it;
  return nullptr;
}

Frontier update_frontier(const Frontier& f, FrontierMember candidate) {
  validate(candidate.prompt);
  require_both_tasks(candidate.scores);
  if (!f.members_.empty()) require_comparable(candidate.scores, f.members_.front().scores);

  Frontier next(f.capacity_, f.weight_algebra_, f.weight_gpqa_);
  if (f.find(candidate.prompt.id) != nullptr) return f;  // already a member

  bool candidate_dominated = false;
  for (const FrontierMember& m : f.members_) {
    if (dominates(m.scores, candidate.scores)) {
      candidate_dominated = true;
      break;
    }
  }
  for (const FrontierMember& m : f.members_) {
    if (candidate_dominated || !dominates(candidate.scores, m.scores)) next.members_.push_back(m);
  }
  if (!candidate_dominated) {
    auto pos = std::lower_bound(
        next.members_.begin(), next.members_.end(), candidate.prompt.id,
        [](const FrontierMember& m, const std::string& id) { return m.prompt.id < id; });
    next.members_.insert(pos, std::move(candidate));
  }

  if (next.capacity_.has_value() && next.members_.size() > *next.capacity_) {
    // Evict the member ranking last under the scalarized order.
    auto worst = next.members_.begin();
    for (auto it = std::next(next.members_.begin()); it != next.members_.end(); ++it) {
      if (ranks_before(*worst, *it, next.weight_algebra_, next.weight_gpqa_)) worst = it;
    }
    next.members_.erase(worst);
  }
  return next;
}

const Prompt& sample_candidate(const Frontier& f, const std::vector<Prompt>& population, Rng& rng) {
  if (!f.empty()) {
    const std::uint64_t i = rng.bounded(f.size());
    return f.members()[static_cast<std::size_t>(i)].prompt;
  }
  if (population.empty())
    raise(ErrorKind::invalid_state, "cannot sample a candidate: frontier and population are both empty");
  const std::uint64_t i = rng.bounded(population.size());
  return population[static_cast<std::size_t>(i)];
}

namespace {

// Partial Fisher-Yates; the first `count` slots end up in sampled order.
std::vector<std::size_t> sample_indices(std::size_t pool_size, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(pool_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

std::vector<TaskInstance> sample_batch(const std::vector<TaskInstance>& algebra_pool,
                                       const std::vector<TaskInstance>& gpqa_pool,
                                       int algebra_count, int gpqa_count, Rng& rng) {
  if (algebra_count < 0 || gpqa_count < 0)
    raise(ErrorKind::bounds, "negative batch size requested");
  if (static_cast<std::size_t>(algebra_count) > algebra_pool.size())
    raise(ErrorKind::bounds, "requested " + std::to_string(algebra_count) +
                                 " algebra instances from a pool of " + std::to_string(algebra_pool.size()));
  if (static_cast<std::size_t>(gpqa_count) > gpqa_pool.size())
    raise(ErrorKind::bounds, "requested " + std::to_string(gpqa_count) +
                                 " gpqa instances from a pool of " + std::to_string(gpqa_pool.size()));

  std::vector<TaskInstance> batch;
  batch.reserve(static_cast<std::size_t>(algebra_count + gpqa_count));
  for (std::size_t i : sample_indices(algebra_pool.size(), static_cast<std::size_t>(algebra_count), rng))
    batch.push_back(algebra_pool[i]);
  for (std::size_t i : sample_indices(gpqa_pool.size(), static_cast<std::size_t>(gpqa_count), rng))
    batch.push_back(gpqa_pool[i]);
  return batch;
}

const FrontierMember& best_member(const Frontier& f) {
  if (f.empty()) raise(ErrorKind::invalid_state, "best_member on an empty frontier");
  const FrontierMember* best = &f.members().front();
  for (const FrontierMember& m : f.members()) {
    if (ranks_before(m, *best, f.weight_algebra(), f.weight_gpqa())) best = &m;
  }
  return *best;
}

double best_scalarized(const Frontier& f) {
  return scalarized(best_member(f).scores.by_task(), f.weight_algebra(), f.weight_gpqa());
}

}  // namespace gepa
