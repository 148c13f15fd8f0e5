#include "gepa/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "gepa/digest.hpp"
#include "gepa/error.hpp"
#include "serialize.hpp"

namespace gepa {

using detail::json;

const TaskInstance* Pools::find(const std::string& id) const {
  for (const TaskInstance& inst : algebra) {
    if (inst.id == id) return &inst;
  }
  for (const TaskInstance& inst : gpqa) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::vector<std::string> Pools::all_ids() const {
  std::vector<std::string> ids;
  ids.reserve(algebra.size() + gpqa.size());
  for (const TaskInstance& inst : algebra) ids.push_back(inst.id);
  for (const TaskInstance& inst : gpqa) ids.push_back(inst.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TaskInstance> load_instances(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open dataset file '" + path + "'");

  std::vector<TaskInstance> instances;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      raise(ErrorKind::format, path + ":" + std::to_string(line_no) + ": invalid JSON");
    try {
      instances.push_back(detail::instance_from_json(j));
    } catch (const Error& e) {
      raise(ErrorKind::format, path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      raise(ErrorKind::format, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t k = i + 1; k < instances.size(); ++k) {
      if (instances[i].id == instances[k].id)
        raise(ErrorKind::format, path + ": duplicate instance id '" + instances[i].id + "'");
    }
  }
  return instances;
}

Pools split_pools(std::vector<TaskInstance> instances) {
  Pools pools;
  for (TaskInstance& inst : instances) {
    (inst.task == Task::algebra ? pools.algebra : pools.gpqa).push_back(std::move(inst));
  }
  return pools;
}

Pools load_pools(const std::string& algebra_path, const std::string& gpqa_path) {
  Pools pools;
  for (TaskInstance& inst : load_instances(algebra_path)) {
    if (inst.task != Task::algebra)
      raise(ErrorKind::format, algebra_path + ": instance '" + inst.id + "' is not an algebra task");
    pools.algebra.push_back(std::move(inst));
  }
  for (TaskInstance& inst : load_instances(gpqa_path)) {
    if (inst.task != Task::gpqa)
      raise(ErrorKind::format, gpqa_path + ": instance '" + inst.id + "' is not a gpqa task");
    pools.gpqa.push_back(std::move(inst));
  }
  for (const TaskInstance& a : pools.algebra) {
    for (const TaskInstance& g : pools.gpqa) {
      if (a.id == g.id)
        raise(ErrorKind::format, "instance id '" + a.id + "' appears in both pools");
    }
  }
  return pools;
}

std::string pool_digest(const Pools& pools) {
  std::uint64_t h = kFnvOffset;
  for (const TaskInstance& inst : pools.algebra) h = fnv1a64(detail::to_json(inst).dump(), h);
  h = fnv1a64("|", h);
  for (const TaskInstance& inst : pools.gpqa) h = fnv1a64(detail::to_json(inst).dump(), h);
  return hex64(h);
}

}  // namespace gepa
