#pragma once

#include <string>
#include <vector>

#include "gepa/types.hpp"

namespace gepa {

// Training pools, split by task.
struct Pools {
  std::vector<TaskInstance> algebra;
  std::vector<TaskInstance> gpqa;

  const TaskInstance* find(const std::string& id) const;
  std::vector<std::string> all_ids() const;  // sorted
  bool empty() const { return algebra.empty() && gpqa.empty(); }
};

// One JSON object per line, fields as in TaskInstance; unknown fields are
// ignored. A line violating the invariants aborts the load with a
// line-numbered error.
std::vector<TaskInstance> load_instances(const std::string& path);

Pools split_pools(std::vector<TaskInstance> instances);
Pools load_pools(const std::string& algebra_path, const std::string& gpqa_path);

// Content digest over both pools; resume refuses on mismatch.
std::string pool_digest(const Pools& pools);

}  // namespace gepa
