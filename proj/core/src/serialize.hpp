#pragma once

// Internal JSON mappings shared by the dataset loader, run log, transfer
// cache and config reader. Not installed; keeps vendor headers out of the
// public surface.

#include "gepa/evaluation.hpp"
#include "gepa/evolution.hpp"
#include "gepa/types.hpp"
#include "json.hpp"

namespace gepa::detail {

using nlohmann::json;

json to_json(const Prompt& p);
Prompt prompt_from_json(const json& j);

json to_json(const TaskInstance& inst);
TaskInstance instance_from_json(const json& j);

json to_json(const ScoreVector& v);
ScoreVector score_vector_from_json(const json& j);

json to_json(const TaskAccuracies& acc);
TaskAccuracies accuracies_from_json(const json& j);

json to_json(const CritiqueRecord& c);
CritiqueRecord critique_from_json(const json& j);

json to_json(const EvaluationOutcome& o);
EvaluationOutcome outcome_from_json(const json& j);

json to_json(const OptimizationConfig& c);
OptimizationConfig optimization_config_from_json(const json& j);

}  // namespace gepa::detail
