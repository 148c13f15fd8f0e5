#include "serialize.hpp"

#include "gepa/error.hpp"

namespace gepa::detail {

json to_json(const Prompt& p) {
  return json{{"id", p.id},
              {"text", p.text},
              {"parent_id", p.parent_id.has_value() ? json(*p.parent_id) : json(nullptr)},
              {"iteration_born", p.iteration_born},
              {"origin", to_string(p.origin)}};
}

Prompt prompt_from_json(const json& j) {
  Prompt p;
  p.id = j.at("id").get<std::string>();
  p.text = j.at("text").get<std::string>();
  if (j.contains("parent_id") && !j.at("parent_id").is_null())
    p.parent_id = j.at("parent_id").get<std::string>();
  p.iteration_born = j.value("iteration_born", 0);
  p.origin = prompt_origin_from_string(j.value("origin", "seed"));
  validate(p);
  return p;
}

json to_json(const TaskInstance& inst) {
  json j{{"id", inst.id}, {"task", to_string(inst.task)}, {"statement", inst.statement}};
  if (inst.answer_key.has_value()) j["answer_key"] = *inst.answer_key;
  if (!inst.choices.empty()) {
    json choices = json::array();
    for (const Choice& c : inst.choices) choices.push_back(json{{"label", c.label}, {"text", c.text}});
    j["choices"] = choices;
  }
  if (inst.prover_header.has_value()) j["prover_header"] = *inst.prover_header;
  return j;
}

TaskInstance instance_from_json(const json& j) {
  TaskInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.task = task_from_string(j.at("task").get<std::string>());
  inst.statement = j.at("statement").get<std::string>();
  if (j.contains("answer_key") && !j.at("answer_key").is_null())
    inst.answer_key = j.at("answer_key").get<std::string>();
  if (j.contains("choices") && !j.at("choices").is_null()) {
    for (const json& c : j.at("choices"))
      inst.choices.push_back(Choice{c.at("label").get<std::string>(), c.at("text").get<std::string>()});
  }
  if (j.contains("prover_header") && !j.at("prover_header").is_null())
    inst.prover_header = j.at("prover_header").get<std::string>();
  validate(inst);
  return inst;
}

json to_json(const ScoreVector& v) {
  json algebra = json::object();
  json gpqa = json::object();
  for (const auto& [id, entry] : v.scores) {
    (entry.task == Task::algebra ? algebra : gpqa)[id] = entry.score;
  }
  return json{{"prompt_id", v.prompt_id}, {"scores", json{{"algebra", algebra}, {"gpqa", gpqa}}}};
}

ScoreVector score_vector_from_json(const json& j) {
  ScoreVector v;
  v.prompt_id = j.at("prompt_id").get<std::string>();
  const json& scores = j.at("scores");
  const json algebra = scores.value("algebra", json::object());
  for (const auto& [id, score] : algebra.items())
    v.scores[id] = ScoredInstance{Task::algebra, score.get<int>()};
  const json gpqa = scores.value("gpqa", json::object());
  for (const auto& [id, score] : gpqa.items())
    v.scores[id] = ScoredInstance{Task::gpqa, score.get<int>()};
  return v;
}

json to_json(const TaskAccuracies& acc) {
  // Unscored tasks serialize as null, never as 0.0.
  return json{{"algebra", acc.algebra.has_value() ? json(*acc.algebra) : json(nullptr)},
              {"gpqa", acc.gpqa.has_value() ? json(*acc.gpqa) : json(nullptr)}};
}

TaskAccuracies accuracies_from_json(const json& j) {
  TaskAccuracies acc;
  if (j.contains("algebra") && !j.at("algebra").is_null()) acc.algebra = j.at("algebra").get<double>();
  if (j.contains("gpqa") && !j.at("gpqa").is_null()) acc.gpqa = j.at("gpqa").get<double>();
  return acc;
}

json to_json(const CritiqueRecord& c) {
  return json{{"prompt_id", c.prompt_id},
              {"error_log_digest", c.error_log_digest},
              {"critique_text", c.critique_text},
              {"iteration", c.iteration}};
}

CritiqueRecord critique_from_json(const json& j) {
  CritiqueRecord c;
  c.prompt_id = j.at("prompt_id").get<std::string>();
  c.error_log_digest = j.at("error_log_digest").get<std::string>();
  c.critique_text = j.at("critique_text").get<std::string>();
  c.iteration = j.at("iteration").get<int>();
  return c;
}

json to_json(const EvaluationOutcome& o) {
  json j{{"instance_id", o.instance_id},
         {"score", o.score},
         {"completion_text", o.completion_text},
         {"latency_ms", o.latency_ms}};
  if (o.failure.has_value()) {
    j["failure"] = json{{"reason", to_string(o.failure->reason)}, {"message", o.failure->message}};
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

EvaluationOutcome outcome_from_json(const json& j) {
  EvaluationOutcome o;
  o.instance_id = j.at("instance_id").get<std::string>();
  o.score = j.at("score").get<int>();
  o.completion_text = j.value("completion_text", "");
  o.latency_ms = j.value("latency_ms", 0);
  if (j.contains("failure") && !j.at("failure").is_null()) {
    o.failure = FailureDetail{failure_reason_from_string(j.at("failure").at("reason").get<std::string>()),
                              j.at("failure").value("message", "")};
  }
  validate(o);
  return o;
}

json to_json(const OptimizationConfig& c) {
  return json{{"iterations", c.iterations},
              {"sample_algebra", c.sample_algebra},
              {"sample_gpqa", c.sample_gpqa},
              {"rng_seed", c.rng_seed},
              {"frontier_eval_set", c.frontier_eval_set},
              {"weight_algebra", c.weight_algebra},
              {"weight_gpqa", c.weight_gpqa},
              {"frontier_capacity",
               c.frontier_capacity.has_value() ? json(*c.frontier_capacity) : json(nullptr)}};
}

OptimizationConfig optimization_config_from_json(const json& j) {
  OptimizationConfig c;
  c.iterations = j.value("iterations", 1);
  c.sample_algebra = j.value("sample_algebra", 1);
  c.sample_gpqa = j.value("sample_gpqa", 1);
  c.rng_seed = j.value("rng_seed", std::uint64_t{0});
  if (j.contains("frontier_eval_set"))
    c.frontier_eval_set = j.at("frontier_eval_set").get<std::vector<std::string>>();
  c.weight_algebra = j.value("weight_algebra", 0.5);
  c.weight_gpqa = j.value("weight_gpqa", 0.5);
  if (j.contains("frontier_capacity") && !j.at("frontier_capacity").is_null())
    c.frontier_capacity = j.at("frontier_capacity").get<std::size_t>();
  return c;
}

}  // namespace gepa::detail
