#include <filesystem>
#include <fstream>

#include "gepa/error.hpp"
#include "gepa/optimizer.hpp"
#include "serialize.hpp"

namespace gepa {

using detail::json;

namespace {

json frontier_after_to_json(const std::vector<std::pair<std::string, TaskAccuracies>>& entries) {
  json out = json::array();
  for (const auto& [id, acc] : entries) out.push_back(json::array({id, detail::to_json(acc)}));
  return out;
}

std::vector<std::pair<std::string, TaskAccuracies>> frontier_after_from_json(const json& j) {
  std::vector<std::pair<std::string, TaskAccuracies>> out;
  for (const json& e : j)
    out.emplace_back(e.at(0).get<std::string>(), detail::accuracies_from_json(e.at(1)));
  return out;
}

std::vector<std::string> zero_score_ids(const ScoreVector& v) {
  std::vector<std::string> ids;
  for (const auto& [id, entry] : v.scores) {
    if (entry.score == 0) ids.push_back(id);
  }
  return ids;
}

void self_validate(const StepRecord& record, const std::string& where) {
  if (record.error_instance_ids != zero_score_ids(record.minibatch_scores))
    raise(ErrorKind::format,
          where + ": error_instance_ids do not equal the zero-score set of the minibatch");
}

StepRecord step_from_json(const json& j, const std::string& where) {
  StepRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.sampled_prompt_id = j.at("sampled_prompt_id").get<std::string>();
  r.batch_instance_ids = j.at("batch_instance_ids").get<std::vector<std::string>>();
  r.minibatch_scores = detail::score_vector_from_json(j.at("minibatch_scores"));
  r.error_instance_ids = j.at("error_instance_ids").get<std::vector<std::string>>();
  r.critique = detail::critique_from_json(j.at("critique"));
  r.child = detail::prompt_from_json(j.at("child"));
  r.child_eval_scores = detail::score_vector_from_json(j.at("child_eval_scores"));
  r.frontier_after = frontier_after_from_json(j.at("frontier_after"));
  r.rng_state_digest = j.at("rng_state_digest").get<std::string>();
  self_validate(r, where);
  return r;
}

}  // namespace

std::string header_to_line(const RunLogHeader& header) {
  json j{{"kind", "header"},
         {"format_version", header.format_version},
         {"config", detail::to_json(header.config)},
         {"pool_digest", header.pool_digest},
         {"seed_prompt", detail::to_json(header.seed_prompt)},
         {"seed_eval_scores", detail::to_json(header.seed_eval_scores)}};
  return j.dump();
}

std::string record_to_line(const RunRecord& record) {
  if (const auto* step = std::get_if<StepRecord>(&record)) {
    self_validate(*step, "record for iteration " + std::to_string(step->iteration));
    json j{{"kind", "step"},
           {"iteration", step->iteration},
           {"sampled_prompt_id", step->sampled_prompt_id},
           {"batch_instance_ids", step->batch_instance_ids},
           {"minibatch_scores", detail::to_json(step->minibatch_scores)},
           {"error_instance_ids", step->error_instance_ids},
           {"critique", detail::to_json(step->critique)},
           {"child", detail::to_json(step->child)},
           {"child_eval_scores", detail::to_json(step->child_eval_scores)},
           {"frontier_after", frontier_after_to_json(step->frontier_after)},
           {"rng_state_digest", step->rng_state_digest}};
    return j.dump();
  }
  const auto& error = std::get<ErrorRecord>(record);
  json j{{"kind", "error"},
         {"iteration", error.iteration},
         {"message", error.message},
         {"rng_state_digest", error.rng_state_digest}};
  return j.dump();
}

ParsedRunLog parse_run_log(const std::string& path) {
  ParsedRunLog log;
  std::ifstream in(path, std::ios::binary);
  if (!in) return log;  // missing file = empty log

  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);

    json j = line.empty() ? json() : json::parse(line, nullptr, false);
    const bool parse_ok = !line.empty() && !j.is_discarded() && j.is_object() && j.contains("kind");

    if (!terminated || !parse_ok) {
      const bool is_final = !terminated || nl + 1 >= content.size();
      if (is_final) {
        log.torn_final_line = true;
        return log;  // dropped; intact_bytes already points past the last good line
      }
      raise(ErrorKind::format, where + ": malformed run-log line");
    }

    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        if (line_no != 1) raise(ErrorKind::format, where + ": header after first line");
        RunLogHeader header;
        header.format_version = j.at("format_version").get<int>();
        if (header.format_version != 1)
          raise(ErrorKind::format, where + ": unsupported format_version " +
                                       std::to_string(header.format_version));
        header.config = detail::optimization_config_from_json(j.at("config"));
        header.pool_digest = j.at("pool_digest").get<std::string>();
        header.seed_prompt = detail::prompt_from_json(j.at("seed_prompt"));
        header.seed_eval_scores = detail::score_vector_from_json(j.at("seed_eval_scores"));
        log.header = std::move(header);
      } else if (kind == "step") {
        if (!log.header) raise(ErrorKind::format, where + ": record before header");
        log.records.emplace_back(step_from_json(j, where));
      } else if (kind == "error") {
        if (!log.header) raise(ErrorKind::format, where + ": record before header");
        ErrorRecord r;
        r.iteration = j.at("iteration").get<int>();
        r.message = j.at("message").get<std::string>();
        r.rng_state_digest = j.at("rng_state_digest").get<std::string>();
        log.records.emplace_back(std::move(r));
      } else {
        raise(ErrorKind::format, where + ": unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      // Mid-log structural damage is unrecoverable; a final-line defect is a torn write.
      if (nl + 1 >= content.size()) {
        log.torn_final_line = true;
        return log;
      }
      raise(ErrorKind::format, where + ": " + e.what());
    }

    pos = nl + 1;
    log.intact_bytes = pos;
  }
  return log;
}

}  // namespace gepa
