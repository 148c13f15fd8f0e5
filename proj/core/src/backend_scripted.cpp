#include <fstream>
#include <sstream>

#include "gepa/backend.hpp"
#include "gepa/digest.hpp"
#include "gepa/error.hpp"
#include "json.hpp"

namespace gepa {

using nlohmann::json;

const char* to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::transport: return "transport";
    case BackendErrorKind::http_status: return "http_status";
    case BackendErrorKind::timeout: return "timeout";
    case BackendErrorKind::malformed_response: return "malformed_response";
    case BackendErrorKind::scripted_miss: return "scripted_miss";
  }
  return "unknown";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& message)
    : std::runtime_error(std::string("backend ") + to_string(kind) + ": " + message), kind_(kind) {}

std::vector<double> pseudo_embedding(const std::string& text, int dim) {
  if (dim <= 0) dim = 16;
  std::vector<double> v(static_cast<std::size_t>(dim));
  std::uint64_t h = fnv1a64(text);
  for (auto& x : v) {
    // splitmix64 step; maps the text hash to a reproducible stream.
    h += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    x = static_cast<double>(z >> 11) / static_cast<double>(1ull << 53) * 2.0 - 1.0;
  }
  return v;
}

void ScriptedBackend::add_entry(const std::string& system_text, const std::string& user_text,
                                const std::string& response) {
  entries_[{system_text, user_text}] = response;
}

void ScriptedBackend::add_embed_entry(const std::string& text, std::vector<double> vector) {
  embed_entries_[text] = std::move(vector);
}

void ScriptedBackend::add_rule(ScriptedRule rule) { rules_.push_back(std::move(rule)); }

void ScriptedBackend::set_default_response(const std::string& response) { default_response_ = response; }

std::string ScriptedBackend::generate(const std::string& system_text, const std::string& user_text,
                                      const GenerationOptions&) {
  auto it = entries_.find({system_text, user_text});
  if (it != entries_.end()) return it->second;
  for (const ScriptedRule& rule : rules_) {
    if (rule.system_contains && system_text.find(*rule.system_contains) == std::string::npos) continue;
    if (rule.user_contains && user_text.find(*rule.user_contains) == std::string::npos) continue;
    return rule.response;
  }
  if (default_response_) return *default_response_;
  throw BackendError(BackendErrorKind::scripted_miss,
                     "no scripted response for request (system digest " + digest_hex(system_text) +
                         ", user digest " + digest_hex(user_text) + ")");
}

std::vector<double> ScriptedBackend::embed(const std::string& text) {
  if (text.empty()) throw BackendError(BackendErrorKind::malformed_response, "embed of empty text");
  auto it = embed_entries_.find(text);
  if (it != embed_entries_.end()) return it->second;
  return pseudo_embedding(text, embedding_dim_);
}

namespace {

void load_entry(ScriptedBackend& backend, const json& e) {
  const std::string op = e.value("op", "generate");
  if (op == "generate") {
    backend.add_entry(e.at("system").get<std::string>(), e.at("user").get<std::string>(),
                      e.at("response").get<std::string>());
  } else if (op == "embed") {
    backend.add_embed_entry(e.at("text").get<std::string>(), e.at("vector").get<std::vector<double>>());
  } else {
    raise(ErrorKind::format, "unknown script op '" + op + "'");
  }
}

}  // namespace

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::io, "cannot open script file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  json doc = json::parse(content, nullptr, false);
  if (doc.is_object() && (doc.contains("entries") || doc.contains("rules") ||
                          doc.contains("default_response") || doc.contains("embedding_dim"))) {
    auto backend = std::make_unique<ScriptedBackend>(doc.value("embedding_dim", 16));
    for (const json& e : doc.value("entries", json::array())) load_entry(*backend, e);
    for (const json& r : doc.value("rules", json::array())) {
      ScriptedRule rule;
      if (r.contains("system_contains")) rule.system_contains = r.at("system_contains").get<std::string>();
      if (r.contains("user_contains")) rule.user_contains = r.at("user_contains").get<std::string>();
      rule.response = r.at("response").get<std::string>();
      backend->add_rule(std::move(rule));
    }
    if (doc.contains("default_response"))
      backend->set_default_response(doc.at("default_response").get<std::string>());
    return backend;
  }

  // Otherwise treat the file as a line-delimited capture.
  auto backend = std::make_unique<ScriptedBackend>();
  std::istringstream lines(content);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json e = json::parse(line, nullptr, false);
    if (e.is_discarded())
      raise(ErrorKind::format, path + ":" + std::to_string(line_no) + ": invalid JSON in capture file");
    load_entry(*backend, e);
  }
  return backend;
}

RecordingBackend::RecordingBackend(Backend& inner, const std::string& capture_path)
    : inner_(inner), path_(capture_path) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot open capture file '" + path_ + "'");
}

bool RecordingBackend::deterministic() const { return inner_.deterministic(); }

void RecordingBackend::write_line(const std::string& line) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << line << '\n';
}

std::string RecordingBackend::generate(const std::string& system_text, const std::string& user_text,
                                       const GenerationOptions& options) {
  const std::string response = inner_.generate(system_text, user_text, options);
  json e{{"op", "generate"}, {"system", system_text}, {"user", user_text}, {"response", response}};
  write_line(e.dump());
  return response;
}

std::vector<double> RecordingBackend::embed(const std::string& text) {
  const std::vector<double> vector = inner_.embed(text);
  json e{{"op", "embed"}, {"text", text}, {"vector", vector}};
  write_line(e.dump());
  return vector;
}

}  // namespace gepa
