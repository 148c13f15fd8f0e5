#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gepa {

enum class BackendErrorKind { transport, http_status, timeout, malformed_response, scripted_miss };

const char* to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message);
  BackendErrorKind kind() const { return kind_; }
  // scripted_miss is a pure function of the request; retrying cannot help.
  bool retryable() const { return kind_ != BackendErrorKind::scripted_miss; }

 private:
  BackendErrorKind kind_;
};

// Connection settings for one model. Only the *name* of the environment
// variable holding the secret is stored; the value is read at request time
// and never serialized.
struct BackendProfile {
  std::string name;
  std::string endpoint;  // base URL, e.g. https://host/v1
  std::string model_id;
  std::string auth_env_var;
  int max_tokens = 1024;
  double eval_temperature = 0.0;    // scoring calls
  double evolve_temperature = 0.8;  // critic/evolver calls
  double request_timeout_s = 60.0;
  int embedding_dim = 0;        // 0 = accept whatever the service returns
  double rate_limit_per_s = 0;  // 0 = unlimited
};

struct GenerationOptions {
  double temperature = 0.0;
};

// Uniform interface over text generation and embedding. Implementations are
// stateless after construction and callable concurrently.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string generate(const std::string& system_text, const std::string& user_text,
                               const GenerationOptions& options) = 0;
  virtual std::vector<double> embed(const std::string& text) = 0;

  // True when responses are a pure function of the request. Callers pin
  // measured latencies to zero for such backends so run logs stay byte-stable.
  virtual bool deterministic() const { return false; }
};

// Hash-seeded pseudo-embedding: same text always maps to the same vector.
std::vector<double> pseudo_embedding(const std::string& text, int dim);

struct ScriptedRule {
  std::optional<std::string> system_contains;
  std::optional<std::string> user_contains;
  std::string response;
};

// Deterministic test double. Resolution order: exact (system,user) entry,
// first matching rule, default response, else a scripted_miss error.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(int embedding_dim = 16) : embedding_dim_(embedding_dim) {}

  void add_entry(const std::string& system_text, const std::string& user_text, const std::string& response);
  void add_embed_entry(const std::string& text, std::vector<double> vector);
  void add_rule(ScriptedRule rule);
  void set_default_response(const std::string& response);

  // Accepts either a JSON object ({"entries": [...], "rules": [...], ...})
  // or a line-delimited capture file as written by RecordingBackend.
  static std::unique_ptr<ScriptedBackend> load(const std::string& path);

  std::string generate(const std::string& system_text, const std::string& user_text,
                       const GenerationOptions& options) override;
  std::vector<double> embed(const std::string& text) override;
  bool deterministic() const override { return true; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> entries_;
  std::map<std::string, std::vector<double>> embed_entries_;
  std::vector<ScriptedRule> rules_;
  std::optional<std::string> default_response_;
  int embedding_dim_ = 16;
};

// Chat-completions style JSON-over-HTTP client. Generation posts to
// {endpoint}/chat/completions, embedding to {endpoint}/embeddings.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendProfile profile);
  ~HttpBackend() override;

  std::string generate(const std::string& system_text, const std::string& user_text,
                       const GenerationOptions& options) override;
  std::vector<double> embed(const std::string& text) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Decorator persisting request/response pairs as line-delimited JSON for
// offline replay through ScriptedBackend::load.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, const std::string& capture_path);

  std::string generate(const std::string& system_text, const std::string& user_text,
                       const GenerationOptions& options) override;
  std::vector<double> embed(const std::string& text) override;
  bool deterministic() const override;

 private:
  void write_line(const std::string& line);

  Backend& inner_;
  std::string path_;
  std::mutex mutex_;
};

}  // namespace gepa
