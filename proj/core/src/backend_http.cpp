#ifdef GEPA_HTTPS_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "gepa/backend.hpp"
#include "gepa/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gepa {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string scheme_host_port;  // what httplib::Client wants
  std::string base_path;         // no trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    raise(ErrorKind::config, "endpoint '" + url + "' is missing a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.base_path = url.substr(path_start);
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  }
  return out;
}

// Minimal token bucket; rate 0 disables limiting.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_s) : rate_(rate_per_s), tokens_(rate_per_s > 0 ? 1.0 : 0.0) {}

  void acquire() {
    if (rate_ <= 0) return;
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      lock.unlock();
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      lock.lock();
    }
  }

 private:
  void refill() {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  }

  double rate_;
  double tokens_;
  double burst_ = 1.0;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::mutex mutex_;
};

[[noreturn]] void throw_http_error(const httplib::Result& res, const std::string& what) {
  if (!res) {
    const httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      // httplib reports read/write deadline misses as Read/Write errors.
      throw BackendError(BackendErrorKind::timeout, what + ": " + httplib::to_string(err));
    }
    throw BackendError(BackendErrorKind::transport, what + ": " + httplib::to_string(err));
  }
  throw BackendError(BackendErrorKind::http_status,
                     what + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 512));
}

}  // namespace

struct HttpBackend::Impl {
  BackendProfile profile;
  ParsedUrl url;
  TokenBucket bucket;

  explicit Impl(BackendProfile p) : profile(std::move(p)), url(parse_url(profile.endpoint)), bucket(profile.rate_limit_per_s) {}

  std::unique_ptr<httplib::Client> make_client() const {
    auto client = std::make_unique<httplib::Client>(url.scheme_host_port);
    const auto timeout = std::chrono::duration<double>(profile.request_timeout_s);
    client->set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client->set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client->set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    if (!profile.auth_env_var.empty()) {
      if (const char* secret = std::getenv(profile.auth_env_var.c_str()); secret != nullptr && *secret != '\0')
        client->set_default_headers({{"Authorization", std::string("Bearer ") + secret}});
    }
    return client;
  }

  json post(const std::string& path, const json& body, const std::string& what) {
    bucket.acquire();
    auto client = make_client();
    httplib::Result res = client->Post(url.base_path + path, body.dump(), "application/json");
    if (!res || res->status != 200) throw_http_error(res, what);
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
      throw BackendError(BackendErrorKind::malformed_response, what + ": response is not JSON");
    return parsed;
  }
};

HttpBackend::HttpBackend(BackendProfile profile) : impl_(std::make_unique<Impl>(std::move(profile))) {
#ifndef GEPA_HTTPS_SUPPORT
  if (impl_->url.scheme_host_port.rfind("https://", 0) == 0)
    raise(ErrorKind::config, "built without TLS support; endpoint '" + impl_->profile.endpoint +
                                 "' requires https");
#endif
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::generate(const std::string& system_text, const std::string& user_text,
                                  const GenerationOptions& options) {
  json body{
      {"model", impl_->profile.model_id},
      {"messages",
       json::array({json{{"role", "system"}, {"content", system_text}},
                    json{{"role", "user"}, {"content", user_text}}})},
      {"temperature", options.temperature},
      {"max_tokens", impl_->profile.max_tokens},
  };
  const json response = impl_->post("/chat/completions", body, "generate(" + impl_->profile.name + ")");
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrorKind::malformed_response,
                       "generate(" + impl_->profile.name + "): " + e.what());
  }
}

std::vector<double> HttpBackend::embed(const std::string& text) {
  if (text.empty()) throw BackendError(BackendErrorKind::malformed_response, "embed of empty text");
  json body{{"model", impl_->profile.model_id}, {"input", text}};
  const json response = impl_->post("/embeddings", body, "embed(" + impl_->profile.name + ")");
  std::vector<double> vector;
  try {
    vector = response.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrorKind::malformed_response,
                       "embed(" + impl_->profile.name + "): " + e.what());
  }
  if (impl_->profile.embedding_dim > 0 &&
      vector.size() != static_cast<std::size_t>(impl_->profile.embedding_dim))
    raise(ErrorKind::invalid_state,
          "embedding dimension " + std::to_string(vector.size()) + " does not match profile '" +
              impl_->profile.name + "' declared dimension " + std::to_string(impl_->profile.embedding_dim));
  return vector;
}

}  // namespace gepa
