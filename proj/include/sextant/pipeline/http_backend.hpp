#pragma once

// Text-completion over HTTP. Link against sextant_http for TLS support.

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "sextant/corpus.hpp"
#include "sextant/pipeline/backend.hpp"
#include "sextant/pipeline/replay.hpp"

namespace sextant::pipeline {

/// POSTs {"model", "prompt", "temperature"} as JSON and reads the first
/// choice's text (completion or chat shape), or a top-level
/// "completion"/"text" field.
class HttpBackend final : public ModelBackend {
 public:
  explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint needs a scheme: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    base_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    if (!cfg_.credential_env.empty()) {
      const char* v = std::getenv(cfg_.credential_env.c_str());
      if (!v || !*v) throw BackendError("credential variable " + cfg_.credential_env + " is not set");
      credential_ = v;
    }
  }

  std::string complete(const std::string& prompt) override {
    httplib::Client cli(base_);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!credential_.empty()) headers.emplace("Authorization", "Bearer " + credential_);

    nlohmann::json body{{"model", cfg_.model}, {"prompt", prompt}, {"temperature", cfg_.temperature}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw BackendError("request to " + cfg_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw BackendError("endpoint returned HTTP " + std::to_string(res->status));
    }
    return extract_text(res->body);
  }

  static std::string extract_text(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("response is not JSON: ") + e.what());
    }
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
      if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
        return c["message"]["content"].get<std::string>();
      }
    }
    for (const char* key : {"completion", "text"}) {
      if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
    }
    throw BackendError("response carries no completion text");
  }

 private:
  BackendConfig cfg_;
  std::string base_;
  std::string path_;
  std::string credential_;
};

/// Builds a backend from its config. Gold replay needs the gold corpus.
inline std::shared_ptr<ModelBackend> make_backend(const BackendConfig& cfg, const Corpus* gold = nullptr,
                                                  GoldReplayOptions replay = {}) {
  if (cfg.type == "http") return std::make_shared<HttpBackend>(cfg);
  if (cfg.type == "scripted") return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(cfg.table));
  if (cfg.type == "gold-replay") {
    if (!gold) throw std::invalid_argument("gold-replay backend needs a gold corpus");
    return std::make_shared<GoldReplayBackend>(*gold, replay);
  }
  throw std::invalid_argument("unknown backend type '" + cfg.type + "'");
}

}  // namespace sextant::pipeline
