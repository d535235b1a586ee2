#pragma once

// The completion seam: every model call in the toolkit goes through
// ModelBackend::complete.

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

namespace sextant::pipeline {

/// Transport-level failure: unreachable endpoint, HTTP error, unknown
/// scripted prompt.
struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Implementations must tolerate concurrent complete() calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

class FunctionBackend final : public ModelBackend {
 public:
  using Fn = std::function<std::string(const std::string&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  Fn fn_;
};

/// Lowercase hex SHA-256 of the prompt bytes.
inline std::string prompt_hash(const std::string& prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

/// Replays a fixed prompt-hash -> completion table. A hash may map to a
/// sequence of completions, consumed one per call; the last one repeats.
/// Unknown prompts raise BackendError.
class ScriptedBackend final : public ModelBackend {
 public:
  ScriptedBackend() = default;

  void add(const std::string& prompt, std::string completion) {
    add_sequence(prompt, {std::move(completion)});
  }

  void add_sequence(const std::string& prompt, std::vector<std::string> completions) {
    add_hashed(prompt_hash(prompt), std::move(completions));
  }

  void add_hashed(const std::string& hash, std::vector<std::string> completions) {
    if (completions.empty()) throw std::invalid_argument("scripted entry needs at least one completion");
    std::lock_guard lock(mu_);
    table_[hash] = Entry{std::move(completions), 0};
  }

  std::string complete(const std::string& prompt) override {
    const std::string hash = prompt_hash(prompt);
    std::lock_guard lock(mu_);
    auto it = table_.find(hash);
    if (it == table_.end()) throw BackendError("no scripted completion for prompt " + hash);
    Entry& e = it->second;
    const std::string& out = e.completions[std::min(e.next, e.completions.size() - 1)];
    ++e.next;
    ++calls_;
    return out;
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

  /// File format: a JSON object mapping hex prompt hash to a completion
  /// string or an array of completion strings.
  static ScriptedBackend from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("scripted table must be a JSON object");
    ScriptedBackend b;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_string()) {
        b.add_hashed(it.key(), {it->get<std::string>()});
      } else if (it->is_array()) {
        b.add_hashed(it.key(), it->get<std::vector<std::string>>());
      } else {
        throw std::invalid_argument("scripted entry '" + it.key() + "' must be a string or array");
      }
    }
    return b;
  }

  static ScriptedBackend from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scripted table '" + path + "'");
    return from_json(nlohmann::json::parse(in));
  }

  nlohmann::json to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [hash, e] : table_) {
      if (e.completions.size() == 1) {
        j[hash] = e.completions.front();
      } else {
        j[hash] = e.completions;
      }
    }
    return j;
  }

  // Moves transfer the table; the mutex is fresh.
  ScriptedBackend(ScriptedBackend&& o) noexcept : table_(std::move(o.table_)), calls_(o.calls_) {}
  ScriptedBackend& operator=(ScriptedBackend&& o) noexcept {
    table_ = std::move(o.table_);
    calls_ = o.calls_;
    return *this;
  }

 private:
  struct Entry {
    std::vector<std::string> completions;
    std::size_t next = 0;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> table_;
  std::size_t calls_ = 0;
};

/// Backend settings as stored in a config file. The credential itself is
/// never stored; only the name of the environment variable holding it.
struct BackendConfig {
  std::string type = "http";  // http | scripted | gold-replay
  std::string endpoint;
  std::string model;
  std::string credential_env;
  double timeout_seconds = 60.0;
  double temperature = 0.0;
  std::string table;  // scripted table path

  static BackendConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("backend config must be a JSON object");
    BackendConfig c;
    c.type = j.value("type", c.type);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.credential_env = j.value("credential_env", c.credential_env);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.temperature = j.value("temperature", c.temperature);
    c.table = j.value("table", c.table);
    if (j.contains("api_key") || j.contains("credential")) {
      throw std::invalid_argument("backend config must name a credential environment variable, not hold a credential");
    }
    if (c.type != "http" && c.type != "scripted" && c.type != "gold-replay") {
      throw std::invalid_argument("unknown backend type '" + c.type + "'");
    }
    if (c.type == "http" && c.endpoint.empty()) throw std::invalid_argument("http backend needs an endpoint");
    if (c.type == "scripted" && c.table.empty()) throw std::invalid_argument("scripted backend needs a table path");
    if (c.timeout_seconds <= 0) throw std::invalid_argument("timeout_seconds must be positive");
    return c;
  }

  static BackendConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open backend config '" + path + "'");
    return from_json(nlohmann::json::parse(in));
  }
};

}  // namespace sextant::pipeline
