#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sextant {

enum class Severity { Warning, Error };

/// One validation problem. `rule` is a stable identifier (e.g. "reply-order").
struct Finding {
  Severity severity = Severity::Error;
  std::string rule;
  std::string message;
  std::optional<std::size_t> utterance;
  std::optional<std::size_t> line;
  std::string doc_id;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }

  bool has_errors() const {
    return std::any_of(findings.begin(), findings.end(),
                       [](const Finding& f) { return f.severity == Severity::Error; });
  }

  std::size_t count(Severity s) const {
    return static_cast<std::size_t>(std::count_if(
        findings.begin(), findings.end(), [s](const Finding& f) { return f.severity == s; }));
  }

  bool contains_rule(const std::string& rule) const {
    return std::any_of(findings.begin(), findings.end(),
                       [&](const Finding& f) { return f.rule == rule; });
  }

  void add(Finding f) { findings.push_back(std::move(f)); }

  void merge(const ValidationReport& other) {
    findings.insert(findings.end(), other.findings.begin(), other.findings.end());
  }
};

inline std::ostream& operator<<(std::ostream& os, const Finding& f) {
  os << (f.severity == Severity::Error ? "error" : "warning");
  if (f.line) os << " line " << *f.line;
  if (!f.doc_id.empty()) os << " doc " << f.doc_id;
  if (f.utterance) os << " utterance " << *f.utterance;
  return os << " [" << f.rule << "] " << f.message;
}

}  // namespace sextant
