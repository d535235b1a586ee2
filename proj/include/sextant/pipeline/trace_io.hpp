#pragma once

#include <string>

#include <json.hpp>

#include "sextant/pipeline/cos.hpp"

namespace sextant::pipeline {

inline nlohmann::ordered_json tuples_json(const ParsedTuples& p) {
  if (p.none) return "None";
  return p.tuples;
}

inline nlohmann::ordered_json trace_json(const StepTrace& t) {
  nlohmann::ordered_json j;
  j["step"] = std::string(to_string(t.step));
  j["prompt"] = t.prompt;
  j["completion"] = t.completion;
  j["parsed"] = tuples_json(t.parsed);
  j["verdicts"] = t.verdicts;
  j["retry_count"] = t.retry_count;
  j["flagged"] = t.flagged;
  j["notes"] = t.notes;
  auto attempts = nlohmann::ordered_json::array();
  for (const auto& a : t.attempts) {
    nlohmann::ordered_json aj;
    aj["completion"] = a.completion;
    aj["parsed"] = a.parsed ? tuples_json(*a.parsed) : nlohmann::ordered_json(nullptr);
    if (!a.error.empty()) aj["error"] = a.error;
    if (a.verification) {
      const auto& v = *a.verification;
      aj["verification"] = {{"claim", v.claim},
                            {"completion", v.completion},
                            {"verdict", v.verdict ? nlohmann::ordered_json(*v.verdict) : nullptr}};
      if (!v.error.empty()) aj["verification"]["error"] = v.error;
    }
    attempts.push_back(std::move(aj));
  }
  j["attempts"] = std::move(attempts);
  return j;
}

/// One document per dialogue.
inline nlohmann::ordered_json trace_document(const std::string& doc_id, const std::vector<StepTrace>& traces,
                                             const std::string& error = "") {
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  if (!error.empty()) j["error"] = error;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& t : traces) steps.push_back(trace_json(t));
  j["steps"] = std::move(steps);
  return j;
}

inline nlohmann::ordered_json trace_document(const CosOutcome& outcome) {
  if (const auto* r = std::get_if<CosResult>(&outcome)) return trace_document(r->doc_id, r->traces);
  const auto& e = std::get<PipelineError>(outcome);
  return trace_document(e.doc_id, e.traces, e.what());
}

}  // namespace sextant::pipeline
