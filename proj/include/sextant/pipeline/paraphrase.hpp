#pragma once

// Paraphrase-then-verify: tuples become one natural-language claim, which
// a verifier answers with 1 or 0.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sextant/metrics.hpp"
#include "sextant/pipeline/backend.hpp"
#include "sextant/pipeline/templates.hpp"
#include "sextant/pipeline/tuple_parser.hpp"
#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant::pipeline {

struct VerificationParseError : std::runtime_error {
  std::string completion;
  explicit VerificationParseError(std::string c)
      : std::runtime_error("unparseable verdict: '" + c + "'"), completion(std::move(c)) {}
};

namespace detail {

inline std::string clause(StepId step, const Tuple& t) {
  auto at = [&](std::size_t i) -> const std::string& {
    if (i >= t.size()) throw std::invalid_argument("tuple too short for " + std::string(to_string(step)));
    return t[i];
  };
  switch (step) {
    case StepId::P1:
    case StepId::V1:
      return at(1) + " of " + at(0);
    case StepId::P2:
    case StepId::V2:
      return "the opinion of " + at(0) + " on " + at(2) + " of " + at(1) + " is " + at(3);
    case StepId::P3:
    case StepId::V3:
      return at(0) + "'s opinion " + at(3) + " on " + at(2) + " of " + at(1) + " carries a sentiment " + at(4) +
             " with rationale " + at(5);
    case StepId::P4:
    case StepId::V4: {
      auto trig = parse_trigger(at(5));
      return at(0) + "'s sentiment towards " + at(2) + " of " + at(1) + " initially was " + at(3) +
             " and later flipped to " + at(4) + " due to trigger " + (trig ? display_name(*trig) : at(5));
    }
    case StepId::Judge: break;
  }
  throw std::invalid_argument("no claim form for step " + std::string(to_string(step)));
}

// "x", "x and y", "x, y, and z"
inline std::string enumerate(const std::vector<std::string>& items) {
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if (i + 1 == items.size()) out += "and ";
    out += items[i];
  }
  return out;
}

}  // namespace detail

/// Renders every tuple as a clause and fills the step's claim template.
inline std::string paraphrase_tuples(StepId step, const std::vector<Tuple>& tuples,
                                     const TemplateSet& templates = default_templates()) {
  if (tuples.empty()) throw std::invalid_argument("paraphrase needs at least one tuple");
  std::vector<std::string> clauses;
  clauses.reserve(tuples.size());
  for (const auto& t : tuples) clauses.push_back(detail::clause(step, t));
  const StepId v = (step >= StepId::V1 && step <= StepId::V4) ? step : verification_of(step);
  const int k = static_cast<int>(v) - static_cast<int>(StepId::V1) + 1;
  return templates.claim(k).render({{"clauses", detail::enumerate(clauses)}});
}

/// Leading "1" is entailment, leading "0" contradiction.
inline bool parse_verdict(const std::string& completion) {
  const std::string t = text::trim(completion);
  if (!t.empty() && t[0] == '1') return true;
  if (!t.empty() && t[0] == '0') return false;
  throw VerificationParseError(completion);
}

inline bool verify(const std::string& claim, const std::string& dialogue_text, ModelBackend& backend) {
  return parse_verdict(backend.complete(verification_prompt(claim, dialogue_text)));
}

/// Semantic judge that asks a backend whether two phrases agree in context.
/// Unparseable verdicts count as disagreement.
inline SemanticJudge backend_judge(std::shared_ptr<ModelBackend> backend,
                                   const TemplateSet& templates = default_templates()) {
  PromptTemplate tpl = templates.judge;
  return [backend = std::move(backend), tpl](const std::string& ctx, const std::string& pred,
                                             const std::string& gold) {
    const std::string prompt = tpl.render({{"dialogue", ctx}, {"pred", pred}, {"gold", gold}});
    try {
      return parse_verdict(backend->complete(prompt));
    } catch (const VerificationParseError&) {
      return false;
    }
  };
}

}  // namespace sextant::pipeline
