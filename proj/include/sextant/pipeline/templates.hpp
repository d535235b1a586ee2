#pragma once

// Prompt templates for the four reasoning steps, their verification
// claims, and the semantic-judge query. Placeholders are written {name}.

#include <array>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sextant::pipeline {

enum class StepId { P1, P2, P3, P4, V1, V2, V3, V4, Judge };

inline std::string_view to_string(StepId s) {
  switch (s) {
    case StepId::P1: return "P1";
    case StepId::P2: return "P2";
    case StepId::P3: return "P3";
    case StepId::P4: return "P4";
    case StepId::V1: return "V1";
    case StepId::V2: return "V2";
    case StepId::V3: return "V3";
    case StepId::V4: return "V4";
    case StepId::Judge: return "JUDGE";
  }
  return "";
}

/// Verification template paired with a reasoning step.
inline StepId verification_of(StepId s) {
  switch (s) {
    case StepId::P1: return StepId::V1;
    case StepId::P2: return StepId::V2;
    case StepId::P3: return StepId::V3;
    case StepId::P4: return StepId::V4;
    default: throw std::invalid_argument("no verification template for " + std::string(to_string(s)));
  }
}

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  StepId step = StepId::P1;
  std::string text;

  /// Placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    scan([&](std::string_view name) {
      if (seen.insert(std::string(name)).second) out.emplace_back(name);
    });
    return out;
  }

  /// Single pass over the template; substituted values are never rescanned.
  /// Throws std::invalid_argument naming the first unbound placeholder.
  std::string render(const Bindings& bindings) const {
    std::string out;
    out.reserve(text.size() + 256);
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t len = 0;
      if (text[i] == '{' && (len = placeholder_length(i)) > 0) {
        const std::string name = text.substr(i + 1, len - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          throw std::invalid_argument("template " + std::string(to_string(step)) + ": unbound placeholder {" + name + "}");
        }
        out += it->second;
        i += len;
      } else {
        out += text[i++];
      }
    }
    return out;
  }

 private:
  // Length of "{identifier}" starting at pos, or 0.
  std::size_t placeholder_length(std::size_t pos) const {
    std::size_t j = pos + 1;
    while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                               std::isdigit(static_cast<unsigned char>(text[j])))) {
      ++j;
    }
    if (j == pos + 1 || j >= text.size() || text[j] != '}') return 0;
    return j - pos + 1;
  }

  template <typename Fn>
  void scan(Fn&& fn) const {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '{') continue;
      if (std::size_t len = placeholder_length(i)) {
        fn(std::string_view(text).substr(i + 1, len - 2));
        i += len - 1;
      }
    }
  }
};

struct TemplateSet {
  std::array<PromptTemplate, 4> steps;   // P1..P4
  std::array<PromptTemplate, 4> claims;  // V1..V4
  PromptTemplate judge;

  const PromptTemplate& step(int k) const { return steps.at(static_cast<std::size_t>(k - 1)); }
  const PromptTemplate& claim(int k) const { return claims.at(static_cast<std::size_t>(k - 1)); }
};

namespace detail {

inline constexpr std::string_view kVerifyTail =
    " Please based on the dialogue, verify whether these descriptions are consistent with the "
    "dialogue content and provide '1' for 'yes' or '0' for 'no' judgment.";

}  // namespace detail

/// Step prompts bind {dialogue} and {media}; steps 2-4 additionally bind
/// {previous}. Claim templates bind {clauses}. The judge binds {dialogue},
/// {pred} and {gold}.
inline TemplateSet default_templates() {
  TemplateSet t;
  t.steps[0] = {StepId::P1,
                "Input Data:\n{dialogue}{media}\n"
                "Instruction: Based on the multi-party dialogue and its accompanying multimodal data, please "
                "identify all possible targets and their specific aspects mentioned in the dialogue. Extract "
                "each target and aspect explicitly from the utterance text spans, or infer them implicitly via "
                "your understanding of the input data. Ensure each identified target is paired with its "
                "aspect(s), forming target-aspect pairs.\n\n"
                "Expected Output: (target, aspect)_1, (target, aspect)_2, ..."};
  t.steps[1] = {StepId::P2,
                "Input Data:\n{dialogue}{media}\nTarget-aspect pairs: {previous}\n\n"
                "Instruction: Based on the dialogue and each target-aspect pair identified previously, please "
                "identify the holder (the person who expresses an opinion, normally should be a speaker of "
                "certain dialogue utterance) and the opinion, both either directly extracted from the text or "
                "inferred from our understanding of the input data. Formulate your output into "
                "'holder-target-aspect-opinion' quadruples, ensuring each element is clearly identified.\n\n"
                "Expected Output: (holder, target, aspect, opinion)_1, (holder, target, aspect, opinion)_2, ..."};
  t.steps[2] = {StepId::P3,
                "Input Data:\n{dialogue}{media}\nHolder-target-aspect-opinion quadruples: {previous}\n\n"
                "Instruction: Based on the dialogue and each holder-target-aspect-opinion quadruple identified "
                "previously, please identify the sentiment polarity associated with the opinion and analyze the "
                "causal rationale behind it. The sentiment polarity should be classified as 'positive', "
                "'neutral', or 'negative'. The rationale should be extracted explicitly from the text, or "
                "inferred implicitly via your understanding of the input data. Formulate your output into "
                "'holder-target-aspect-opinion-sentiment-rationale' sextuples, ensuring sentiment polarity is "
                "clearly analyzed and the other five elements are clearly identified.\n\n"
                "Expected Output: (holder, target, aspect, opinion, sentiment, rationale)_1, ..."};
  t.steps[3] = {StepId::P4,
                "Input Data:\n{dialogue}{media}\nHolder-target-aspect-opinion-sentiment-rationale sextuples: "
                "{previous}\n\n"
                "Instruction: Based on the dialogue and each holder-target-aspect-opinion-sentiment-rationale "
                "sextuple, please identify instances where a sentiment flip occurs for the same holder regarding "
                "the specific target-aspect pair. Determine the trigger type for these flips from the predefined "
                "categories: introduction of new information, logical argumentation, participant feedback and "
                "interaction, personal experience and self-reflection. Formulate your output to include the "
                "holder, target, aspect, initial sentiment, flipped sentiment, and the trigger type, or state "
                "\"None\" if no flips are identified.\n\n"
                "Expected Output: (holder, target, aspect, initial sentiment, flipped sentiment, trigger type)_1, "
                "...; or \"None\""};
  t.claims[0] = {StepId::V1,
                 "In this dialogue, participants discussed various targets and their corresponding aspects, "
                 "including {clauses}." + std::string(detail::kVerifyTail)};
  t.claims[1] = {StepId::V2,
                 "In this dialogue, different participants expressed their opinions towards various aspects of "
                 "targets, including {clauses}." + std::string(detail::kVerifyTail)};
  t.claims[2] = {StepId::V3,
                 "In this dialogue, the analysis has identified sentiments and rationales behind opinions, "
                 "including {clauses}." + std::string(detail::kVerifyTail)};
  t.claims[3] = {StepId::V4,
                 "In this dialogue, instances of sentiment flipping and their triggers have been identified, "
                 "including {clauses}. Please based on the dialogue and your commonsense knowledge, verify "
                 "whether these descriptions accurately capture the emotional dynamics and their triggers in the "
                 "dialogue and provide '1' for 'yes' or '0' for 'no' judgment."};
  t.judge = {StepId::Judge,
             "Input Data:\n{dialogue}\n"
             "Instruction: Given the context of the dialogue, do '{pred}' and '{gold}' have similar meanings? "
             "Provide '1' for 'yes' or '0' for 'no' judgment.\n\n"
             "Expected Output: 1 (if yes) or 0 (if no)"};
  return t;
}

/// Wraps a filled claim into the prompt sent to the verifier.
inline std::string verification_prompt(const std::string& claim, const std::string& dialogue_text) {
  return "Input Data:\n" + dialogue_text + "\nInstruction: " + claim + "\n\nExpected Output: 1 (if yes) or 0 (if no)";
}

}  // namespace sextant::pipeline
