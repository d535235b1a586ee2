#pragma once

// A backend that answers step prompts from gold annotations. Useful for
// exercising the pipeline end to end without a model.

#include <set>
#include <string>
#include <vector>

#include "sextant/corpus.hpp"
#include "sextant/dialogue.hpp"
#include "sextant/pipeline/backend.hpp"
#include "sextant/pipeline/templates.hpp"
#include "sextant/pipeline/tuple_parser.hpp"
#include "sextant/text.hpp"

namespace sextant::pipeline {

struct GoldReplayOptions {
  bool rotate_sentiments = false;  // corrupt step-3 sentiment labels
};

class GoldReplayBackend final : public ModelBackend {
 public:
  using Options = GoldReplayOptions;

  explicit GoldReplayBackend(Corpus gold, Options opt = {}, const TemplateSet& templates = default_templates())
      : gold_(std::move(gold)), opt_(opt) {
    for (const auto& ad : gold_.dialogues) rendered_.push_back(render_dialogue(ad.dialogue));
    for (int k = 1; k <= 4; ++k) step_tails_.push_back(expected_tail(templates.step(k).text));
    verify_tail_ = expected_tail(verification_prompt("", ""));
  }

  std::string complete(const std::string& prompt) override {
    const std::string tail = expected_tail(prompt);
    if (tail == verify_tail_) return "1";
    int step = 0;
    for (std::size_t k = 0; k < step_tails_.size(); ++k) {
      if (tail == step_tails_[k]) step = static_cast<int>(k) + 1;
    }
    if (step == 0) throw BackendError("gold replay: unrecognised prompt");
    const AnnotatedDialogue& ad = locate(prompt);
    switch (step) {
      case 1: return distinct(ad, 2);
      case 2: return distinct(ad, 4);
      case 3: return sextuples(ad);
      default: return flips(ad);
    }
  }

 private:
  static std::string expected_tail(const std::string& s) {
    const auto pos = s.rfind("Expected Output:");
    return pos == std::string::npos ? std::string() : s.substr(pos);
  }

  const AnnotatedDialogue& locate(const std::string& prompt) const {
    static const std::string head = "Input Data:\n";
    if (prompt.compare(0, head.size(), head) != 0) throw BackendError("gold replay: prompt lacks input header");
    std::size_t best = rendered_.size();
    for (std::size_t i = 0; i < rendered_.size(); ++i) {
      const std::string& r = rendered_[i];
      if (prompt.compare(head.size(), r.size(), r) != 0) continue;
      if (best == rendered_.size() || r.size() > rendered_[best].size()) best = i;
    }
    if (best == rendered_.size()) throw BackendError("gold replay: dialogue not in gold corpus");
    return gold_.dialogues[best];
  }

  static std::string emit(const std::vector<Tuple>& tuples) {
    return tuples.empty() ? std::string("None") : format_tuple_list(tuples);
  }

  static std::string distinct(const AnnotatedDialogue& ad, std::size_t arity) {
    std::vector<Tuple> out;
    std::set<std::vector<std::string>> seen;
    for (const auto& sx : ad.sextuples) {
      Tuple t = arity == 2 ? Tuple{sx.target.value, sx.aspect.value}
                           : Tuple{sx.holder.value, sx.target.value, sx.aspect.value, sx.opinion.value};
      std::vector<std::string> key;
      for (const auto& f : t) key.push_back(text::normalize_term(f));
      if (seen.insert(key).second) out.push_back(std::move(t));
    }
    return emit(out);
  }

  std::string sextuples(const AnnotatedDialogue& ad) const {
    std::vector<Tuple> out;
    for (const auto& sx : ad.sextuples) {
      Sentiment s = sx.sentiment;
      if (opt_.rotate_sentiments) s = kSentiments[(static_cast<std::size_t>(s) + 1) % kSentiments.size()];
      out.push_back({sx.holder.value, sx.target.value, sx.aspect.value, sx.opinion.value, std::string(to_string(s)),
                     sx.rationale.value});
    }
    return emit(out);
  }

  static std::string flips(const AnnotatedDialogue& ad) {
    std::vector<Tuple> out;
    for (const auto& f : ad.flips) {
      out.push_back({f.holder, f.target, f.aspect, std::string(to_string(f.initial)),
                     std::string(to_string(f.flipped)), std::string(to_string(f.trigger))});
    }
    return emit(out);
  }

  Corpus gold_;
  Options opt_;
  std::vector<std::string> rendered_;
  std::vector<std::string> step_tails_;
  std::string verify_tail_;
};

}  // namespace sextant::pipeline
