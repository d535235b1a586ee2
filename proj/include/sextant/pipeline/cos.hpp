#pragma once

// Four-step extraction: pairs -> quadruples -> sextuples -> flips, each step
// optionally checked by paraphrase-then-verify with bounded reruns.

#include <algorithm>
#include <atomic>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "sextant/corpus.hpp"
#include "sextant/dialogue.hpp"
#include "sextant/flips.hpp"
#include "sextant/pipeline/backend.hpp"
#include "sextant/pipeline/paraphrase.hpp"
#include "sextant/pipeline/templates.hpp"
#include "sextant/pipeline/tuple_parser.hpp"
#include "sextant/text.hpp"

namespace sextant::pipeline {

struct PipelineConfig {
  std::shared_ptr<ModelBackend> backend;
  std::shared_ptr<ModelBackend> judge_backend;  // verifier; defaults to backend
  bool verification = true;
  int max_retries = 3;
  TemplateSet templates = default_templates();
};

/// One verifier exchange.
struct VerificationRecord {
  std::string claim;
  std::string completion;
  std::optional<bool> verdict;  // nullopt when the verdict could not be read
  std::string error;
};

/// One try at a step: the completion, its parse, and its verification.
struct Attempt {
  std::string completion;
  std::optional<ParsedTuples> parsed;
  std::string error;  // transport or parse failure
  std::optional<VerificationRecord> verification;
};

struct StepTrace {
  StepId step = StepId::P1;
  std::string prompt;
  std::vector<Attempt> attempts;
  std::string completion;  // completion whose parse was kept
  ParsedTuples parsed;
  std::vector<bool> verdicts;  // unreadable verdicts recorded as false
  int retry_count = 0;
  bool flagged = false;
  std::vector<std::string> notes;
};

struct PipelineError : std::runtime_error {
  std::string doc_id;
  std::vector<StepTrace> traces;
  bool backend_failure = false;

  PipelineError(const std::string& what, std::string doc, std::vector<StepTrace> t, bool backend)
      : std::runtime_error(what), doc_id(std::move(doc)), traces(std::move(t)), backend_failure(backend) {}
};

struct CosResult {
  std::string doc_id;
  std::vector<Sextuple> sextuples;
  std::vector<FlipRecord> flips;
  std::vector<StepTrace> traces;

  bool flagged() const {
    return std::any_of(traces.begin(), traces.end(), [](const StepTrace& t) { return t.flagged; });
  }
};

namespace detail {

inline TupleSpec spec_for(int step) {
  switch (step) {
    case 1: return {2, {}, std::nullopt};
    case 2: return {4, {}, std::nullopt};
    case 3: return {6, {4}, std::nullopt};
    case 4: return {6, {3, 4}, 5};
  }
  throw std::invalid_argument("no step " + std::to_string(step));
}

inline std::string media_line(const Dialogue& d) {
  auto tags = media_placeholders(d);
  if (tags.empty()) return "";
  return "With encoded information of " + text::join(tags, ", ") + "\n";
}

inline StepId step_id(int k) { return static_cast<StepId>(k - 1); }

// Flips whose two sentiments agree are not flips.
inline void check_step4(const ParsedTuples& p) {
  for (const auto& t : p.tuples) {
    if (parse_sentiment(t[3]) == parse_sentiment(t[4])) {
      throw TupleParseError(TupleParseErrorKind::InvalidSentiment, "(" + text::join(t, ", ") + ")");
    }
  }
}

struct StepOutcome {
  StepTrace trace;
  bool ok = false;
  bool backend_failure = false;
  std::string last_error;
};

inline StepOutcome run_step(int k, const std::string& prompt, const std::string& input_text,
                            const PipelineConfig& cfg) {
  StepOutcome out;
  StepTrace& tr = out.trace;
  tr.step = step_id(k);
  tr.prompt = prompt;
  ModelBackend& verifier = cfg.judge_backend ? *cfg.judge_backend : *cfg.backend;
  const TupleSpec spec = spec_for(k);
  std::optional<std::size_t> last_parsed;

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    Attempt a;
    try {
      a.completion = cfg.backend->complete(prompt);
    } catch (const BackendError& e) {
      a.error = std::string("backend: ") + e.what();
      out.backend_failure = true;
      out.last_error = a.error;
      tr.attempts.push_back(std::move(a));
      continue;
    }
    try {
      ParsedTuples p = parse_tuple_list(a.completion, spec);
      if (k == 4) check_step4(p);
      a.parsed = std::move(p);
    } catch (const TupleParseError& e) {
      a.error = std::string("parse: ") + e.what();
      out.backend_failure = false;
      out.last_error = a.error;
      tr.attempts.push_back(std::move(a));
      continue;
    }
    out.backend_failure = false;
    bool accepted = true;
    if (cfg.verification && !a.parsed->empty()) {
      VerificationRecord v;
      v.claim = paraphrase_tuples(tr.step, a.parsed->tuples, cfg.templates);
      try {
        v.completion = verifier.complete(verification_prompt(v.claim, input_text));
        v.verdict = parse_verdict(v.completion);
      } catch (const VerificationParseError& e) {
        v.error = e.what();
      } catch (const BackendError& e) {
        v.error = std::string("backend: ") + e.what();
      }
      accepted = v.verdict.value_or(false);
      tr.verdicts.push_back(accepted);
      a.verification = std::move(v);
    }
    tr.attempts.push_back(std::move(a));
    last_parsed = tr.attempts.size() - 1;
    if (accepted) break;
  }

  tr.retry_count = static_cast<int>(tr.attempts.size()) - 1;
  if (!last_parsed) return out;
  const Attempt& kept = tr.attempts[*last_parsed];
  tr.completion = kept.completion;
  tr.parsed = *kept.parsed;
  tr.flagged = cfg.verification && !tr.parsed.empty() &&
               !(kept.verification && kept.verification->verdict.value_or(false));
  out.ok = true;
  return out;
}

inline Element locate(const Dialogue& d, const std::string& value) {
  if (auto span = find_span(d, value)) return Element::explicit_at(value, *span);
  return Element::implicit(value);
}

}  // namespace detail

/// Builds sextuples from step-3 tuples; an element is explicit when its
/// text occurs in the dialogue, with the span of the first occurrence.
inline std::vector<Sextuple> to_sextuples(const Dialogue& d, const std::vector<Tuple>& tuples) {
  std::vector<Sextuple> out;
  for (const auto& t : tuples) {
    Sextuple sx;
    sx.holder = detail::locate(d, t[0]);
    sx.target = detail::locate(d, t[1]);
    sx.aspect = detail::locate(d, t[2]);
    sx.opinion = detail::locate(d, t[3]);
    sx.sentiment = *parse_sentiment(t[4]);
    sx.rationale = detail::locate(d, t[5]);
    out.push_back(std::move(sx));
  }
  return out;
}

inline std::vector<FlipRecord> to_flips(const std::vector<Tuple>& tuples) {
  std::vector<FlipRecord> out;
  for (const auto& t : tuples) {
    out.push_back({t[0], t[1], t[2], *parse_sentiment(t[3]), *parse_sentiment(t[4]), *parse_trigger(t[5])});
  }
  return out;
}

inline CosResult run_cos(const Dialogue& d, const PipelineConfig& cfg) {
  if (!cfg.backend) throw std::invalid_argument("pipeline needs a backend");
  if (cfg.max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (auto report = validate_structure(d); report.has_errors()) {
    throw std::invalid_argument("dialogue '" + d.doc_id + "' is structurally invalid");
  }

  CosResult res;
  res.doc_id = d.doc_id;
  const std::string dialogue_text = render_dialogue(d);
  const std::string media = detail::media_line(d);
  const std::string input_text = dialogue_text + media;
  std::string previous;

  for (int k = 1; k <= 4; ++k) {
    Bindings b{{"dialogue", dialogue_text}, {"media", media}};
    if (k > 1) b["previous"] = previous;
    auto outcome = detail::run_step(k, cfg.templates.step(k).render(b), input_text, cfg);
    res.traces.push_back(std::move(outcome.trace));
    if (!outcome.ok) {
      throw PipelineError("step " + std::to_string(k) + " of '" + d.doc_id + "' failed after " +
                              std::to_string(cfg.max_retries + 1) + " attempts: " + outcome.last_error,
                          d.doc_id, std::move(res.traces), outcome.backend_failure);
    }
    StepTrace& tr = res.traces.back();

    if (k == 3) {
      std::set<sextant::detail::GroupKey> known;
      for (const auto& q : res.traces[1].parsed.tuples) known.insert(sextant::detail::group_key(q[0], q[1], q[2]));
      for (const auto& t : tr.parsed.tuples) {
        if (!known.count(sextant::detail::group_key(t[0], t[1], t[2]))) {
          tr.notes.push_back("(" + t[0] + ", " + t[1] + ", " + t[2] + ") absent from step-2 output");
        }
      }
      res.sextuples = to_sextuples(d, tr.parsed.tuples);
    }
    if (k == 4) res.flips = to_flips(tr.parsed.tuples);
    if (k < 4 && tr.parsed.empty()) break;
    previous = format_tuple_list(tr.parsed);
  }
  return res;
}

/// Runs every dialogue; a failure is captured per dialogue rather than
/// aborting the batch. Output order follows the input.
using CosOutcome = std::variant<CosResult, PipelineError>;

inline std::vector<CosOutcome> run_cos_corpus(const Corpus& corpus, const PipelineConfig& cfg,
                                              std::size_t parallel = 1) {
  const std::size_t n = corpus.dialogues.size();
  std::vector<std::optional<CosOutcome>> slots(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const Dialogue& d = corpus.dialogues[i].dialogue;
      try {
        slots[i].emplace(run_cos(d, cfg));
      } catch (const PipelineError& e) {
        slots[i].emplace(e);
      } catch (const std::exception& e) {
        slots[i].emplace(PipelineError(e.what(), d.doc_id, {}, false));
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<CosOutcome> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Predicted corpus from pipeline outcomes; failed dialogues contribute an
/// unannotated record so scoring still counts their gold tuples as missed.
inline Corpus to_corpus(const Corpus& input, const std::vector<CosOutcome>& outcomes) {
  Corpus out;
  out.metadata = input.metadata;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    AnnotatedDialogue ad;
    ad.dialogue = input.dialogues.at(i).dialogue;
    if (const auto* r = std::get_if<CosResult>(&outcomes[i])) {
      ad.sextuples = r->sextuples;
      ad.flips = r->flips;
    }
    out.dialogues.push_back(std::move(ad));
  }
  return out;
}

}  // namespace sextant::pipeline
