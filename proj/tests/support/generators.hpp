#pragma once

// Random corpora for property tests.
//
// Every utterance token is unique within a dialogue, so each explicit
// element occurs exactly once in the text and its span is the one find_span
// returns. Implicit values use tokens that never appear in any utterance.
// Only rationales contain commas; no field contains parentheses.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sextant/sextant.hpp"

namespace sextant::testgen {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[uniform(rng, 0, xs.size() - 1)];
}

inline const std::vector<std::string>& words(Language l) {
  static const std::vector<std::string> en{"battery", "screen", "camera", "price",  "design", "lens",
                                           "sound",   "Great",  "poor",   "charge", "zoom",   "menu"};
  static const std::vector<std::string> zh{"电池", "屏幕", "相机", "价格", "设计", "镜头", "声音", "很好"};
  static const std::vector<std::string> es{"batería", "pantalla", "cámara", "precio",
                                           "diseño",  "lente",    "sonido", "Óptimo"};
  switch (l) {
    case Language::En: return en;
    case Language::Zh: return zh;
    case Language::Es: return es;
  }
  return en;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"Ava", "Liam", "Noah", "Emma", "Chris", "Sofía", "李明", "Lucas"};
  return n;
}

struct DialogueGen {
  Rng& rng;
  Language lang;
  std::size_t counter = 0;
  Dialogue d;
  std::vector<std::vector<std::string>> tokens;  // per utterance

  std::string fresh(const std::string& stem) { return stem + std::to_string(counter++); }

  std::string word() {
    std::string w = fresh(pick(rng, words(lang)));
    const double r = std::uniform_real_distribution<double>(0, 1)(rng);
    if (r < 0.08) return w + ",";
    if (r < 0.12) return w + ".";
    if (r < 0.15) return w + "!";
    return w;
  }

  std::string implicit_value(std::size_t n_words, bool allow_comma) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < n_words; ++i) {
      std::string w = fresh("imp" + pick(rng, words(lang)));
      if (allow_comma && i + 1 < n_words && chance(rng, 0.3)) w += ",";
      parts.push_back(w);
    }
    return text::join(parts);
  }

  // A slice of one utterance; rejected when a non-rationale value would
  // contain a comma.
  std::optional<Element> explicit_slice(std::size_t max_width, bool allow_comma) {
    for (int tries = 0; tries < 20; ++tries) {
      const std::size_t u = uniform(rng, 0, tokens.size() - 1);
      const auto& toks = tokens[u];
      const std::size_t width = uniform(rng, 1, std::min(max_width, toks.size()));
      const std::size_t start = uniform(rng, 0, toks.size() - width);
      std::vector<std::string> slice(toks.begin() + static_cast<std::ptrdiff_t>(start),
                                     toks.begin() + static_cast<std::ptrdiff_t>(start + width));
      std::string value = text::join(slice);
      while (!value.empty() && (value.back() == ',' || value.back() == '.' || value.back() == '!')) value.pop_back();
      if (!allow_comma && value.find(',') != std::string::npos) continue;
      if (value.empty()) continue;
      return Element::explicit_at(value, Span{u, start, start + width});
    }
    return std::nullopt;
  }

  Element element(std::size_t max_width, bool allow_comma, double p_explicit) {
    if (chance(rng, p_explicit)) {
      if (auto e = explicit_slice(max_width, allow_comma)) return *e;
    }
    return Element::implicit(implicit_value(uniform(rng, 1, max_width), allow_comma));
  }
};

struct Options {
  std::size_t min_utterances = 2;
  std::size_t max_utterances = 7;
  std::size_t max_sextuples = 5;
  double p_attachment = 0.3;
  double p_extras = 0.2;
};

inline AnnotatedDialogue dialogue(Rng& rng, const std::string& doc_id, Language lang, const Options& opt = {}) {
  DialogueGen g{rng, lang, 0, {}, {}};
  g.d.doc_id = doc_id;
  g.d.language = lang;
  if (chance(rng, 0.5)) g.d.domain = pick(rng, std::vector<std::string>{"phones", "cameras", "televisions"});

  // speakers, some of whom are mentioned by name in the text
  const std::size_t n_speakers = uniform(rng, 2, 4);
  std::vector<std::string> pool = names();
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::string> speakers(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_speakers));
  std::vector<int64_t> ids;
  for (std::size_t i = 0; i < n_speakers; ++i) ids.push_back(static_cast<int64_t>(i * 3 + uniform(rng, 0, 2)));

  const std::size_t n_utt = uniform(rng, opt.min_utterances, opt.max_utterances);
  std::size_t media_counter = 0;
  for (std::size_t i = 0; i < n_utt; ++i) {
    Utterance u;
    u.index = i;
    const std::size_t s = uniform(rng, 0, n_speakers - 1);
    u.speaker_id = ids[s];
    u.speaker_name = speakers[s];
    u.reply_to = i == 0 ? -1 : static_cast<int64_t>(uniform(rng, 0, i - 1));
    std::vector<std::string> toks;
    const std::size_t n_tok = uniform(rng, 3, 9);
    for (std::size_t t = 0; t < n_tok; ++t) toks.push_back(g.word());
    u.text = text::join(toks);
    g.tokens.push_back(std::move(toks));
    if (chance(rng, opt.p_attachment)) {
      Attachment a;
      a.kind = kMediaKinds[uniform(rng, 0, 2)];
      a.caption = "a view of " + pick(rng, words(lang)) + " (close-up), detailed";
      a.id = std::string(to_string(a.kind)) + "_" + std::to_string(++media_counter);
      if (chance(rng, 0.5)) a.uri = "coco:" + std::to_string(uniform(rng, 1, 99999));
      u.attachments.push_back(std::move(a));
    }
    if (chance(rng, opt.p_extras)) u.extras["emotion"] = nlohmann::json(pick(rng, words(lang))).dump();
    g.d.utterances.push_back(std::move(u));
  }

  // name mentions become the only place a holder can be explicit
  std::vector<std::optional<Span>> mention(n_speakers);
  for (std::size_t s = 0; s < n_speakers; ++s) {
    if (!chance(rng, 0.4)) continue;
    const std::size_t ui = uniform(rng, 0, n_utt - 1);
    auto& toks = g.tokens[ui];
    const std::size_t pos = uniform(rng, 0, toks.size());
    toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(pos), speakers[s]);
    for (std::size_t t = 0; t < n_speakers; ++t) {
      if (mention[t] && mention[t]->utterance == ui && mention[t]->start >= pos) {
        ++mention[t]->start;
        ++mention[t]->end;
      }
    }
    mention[s] = Span{ui, pos, pos + 1};
    g.d.utterances[ui].text = text::join(toks);
  }
  // name tokens blanked, to spot slices that cover a name
  auto name_free = g.tokens;
  for (auto& toks : name_free) {
    for (auto& t : toks) {
      if (std::find(speakers.begin(), speakers.end(), t) != speakers.end()) t = "";
    }
  }

  AnnotatedDialogue ad;
  const std::size_t n_sx = uniform(rng, 1, opt.max_sextuples);
  for (std::size_t i = 0; i < n_sx; ++i) {
    Sextuple sx;
    const bool reuse = i > 0 && chance(rng, 0.35);
    if (reuse) {
      const Sextuple& prev = ad.sextuples[uniform(rng, 0, ad.sextuples.size() - 1)];
      sx.holder = prev.holder;
      sx.target = prev.target;
      sx.aspect = prev.aspect;
    } else {
      const std::size_t s = uniform(rng, 0, n_speakers - 1);
      sx.holder = mention[s] ? Element::explicit_at(speakers[s], *mention[s]) : Element::implicit(speakers[s]);
      sx.target = g.element(2, false, 0.7);
      sx.aspect = g.element(2, false, 0.7);
    }
    sx.opinion = g.element(2, false, 0.7);
    sx.sentiment = kSentiments[uniform(rng, 0, 2)];
    sx.rationale = g.element(5, true, 0.6);
    ad.sextuples.push_back(std::move(sx));
  }
  // a non-holder slice covering a name would make the name findable as
  // that element; such elements become implicit
  for (auto& sx : ad.sextuples) {
    for (Element* e : {&sx.target, &sx.aspect, &sx.opinion, &sx.rationale}) {
      if (e->manner != Manner::Explicit) continue;
      const auto& toks = name_free[e->span->utterance];
      for (std::size_t t = e->span->start; t < e->span->end; ++t) {
        if (toks[t].empty()) {
          *e = Element::implicit(g.implicit_value(2, e == &sx.rationale));
          break;
        }
      }
    }
  }

  ad.dialogue = std::move(g.d);
  for (const auto& f : derive_flips(ad)) {
    ad.flips.push_back({f.holder, f.target, f.aspect, f.initial, f.flipped, kTriggerTypes[uniform(rng, 0, 3)]});
  }
  if (chance(rng, opt.p_extras)) ad.extras["source"] = nlohmann::json({{"batch", uniform(rng, 1, 9)}}).dump();
  return ad;
}

inline Corpus corpus(Rng& rng, std::size_t n, const Options& opt = {}) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    const Language lang = kLanguages[uniform(rng, 0, 2)];
    c.dialogues.push_back(dialogue(rng, "doc-" + std::to_string(i), lang, opt));
  }
  if (chance(rng, 0.3)) c.metadata["provenance"] = "synthetic";
  return c;
}

/// Every element role has both explicit and implicit instances and at least
/// one flip exists, so no score field is a 0/0 ratio.
inline bool covers_all_fields(const Corpus& c) {
  std::array<std::array<bool, 2>, 5> seen{};
  bool flips = false;
  for (const auto& ad : c.dialogues) {
    flips = flips || !ad.flips.empty();
    for (const auto& sx : ad.sextuples) {
      for (ElementRole r : kElementRoles) seen[static_cast<int>(r)][static_cast<int>(sx.element(r).manner)] = true;
    }
  }
  for (const auto& s : seen) {
    if (!s[0] || !s[1]) return false;
  }
  return flips;
}

inline bool has_all_languages_and_media(const Corpus& c) {
  const CorpusStats s = corpus_stats(c);
  for (Language l : kLanguages) {
    if (!s.language(l)) return false;
  }
  for (MediaKind k : kMediaKinds) {
    if (!s.modality(k)) return false;
  }
  return true;
}

/// A random sextuple list sharing a value pool, so pred/gold sets overlap.
inline std::vector<Sextuple> sextuple_set(Rng& rng, std::size_t n, std::size_t pool = 3) {
  auto val = [&](const char* stem) { return std::string(stem) + std::to_string(uniform(rng, 0, pool - 1)); };
  std::vector<Sextuple> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sextuple sx;
    sx.holder = Element::implicit(val("h"));
    sx.target = Element::implicit(val("t"));
    sx.aspect = Element::implicit(val("a"));
    sx.opinion = Element::implicit(val("o"));
    sx.sentiment = kSentiments[uniform(rng, 0, 2)];
    sx.rationale = Element::implicit(val("r"));
    out.push_back(std::move(sx));
  }
  return out;
}

}  // namespace sextant::testgen
