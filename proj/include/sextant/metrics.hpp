#pragma once

// Scoring engine for sextuple extraction and sentiment-flip detection.
//
// Every ratio is computed from pooled counts (MatchCounts) so per-dialogue
// results can be summed before precision/recall are taken. Set-to-set
// correspondence always goes through match_tuples.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sextant/corpus.hpp"
#include "sextant/dialogue.hpp"
#include "sextant/matching.hpp"
#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant {

struct ScoringError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from(double p, double r) { return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0}; }

  friend bool operator==(const PRF&, const PRF&) = default;
};

/// Matched mass on each side plus set sizes. For 0/1 criteria the two
/// matched fields are equal; proportional matching credits them separately.
struct MatchCounts {
  double matched_pred = 0.0;
  double matched_gold = 0.0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  bool empty() const { return predicted == 0 && gold == 0; }

  PRF prf() const {
    const double p = predicted ? matched_pred / static_cast<double>(predicted) : 0.0;
    const double r = gold ? matched_gold / static_cast<double>(gold) : 0.0;
    return PRF::from(p, r);
  }

  MatchCounts& operator+=(const MatchCounts& o) {
    matched_pred += o.matched_pred;
    matched_gold += o.matched_gold;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend MatchCounts operator+(MatchCounts a, const MatchCounts& b) { return a += b; }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

inline MatchCounts binary_counts(std::size_t matched, std::size_t predicted, std::size_t gold) {
  return {static_cast<double>(matched), static_cast<double>(matched), predicted, gold};
}

// ---- judges -----------------------------------------------------------------

/// (dialogue context, predicted term, gold term) -> semantically identical?
using SemanticJudge =
    std::function<bool(const std::string& context, const std::string& pred, const std::string& gold)>;

inline bool normalized_equality(const std::string& a, const std::string& b) {
  return text::normalize_term(a) == text::normalize_term(b);
}

inline SemanticJudge offline_judge() {
  return [](const std::string&, const std::string& pred, const std::string& gold) {
    return normalized_equality(pred, gold);
  };
}

/// Caches verdicts per (context, pred, gold). Thread-safe; the wrapped
/// judge may be invoked concurrently for distinct keys.
inline SemanticJudge memoize(SemanticJudge judge) {
  struct State {
    std::mutex mu;
    std::map<std::tuple<std::string, std::string, std::string>, bool> cache;
  };
  auto state = std::make_shared<State>();
  return [judge = std::move(judge), state](const std::string& ctx, const std::string& pred,
                                           const std::string& gold) {
    auto key = std::make_tuple(ctx, pred, gold);
    {
      std::lock_guard lock(state->mu);
      if (auto it = state->cache.find(key); it != state->cache.end()) return it->second;
    }
    const bool verdict = judge(ctx, pred, gold);
    std::lock_guard lock(state->mu);
    state->cache.emplace(std::move(key), verdict);
    return verdict;
  };
}

namespace detail {

inline bool call_judge(const SemanticJudge& judge, const std::string& ctx, const std::string& pred,
                       const std::string& gold) {
  try {
    return judge(ctx, pred, gold);
  } catch (const std::exception& e) {
    throw ScoringError("semantic judge failed on pred '" + pred + "' vs gold '" + gold +
                       "': " + e.what());
  }
}

}  // namespace detail

// ---- proportional overlap ---------------------------------------------------

struct Overlap {
  double pred_share = 0.0;  // overlap / |pred tokens|
  double gold_share = 0.0;  // overlap / |gold tokens|

  /// Harmonic mean of the two shares; the single score thresholded at 0.5.
  double f1() const {
    return pred_share + gold_share > 0.0 ? 2.0 * pred_share * gold_share / (pred_share + gold_share)
                                         : 0.0;
  }
};

/// Longest common contiguous token run between the normalized terms.
inline Overlap proportional_overlap(std::string_view pred, std::string_view gold) {
  const auto p = text::normalized_tokens(pred);
  const auto g = text::normalized_tokens(gold);
  if (p.empty() || g.empty()) return {};
  std::size_t best = 0;
  std::vector<std::size_t> prev(g.size() + 1, 0), cur(g.size() + 1, 0);
  for (std::size_t i = 1; i <= p.size(); ++i) {
    for (std::size_t j = 1; j <= g.size(); ++j) {
      cur[j] = p[i - 1] == g[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return {static_cast<double>(best) / static_cast<double>(p.size()),
          static_cast<double>(best) / static_cast<double>(g.size())};
}

// ---- element-wise -----------------------------------------------------------

/// Explicit and implicit halves of one element category.
struct ElementCounts {
  MatchCounts explicit_part;
  MatchCounts implicit_part;

  ElementCounts& operator+=(const ElementCounts& o) {
    explicit_part += o.explicit_part;
    implicit_part += o.implicit_part;
    return *this;
  }
  friend bool operator==(const ElementCounts&, const ElementCounts&) = default;
};

struct ElementScore {
  PRF explicit_prf;  // exact match (proportional for rationale)
  PRF implicit_prf;  // binary match through the judge
  /// Mean of the two halves' F1; a half empty on both sides is skipped.
  double f1 = 0.0;
  /// Counts pooled across both halves, for comparison with the mean.
  PRF pooled;
};

inline ElementScore element_score(const ElementCounts& c) {
  ElementScore s;
  s.explicit_prf = c.explicit_part.prf();
  s.implicit_prf = c.implicit_part.prf();
  if (c.explicit_part.empty()) {
    s.f1 = s.implicit_prf.f1;
  } else if (c.implicit_part.empty()) {
    s.f1 = s.explicit_prf.f1;
  } else {
    s.f1 = 0.5 * (s.explicit_prf.f1 + s.implicit_prf.f1);
  }
  s.pooled = (c.explicit_part + c.implicit_part).prf();
  return s;
}

namespace detail {

inline MatchCounts exact_counts(const std::vector<const Element*>& preds,
                                const std::vector<const Element*>& golds) {
  auto m = match_tuples(preds.size(), golds.size(), [&](std::size_t p, std::size_t g) {
    return normalized_equality(preds[p]->value, golds[g]->value) ? 1.0 : 0.0;
  });
  return binary_counts(m.size(), preds.size(), golds.size());
}

inline MatchCounts binary_match_counts(const std::vector<const Element*>& preds,
                                       const std::vector<const Element*>& golds,
                                       const SemanticJudge& judge, const std::string& ctx) {
  std::vector<std::vector<double>> s(preds.size(), std::vector<double>(golds.size(), 0.0));
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < golds.size(); ++g) {
      s[p][g] = call_judge(judge, ctx, preds[p]->value, golds[g]->value) ? 1.0 : 0.0;
    }
  }
  auto m = match_tuples(preds.size(), golds.size(), [&](std::size_t p, std::size_t g) { return s[p][g]; });
  return binary_counts(m.size(), preds.size(), golds.size());
}

inline MatchCounts proportional_counts(const std::vector<const Element*>& preds,
                                       const std::vector<const Element*>& golds) {
  std::vector<std::vector<Overlap>> o(preds.size(), std::vector<Overlap>(golds.size()));
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < golds.size(); ++g) o[p][g] = proportional_overlap(preds[p]->value, golds[g]->value);
  }
  auto m = match_tuples(preds.size(), golds.size(), [&](std::size_t p, std::size_t g) { return o[p][g].f1(); });
  MatchCounts c{0.0, 0.0, preds.size(), golds.size()};
  for (const auto& [p, g] : m.pairs) {
    c.matched_pred += o[p][g].pred_share;
    c.matched_gold += o[p][g].gold_share;
  }
  return c;
}

}  // namespace detail

/// Counts for one element category. Explicit elements use exact match
/// (proportional match for rationale); implicit elements use the judge.
inline ElementCounts element_counts(const std::vector<Element>& preds, const std::vector<Element>& golds,
                                    ElementRole role, const SemanticJudge& judge, const std::string& context) {
  std::vector<const Element*> pe, pi, ge, gi;
  for (const auto& e : preds) (e.manner == Manner::Explicit ? pe : pi).push_back(&e);
  for (const auto& e : golds) (e.manner == Manner::Explicit ? ge : gi).push_back(&e);
  ElementCounts c;
  c.explicit_part = role == ElementRole::Rationale ? detail::proportional_counts(pe, ge)
                                                   : detail::exact_counts(pe, ge);
  c.implicit_part = detail::binary_match_counts(pi, gi, judge, context);
  return c;
}

inline ElementScore element_f1(const std::vector<Element>& preds, const std::vector<Element>& golds,
                               ElementRole role, const SemanticJudge& judge = offline_judge(),
                               const std::string& context = {}) {
  return element_score(element_counts(preds, golds, role, judge, context));
}

/// Distinct elements of one role, keyed by manner and normalized value,
/// in first-occurrence order.
inline std::vector<Element> collect_elements(const std::vector<Sextuple>& sextuples, ElementRole role) {
  std::vector<Element> out;
  std::set<std::pair<Manner, std::string>> seen;
  for (const auto& sx : sextuples) {
    const Element& e = sx.element(role);
    if (seen.emplace(e.manner, text::normalize_term(e.value)).second) out.push_back(e);
  }
  return out;
}

/// Whether a predicted element counts as correct against a gold one. The
/// gold element's manner selects the rule.
inline bool element_correct(const Element& pred, const Element& gold, ElementRole role,
                            const SemanticJudge& judge, const std::string& context) {
  if (gold.manner == Manner::Explicit) {
    if (role == ElementRole::Rationale) return proportional_overlap(pred.value, gold.value).f1() > 0.5;
    return normalized_equality(pred.value, gold.value);
  }
  return detail::call_judge(judge, context, pred.value, gold.value);
}

// ---- sentiment --------------------------------------------------------------

struct ClassCounts3 {
  std::array<std::size_t, 3> correct{};
  std::array<std::size_t, 3> predicted{};
  std::array<std::size_t, 3> gold{};

  ClassCounts3& operator+=(const ClassCounts3& o) {
    for (std::size_t i = 0; i < 3; ++i) {
      correct[i] += o.correct[i];
      predicted[i] += o.predicted[i];
      gold[i] += o.gold[i];
    }
    return *this;
  }
  friend bool operator==(const ClassCounts3&, const ClassCounts3&) = default;
};

namespace detail {

/// Mean per-class F1 over classes seen on either side; 0 when none are.
template <std::size_t N>
double macro_f1(const std::array<std::size_t, N>& correct, const std::array<std::size_t, N>& predicted,
                const std::array<std::size_t, N>& gold, std::array<double, N>* per_class = nullptr) {
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < N; ++c) {
    const double p = predicted[c] ? static_cast<double>(correct[c]) / static_cast<double>(predicted[c]) : 0.0;
    const double r = gold[c] ? static_cast<double>(correct[c]) / static_cast<double>(gold[c]) : 0.0;
    const double f = PRF::from(p, r).f1;
    if (per_class) (*per_class)[c] = f;
    if (predicted[c] == 0 && gold[c] == 0) continue;
    sum += f;
    ++classes;
  }
  return classes ? sum / static_cast<double>(classes) : 0.0;
}

}  // namespace detail

inline double macro_f1(const ClassCounts3& c) {
  return detail::macro_f1<3>(c.correct, c.predicted, c.gold);
}

/// Aligned (pred, gold) label pairs plus per-class counts of unaligned
/// predictions (false positives) and unaligned golds (false negatives).
inline double sentiment_macro_f1(const std::vector<std::pair<Sentiment, Sentiment>>& pairs,
                                 const std::array<std::size_t, 3>& unmatched_pred = {},
                                 const std::array<std::size_t, 3>& unmatched_gold = {}) {
  ClassCounts3 c;
  for (const auto& [p, g] : pairs) {
    ++c.predicted[static_cast<int>(p)];
    ++c.gold[static_cast<int>(g)];
    if (p == g) ++c.correct[static_cast<int>(p)];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    c.predicted[i] += unmatched_pred[i];
    c.gold[i] += unmatched_gold[i];
  }
  return macro_f1(c);
}

// ---- pair-wise and sextuple-level -------------------------------------------

enum class PairKind { TargetAspect, HolderOpinion, SentimentRationale, OpinionSentiment };

inline constexpr std::array<PairKind, 4> kPairKinds{PairKind::TargetAspect, PairKind::HolderOpinion,
                                                   PairKind::SentimentRationale,
                                                   PairKind::OpinionSentiment};

inline std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::TargetAspect: return "T-A";
    case PairKind::HolderOpinion: return "H-O";
    case PairKind::SentimentRationale: return "S-R";
    case PairKind::OpinionSentiment: return "O-S";
  }
  return "";
}

namespace detail {

inline std::string pair_key(const Sextuple& s, PairKind k) {
  auto n = [](const Element& e) { return std::string(to_string(e.manner)) + ":" + text::normalize_term(e.value); };
  const std::string sent(to_string(s.sentiment));
  switch (k) {
    case PairKind::TargetAspect: return n(s.target) + "|" + n(s.aspect);
    case PairKind::HolderOpinion: return n(s.holder) + "|" + n(s.opinion);
    case PairKind::SentimentRationale: return sent + "|" + n(s.rationale);
    case PairKind::OpinionSentiment: return n(s.opinion) + "|" + sent;
  }
  return {};
}

inline std::vector<const Sextuple*> distinct_pairs(const std::vector<Sextuple>& xs, PairKind k) {
  std::vector<const Sextuple*> out;
  std::set<std::string> seen;
  for (const auto& s : xs) {
    if (seen.insert(pair_key(s, k)).second) out.push_back(&s);
  }
  return out;
}

}  // namespace detail

inline bool pair_correct(const Sextuple& pred, const Sextuple& gold, PairKind kind,
                         const SemanticJudge& judge, const std::string& ctx) {
  auto ok = [&](ElementRole r) { return element_correct(pred.element(r), gold.element(r), r, judge, ctx); };
  switch (kind) {
    case PairKind::TargetAspect: return ok(ElementRole::Target) && ok(ElementRole::Aspect);
    case PairKind::HolderOpinion: return ok(ElementRole::Holder) && ok(ElementRole::Opinion);
    case PairKind::SentimentRationale: return pred.sentiment == gold.sentiment && ok(ElementRole::Rationale);
    case PairKind::OpinionSentiment: return ok(ElementRole::Opinion) && pred.sentiment == gold.sentiment;
  }
  return false;
}

/// Pairs are projected from the sextuples and de-duplicated before matching.
inline MatchCounts pair_counts(const std::vector<Sextuple>& preds, const std::vector<Sextuple>& golds,
                               PairKind kind, const SemanticJudge& judge, const std::string& ctx) {
  auto p = detail::distinct_pairs(preds, kind);
  auto g = detail::distinct_pairs(golds, kind);
  std::vector<std::vector<double>> s(p.size(), std::vector<double>(g.size(), 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) s[i][j] = pair_correct(*p[i], *g[j], kind, judge, ctx) ? 1.0 : 0.0;
  }
  auto m = match_tuples(p.size(), g.size(), [&](std::size_t i, std::size_t j) { return s[i][j]; });
  return binary_counts(m.size(), p.size(), g.size());
}

inline PRF pair_f1(const std::vector<Sextuple>& preds, const std::vector<Sextuple>& golds, PairKind kind,
                   const SemanticJudge& judge = offline_judge(), const std::string& ctx = {}) {
  return pair_counts(preds, golds, kind, judge, ctx).prf();
}

enum class SextupleMode { Micro, Identification };

/// All five text elements correct; sentiment is checked separately.
inline bool identification_correct(const Sextuple& pred, const Sextuple& gold, const SemanticJudge& judge,
                                   const std::string& ctx) {
  for (ElementRole r : kElementRoles) {
    if (!element_correct(pred.element(r), gold.element(r), r, judge, ctx)) return false;
  }
  return true;
}

namespace detail {

inline std::vector<std::vector<char>> identification_matrix(const std::vector<Sextuple>& preds,
                                                            const std::vector<Sextuple>& golds,
                                                            const SemanticJudge& judge,
                                                            const std::string& ctx) {
  std::vector<std::vector<char>> ok(preds.size(), std::vector<char>(golds.size(), 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < golds.size(); ++j) ok[i][j] = identification_correct(preds[i], golds[j], judge, ctx);
  }
  return ok;
}

}  // namespace detail

inline MatchCounts sextuple_counts(const std::vector<Sextuple>& preds, const std::vector<Sextuple>& golds,
                                   const SemanticJudge& judge, const std::string& ctx, SextupleMode mode) {
  auto ok = detail::identification_matrix(preds, golds, judge, ctx);
  auto m = match_tuples(preds.size(), golds.size(), [&](std::size_t i, std::size_t j) {
    if (!ok[i][j]) return 0.0;
    if (mode == SextupleMode::Micro && preds[i].sentiment != golds[j].sentiment) return 0.0;
    return 1.0;
  });
  return binary_counts(m.size(), preds.size(), golds.size());
}

inline PRF sextuple_f1(const std::vector<Sextuple>& preds, const std::vector<Sextuple>& golds,
                       const SemanticJudge& judge, const std::string& ctx, SextupleMode mode) {
  return sextuple_counts(preds, golds, judge, ctx, mode).prf();
}

/// Sentiment label counts under the identification alignment: sextuples
/// matched on the five text elements (preferring agreeing labels) give
/// label pairs; unmatched ones are false positives / false negatives.
inline ClassCounts3 sentiment_counts(const std::vector<Sextuple>& preds, const std::vector<Sextuple>& golds,
                                     const SemanticJudge& judge, const std::string& ctx) {
  auto ok = detail::identification_matrix(preds, golds, judge, ctx);
  const double bonus = 0.5 / static_cast<double>(std::min(preds.size(), golds.size()) + 1);
  auto m = match_tuples(preds.size(), golds.size(), [&](std::size_t i, std::size_t j) {
    if (!ok[i][j]) return 0.0;
    return 1.0 + (preds[i].sentiment == golds[j].sentiment ? bonus : 0.0);
  });
  ClassCounts3 c;
  for (const auto& s : preds) ++c.predicted[static_cast<int>(s.sentiment)];
  for (const auto& s : golds) ++c.gold[static_cast<int>(s.sentiment)];
  for (const auto& [i, j] : m.pairs) {
    if (preds[i].sentiment == golds[j].sentiment) ++c.correct[static_cast<int>(golds[j].sentiment)];
  }
  return c;
}

// ---- flips ------------------------------------------------------------------

struct FlipCounts {
  MatchCounts flip;
  MatchCounts flip_trig;
  std::array<std::size_t, 4> trig_correct{};
  std::array<std::size_t, 4> trig_predicted{};
  std::array<std::size_t, 4> trig_gold{};

  FlipCounts& operator+=(const FlipCounts& o) {
    flip += o.flip;
    flip_trig += o.flip_trig;
    for (std::size_t i = 0; i < 4; ++i) {
      trig_correct[i] += o.trig_correct[i];
      trig_predicted[i] += o.trig_predicted[i];
      trig_gold[i] += o.trig_gold[i];
    }
    return *this;
  }
  friend bool operator==(const FlipCounts&, const FlipCounts&) = default;
};

struct FlipScoreReport {
  PRF flip;
  double trigger_macro_f1 = 0.0;
  /// Only trigger classes present on either side.
  std::map<TriggerType, double> per_trigger_f1;
  PRF flip_trig;
};

inline bool same_flip_quintuple(const FlipRecord& a, const FlipRecord& b) {
  return a.initial == b.initial && a.flipped == b.flipped && normalized_equality(a.holder, b.holder) &&
         normalized_equality(a.target, b.target) && normalized_equality(a.aspect, b.aspect);
}

inline FlipCounts flip_counts(const std::vector<FlipRecord>& preds, const std::vector<FlipRecord>& golds) {
  FlipCounts c;
  const double bonus = 0.5 / static_cast<double>(std::min(preds.size(), golds.size()) + 1);
  auto quint = match_tuples(preds.size(), golds.size(), [&](std::size_t i, std::size_t j) {
    if (!same_flip_quintuple(preds[i], golds[j])) return 0.0;
    return 1.0 + (preds[i].trigger == golds[j].trigger ? bonus : 0.0);
  });
  c.flip = binary_counts(quint.size(), preds.size(), golds.size());
  for (const auto& f : preds) ++c.trig_predicted[static_cast<int>(f.trigger)];
  for (const auto& f : golds) ++c.trig_gold[static_cast<int>(f.trigger)];
  for (const auto& [i, j] : quint.pairs) {
    if (preds[i].trigger == golds[j].trigger) ++c.trig_correct[static_cast<int>(golds[j].trigger)];
  }
  auto full = match_tuples(preds.size(), golds.size(), [&](std::size_t i, std::size_t j) {
    return same_flip_quintuple(preds[i], golds[j]) && preds[i].trigger == golds[j].trigger ? 1.0 : 0.0;
  });
  c.flip_trig = binary_counts(full.size(), preds.size(), golds.size());
  return c;
}

inline FlipScoreReport flip_report(const FlipCounts& c) {
  FlipScoreReport r;
  r.flip = c.flip.prf();
  r.flip_trig = c.flip_trig.prf();
  std::array<double, 4> per{};
  r.trigger_macro_f1 = detail::macro_f1<4>(c.trig_correct, c.trig_predicted, c.trig_gold, &per);
  for (std::size_t i = 0; i < 4; ++i) {
    if (c.trig_predicted[i] || c.trig_gold[i]) r.per_trigger_f1[kTriggerTypes[i]] = per[i];
  }
  return r;
}

inline FlipScoreReport flip_scores(const std::vector<FlipRecord>& preds, const std::vector<FlipRecord>& golds) {
  return flip_report(flip_counts(preds, golds));
}

// ---- agreement --------------------------------------------------------------

/// Cohen's kappa between two annotators' label sequences.
template <typename Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cohen_kappa: label lists differ in length");
  if (a.empty()) throw std::invalid_argument("cohen_kappa: label lists are empty");
  const double n = static_cast<double>(a.size());
  std::map<Label, double> ca, cb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : ca) {
    if (auto it = cb.find(label); it != cb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

// ---- corpus-level -----------------------------------------------------------

/// Everything needed to compute both reports; additive across dialogues.
struct ScoreCounts {
  std::array<ElementCounts, 5> elements{};
  ClassCounts3 sentiment;
  std::array<MatchCounts, 4> pairs{};
  MatchCounts micro;
  MatchCounts identification;
  FlipCounts flips;

  ScoreCounts& operator+=(const ScoreCounts& o) {
    for (std::size_t i = 0; i < 5; ++i) elements[i] += o.elements[i];
    sentiment += o.sentiment;
    for (std::size_t i = 0; i < 4; ++i) pairs[i] += o.pairs[i];
    micro += o.micro;
    identification += o.identification;
    flips += o.flips;
    return *this;
  }
  friend bool operator==(const ScoreCounts&, const ScoreCounts&) = default;
};

struct ScoreReport {
  std::array<ElementScore, 5> elements{};  // indexed by ElementRole
  double sentiment_macro_f1 = 0.0;
  std::array<PRF, 4> pairs{};  // indexed by PairKind
  PRF sextuple_micro;
  PRF sextuple_identification;

  const ElementScore& element(ElementRole r) const { return elements[static_cast<int>(r)]; }
  const PRF& pair(PairKind k) const { return pairs[static_cast<int>(k)]; }
};

struct CorpusScore {
  ScoreReport sextuples;
  FlipScoreReport flips;
  ScoreCounts counts;
};

inline ScoreReport score_report(const ScoreCounts& c) {
  ScoreReport r;
  for (std::size_t i = 0; i < 5; ++i) r.elements[i] = element_score(c.elements[i]);
  r.sentiment_macro_f1 = macro_f1(c.sentiment);
  for (std::size_t i = 0; i < 4; ++i) r.pairs[i] = c.pairs[i].prf();
  r.sextuple_micro = c.micro.prf();
  r.sextuple_identification = c.identification.prf();
  return r;
}

/// Counts for one gold dialogue; `pred` may be null when the prediction
/// side has nothing for this doc_id.
inline ScoreCounts count_dialogue(const AnnotatedDialogue* pred, const AnnotatedDialogue& gold,
                                  const SemanticJudge& judge) {
  static const std::vector<Sextuple> kNoSextuples;
  static const std::vector<FlipRecord> kNoFlips;
  const auto& ps = pred ? pred->sextuples : kNoSextuples;
  const auto& pf = pred ? pred->flips : kNoFlips;
  const auto& gs = gold.sextuples;
  const std::string ctx = render_dialogue(gold.dialogue);

  ScoreCounts c;
  for (ElementRole r : kElementRoles) {
    c.elements[static_cast<int>(r)] = element_counts(collect_elements(ps, r), collect_elements(gs, r), r, judge, ctx);
  }
  c.sentiment = sentiment_counts(ps, gs, judge, ctx);
  for (PairKind k : kPairKinds) c.pairs[static_cast<int>(k)] = pair_counts(ps, gs, k, judge, ctx);
  c.micro = sextuple_counts(ps, gs, judge, ctx, SextupleMode::Micro);
  c.identification = sextuple_counts(ps, gs, judge, ctx, SextupleMode::Identification);
  c.flips = flip_counts(pf, gold.flips);
  return c;
}

/// Pairs dialogues by doc_id and pools counts before taking ratios.
inline CorpusScore score_corpus(const Corpus& pred, const Corpus& gold, const SemanticJudge& judge = offline_judge()) {
  std::unordered_map<std::string, const AnnotatedDialogue*> gold_ids, pred_ids;
  for (const auto& ad : gold.dialogues) gold_ids.emplace(ad.dialogue.doc_id, &ad);
  for (const auto& ad : pred.dialogues) {
    if (!gold_ids.contains(ad.dialogue.doc_id)) {
      throw ScoringError("predicted doc_id '" + ad.dialogue.doc_id + "' has no gold counterpart");
    }
    pred_ids.emplace(ad.dialogue.doc_id, &ad);
  }
  const SemanticJudge cached = memoize(judge);
  CorpusScore out;
  for (const auto& g : gold.dialogues) {
    auto it = pred_ids.find(g.dialogue.doc_id);
    out.counts += count_dialogue(it == pred_ids.end() ? nullptr : it->second, g, cached);
  }
  out.sextuples = score_report(out.counts);
  out.flips = flip_report(out.counts.flips);
  return out;
}

}  // namespace sextant
