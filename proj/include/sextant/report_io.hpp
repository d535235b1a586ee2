#pragma once

// Score reports as JSON and as aligned text tables (values in percent).

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "sextant/metrics.hpp"

namespace sextant {

inline nlohmann::ordered_json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

inline nlohmann::ordered_json score_json(const CorpusScore& s) {
  nlohmann::ordered_json j;
  auto& el = j["elements"];
  for (ElementRole r : kElementRoles) {
    const ElementScore& e = s.sextuples.element(r);
    el[std::string(to_string(r))] = {{"f1", e.f1},
                                     {"explicit", prf_json(e.explicit_prf)},
                                     {"implicit", prf_json(e.implicit_prf)},
                                     {"pooled", prf_json(e.pooled)}};
  }
  j["sentiment_macro_f1"] = s.sextuples.sentiment_macro_f1;
  auto& pairs = j["pairs"];
  for (PairKind k : kPairKinds) pairs[std::string(to_string(k))] = prf_json(s.sextuples.pair(k));
  j["sextuple"] = {{"micro", prf_json(s.sextuples.sextuple_micro)},
                   {"identification", prf_json(s.sextuples.sextuple_identification)}};
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [t, f] : s.flips.per_trigger_f1) per[std::string(to_string(t))] = f;
  j["flips"] = {{"flip", prf_json(s.flips.flip)},
                {"trigger_macro_f1", s.flips.trigger_macro_f1},
                {"per_trigger_f1", per},
                {"flip_trig", prf_json(s.flips.flip_trig)}};
  return j;
}

namespace detail {

inline std::string table(const std::vector<std::string>& head, const std::vector<double>& values) {
  std::string top, bottom;
  char buf[32];
  for (std::size_t i = 0; i < head.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f", values[i] * 100.0);
    const std::size_t w = std::max(head[i].size(), std::string(buf).size());
    top += (i ? "  " : "") + head[i] + std::string(w - head[i].size(), ' ');
    bottom += (i ? "  " : "") + std::string(w - std::string(buf).size(), ' ') + buf;
  }
  return top + "\n" + bottom + "\n";
}

}  // namespace detail

inline std::string score_table(const CorpusScore& s) {
  const ScoreReport& r = s.sextuples;
  std::vector<std::string> head{"Holder", "Target", "Aspect", "Opinion", "Rationale", "Senti",
                                "T-A",    "H-O",    "S-R",    "O-S",     "Micro-F1",  "Iden-F1"};
  std::vector<double> vals;
  for (ElementRole role : kElementRoles) vals.push_back(r.element(role).f1);
  vals.push_back(r.sentiment_macro_f1);
  for (PairKind k : kPairKinds) vals.push_back(r.pair(k).f1);
  vals.push_back(r.sextuple_micro.f1);
  vals.push_back(r.sextuple_identification.f1);

  std::vector<std::string> fhead{"Flip", "Trig", "Flip-Trig"};
  std::vector<double> fvals{s.flips.flip.f1, s.flips.trigger_macro_f1, s.flips.flip_trig.f1};
  return "Sextuple extraction (F1, %)\n" + detail::table(head, vals) + "\nSentiment flip (F1, %)\n" +
         detail::table(fhead, fvals);
}

}  // namespace sextant
