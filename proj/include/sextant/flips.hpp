#pragma once

// Derives sentiment flips from the ordered sextuples of one dialogue and
// audits annotated flips against them.

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant {

/// A flip without its trigger label.
struct DerivedFlip {
  std::string holder;
  std::string target;
  std::string aspect;
  Sentiment initial = Sentiment::Neutral;
  Sentiment flipped = Sentiment::Neutral;

  friend bool operator==(const DerivedFlip&, const DerivedFlip&) = default;
};

namespace detail {

using GroupKey = std::tuple<std::string, std::string, std::string>;

inline GroupKey group_key(const std::string& h, const std::string& t, const std::string& a) {
  return {text::normalize_term(h), text::normalize_term(t), text::normalize_term(a)};
}

struct Anchored {
  std::size_t anchor = 0;
  bool from_span = true;
  std::size_t position = 0;
};

// Opinion span utterance, else the earliest explicit span, else the
// sextuple's position in the annotation list.
inline Anchored anchor_of(const Sextuple& sx, std::size_t position) {
  if (sx.opinion.manner == Manner::Explicit && sx.opinion.span) return {sx.opinion.span->utterance, true, position};
  std::optional<std::size_t> best;
  for (ElementRole r : kElementRoles) {
    const Element& e = sx.element(r);
    if (e.manner == Manner::Explicit && e.span) best = best ? std::min(*best, e.span->utterance) : e.span->utterance;
  }
  if (best) return {*best, true, position};
  return {position, false, position};
}

struct Group {
  GroupKey key;
  std::vector<std::pair<Anchored, const Sextuple*>> members;
};

inline std::vector<Group> group_sextuples(const std::vector<Sextuple>& sextuples) {
  std::vector<Group> groups;
  std::map<GroupKey, std::size_t> index;
  for (std::size_t i = 0; i < sextuples.size(); ++i) {
    const Sextuple& sx = sextuples[i];
    auto key = group_key(sx.holder.value, sx.target.value, sx.aspect.value);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({key, {}});
    groups[it->second].members.emplace_back(anchor_of(sx, i), &sx);
  }
  for (auto& g : groups) {
    std::stable_sort(g.members.begin(), g.members.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first.anchor, a.first.position) < std::tie(b.first.anchor, b.first.position);
    });
  }
  return groups;
}

}  // namespace detail

/// One record per consecutive sentiment change within each normalized
/// (holder, target, aspect) group. Groups appear in first-mention order.
inline std::vector<DerivedFlip> derive_flips(const AnnotatedDialogue& ad) {
  std::vector<DerivedFlip> out;
  for (const auto& g : detail::group_sextuples(ad.sextuples)) {
    for (std::size_t k = 1; k < g.members.size(); ++k) {
      const Sextuple& prev = *g.members[k - 1].second;
      const Sextuple& cur = *g.members[k].second;
      if (prev.sentiment == cur.sentiment) continue;
      out.push_back({cur.holder.value, cur.target.value, cur.aspect.value, prev.sentiment, cur.sentiment});
    }
  }
  return out;
}

struct FlipAudit {
  std::vector<DerivedFlip> missing;    // derived but not annotated
  std::vector<FlipRecord> spurious;    // annotated but not derivable
  std::vector<std::string> order_fragile;  // groups ordered by list position

  bool consistent() const { return missing.empty() && spurious.empty(); }
};

inline bool same_quintuple(const DerivedFlip& d, const FlipRecord& f) {
  return d.initial == f.initial && d.flipped == f.flipped &&
         detail::group_key(d.holder, d.target, d.aspect) == detail::group_key(f.holder, f.target, f.aspect);
}

/// Compares derived quintuples with the annotated flips, ignoring triggers.
inline FlipAudit check_flip_consistency(const AnnotatedDialogue& ad) {
  FlipAudit audit;
  auto derived = derive_flips(ad);
  std::vector<bool> used(ad.flips.size(), false);
  for (const auto& d : derived) {
    bool found = false;
    for (std::size_t i = 0; i < ad.flips.size(); ++i) {
      if (!used[i] && same_quintuple(d, ad.flips[i])) {
        used[i] = found = true;
        break;
      }
    }
    if (!found) audit.missing.push_back(d);
  }
  for (std::size_t i = 0; i < ad.flips.size(); ++i) {
    if (!used[i]) audit.spurious.push_back(ad.flips[i]);
  }
  for (const auto& g : detail::group_sextuples(ad.sextuples)) {
    if (g.members.size() < 2) continue;
    const bool fragile = std::any_of(g.members.begin(), g.members.end(),
                                     [](const auto& m) { return !m.first.from_span; });
    if (fragile) {
      audit.order_fragile.push_back(std::get<0>(g.key) + " / " + std::get<1>(g.key) + " / " + std::get<2>(g.key));
    }
  }
  return audit;
}

}  // namespace sextant
