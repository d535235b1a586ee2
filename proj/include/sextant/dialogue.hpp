#pragma once

// Structural checks and span operations over dialogues and their
// annotations.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sextant/report.hpp"
#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant {

/// Checks the Dialogue/Utterance invariants. Never throws; every problem is
/// a finding tagged with the utterance index and a rule id.
inline ValidationReport validate_structure(const Dialogue& d) {
  ValidationReport report;
  auto error = [&](std::string rule, std::string msg, std::optional<std::size_t> utt) {
    report.add({Severity::Error, std::move(rule), std::move(msg), utt, std::nullopt, d.doc_id});
  };

  if (d.doc_id.empty()) error("doc-id-empty", "doc_id must be non-empty", std::nullopt);
  if (d.utterances.empty()) error("dialogue-empty", "dialogue has no utterances", std::nullopt);

  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    const Utterance& u = d.utterances[i];
    if (u.index != i) {
      error("index-order",
            "utterance index " + std::to_string(u.index) + " at position " + std::to_string(i),
            i);
    }
    if (u.reply_to != -1 && (u.reply_to < 0 || u.reply_to >= static_cast<std::int64_t>(i))) {
      error("reply-order",
            "reply_to must precede utterance (got " + std::to_string(u.reply_to) + ")", i);
    }
    if (text::trim(u.text).empty()) error("text-empty", "utterance text is empty", i);
    for (const Attachment& a : u.attachments) {
      if (text::trim(a.caption).empty()) {
        error("caption-empty", "attachment '" + a.id + "' has an empty caption", i);
      }
    }
  }
  return report;
}

inline std::size_t token_count(const Utterance& u) { return text::tokenize(u.text).size(); }

/// Whitespace tokens [start, end) of the referenced utterance joined by
/// single spaces. Throws std::out_of_range for any invalid span.
inline std::string span_text(const Dialogue& d, const Span& span) {
  if (span.utterance >= d.utterances.size()) {
    throw std::out_of_range("span utterance " + std::to_string(span.utterance) +
                            " out of range");
  }
  if (span.start >= span.end) {
    throw std::out_of_range("empty span [" + std::to_string(span.start) + "," +
                            std::to_string(span.end) + ")");
  }
  auto tokens = text::tokenize(d.utterances[span.utterance].text);
  if (span.end > tokens.size()) {
    throw std::out_of_range("span end " + std::to_string(span.end) + " exceeds " +
                            std::to_string(tokens.size()) + " tokens");
  }
  std::vector<std::string> slice(tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                                 tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
  return text::join(slice);
}

/// First span (utterance order, then token order) whose normalized text
/// equals the normalized value.
inline std::optional<Span> find_span(const Dialogue& d, std::string_view value) {
  const std::string target = text::normalize_term(value);
  if (target.empty()) return std::nullopt;
  const std::size_t width = text::tokenize(target).size();
  for (std::size_t ui = 0; ui < d.utterances.size(); ++ui) {
    auto tokens = text::tokenize(d.utterances[ui].text);
    if (tokens.size() < width) continue;
    for (std::size_t s = 0; s + width <= tokens.size(); ++s) {
      std::vector<std::string> slice(tokens.begin() + static_cast<std::ptrdiff_t>(s),
                                     tokens.begin() + static_cast<std::ptrdiff_t>(s + width));
      if (text::normalize_term(text::join(slice)) == target) return Span{ui, s, s + width};
    }
  }
  return std::nullopt;
}

namespace detail {

inline void check_element(const Dialogue& d, const Element& e, std::string_view where,
                          ValidationReport& report) {
  auto error = [&](std::string rule, std::string msg, std::optional<std::size_t> utt) {
    report.add({Severity::Error, std::move(rule), std::string(where) + ": " + msg, utt,
                std::nullopt, d.doc_id});
  };
  if (text::trim(e.value).empty()) error("element-empty", "element value is empty", std::nullopt);
  if (e.manner == Manner::Implicit) {
    if (e.span) error("implicit-has-span", "implicit element carries a span", e.span->utterance);
    return;
  }
  if (!e.span) {
    error("explicit-missing-span", "explicit element '" + e.value + "' has no span", std::nullopt);
    return;
  }
  const Span& s = *e.span;
  if (s.utterance >= d.utterances.size()) {
    error("span-utterance-range", "span references utterance " + std::to_string(s.utterance),
          std::nullopt);
    return;
  }
  if (s.start >= s.end) {
    error("span-empty", "span start must be below end", s.utterance);
    return;
  }
  const std::size_t n = token_count(d.utterances[s.utterance]);
  if (s.end > n) {
    error("span-token-range",
          "span end " + std::to_string(s.end) + " exceeds " + std::to_string(n) + " tokens",
          s.utterance);
    return;
  }
  const std::string got = span_text(d, s);
  if (text::normalize_term(got) != text::normalize_term(e.value)) {
    error("span-text-mismatch", "span text '" + got + "' does not match '" + e.value + "'",
          s.utterance);
  }
}

}  // namespace detail

/// Structure plus annotation checks: element/span agreement, flip
/// invariants, and a soft warning for holders that are not speakers.
inline ValidationReport validate_annotations(const AnnotatedDialogue& ad) {
  ValidationReport report = validate_structure(ad.dialogue);
  const Dialogue& d = ad.dialogue;

  std::set<std::string> speakers;
  for (const auto& u : d.utterances) speakers.insert(text::normalize_term(u.speaker_name));

  for (std::size_t i = 0; i < ad.sextuples.size(); ++i) {
    const Sextuple& sx = ad.sextuples[i];
    for (ElementRole role : kElementRoles) {
      std::string where = "sextuple " + std::to_string(i) + " " + std::string(to_string(role));
      detail::check_element(d, sx.element(role), where, report);
    }
    if (!speakers.contains(text::normalize_term(sx.holder.value))) {
      report.add({Severity::Warning, "holder-not-speaker",
                  "sextuple " + std::to_string(i) + " holder '" + sx.holder.value +
                      "' is not a dialogue speaker",
                  std::nullopt, std::nullopt, d.doc_id});
    }
  }
  for (std::size_t i = 0; i < ad.flips.size(); ++i) {
    const FlipRecord& f = ad.flips[i];
    if (f.initial == f.flipped) {
      report.add({Severity::Error, "flip-unchanged",
                  "flip " + std::to_string(i) + " has initial == flipped sentiment", std::nullopt,
                  std::nullopt, d.doc_id});
    }
    if (text::trim(f.holder).empty() || text::trim(f.target).empty() ||
        text::trim(f.aspect).empty()) {
      report.add({Severity::Error, "flip-field-empty",
                  "flip " + std::to_string(i) + " has an empty holder/target/aspect",
                  std::nullopt, std::nullopt, d.doc_id});
    }
  }
  return report;
}

/// Largest utterance distance between the explicit spans of one sextuple.
inline std::size_t cross_utterance_distance(const Sextuple& sx) {
  std::optional<std::size_t> lo, hi;
  for (ElementRole role : kElementRoles) {
    const Element& e = sx.element(role);
    if (e.manner != Manner::Explicit || !e.span) continue;
    const std::size_t u = e.span->utterance;
    lo = lo ? std::min(*lo, u) : u;
    hi = hi ? std::max(*hi, u) : u;
  }
  return lo ? *hi - *lo : 0;
}

inline std::size_t cross_utterance_distance(const Dialogue&, const Sextuple& sx) {
  return cross_utterance_distance(sx);
}

inline std::string media_label(MediaKind k) {
  switch (k) {
    case MediaKind::Image: return "IMAGE";
    case MediaKind::Audio: return "AUDIO";
    case MediaKind::Video: return "VIDEO";
  }
  return "MEDIA";
}

/// Media placeholders in order of appearance, e.g. {"[IMAGE_1]", "[VIDEO_1]"}.
inline std::vector<std::string> media_placeholders(const Dialogue& d) {
  std::vector<std::string> out;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& u : d.utterances) {
    for (const auto& a : u.attachments) {
      auto n = ++counts[static_cast<int>(a.kind)];
      out.push_back("[" + media_label(a.kind) + "_" + std::to_string(n) + "]");
    }
  }
  return out;
}

/// Numbered-line rendering used as model input:
///   1. Speaker: text (reply = -1)
///   [IMAGE_1](caption: ...)
inline std::string render_dialogue(const Dialogue& d) {
  std::string out;
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    const Utterance& u = d.utterances[i];
    out += std::to_string(i + 1) + ". " + u.speaker_name + ": " + text::trim(u.text) +
           " (reply = " + std::to_string(u.reply_to) + ")\n";
    for (const auto& a : u.attachments) {
      auto n = ++counts[static_cast<int>(a.kind)];
      out += "[" + media_label(a.kind) + "_" + std::to_string(n) + "](caption: " +
             text::trim(a.caption) + ")\n";
    }
  }
  return out;
}

}  // namespace sextant
