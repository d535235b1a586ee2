#pragma once

// Core value types for annotated multi-party dialogues.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sextant/text.hpp"

namespace sextant {

enum class Sentiment { Positive, Negative, Neutral };

inline constexpr std::array<Sentiment, 3> kSentiments{Sentiment::Positive, Sentiment::Negative,
                                                     Sentiment::Neutral};

enum class TriggerType {
  IntroductionOfNewInformation,
  LogicalArgumentation,
  ParticipantFeedbackAndInteraction,
  PersonalExperienceAndSelfReflection,
};

inline constexpr std::array<TriggerType, 4> kTriggerTypes{
    TriggerType::IntroductionOfNewInformation, TriggerType::LogicalArgumentation,
    TriggerType::ParticipantFeedbackAndInteraction,
    TriggerType::PersonalExperienceAndSelfReflection};

enum class Manner { Explicit, Implicit };

enum class MediaKind { Image, Audio, Video };

inline constexpr std::array<MediaKind, 3> kMediaKinds{MediaKind::Image, MediaKind::Audio,
                                                     MediaKind::Video};

enum class Language { En, Zh, Es };

inline constexpr std::array<Language, 3> kLanguages{Language::En, Language::Zh, Language::Es};

// ---- labels -----------------------------------------------------------------

inline std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
  }
  return "";
}

inline std::optional<Sentiment> parse_sentiment(std::string_view label) {
  const std::string key = text::normalize_term(label);
  for (auto s : kSentiments) {
    if (key == to_string(s)) return s;
  }
  return std::nullopt;
}

/// Wire name, e.g. "participant_feedback_and_interaction".
inline std::string_view to_string(TriggerType t) {
  switch (t) {
    case TriggerType::IntroductionOfNewInformation: return "introduction_of_new_information";
    case TriggerType::LogicalArgumentation: return "logical_argumentation";
    case TriggerType::ParticipantFeedbackAndInteraction:
      return "participant_feedback_and_interaction";
    case TriggerType::PersonalExperienceAndSelfReflection:
      return "personal_experience_and_self_reflection";
  }
  return "";
}

/// Prose name used in prompts, e.g. "participant feedback and interaction".
inline std::string display_name(TriggerType t) {
  std::string s(to_string(t));
  for (auto& c : s) {
    if (c == '_') c = ' ';
  }
  return s;
}

/// Case-insensitive; underscores, hyphens and spaces are interchangeable.
inline std::optional<TriggerType> parse_trigger(std::string_view label) {
  std::string s(label);
  for (auto& c : s) {
    if (c == '_' || c == '-') c = ' ';
  }
  const std::string key = text::normalize_term(s);
  for (auto t : kTriggerTypes) {
    if (key == display_name(t)) return t;
  }
  return std::nullopt;
}

inline std::string_view to_string(Manner m) {
  return m == Manner::Explicit ? "explicit" : "implicit";
}

inline std::optional<Manner> parse_manner(std::string_view label) {
  const std::string key = text::normalize_term(label);
  if (key == "explicit") return Manner::Explicit;
  if (key == "implicit") return Manner::Implicit;
  return std::nullopt;
}

/// Wire tag: "img", "aud", "vid".
inline std::string_view to_string(MediaKind k) {
  switch (k) {
    case MediaKind::Image: return "img";
    case MediaKind::Audio: return "aud";
    case MediaKind::Video: return "vid";
  }
  return "";
}

inline std::optional<MediaKind> parse_media_kind(std::string_view tag) {
  const std::string key = text::normalize_term(tag);
  if (key == "img" || key == "image") return MediaKind::Image;
  if (key == "aud" || key == "audio") return MediaKind::Audio;
  if (key == "vid" || key == "video") return MediaKind::Video;
  return std::nullopt;
}

inline std::string_view to_string(Language l) {
  switch (l) {
    case Language::En: return "en";
    case Language::Zh: return "zh";
    case Language::Es: return "es";
  }
  return "";
}

inline std::optional<Language> parse_language(std::string_view tag) {
  const std::string key = text::normalize_term(tag);
  for (auto l : kLanguages) {
    if (key == to_string(l)) return l;
  }
  return std::nullopt;
}

// ---- dialogue ---------------------------------------------------------------

/// Token range [start, end) within one utterance's whitespace tokens.
struct Span {
  std::size_t utterance = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct Attachment {
  MediaKind kind = MediaKind::Image;
  std::string caption;
  std::string id;
  std::optional<std::string> uri;

  friend bool operator==(const Attachment&, const Attachment&) = default;
};

/// Unknown record fields, kept as compact JSON text so they survive a
/// parse/serialize cycle.
using ExtraFields = std::map<std::string, std::string>;

struct Utterance {
  std::size_t index = 0;
  std::int64_t speaker_id = 0;
  std::string speaker_name;
  std::string text;
  std::int64_t reply_to = -1;
  std::vector<Attachment> attachments;
  ExtraFields extras;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialogue {
  std::string doc_id;
  Language language = Language::En;
  std::optional<std::string> domain;
  std::vector<Utterance> utterances;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// ---- annotations ------------------------------------------------------------

struct Element {
  std::string value;
  Manner manner = Manner::Implicit;
  std::optional<Span> span;

  static Element implicit(std::string v) { return {std::move(v), Manner::Implicit, std::nullopt}; }
  static Element explicit_at(std::string v, Span s) { return {std::move(v), Manner::Explicit, s}; }

  friend bool operator==(const Element&, const Element&) = default;
};

enum class ElementRole { Holder, Target, Aspect, Opinion, Rationale };

inline constexpr std::array<ElementRole, 5> kElementRoles{
    ElementRole::Holder, ElementRole::Target, ElementRole::Aspect, ElementRole::Opinion,
    ElementRole::Rationale};

inline std::string_view to_string(ElementRole r) {
  switch (r) {
    case ElementRole::Holder: return "holder";
    case ElementRole::Target: return "target";
    case ElementRole::Aspect: return "aspect";
    case ElementRole::Opinion: return "opinion";
    case ElementRole::Rationale: return "rationale";
  }
  return "";
}

struct Sextuple {
  Element holder;
  Element target;
  Element aspect;
  Element opinion;
  Sentiment sentiment = Sentiment::Neutral;
  Element rationale;

  const Element& element(ElementRole r) const {
    switch (r) {
      case ElementRole::Holder: return holder;
      case ElementRole::Target: return target;
      case ElementRole::Aspect: return aspect;
      case ElementRole::Opinion: return opinion;
      case ElementRole::Rationale: return rationale;
    }
    throw std::logic_error("bad element role");
  }

  friend bool operator==(const Sextuple&, const Sextuple&) = default;
};

struct FlipRecord {
  std::string holder;
  std::string target;
  std::string aspect;
  Sentiment initial = Sentiment::Neutral;
  Sentiment flipped = Sentiment::Neutral;
  TriggerType trigger = TriggerType::IntroductionOfNewInformation;

  friend bool operator==(const FlipRecord&, const FlipRecord&) = default;
};

struct AnnotatedDialogue {
  Dialogue dialogue;
  std::vector<Sextuple> sextuples;
  std::vector<FlipRecord> flips;
  ExtraFields extras;

  friend bool operator==(const AnnotatedDialogue&, const AnnotatedDialogue&) = default;
};

}  // namespace sextant
