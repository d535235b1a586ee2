#pragma once

// Parser for model completions of the form "(a, b), (c, d)" or "None".

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant::pipeline {

using Tuple = std::vector<std::string>;

enum class TupleParseErrorKind { Unbalanced, NoGroup, ArityShortfall, InvalidSentiment, InvalidTrigger };

inline std::string_view to_string(TupleParseErrorKind k) {
  switch (k) {
    case TupleParseErrorKind::Unbalanced: return "unbalanced parentheses";
    case TupleParseErrorKind::NoGroup: return "no parenthesized group";
    case TupleParseErrorKind::ArityShortfall: return "too few fields";
    case TupleParseErrorKind::InvalidSentiment: return "invalid sentiment label";
    case TupleParseErrorKind::InvalidTrigger: return "invalid trigger label";
  }
  return "";
}

struct TupleParseError : std::runtime_error {
  TupleParseErrorKind kind;
  std::string fragment;

  TupleParseError(TupleParseErrorKind k, std::string frag)
      : std::runtime_error(std::string(to_string(k)) + ": " + frag), kind(k), fragment(std::move(frag)) {}
};

struct TupleSpec {
  std::size_t arity = 2;
  std::set<std::size_t> sentiment_positions;
  std::optional<std::size_t> trigger_position;
};

/// Either the explicit "None" answer or a list of tuples.
struct ParsedTuples {
  bool none = false;
  std::vector<Tuple> tuples;

  bool empty() const { return none || tuples.empty(); }
  friend bool operator==(const ParsedTuples&, const ParsedTuples&) = default;
};

namespace detail {

inline bool is_none_answer(std::string_view completion) {
  std::string s = text::normalize_term(completion);
  // tolerate quoting: "None", 'None', `None`
  while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.erase(s.begin());
  while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == '.')) s.pop_back();
  return s == "none";
}

}  // namespace detail

/// Extracts every top-level parenthesized group and splits it on commas at
/// the group's own nesting level. Surplus fields are folded back, verbatim,
/// into the last field; free-text rationales routinely contain commas.
inline ParsedTuples parse_tuple_list(std::string_view completion, const TupleSpec& spec) {
  if (spec.arity == 0) throw std::invalid_argument("tuple arity must be positive");
  if (detail::is_none_answer(completion)) return {true, {}};

  ParsedTuples out;
  int depth = 0;
  std::size_t group_start = 0;
  std::vector<std::size_t> commas;  // top-level commas of the current group
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const char c = completion[i];
    if (c == '(') {
      if (depth == 0) {
        group_start = i;
        commas.clear();
      }
      ++depth;
    } else if (c == ')') {
      if (depth == 0) {
        throw TupleParseError(TupleParseErrorKind::Unbalanced,
                              std::string(completion.substr(0, i + 1)));
      }
      if (--depth == 0) {
        const std::string_view body = completion.substr(group_start + 1, i - group_start - 1);
        std::vector<std::string_view> raw;
        std::size_t prev = 0;
        for (std::size_t pos : commas) {
          raw.push_back(body.substr(prev, pos - group_start - 1 - prev));
          prev = pos - group_start;
        }
        raw.push_back(body.substr(prev));
        const std::string group(completion.substr(group_start, i - group_start + 1));
        if (raw.size() < spec.arity) throw TupleParseError(TupleParseErrorKind::ArityShortfall, group);
        Tuple t;
        for (std::size_t k = 0; k + 1 < spec.arity; ++k) t.push_back(text::trim(raw[k]));
        // last field: everything from its start to the end of the group
        std::size_t last_offset = 0;
        for (std::size_t k = 0; k + 1 < spec.arity; ++k) last_offset += raw[k].size() + 1;
        t.push_back(text::trim(body.substr(last_offset)));
        for (std::size_t k : spec.sentiment_positions) {
          if (k >= t.size() || !parse_sentiment(t[k])) {
            throw TupleParseError(TupleParseErrorKind::InvalidSentiment, k < t.size() ? t[k] : group);
          }
        }
        if (spec.trigger_position) {
          const std::size_t k = *spec.trigger_position;
          if (k >= t.size() || !parse_trigger(t[k])) {
            throw TupleParseError(TupleParseErrorKind::InvalidTrigger, k < t.size() ? t[k] : group);
          }
        }
        out.tuples.push_back(std::move(t));
      }
    } else if (c == ',' && depth == 1) {
      commas.push_back(i);
    }
  }
  if (depth != 0) {
    throw TupleParseError(TupleParseErrorKind::Unbalanced, std::string(completion.substr(group_start)));
  }
  if (out.tuples.empty()) throw TupleParseError(TupleParseErrorKind::NoGroup, std::string(completion));
  return out;
}

/// Inverse of parse_tuple_list for fields without parentheses whose commas,
/// if any, sit in the last field.
inline std::string format_tuple_list(const std::vector<Tuple>& tuples) {
  std::string out;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (i) out += ", ";
    out += "(" + text::join(tuples[i], ", ") + ")";
  }
  return out;
}

inline std::string format_tuple_list(const ParsedTuples& parsed) {
  return parsed.none ? std::string("None") : format_tuple_list(parsed.tuples);
}

}  // namespace sextant::pipeline
