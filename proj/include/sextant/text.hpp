#pragma once

// Unicode-aware text utilities: NFC normalization, case folding, whitespace
// tokenization, and the term normalization every metric compares against.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace sextant::text {

namespace detail {

inline icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline icu::UnicodeString nfc(const icu::UnicodeString& u) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return u;
  icu::UnicodeString out = norm->normalize(u, status);
  return U_FAILURE(status) ? u : out;
}

template <typename Fn>
void for_each_code_point(const icu::UnicodeString& u, Fn&& fn) {
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    fn(c);
    i += U16_LENGTH(c);
  }
}

// Splits on Unicode whitespace; the input is assumed already normalized.
inline std::vector<icu::UnicodeString> split_ws(const icu::UnicodeString& u) {
  std::vector<icu::UnicodeString> tokens;
  icu::UnicodeString cur;
  for_each_code_point(u, [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      if (!cur.isEmpty()) {
        tokens.push_back(cur);
        cur.remove();
      }
    } else {
      cur.append(c);
    }
  });
  if (!cur.isEmpty()) tokens.push_back(cur);
  return tokens;
}

}  // namespace detail

inline std::string nfc(std::string_view s) {
  return detail::to_utf8(detail::nfc(detail::to_unicode(s)));
}

inline std::string casefold(std::string_view s) {
  icu::UnicodeString u = detail::to_unicode(s);
  u.foldCase();
  return detail::to_utf8(u);
}

/// Whitespace tokenization after NFC. This is the single definition of a
/// token used by spans, overlap scores, and retrieval.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& tok : detail::split_ws(detail::nfc(detail::to_unicode(s)))) {
    out.push_back(detail::to_utf8(tok));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// NFC, casefold, collapse whitespace, trim, then strip trailing punctuation.
inline std::string normalize_term(std::string_view s) {
  icu::UnicodeString u = detail::nfc(detail::to_unicode(s));
  u.foldCase();
  auto tokens = detail::split_ws(u);
  icu::UnicodeString joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) joined.append(UChar32(' '));
    joined.append(tokens[i]);
  }
  while (!joined.isEmpty()) {
    int32_t last = joined.moveIndex32(joined.length(), -1);
    UChar32 c = joined.char32At(last);
    if (u_ispunct(c) || u_isUWhiteSpace(c)) {
      joined.truncate(last);
    } else {
      break;
    }
  }
  return detail::to_utf8(joined);
}

/// Tokens of the normalized term.
inline std::vector<std::string> normalized_tokens(std::string_view s) {
  return tokenize(normalize_term(s));
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace sextant::text
