#pragma once

// Corpus storage: one JSON record per line, plus statistics and
// language-stratified splitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sextant/dialogue.hpp"
#include "sextant/report.hpp"
#include "sextant/types.hpp"

namespace sextant {

struct Corpus {
  std::vector<AnnotatedDialogue> dialogues;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct CorpusParse {
  Corpus corpus;
  ValidationReport report;
};

namespace corpus_io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kMetadataKey = "corpus_metadata";

/// Thrown internally while decoding one record; becomes a finding.
struct SchemaError : std::runtime_error {
  std::string rule;
  SchemaError(std::string r, const std::string& msg) : std::runtime_error(msg), rule(std::move(r)) {}
};

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("missing-field", where + ": missing field '" + key + "'");
  return *it;
}

inline std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError("field-type", where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::int64_t get_integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    try {
      std::int64_t n = std::stoll(s, &used);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw SchemaError("field-type", where + ": '" + key + "' must be an integer");
}

inline Span parse_span(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError("field-type", where + ": span must be an object");
  auto utt = get_integer(j, "utt", where);
  auto start = get_integer(j, "start", where);
  auto end = get_integer(j, "end", where);
  if (utt < 0 || start < 0 || end < 0) {
    throw SchemaError("span-negative", where + ": span offsets must be non-negative");
  }
  return {static_cast<std::size_t>(utt), static_cast<std::size_t>(start),
          static_cast<std::size_t>(end)};
}

inline Element parse_element(const json& j, const std::string& where) {
  if (j.is_string()) return Element::implicit(j.get<std::string>());
  if (!j.is_object()) throw SchemaError("field-type", where + ": element must be an object");
  Element e;
  e.value = get_string(j, "value", where);
  const std::string manner = get_string(j, "manner", where);
  auto m = parse_manner(manner);
  if (!m) throw SchemaError("bad-manner", where + ": unknown manner '" + manner + "'");
  e.manner = *m;
  if (auto it = j.find("span"); it != j.end() && !it->is_null()) e.span = parse_span(*it, where);
  return e;
}

inline Sentiment parse_sentiment_field(const json& obj, const char* key, const std::string& where) {
  const std::string label = get_string(obj, key, where);
  auto s = parse_sentiment(label);
  if (!s) throw SchemaError("bad-sentiment", where + ": unknown sentiment '" + label + "'");
  return *s;
}

inline Attachment parse_attachment(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError("field-type", where + ": modality entry must be an object");
  Attachment a;
  const std::string type = get_string(j, "type", where);
  auto k = parse_media_kind(type);
  if (!k) throw SchemaError("bad-modality", where + ": unknown modality type '" + type + "'");
  a.kind = *k;
  a.caption = get_string(j, "caption", where);
  if (auto it = j.find("id"); it != j.end()) {
    if (it->is_string()) {
      a.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      a.id = std::to_string(it->get<std::int64_t>());
    } else {
      throw SchemaError("field-type", where + ": modality 'id' must be a string");
    }
  }
  if (auto it = j.find("uri"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("field-type", where + ": 'uri' must be a string");
    a.uri = it->get<std::string>();
  }
  return a;
}

inline bool is_none_marker(const json& j) {
  if (j.is_null()) return true;
  if (j.is_string()) {
    auto s = text::normalize_term(j.get<std::string>());
    return s.empty() || s == "none" || s == "null";
  }
  return false;
}

inline Utterance parse_utterance(const json& j, std::size_t position) {
  const std::string where = "utterance " + std::to_string(position);
  if (!j.is_object()) throw SchemaError("field-type", where + ": must be an object");
  Utterance u;
  auto index = get_integer(j, "index", where);
  if (index < 0) throw SchemaError("index-order", where + ": negative index");
  u.index = static_cast<std::size_t>(index);
  u.speaker_id = get_integer(j, "speaker_id", where);
  u.speaker_name = get_string(j, "speaker_name", where);
  u.text = get_string(j, "text", where);
  u.reply_to = get_integer(j, "reply", where);
  if (auto it = j.find("modality"); it != j.end() && !is_none_marker(*it)) {
    if (it->is_array()) {
      for (std::size_t k = 0; k < it->size(); ++k) {
        u.attachments.push_back(parse_attachment((*it)[k], where + " modality " + std::to_string(k)));
      }
    } else {
      u.attachments.push_back(parse_attachment(*it, where + " modality"));
    }
  }
  static const std::set<std::string> known{"index", "speaker_id", "speaker_name", "text",
                                           "reply", "modality"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) u.extras[it.key()] = it.value().dump();
  }
  return u;
}

inline Sextuple parse_sextuple(const json& j, std::size_t position) {
  const std::string where = "sextuple " + std::to_string(position);
  if (!j.is_object()) throw SchemaError("field-type", where + ": must be an object");
  Sextuple s;
  s.holder = parse_element(require(j, "holder", where), where + " holder");
  s.target = parse_element(require(j, "target", where), where + " target");
  s.aspect = parse_element(require(j, "aspect", where), where + " aspect");
  s.opinion = parse_element(require(j, "opinion", where), where + " opinion");
  s.sentiment = parse_sentiment_field(j, "sentiment", where);
  s.rationale = parse_element(require(j, "rationale", where), where + " rationale");
  return s;
}

inline FlipRecord parse_flip(const json& j, std::size_t position) {
  const std::string where = "flip " + std::to_string(position);
  if (!j.is_object()) throw SchemaError("field-type", where + ": must be an object");
  FlipRecord f;
  f.holder = get_string(j, "holder", where);
  f.target = get_string(j, "target", where);
  f.aspect = get_string(j, "aspect", where);
  f.initial = parse_sentiment_field(j, "initial", where);
  f.flipped = parse_sentiment_field(j, "flipped", where);
  const std::string trig = get_string(j, "trigger", where);
  auto t = parse_trigger(trig);
  if (!t) throw SchemaError("bad-trigger", where + ": unknown trigger '" + trig + "'");
  f.trigger = *t;
  return f;
}

inline const json& require_array(const json& obj, const char* key) {
  const json& v = require(obj, key, "record");
  if (!v.is_array()) throw SchemaError("field-type", std::string("record: '") + key + "' must be an array");
  return v;
}

}  // namespace detail

/// Decodes one record object. Schema problems throw SchemaError; invariant
/// checks are left to validate_annotations.
inline AnnotatedDialogue decode_record(const json& j) {
  if (!j.is_object()) throw SchemaError("field-type", "record must be a JSON object");
  AnnotatedDialogue ad;
  Dialogue& d = ad.dialogue;
  d.doc_id = detail::get_string(j, "doc_id", "record");
  const std::string lang = detail::get_string(j, "language", "record");
  auto l = parse_language(lang);
  if (!l) throw SchemaError("bad-language", "record: unknown language '" + lang + "'");
  d.language = *l;
  if (auto it = j.find("domain"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("field-type", "record: 'domain' must be a string");
    d.domain = it->get<std::string>();
  }
  const json& utts = detail::require_array(j, "utterances");
  for (std::size_t i = 0; i < utts.size(); ++i) d.utterances.push_back(detail::parse_utterance(utts[i], i));

  if (auto it = j.find("sextuples"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError("field-type", "record: 'sextuples' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) ad.sextuples.push_back(detail::parse_sextuple((*it)[i], i));
  }
  if (auto it = j.find("flips"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError("field-type", "record: 'flips' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) ad.flips.push_back(detail::parse_flip((*it)[i], i));
  }
  static const std::set<std::string> known{"doc_id", "language", "domain", "utterances",
                                           "sextuples", "flips"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) ad.extras[it.key()] = it.value().dump();
  }
  return ad;
}

namespace detail {

inline ordered_json encode_element(const Element& e) {
  ordered_json j;
  j["value"] = e.value;
  j["manner"] = to_string(e.manner);
  if (e.span) j["span"] = {{"utt", e.span->utterance}, {"start", e.span->start}, {"end", e.span->end}};
  return j;
}

inline void encode_extras(ordered_json& j, const ExtraFields& extras) {
  for (const auto& [k, v] : extras) j[k] = ordered_json::parse(v);
}

}  // namespace detail

inline ordered_json encode_record(const AnnotatedDialogue& ad) {
  const Dialogue& d = ad.dialogue;
  ordered_json j;
  j["doc_id"] = d.doc_id;
  j["language"] = to_string(d.language);
  if (d.domain) j["domain"] = *d.domain;
  j["utterances"] = ordered_json::array();
  for (const Utterance& u : d.utterances) {
    ordered_json ju;
    ju["index"] = u.index;
    ju["speaker_id"] = u.speaker_id;
    ju["speaker_name"] = u.speaker_name;
    ju["text"] = u.text;
    ju["reply"] = u.reply_to;
    if (u.attachments.empty()) {
      ju["modality"] = nullptr;
    } else {
      ju["modality"] = ordered_json::array();
      for (const Attachment& a : u.attachments) {
        ordered_json ja;
        ja["type"] = to_string(a.kind);
        ja["caption"] = a.caption;
        ja["id"] = a.id;
        if (a.uri) ja["uri"] = *a.uri;
        ju["modality"].push_back(std::move(ja));
      }
    }
    detail::encode_extras(ju, u.extras);
    j["utterances"].push_back(std::move(ju));
  }
  j["sextuples"] = ordered_json::array();
  for (const Sextuple& s : ad.sextuples) {
    ordered_json js;
    js["holder"] = detail::encode_element(s.holder);
    js["target"] = detail::encode_element(s.target);
    js["aspect"] = detail::encode_element(s.aspect);
    js["opinion"] = detail::encode_element(s.opinion);
    js["sentiment"] = to_string(s.sentiment);
    js["rationale"] = detail::encode_element(s.rationale);
    j["sextuples"].push_back(std::move(js));
  }
  j["flips"] = ordered_json::array();
  for (const FlipRecord& f : ad.flips) {
    ordered_json jf;
    jf["holder"] = f.holder;
    jf["target"] = f.target;
    jf["aspect"] = f.aspect;
    jf["initial"] = to_string(f.initial);
    jf["flipped"] = to_string(f.flipped);
    jf["trigger"] = to_string(f.trigger);
    j["flips"].push_back(std::move(jf));
  }
  detail::encode_extras(j, ad.extras);
  return j;
}

/// Parses and validates one record. Rejected records yield nullopt and
/// error findings; warnings accompany accepted records.
inline std::optional<AnnotatedDialogue> parse_record(std::string_view line_text,
                                                     std::optional<std::size_t> line,
                                                     ValidationReport& report) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::parse_error& e) {
    report.add({Severity::Error, "malformed-json", e.what(), std::nullopt, line, {}});
    return std::nullopt;
  }
  AnnotatedDialogue ad;
  try {
    ad = decode_record(j);
  } catch (const SchemaError& e) {
    std::string doc;
    if (j.is_object() && j.contains("doc_id") && j["doc_id"].is_string()) doc = j["doc_id"];
    report.add({Severity::Error, e.rule, e.what(), std::nullopt, line, doc});
    return std::nullopt;
  } catch (const json::exception& e) {
    report.add({Severity::Error, "field-type", e.what(), std::nullopt, line, {}});
    return std::nullopt;
  }
  ValidationReport local = validate_annotations(ad);
  for (auto& f : local.findings) f.line = line;
  report.merge(local);
  if (local.has_errors()) return std::nullopt;
  return ad;
}

}  // namespace corpus_io

/// Reads a record-per-line corpus. Malformed or invalid records are
/// dropped with line-numbered findings; only stream failures throw.
inline CorpusParse parse_corpus(std::istream& in) {
  CorpusParse out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool any_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    any_content = true;
    if (line_no == 1 || out.corpus.dialogues.empty()) {
      try {
        auto j = corpus_io::json::parse(line);
        if (j.is_object() && j.size() == 1 && j.contains(corpus_io::kMetadataKey)) {
          const auto& meta = j[corpus_io::kMetadataKey];
          if (!meta.is_object()) {
            out.report.add({Severity::Error, "field-type", "corpus metadata must be an object",
                            std::nullopt, line_no, {}});
            continue;
          }
          for (auto it = meta.begin(); it != meta.end(); ++it) {
            out.corpus.metadata[it.key()] =
                it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
          }
          continue;
        }
      } catch (const corpus_io::json::exception&) {
        // fall through; parse_record reports it
      }
    }
    auto ad = corpus_io::parse_record(line, line_no, out.report);
    if (!ad) continue;
    if (!seen.insert(ad->dialogue.doc_id).second) {
      out.report.add({Severity::Error, "doc-id-duplicate",
                      "doc_id '" + ad->dialogue.doc_id + "' already used", std::nullopt, line_no,
                      ad->dialogue.doc_id});
      continue;
    }
    out.corpus.dialogues.push_back(std::move(*ad));
  }
  if (in.bad()) throw std::runtime_error("I/O failure while reading corpus");
  if (!any_content) {
    out.report.add({Severity::Warning, "empty-corpus", "input contains no records", std::nullopt,
                    std::nullopt, {}});
  }
  return out;
}

inline CorpusParse parse_corpus_text(std::string_view data) {
  std::istringstream in{std::string(data)};
  return parse_corpus(in);
}

inline CorpusParse load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

inline void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  if (!corpus.metadata.empty()) {
    corpus_io::ordered_json meta = corpus_io::ordered_json::object();
    for (const auto& [k, v] : corpus.metadata) meta[k] = v;
    corpus_io::ordered_json header;
    header[corpus_io::kMetadataKey] = std::move(meta);
    out << header.dump() << '\n';
  }
  for (const auto& ad : corpus.dialogues) out << corpus_io::encode_record(ad).dump() << '\n';
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file '" + path + "'");
  serialize_corpus(corpus, out);
  if (!out) throw std::runtime_error("I/O failure while writing '" + path + "'");
}

// ---- statistics -------------------------------------------------------------

struct CorpusStats {
  std::size_t dialogue_count = 0;
  std::size_t utterance_count = 0;
  std::size_t speaker_count = 0;
  std::size_t sextuple_count = 0;
  std::size_t flip_count = 0;
  std::array<std::size_t, 3> modality_counts{};  // indexed by MediaKind
  std::array<std::size_t, 2> manner_counts{};    // indexed by Manner
  std::array<std::size_t, 3> language_counts{};  // indexed by Language

  std::size_t modality(MediaKind k) const { return modality_counts[static_cast<int>(k)]; }
  std::size_t manner(Manner m) const { return manner_counts[static_cast<int>(m)]; }
  std::size_t language(Language l) const { return language_counts[static_cast<int>(l)]; }

  CorpusStats& operator+=(const CorpusStats& o) {
    dialogue_count += o.dialogue_count;
    utterance_count += o.utterance_count;
    speaker_count += o.speaker_count;
    sextuple_count += o.sextuple_count;
    flip_count += o.flip_count;
    for (std::size_t i = 0; i < 3; ++i) modality_counts[i] += o.modality_counts[i];
    for (std::size_t i = 0; i < 2; ++i) manner_counts[i] += o.manner_counts[i];
    for (std::size_t i = 0; i < 3; ++i) language_counts[i] += o.language_counts[i];
    return *this;
  }

  friend CorpusStats operator+(CorpusStats a, const CorpusStats& b) { return a += b; }
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Speakers are distinct (doc_id, speaker_id) pairs; manner counts cover
/// the five text-valued element positions of each sextuple.
inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  for (const auto& ad : corpus.dialogues) {
    const Dialogue& d = ad.dialogue;
    ++st.dialogue_count;
    ++st.language_counts[static_cast<int>(d.language)];
    st.utterance_count += d.utterances.size();
    std::set<std::int64_t> speakers;
    for (const auto& u : d.utterances) {
      speakers.insert(u.speaker_id);
      for (const auto& a : u.attachments) ++st.modality_counts[static_cast<int>(a.kind)];
    }
    st.speaker_count += speakers.size();
    st.sextuple_count += ad.sextuples.size();
    st.flip_count += ad.flips.size();
    for (const auto& sx : ad.sextuples) {
      for (ElementRole r : kElementRoles) ++st.manner_counts[static_cast<int>(sx.element(r).manner)];
    }
  }
  return st;
}

// ---- splitting --------------------------------------------------------------

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

/// Apportions n items by largest remainder; ties go to the earlier part.
inline std::array<std::size_t, 3> largest_remainder(std::size_t n, const SplitRatios& r) {
  const std::array<double, 3> ratio{r.train, r.dev, r.test};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * ratio[i];
    // absorb float noise such as 10 * 0.7 = 7.000000000000001
    const double fl = std::floor(quota + 1e-9);
    sizes[i] = static_cast<std::size_t>(fl);
    rem[i] = quota - fl;
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(rem[a] - rem[b]) > 1e-9) return rem[a] > rem[b];
    return a < b;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

/// Deterministic per-language split. Within each language, doc_ids are
/// sorted, shuffled with the seed, and cut by largest remainder; each part
/// keeps the input order of its dialogues.
inline CorpusSplit split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.dev, ratios.test};
  for (double x : r) {
    if (!(x >= 0.0)) throw std::invalid_argument("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  const auto nonzero = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double x) { return x > 0.0; }));
  if (corpus.dialogues.size() < nonzero) {
    throw std::invalid_argument("corpus has " + std::to_string(corpus.dialogues.size()) +
                                " dialogues, fewer than the " + std::to_string(nonzero) +
                                " non-empty parts requested");
  }

  std::map<std::string, int> part_of;
  for (Language lang : kLanguages) {
    std::vector<std::string> ids;
    for (const auto& ad : corpus.dialogues) {
      if (ad.dialogue.language == lang) ids.push_back(ad.dialogue.doc_id);
    }
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(lang) + 1)));
    // Fisher-Yates with raw engine output keeps the permutation identical
    // across standard library implementations.
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[rng() % i]);
    }
    auto sizes = largest_remainder(ids.size(), ratios);
    std::size_t pos = 0;
    for (int part = 0; part < 3; ++part) {
      for (std::size_t k = 0; k < sizes[static_cast<std::size_t>(part)]; ++k) part_of[ids[pos++]] = part;
    }
  }

  CorpusSplit out;
  out.train.metadata = out.dev.metadata = out.test.metadata = corpus.metadata;
  for (const auto& ad : corpus.dialogues) {
    switch (part_of.at(ad.dialogue.doc_id)) {
      case 0: out.train.dialogues.push_back(ad); break;
      case 1: out.dev.dialogues.push_back(ad); break;
      default: out.test.dialogues.push_back(ad); break;
    }
  }
  return out;
}

}  // namespace sextant
