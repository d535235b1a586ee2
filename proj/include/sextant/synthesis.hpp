#pragma once

// Dialogue synthesis support: generation prompts, parsing generated
// records, and caption-based retrieval of media candidates.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sextant/corpus.hpp"
#include "sextant/report.hpp"
#include "sextant/text.hpp"
#include "sextant/types.hpp"

namespace sextant {

namespace detail {

inline std::string modality_clause(const std::vector<MediaKind>& plan) {
  std::vector<MediaKind> kinds;
  for (MediaKind k : kMediaKinds) {
    if (std::find(plan.begin(), plan.end(), k) != plan.end()) kinds.push_back(k);
  }
  if (kinds.empty()) {
    return "Do not add any image, audio or video modalities to the conversation.";
  }
  std::vector<std::string> names, tags;
  for (MediaKind k : kinds) {
    names.push_back(k == MediaKind::Image ? "image" : k == MediaKind::Audio ? "audio" : "video");
    tags.push_back("specify 'type' as '" + std::string(to_string(k)) + "'");
  }
  auto list = [](const std::vector<std::string>& xs, const char* conj) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += (i + 1 == xs.size()) ? std::string(" ") + conj + " " : ", ";
      out += xs[i];
    }
    return out;
  };
  const std::string noun = list(names, "and");
  const std::string content = kinds.size() == 1 && kinds[0] == MediaKind::Image ? "visual" : names.size() == 1 ? names[0] : "media";
  return "Use your creativity and content generation skills to add " + noun +
         " modalities in the conversation. The " + list(names, "or") + " caption must provide a concrete description of the " +
         content + " content, detailing the objects, scenes, or actions depicted. The caption must be directly related to "
         "the utterance content and should not be vague or abstract. If an " + list(names, "or") + " is included, " +
         list(tags, "or") + " accordingly, 'caption' as the detailed description, and 'id' as a unique identifier.";
}

}  // namespace detail

/// Fills the eight-point generation instruction.
inline std::string build_generation_prompt(const std::string& theme, int speakers, int turns,
                                           const std::vector<MediaKind>& modality_plan,
                                           const std::string& sample_record) {
  if (speakers < 2) throw std::invalid_argument("speakers must be at least 2");
  if (turns < 1) throw std::invalid_argument("turns must be at least 1");
  std::ostringstream p;
  p << "As an expert playwright skilled in crafting dialogues, your task is to generate conversations centered "
       "around the theme `"
    << theme
    << "'. Please comply with the following instructions. Do not comment, judge, or output other texts and only "
       "return the results.\n"
    << "1. Generate a nonlinear dialogue replying structure among " << speakers
    << " speakers, and the turns of the dialogue must be " << turns << ".\n"
    << "2. Each speaker in the dialogue should have a unique `speaker_id' and a unique `speaker_name', and each "
       "dialogue should have a unique `doc_id'.\n"
    << "3. The dialogue should revolve around one, two, or three main targets (the objects being discussed). For "
       "these targets, the conversation should focus on specific aspects (attributes or features of the targets) and "
       "provide an opinion (evaluation of the aspect). Each utterance must include an opinion about an aspect and be "
       "supported by a rationale (reason or explanation for the opinion).\n"
    << "4. " << detail::modality_clause(modality_plan) << "\n"
    << "5. Every utterance except the first utterance is a reply to dialogue sentence with index n, the reply "
       "property of this utterance should be n, the first utterance is -1.\n"
    << "6. The conversation must include all four elements: `target', `aspect', `opinion', and `rationale'. Annotate "
       "and `order' the occurrence of these elements in HTML format in the `annotation'. All elements must be "
       "explicitly mentioned in the dialogue text and marked as `explicit'.\n"
    << "7. Store all parts of the conversation in accordance with the provided example format. For each utterance, "
       "the 'modality' should be set to `None' or include the `type', `caption', and `id' if a medium is used.\n"
    << "8. Ensure full comprehension of the provided example and apply it to create a dialogue that meets all "
       "specified criteria, including the proper integration of multimodal elements. Adhere strictly to the example "
       "`json' format for organizing the storage structure of the generated dialogue, as shown in the provided "
       "example.\n"
    << "For instance, a sample `json' output would be: " << sample_record;
  return p.str();
}

struct GeneratedDialogue {
  std::optional<AnnotatedDialogue> dialogue;
  ValidationReport report;
};

/// Parses one generated record. Code fences around the JSON are tolerated;
/// attachment URIs are cleared since captions are placeholders until
/// retrieval fills them.
inline GeneratedDialogue parse_generated_dialogue(const std::string& completion) {
  std::string body = text::trim(completion);
  if (body.rfind("```", 0) == 0) {
    auto nl = body.find('\n');
    body = nl == std::string::npos ? std::string() : body.substr(nl + 1);
    auto close = body.rfind("```");
    if (close != std::string::npos) body = body.substr(0, close);
  }
  GeneratedDialogue out;
  out.dialogue = corpus_io::parse_record(body, std::nullopt, out.report);
  if (out.dialogue) {
    for (auto& u : out.dialogue->dialogue.utterances) {
      for (auto& a : u.attachments) a.uri.reset();
    }
  }
  return out;
}

// ---- retrieval ----------------------------------------------------------------

using Similarity = std::function<double(const std::string&, const std::string&)>;

/// Casefolded tokens with surrounding punctuation removed.
inline std::map<std::string, double> token_counts(const std::string& s) {
  std::map<std::string, double> counts;
  for (const auto& tok : text::tokenize(s)) {
    std::string t = text::normalize_term(tok);
    if (!t.empty()) counts[t] += 1.0;
  }
  return counts;
}

inline double cosine_similarity(const std::string& a, const std::string& b) {
  const auto ca = token_counts(a);
  const auto cb = token_counts(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : ca) {
    na += v * v;
    if (auto it = cb.find(t); it != cb.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : cb) nb += v * v;
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct Candidate {
  std::string id;
  std::string caption;
  std::string source;
};

struct Ranking {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<std::string> warnings;
};

/// Top min(k, n) candidates by similarity, ties broken by ascending id.
inline Ranking retrieval_rank(const std::string& query, const std::vector<Candidate>& candidates, int k,
                              const Similarity& sim = cosine_similarity) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  Ranking r;
  if (candidates.empty()) {
    r.warnings.push_back("empty candidate pool");
    return r;
  }
  std::vector<std::pair<double, const Candidate*>> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.emplace_back(sim(query, c.caption), &c);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  for (std::size_t i = 0; i < n; ++i) {
    r.ids.push_back(scored[i].second->id);
    r.scores.push_back(scored[i].first);
  }
  return r;
}

/// Pool file: one candidate per line, tab-separated id, caption, source.
inline std::vector<Candidate> load_candidate_pool(std::istream& in) {
  std::vector<Candidate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0, tab;
    while ((tab = line.find('\t', start)) != std::string::npos) {
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    cols.push_back(line.substr(start));
    if (cols.size() < 2 || cols.size() > 3) {
      throw std::invalid_argument("pool line " + std::to_string(lineno) + ": expected id<TAB>caption<TAB>source");
    }
    out.push_back({cols[0], cols[1], cols.size() == 3 ? cols[2] : std::string()});
  }
  return out;
}

inline std::vector<Candidate> load_candidate_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open candidate pool '" + path + "'");
  return load_candidate_pool(in);
}

/// scores[annotator][candidate] on a 1-10 scale. Returns the candidate with
/// the highest mean, lowest index on ties.
inline std::size_t elect_candidate(const std::vector<std::vector<double>>& scores) {
  if (scores.empty()) throw std::invalid_argument("need at least one annotator");
  const std::size_t n = scores.front().size();
  if (n == 0) throw std::invalid_argument("need at least one candidate");
  for (const auto& row : scores) {
    if (row.size() != n) throw std::invalid_argument("annotator rows differ in length");
    for (double v : row) {
      if (!(v >= 1.0 && v <= 10.0)) throw std::out_of_range("score outside 1-10: " + std::to_string(v));
    }
  }
  // sum each column in sorted order so annotator order cannot move the result
  std::size_t best = 0;
  double best_mean = -1.0;
  std::vector<double> col(scores.size());
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t a = 0; a < scores.size(); ++a) col[a] = scores[a][c];
    std::sort(col.begin(), col.end());
    double sum = 0;
    for (double v : col) sum += v;
    const double mean = sum / static_cast<double>(scores.size());
    if (mean > best_mean) {
      best_mean = mean;
      best = c;
    }
  }
  return best;
}

/// Records the elected candidate on an attachment: uri becomes
/// "source:id", the caption is kept.
inline void attach_elected(Attachment& a, const Candidate& elected) {
  a.uri = (elected.source.empty() ? std::string() : elected.source + ":") + elected.id;
}

/// Wraps generated dialogues as a corpus tagged as synthetic.
inline Corpus make_synthetic_corpus(std::vector<AnnotatedDialogue> dialogues) {
  Corpus c;
  c.dialogues = std::move(dialogues);
  c.metadata["provenance"] = "synthetic";
  return c;
}

}  // namespace sextant
