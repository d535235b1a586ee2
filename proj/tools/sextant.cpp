// sextant: command-line front end.
//
// Exit codes: 0 success, 1 findings, 2 usage error, 3 backend failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sextant/pipeline/http_backend.hpp"
#include "sextant/sextant.hpp"

namespace {

using namespace sextant;
using ojson = nlohmann::ordered_json;

enum Exit { kOk = 0, kFindings = 1, kUsage = 2, kBackend = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool machine_format(const std::string& f) { return f == "machine"; }

ojson finding_json(const Finding& f) {
  ojson j;
  j["severity"] = f.severity == Severity::Error ? "error" : "warning";
  j["rule"] = f.rule;
  j["message"] = f.message;
  j["doc_id"] = f.doc_id;
  j["line"] = f.line ? ojson(*f.line) : ojson(nullptr);
  j["utterance"] = f.utterance ? ojson(*f.utterance) : ojson(nullptr);
  return j;
}

ojson report_json(const ValidationReport& r) {
  ojson arr = ojson::array();
  for (const auto& f : r.findings) arr.push_back(finding_json(f));
  return arr;
}

CorpusParse read_corpus(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("cannot read corpus '" + path + "'");
  return load_corpus(path);
}

// Loads a corpus for commands that need clean input; findings go to stderr.
bool load_clean(const std::string& path, Corpus& out) {
  CorpusParse p = read_corpus(path);
  for (const auto& f : p.report.findings) std::cerr << path << ": " << f << "\n";
  if (p.report.has_errors()) return false;
  out = std::move(p.corpus);
  return true;
}

std::vector<double> parse_ratios(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (text::trim(part.substr(used)).size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("bad ratio '" + part + "'");
    }
  }
  if (out.size() != 3) throw UsageError("--ratios needs three comma-separated values");
  return out;
}

ojson flip_json(const FlipRecord& f) {
  return {{"holder", f.holder},
          {"target", f.target},
          {"aspect", f.aspect},
          {"initial", to_string(f.initial)},
          {"flipped", to_string(f.flipped)},
          {"trigger", to_string(f.trigger)}};
}

ojson derived_json(const DerivedFlip& f) {
  return {{"holder", f.holder},
          {"target", f.target},
          {"aspect", f.aspect},
          {"initial", to_string(f.initial)},
          {"flipped", to_string(f.flipped)}};
}

std::string derived_text(const DerivedFlip& f) {
  return "(" + f.holder + ", " + f.target + ", " + f.aspect + ", " + std::string(to_string(f.initial)) + ", " +
         std::string(to_string(f.flipped)) + ")";
}

// ---- subcommands --------------------------------------------------------------

int cmd_validate(const std::string& path, bool machine) {
  CorpusParse p = read_corpus(path);
  const auto errors = p.report.count(Severity::Error);
  const auto warnings = p.report.count(Severity::Warning);
  if (machine) {
    ojson j;
    j["accepted"] = p.corpus.dialogues.size();
    j["errors"] = errors;
    j["warnings"] = warnings;
    j["findings"] = report_json(p.report);
    std::cout << j.dump() << "\n";
  } else {
    for (const auto& f : p.report.findings) std::cout << f << "\n";
    std::cout << "accepted: " << p.corpus.dialogues.size() << "\nerrors: " << errors << "\nwarnings: " << warnings
              << "\n";
  }
  return errors ? kFindings : kOk;
}

int cmd_stats(const std::string& path, bool machine) {
  Corpus c;
  if (!load_clean(path, c)) return kFindings;
  const CorpusStats s = corpus_stats(c);
  ojson j;
  j["dialogues"] = s.dialogue_count;
  j["utterances"] = s.utterance_count;
  j["speakers"] = s.speaker_count;
  j["sextuples"] = s.sextuple_count;
  j["flips"] = s.flip_count;
  for (MediaKind k : kMediaKinds) j["modality"][std::string(to_string(k))] = s.modality(k);
  j["manner"]["explicit"] = s.manner(Manner::Explicit);
  j["manner"]["implicit"] = s.manner(Manner::Implicit);
  for (Language l : kLanguages) j["language"][std::string(to_string(l))] = s.language(l);
  if (machine) {
    std::cout << j.dump() << "\n";
    return kOk;
  }
  std::cout << "dialogues: " << s.dialogue_count << "\nutterances: " << s.utterance_count
            << "\nspeakers: " << s.speaker_count << "\nsextuples: " << s.sextuple_count
            << "\nflips: " << s.flip_count << "\n";
  for (MediaKind k : kMediaKinds) std::cout << "modality " << to_string(k) << ": " << s.modality(k) << "\n";
  std::cout << "explicit elements: " << s.manner(Manner::Explicit)
            << "\nimplicit elements: " << s.manner(Manner::Implicit) << "\n";
  for (Language l : kLanguages) std::cout << "language " << to_string(l) << ": " << s.language(l) << "\n";
  return kOk;
}

int cmd_split(const std::string& path, const std::string& ratios_text, std::uint64_t seed, const std::string& out,
              bool machine) {
  const auto r = parse_ratios(ratios_text);
  Corpus c;
  if (!load_clean(path, c)) return kFindings;
  CorpusSplit parts;
  try {
    parts = split_corpus(c, {r[0], r[1], r[2]}, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::pair<const char*, const Corpus*> named[] = {{"train", &parts.train}, {"dev", &parts.dev},
                                                         {"test", &parts.test}};
  if (!out.empty()) {
    for (const auto& [name, corpus] : named) save_corpus(*corpus, out + "." + name + ".jsonl");
  }
  ojson j;
  for (const auto& [name, corpus] : named) {
    ojson ids = ojson::array();
    for (const auto& ad : corpus->dialogues) ids.push_back(ad.dialogue.doc_id);
    j[name] = ids;
  }
  if (machine) {
    std::cout << j.dump() << "\n";
  } else {
    for (const auto& [name, corpus] : named) {
      std::cout << name << ": " << corpus->dialogues.size();
      if (!out.empty()) std::cout << " -> " << out << "." << name << ".jsonl";
      std::cout << "\n";
    }
  }
  return kOk;
}

int cmd_score(const std::string& pred_path, const std::string& gold_path, const std::string& judge_kind,
              const std::string& judge_cfg, bool machine) {
  SemanticJudge judge = offline_judge();
  if (judge_kind == "remote") {
    if (judge_cfg.empty()) throw UsageError("--judge remote needs --judge-backend");
    auto cfg = pipeline::BackendConfig::from_file(judge_cfg);
    judge = pipeline::backend_judge(pipeline::make_backend(cfg));
  }
  Corpus pred, gold;
  if (!load_clean(pred_path, pred) || !load_clean(gold_path, gold)) return kFindings;
  CorpusScore s;
  try {
    s = score_corpus(pred, gold, judge);
  } catch (const ScoringError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return judge_kind == "remote" ? kBackend : kFindings;
  }
  if (machine) {
    std::cout << score_json(s).dump() << "\n";
  } else {
    std::cout << score_table(s);
  }
  return kOk;
}

int cmd_derive_flips(const std::string& path, bool machine) {
  Corpus c;
  if (!load_clean(path, c)) return kFindings;
  bool consistent = true;
  ojson docs = ojson::array();
  for (const auto& ad : c.dialogues) {
    const auto derived = derive_flips(ad);
    const auto audit = check_flip_consistency(ad);
    consistent = consistent && audit.consistent();
    if (machine) {
      ojson d;
      d["doc_id"] = ad.dialogue.doc_id;
      d["derived"] = ojson::array();
      for (const auto& f : derived) d["derived"].push_back(derived_json(f));
      d["missing"] = ojson::array();
      for (const auto& f : audit.missing) d["missing"].push_back(derived_json(f));
      d["spurious"] = ojson::array();
      for (const auto& f : audit.spurious) d["spurious"].push_back(flip_json(f));
      d["order_fragile"] = audit.order_fragile;
      docs.push_back(std::move(d));
      continue;
    }
    std::cout << ad.dialogue.doc_id << ":";
    if (derived.empty()) std::cout << " no flips";
    std::cout << "\n";
    for (const auto& f : derived) std::cout << "  " << derived_text(f) << "\n";
    for (const auto& f : audit.missing) std::cout << "  missing annotation: " << derived_text(f) << "\n";
    for (const auto& f : audit.spurious) {
      std::cout << "  not derivable: (" << f.holder << ", " << f.target << ", " << f.aspect << ", "
                << to_string(f.initial) << ", " << to_string(f.flipped) << ")\n";
    }
    for (const auto& g : audit.order_fragile) std::cout << "  order depends on list position: " << g << "\n";
  }
  if (machine) std::cout << ojson{{"consistent", consistent}, {"dialogues", docs}}.dump() << "\n";
  return consistent ? kOk : kFindings;
}

struct PipelineArgs {
  std::string corpus;
  std::string backend;
  std::string judge_backend;
  bool no_verify = false;
  int max_retries = 3;
  int parallel = 1;
  std::string out;
  std::string traces;
  bool score = false;
  bool corrupt = false;
};

int cmd_run_pipeline(const PipelineArgs& a, bool machine) {
  if (a.max_retries < 0) throw UsageError("--max-retries must be non-negative");
  if (a.parallel < 1) throw UsageError("--parallel must be at least 1");
  Corpus input;
  if (!load_clean(a.corpus, input)) return kFindings;

  pipeline::PipelineConfig cfg;
  try {
    const auto bc = pipeline::BackendConfig::from_file(a.backend);
    cfg.backend = pipeline::make_backend(bc, &input, {a.corrupt});
    if (!a.judge_backend.empty()) {
      cfg.judge_backend = pipeline::make_backend(pipeline::BackendConfig::from_file(a.judge_backend), &input);
    }
  } catch (const pipeline::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  cfg.verification = !a.no_verify;
  cfg.max_retries = a.max_retries;

  const auto outcomes = pipeline::run_cos_corpus(input, cfg, static_cast<std::size_t>(a.parallel));
  const Corpus predicted = pipeline::to_corpus(input, outcomes);

  if (!a.traces.empty()) {
    std::filesystem::create_directories(a.traces);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      std::ofstream t(std::filesystem::path(a.traces) / ("trace_" + std::to_string(i) + ".json"));
      t << pipeline::trace_document(outcomes[i]).dump(2) << "\n";
    }
  }

  int code = kOk;
  std::size_t failed = 0, flagged = 0;
  for (const auto& o : outcomes) {
    if (const auto* e = std::get_if<pipeline::PipelineError>(&o)) {
      ++failed;
      std::cerr << "error: " << e->what() << "\n";
      code = std::max(code, e->backend_failure ? int(kBackend) : int(kFindings));
    } else if (std::get<pipeline::CosResult>(o).flagged()) {
      ++flagged;
    }
  }

  if (!a.out.empty()) save_corpus(predicted, a.out);
  std::optional<CorpusScore> score;
  if (a.score) score = score_corpus(predicted, input);

  if (machine) {
    ojson j;
    j["dialogues"] = outcomes.size();
    j["failed"] = failed;
    j["flagged"] = flagged;
    if (score) j["score"] = score_json(*score);
    if (a.out.empty()) {
      j["predictions"] = ojson::array();
      for (const auto& ad : predicted.dialogues) j["predictions"].push_back(corpus_io::encode_record(ad));
    }
    std::cout << j.dump() << "\n";
  } else {
    if (a.out.empty() && !a.score) serialize_corpus(predicted, std::cout);
    std::cerr << "dialogues: " << outcomes.size() << ", failed: " << failed << ", flagged: " << flagged << "\n";
    if (score) std::cout << score_table(*score);
  }
  return code;
}

int cmd_synth_prompt(const std::string& theme, int speakers, int turns, const std::string& modality,
                     const std::string& sample_path, bool machine) {
  std::vector<MediaKind> plan;
  std::stringstream ss(modality);
  std::string tag;
  while (std::getline(ss, tag, ',')) {
    if (text::trim(tag).empty()) continue;
    auto k = parse_media_kind(text::trim(tag));
    if (!k) throw UsageError("unknown modality '" + tag + "'");
    plan.push_back(*k);
  }
  std::string sample;
  if (!sample_path.empty()) {
    std::ifstream in(sample_path);
    if (!in) throw UsageError("cannot read sample '" + sample_path + "'");
    std::getline(in, sample);
  }
  std::string prompt;
  try {
    prompt = build_generation_prompt(theme, speakers, turns, plan, sample);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (machine) {
    std::cout << ojson{{"prompt", prompt}}.dump() << "\n";
  } else {
    std::cout << prompt << "\n";
  }
  return kOk;
}

int cmd_retrieve(const std::string& query, const std::string& pool_path, int k, bool machine) {
  if (k < 1) throw UsageError("-k must be at least 1");
  std::vector<Candidate> pool;
  try {
    pool = load_candidate_pool(pool_path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const Ranking r = retrieval_rank(query, pool, k);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  if (machine) {
    ojson arr = ojson::array();
    for (std::size_t i = 0; i < r.ids.size(); ++i) arr.push_back({{"id", r.ids[i]}, {"score", r.scores[i]}});
    std::cout << ojson{{"results", arr}}.dump() << "\n";
  } else {
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", r.scores[i]);
      std::cout << (i + 1) << "\t" << r.ids[i] << "\t" << buf << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialogue sentiment sextuple toolkit"};
  app.require_subcommand(1);
  std::string format = "human";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "machine"}));
  };

  std::string corpus_path;
  auto* validate = app.add_subcommand("validate", "Check a corpus against the schema");
  validate->add_option("corpus", corpus_path)->required();
  add_format(validate);

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("corpus", corpus_path)->required();
  add_format(stats);

  std::string ratios = "0.8,0.1,0.1", split_out;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand("split", "Deterministic train/dev/test split");
  split->add_option("corpus", corpus_path)->required();
  split->add_option("--ratios", ratios, "train,dev,test");
  split->add_option("--seed", seed)->required();
  split->add_option("--out", split_out, "Write <prefix>.{train,dev,test}.jsonl");
  add_format(split);

  std::string pred_path, gold_path, judge = "offline", judge_cfg;
  auto* score = app.add_subcommand("score", "Score predictions against gold");
  score->add_option("--pred", pred_path)->required();
  score->add_option("--gold", gold_path)->required();
  score->add_option("--judge", judge)->check(CLI::IsMember({"remote", "offline"}));
  score->add_option("--judge-backend", judge_cfg, "Backend config for the remote judge");
  add_format(score);

  auto* derive = app.add_subcommand("derive-flips", "Derive flips and audit annotated ones");
  derive->add_option("corpus", corpus_path)->required();
  add_format(derive);

  PipelineArgs pa;
  auto* run = app.add_subcommand("run-pipeline", "Run the four-step extraction pipeline");
  run->add_option("corpus", pa.corpus)->required();
  run->add_option("--backend", pa.backend, "Backend config file")->required();
  run->add_option("--judge-backend", pa.judge_backend, "Separate verifier backend config");
  run->add_flag("--no-verify", pa.no_verify);
  run->add_option("--max-retries", pa.max_retries);
  run->add_option("--parallel", pa.parallel);
  run->add_option("--out", pa.out, "Write predicted corpus here");
  run->add_option("--traces", pa.traces, "Directory for per-dialogue trace files");
  run->add_flag("--score", pa.score, "Score predictions against the input annotations");
  run->add_flag("--corrupt-sentiments", pa.corrupt, "Gold replay: rotate step-3 sentiments");
  add_format(run);

  std::string theme, modality, sample;
  int speakers = 0, turns = 0;
  auto* synth = app.add_subcommand("synth-prompt", "Build a dialogue generation prompt");
  synth->add_option("--theme", theme)->required();
  synth->add_option("--speakers", speakers)->required();
  synth->add_option("--turns", turns)->required();
  synth->add_option("--modality", modality, "Comma-separated: img,aud,vid");
  synth->add_option("--sample", sample, "File whose first line is the sample record");
  add_format(synth);

  std::string query, pool;
  int k = 10;
  auto* retrieve = app.add_subcommand("retrieve", "Rank pool captions against a query caption");
  retrieve->add_option("--query", query)->required();
  retrieve->add_option("--pool", pool)->required();
  retrieve->add_option("-k", k);
  add_format(retrieve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const bool machine = machine_format(format);
  try {
    if (*validate) return cmd_validate(corpus_path, machine);
    if (*stats) return cmd_stats(corpus_path, machine);
    if (*split) return cmd_split(corpus_path, ratios, seed, split_out, machine);
    if (*score) return cmd_score(pred_path, gold_path, judge, judge_cfg, machine);
    if (*derive) return cmd_derive_flips(corpus_path, machine);
    if (*run) return cmd_run_pipeline(pa, machine);
    if (*synth) return cmd_synth_prompt(theme, speakers, turns, modality, sample, machine);
    if (*retrieve) return cmd_retrieve(query, pool, k, machine);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const pipeline::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFindings;
  }
  return kUsage;
}
