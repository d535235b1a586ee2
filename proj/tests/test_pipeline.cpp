#include <gtest/gtest.h>

#include <atomic>
#include <deque>
#include <thread>

#include "sextant/pipeline/http_backend.hpp"
#include "sextant/sextant.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sextant;
using namespace sextant::pipeline;

namespace {

AnnotatedDialogue fixture(const std::string& name) {
  return load_corpus(std::string(SEXTANT_TEST_DATA) + "/" + name).corpus.dialogues.at(0);
}

int step_of(const std::string& prompt) {
  const auto t = default_templates();
  for (int k = 1; k <= 4; ++k) {
    const auto& s = t.step(k).text;
    if (prompt.size() >= 40 && s.substr(s.rfind("Expected Output:")) == prompt.substr(prompt.rfind("Expected Output:"))) {
      return k;
    }
  }
  return 0;
}

// Fixed step answers for the camera dialogue.
std::shared_ptr<ModelBackend> canned(std::atomic<int>* calls = nullptr, std::string step4 = "None") {
  return std::make_shared<FunctionBackend>([calls, step4](const std::string& p) -> std::string {
    if (calls) ++*calls;
    switch (step_of(p)) {
      case 1: return "(digital camera, battery life)";
      case 2: return "(Ava, digital camera, battery life, drains)";
      case 3: return "(Ava, digital camera, battery life, drains, negative, it drains fast, sadly)";
      case 4: return step4;
    }
    throw BackendError("unexpected prompt");
  });
}

// Verifier answering from a queue; the last answer repeats.
std::shared_ptr<ModelBackend> verdicts(std::vector<std::string> answers, std::atomic<int>* calls) {
  auto q = std::make_shared<std::deque<std::string>>(answers.begin(), answers.end());
  return std::make_shared<FunctionBackend>([q, calls](const std::string&) {
    ++*calls;
    std::string a = q->front();
    if (q->size() > 1) q->pop_front();
    return a;
  });
}

Corpus synthetic(std::uint64_t seed, std::size_t n) {
  testgen::Rng rng(seed);
  Corpus c;
  do c = testgen::corpus(rng, n); while (!testgen::covers_all_fields(c));
  return c;
}

}  // namespace

// ---- templates ---------------------------------------------------------------

TEST(Templates, PlaceholdersPerStep) {
  const auto t = default_templates();
  EXPECT_EQ(t.step(1).placeholders(), (std::vector<std::string>{"dialogue", "media"}));
  for (int k = 2; k <= 4; ++k) {
    EXPECT_EQ(t.step(k).placeholders(), (std::vector<std::string>{"dialogue", "media", "previous"}));
  }
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(t.claim(k).placeholders(), std::vector<std::string>{"clauses"});
  EXPECT_EQ(t.judge.placeholders(), (std::vector<std::string>{"dialogue", "pred", "gold"}));
}

TEST(Templates, RenderIsSinglePassAndRejectsUnbound) {
  PromptTemplate p{StepId::P1, "a {x} b {y} {x}"};
  EXPECT_EQ(p.render({{"x", "{y}"}, {"y", "2"}}), "a {y} b 2 {y}");
  EXPECT_THROW(p.render({{"x", "1"}}), std::invalid_argument);
  PromptTemplate braces{StepId::P1, "{ not one } {Upper} {}"};
  EXPECT_TRUE(braces.placeholders().empty());
  EXPECT_EQ(braces.render({}), braces.text);
}

TEST(Templates, StepFourOffersNone) {
  EXPECT_NE(default_templates().step(4).text.find("\"None\""), std::string::npos);
  EXPECT_THROW(verification_of(StepId::Judge), std::invalid_argument);
}

// ---- tuple parser -------------------------------------------------------------

TEST(TupleParser, CommaInLastField) {
  auto p = parse_tuple_list("(Ava, camera, battery, poor, negative, it drains, fast), (B, t, a, o, positive, r)",
                            {6, {4}, std::nullopt});
  ASSERT_EQ(p.tuples.size(), 2u);
  EXPECT_EQ(p.tuples[0][5], "it drains, fast");
  EXPECT_EQ(p.tuples[1][0], "B");
}

TEST(TupleParser, NestedParenthesesStayInField) {
  auto p = parse_tuple_list("noise (lens (wide, tele), zoom)_1, and (x, y)", {2, {}, std::nullopt});
  ASSERT_EQ(p.tuples.size(), 2u);
  EXPECT_EQ(p.tuples[0], (Tuple{"lens (wide, tele)", "zoom"}));
  EXPECT_EQ(p.tuples[1], (Tuple{"x", "y"}));
}

TEST(TupleParser, NoneAnswers) {
  for (const char* s : {"None", "none", "  \"None\".", "`None`", "NONE\n"}) {
    auto p = parse_tuple_list(s, {6, {3, 4}, 5});
    EXPECT_TRUE(p.none) << s;
    EXPECT_TRUE(p.empty());
    EXPECT_EQ(format_tuple_list(p), "None");
  }
}

TEST(TupleParser, Errors) {
  auto kind = [](const std::string& s, TupleSpec spec) {
    try {
      parse_tuple_list(s, spec);
    } catch (const TupleParseError& e) {
      return e.kind;
    }
    ADD_FAILURE() << "no error for " << s;
    return TupleParseErrorKind::NoGroup;
  };
  EXPECT_EQ(kind("(a, b", {2, {}, {}}), TupleParseErrorKind::Unbalanced);
  EXPECT_EQ(kind("a, b)", {2, {}, {}}), TupleParseErrorKind::Unbalanced);
  EXPECT_EQ(kind("nothing here", {2, {}, {}}), TupleParseErrorKind::NoGroup);
  EXPECT_EQ(kind("(a, b, c)", {4, {}, {}}), TupleParseErrorKind::ArityShortfall);
  EXPECT_EQ(kind("(h, t, a, o, great, r)", {6, {4}, {}}), TupleParseErrorKind::InvalidSentiment);
  EXPECT_EQ(kind("(h, t, a, positive, negative, gossip)", {6, {3, 4}, 5}), TupleParseErrorKind::InvalidTrigger);
  EXPECT_THROW(parse_tuple_list("(a)", {0, {}, {}}), std::invalid_argument);
}

TEST(TupleParser, RoundTripAgainstStringSplitOracle) {
  testgen::Rng rng(31);
  const std::vector<std::string> vocab{"camera", "battery life", "Ava", "the screen", "李明", "pantalla", "ok-ish"};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t arity = std::vector<std::size_t>{2, 4, 6}[i % 3];
    const TupleSpec spec = arity == 6 ? TupleSpec{6, {4}, std::nullopt} : TupleSpec{arity, {}, std::nullopt};
    std::vector<Tuple> tuples(testgen::uniform(rng, 1, 5));
    for (auto& t : tuples) {
      for (std::size_t k = 0; k < arity; ++k) {
        if (arity == 6 && k == 4) {
          t.emplace_back(to_string(kSentiments[testgen::uniform(rng, 0, 2)]));
        } else if (arity == 6 && k == 5) {
          std::string r = testgen::pick(rng, vocab);
          for (std::size_t c = testgen::uniform(rng, 0, 3); c > 0; --c) r += ", " + testgen::pick(rng, vocab);
          t.push_back(r);
        } else {
          t.push_back(testgen::pick(rng, vocab));
        }
      }
    }
    const std::string s = format_tuple_list(tuples);
    const auto parsed = parse_tuple_list(s, spec);
    ASSERT_FALSE(parsed.none);
    ASSERT_EQ(parsed.tuples, tuples) << s;
    ASSERT_EQ(parsed.tuples, oracle::split_tuples(s, arity)) << s;
  }
}

// ---- paraphrase and verification ---------------------------------------------

TEST(Paraphrase, ClausesPerStep) {
  EXPECT_EQ(pipeline::detail::clause(StepId::P1, {"camera", "battery"}), "battery of camera");
  EXPECT_EQ(pipeline::detail::clause(StepId::P2, {"Ava", "camera", "battery", "poor"}),
            "the opinion of Ava on battery of camera is poor");
  EXPECT_EQ(pipeline::detail::clause(StepId::P3, {"Ava", "camera", "battery", "poor", "negative", "drains"}),
            "Ava's opinion poor on battery of camera carries a sentiment negative with rationale drains");
  EXPECT_EQ(pipeline::detail::clause(StepId::P4, {"Ava", "camera", "battery", "negative", "neutral",
                                        "participant_feedback_and_interaction"}),
            "Ava's sentiment towards battery of camera initially was negative and later flipped to neutral due to "
            "trigger participant feedback and interaction");
  EXPECT_THROW(pipeline::detail::clause(StepId::P2, {"a", "b"}), std::invalid_argument);
}

TEST(Paraphrase, FillsClaimTemplate) {
  const std::string c = paraphrase_tuples(StepId::P1, {{"camera", "battery"}, {"camera", "zoom"}, {"phone", "screen"}});
  EXPECT_NE(c.find("including battery of camera, zoom of camera, and screen of phone. Please"), std::string::npos);
  EXPECT_NE(paraphrase_tuples(StepId::V1, {{"a", "b"}, {"c", "d"}}).find("b of a and d of c."), std::string::npos);
  EXPECT_THROW(paraphrase_tuples(StepId::P1, {}), std::invalid_argument);
}

TEST(Verification, VerdictParsing) {
  EXPECT_TRUE(parse_verdict(" 1"));
  EXPECT_TRUE(parse_verdict("1 (yes)"));
  EXPECT_FALSE(parse_verdict("0\n"));
  EXPECT_THROW(parse_verdict("yes"), VerificationParseError);
  EXPECT_THROW(parse_verdict(""), VerificationParseError);
  FunctionBackend b([](const std::string& p) { return p.find("battery") != std::string::npos ? "1" : "0"; });
  EXPECT_TRUE(verify("claim about battery", "dialogue", b));
  EXPECT_FALSE(verify("claim about zoom", "dialogue", b));
}

TEST(Verification, BackendJudge) {
  auto b = std::make_shared<FunctionBackend>([](const std::string& p) -> std::string {
    if (p.find("'pricey'") != std::string::npos) return "1";
    if (p.find("'maybe'") != std::string::npos) return "perhaps";
    return "0";
  });
  auto j = backend_judge(b);
  EXPECT_TRUE(j("ctx", "pricey", "expensive"));
  EXPECT_FALSE(j("ctx", "cheap", "expensive"));
  EXPECT_FALSE(j("ctx", "maybe", "expensive"));
}

// ---- backends ---------------------------------------------------------------

TEST(Scripted, SequencesRepeatLastAndUnknownThrows) {
  ScriptedBackend b;
  b.add_sequence("p", {"a", "b"});
  b.add("q", "z");
  EXPECT_EQ(b.complete("p"), "a");
  EXPECT_EQ(b.complete("p"), "b");
  EXPECT_EQ(b.complete("p"), "b");
  EXPECT_EQ(b.complete("q"), "z");
  EXPECT_THROW(b.complete("r"), BackendError);
  EXPECT_EQ(b.calls(), 4u);
  EXPECT_THROW(b.add_sequence("x", {}), std::invalid_argument);
}

TEST(Scripted, JsonTableRoundTrip) {
  ScriptedBackend b;
  b.add("p", "a");
  b.add_sequence("q", {"x", "y"});
  auto c = ScriptedBackend::from_json(b.to_json());
  EXPECT_EQ(c.to_json(), b.to_json());
  EXPECT_EQ(c.complete("q"), "x");
  EXPECT_EQ(prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(ScriptedBackend::from_json(nlohmann::json::array()), std::invalid_argument);
  EXPECT_THROW(ScriptedBackend::from_json({{"h", 3}}), std::invalid_argument);
}

TEST(BackendConfig, NamesCredentialVariableOnly) {
  auto c = BackendConfig::from_json({{"endpoint", "http://127.0.0.1:1/v1"}, {"credential_env", "MY_KEY"}});
  EXPECT_EQ(c.type, "http");
  EXPECT_EQ(c.credential_env, "MY_KEY");
  EXPECT_THROW(BackendConfig::from_json({{"endpoint", "http://x"}, {"api_key", "sk-1"}}), std::invalid_argument);
  EXPECT_THROW(BackendConfig::from_json({{"endpoint", "http://x"}, {"credential", "sk-1"}}), std::invalid_argument);
  EXPECT_THROW(BackendConfig::from_json({{"type", "carrier-pigeon"}}), std::invalid_argument);
  EXPECT_THROW(BackendConfig::from_json({{"type", "http"}}), std::invalid_argument);
  EXPECT_THROW(BackendConfig::from_json({{"type", "scripted"}}), std::invalid_argument);
  EXPECT_THROW(BackendConfig::from_json({{"endpoint", "http://x"}, {"timeout_seconds", 0}}), std::invalid_argument);
}

TEST(HttpBackend, ExtractText) {
  EXPECT_EQ(HttpBackend::extract_text(R"j({"choices":[{"text":"(a, b)"}]})j"), "(a, b)");
  EXPECT_EQ(HttpBackend::extract_text(R"j({"choices":[{"message":{"role":"assistant","content":"1"}}]})j"), "1");
  EXPECT_EQ(HttpBackend::extract_text(R"j({"completion":"None"})j"), "None");
  EXPECT_THROW(HttpBackend::extract_text("<html>"), BackendError);
  EXPECT_THROW(HttpBackend::extract_text(R"j({"choices":[]})j"), BackendError);
}

TEST(HttpBackend, ConstructionChecks) {
  BackendConfig c;
  c.endpoint = "localhost:8080";
  EXPECT_THROW(HttpBackend{c}, std::invalid_argument);
  c.endpoint = "http://127.0.0.1:9/v1";
  c.credential_env = "SEXTANT_TEST_SURELY_UNSET_VAR";
  EXPECT_THROW(HttpBackend{c}, BackendError);
}

TEST(HttpBackend, PostsPromptToLocalServer) {
  httplib::Server srv;
  std::string seen_auth, seen_body;
  srv.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"j({"choices":[{"text":"1"}]})j", "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  ::setenv("SEXTANT_TEST_TOKEN", "tok-123", 1);
  BackendConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
  c.model = "m";
  c.credential_env = "SEXTANT_TEST_TOKEN";
  c.timeout_seconds = 5;
  HttpBackend b(c);
  EXPECT_EQ(b.complete("hello"), "1");
  srv.stop();
  t.join();
  EXPECT_EQ(seen_auth, "Bearer tok-123");
  auto j = nlohmann::json::parse(seen_body);
  EXPECT_EQ(j["prompt"], "hello");
  EXPECT_EQ(j["model"], "m");

  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
  c.timeout_seconds = 0.5;
  HttpBackend dead(c);
  EXPECT_THROW(dead.complete("x"), BackendError);
}

// ---- pipeline ---------------------------------------------------------------

TEST(Cos, RetryThenAccept) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> main_calls{0}, verify_calls{0};
  PipelineConfig cfg;
  cfg.backend = canned(&main_calls);
  cfg.judge_backend = verdicts({"0", "0", "1"}, &verify_calls);
  const auto r = run_cos(ad.dialogue, cfg);
  ASSERT_EQ(r.traces.size(), 4u);
  EXPECT_EQ(r.traces[0].retry_count, 2);
  EXPECT_EQ(r.traces[0].attempts.size(), 3u);
  EXPECT_FALSE(r.traces[0].flagged);
  EXPECT_EQ(r.traces[0].verdicts, (std::vector<bool>{false, false, true}));
  EXPECT_EQ(r.traces[1].retry_count, 0);
  EXPECT_FALSE(r.flagged());
  EXPECT_EQ(main_calls.load(), 3 + 1 + 1 + 1);
  EXPECT_EQ(verify_calls.load(), 3 + 1 + 1);  // step 4 answered None
  ASSERT_EQ(r.sextuples.size(), 1u);
  EXPECT_EQ(r.sextuples[0].rationale.value, "it drains fast, sadly");
  EXPECT_TRUE(r.flips.empty());
}

TEST(Cos, AlwaysContradictFlagsAfterFourAttempts) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> main_calls{0}, verify_calls{0};
  PipelineConfig cfg;
  cfg.backend = canned(&main_calls);
  cfg.judge_backend = verdicts({"0"}, &verify_calls);
  cfg.max_retries = 3;
  const auto r = run_cos(ad.dialogue, cfg);
  for (int k = 0; k < 3; ++k) {
    EXPECT_TRUE(r.traces[k].flagged);
    EXPECT_EQ(r.traces[k].attempts.size(), 4u);
    EXPECT_EQ(r.traces[k].retry_count, 3);
  }
  EXPECT_FALSE(r.traces[3].flagged);
  EXPECT_TRUE(r.flagged());
  EXPECT_EQ(main_calls.load(), 4 * 3 + 1);
  EXPECT_EQ(verify_calls.load(), 4 * 3);
  EXPECT_EQ(r.sextuples.size(), 1u);  // last parse kept
}

TEST(Cos, UnreadableVerdictCountsAsContradiction) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> verify_calls{0};
  PipelineConfig cfg;
  cfg.backend = canned();
  cfg.judge_backend = verdicts({"dunno", "1"}, &verify_calls);
  const auto r = run_cos(ad.dialogue, cfg);
  EXPECT_EQ(r.traces[0].retry_count, 1);
  ASSERT_TRUE(r.traces[0].attempts[0].verification);
  EXPECT_FALSE(r.traces[0].attempts[0].verification->verdict.has_value());
  EXPECT_FALSE(r.traces[0].attempts[0].verification->error.empty());
}

TEST(Cos, VerificationOffMeansOneCallPerStep) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> main_calls{0};
  PipelineConfig cfg;
  cfg.backend = canned(&main_calls, "(Ava, digital camera, battery life, negative, neutral, logical argumentation)");
  cfg.verification = false;
  const auto r = run_cos(ad.dialogue, cfg);
  EXPECT_EQ(main_calls.load(), 4);
  ASSERT_EQ(r.flips.size(), 1u);
  EXPECT_EQ(r.flips[0].trigger, TriggerType::LogicalArgumentation);
  for (const auto& t : r.traces) EXPECT_TRUE(t.verdicts.empty());
}

TEST(Cos, StepFourRejectsNonFlip) {
  const auto ad = fixture("camera_dialogue.jsonl");
  PipelineConfig cfg;
  cfg.backend = canned(nullptr, "(Ava, digital camera, battery life, negative, negative, logical argumentation)");
  cfg.verification = false;
  cfg.max_retries = 1;
  try {
    run_cos(ad.dialogue, cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_FALSE(e.backend_failure);
    EXPECT_EQ(e.traces.size(), 4u);
    EXPECT_EQ(e.traces[3].attempts.size(), 2u);
  }
}

TEST(Cos, PersistentBackendFailureRaises) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> calls{0};
  PipelineConfig cfg;
  cfg.backend = std::make_shared<FunctionBackend>([&](const std::string&) -> std::string {
    ++calls;
    throw BackendError("down");
  });
  cfg.max_retries = 2;
  try {
    run_cos(ad.dialogue, cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_TRUE(e.backend_failure);
    EXPECT_EQ(e.doc_id, ad.dialogue.doc_id);
    ASSERT_EQ(e.traces.size(), 1u);
    EXPECT_EQ(e.traces[0].attempts.size(), 3u);
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(Cos, TransientFailureConsumesAnAttempt) {
  const auto ad = fixture("camera_dialogue.jsonl");
  auto inner = canned();
  int n = 0;
  PipelineConfig cfg;
  cfg.backend = std::make_shared<FunctionBackend>([&](const std::string& p) -> std::string {
    if (n++ == 0) throw BackendError("blip");
    return inner->complete(p);
  });
  cfg.verification = false;
  const auto r = run_cos(ad.dialogue, cfg);
  EXPECT_EQ(r.traces[0].retry_count, 1);
  EXPECT_FALSE(r.traces[0].attempts[0].error.empty());
}

TEST(Cos, EmptyStepShortCircuits) {
  const auto ad = fixture("camera_dialogue.jsonl");
  int calls = 0;
  PipelineConfig cfg;
  cfg.backend = std::make_shared<FunctionBackend>([&](const std::string&) {
    ++calls;
    return std::string("None");
  });
  const auto r = run_cos(ad.dialogue, cfg);
  EXPECT_EQ(r.traces.size(), 1u);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(r.sextuples.empty());
}

TEST(Cos, PromptsCarryPreviousOutputAndMedia) {
  const auto ad = fixture("phone_dialogue.jsonl");
  std::vector<std::string> prompts;
  PipelineConfig cfg;
  auto inner = canned();
  cfg.backend = std::make_shared<FunctionBackend>([&](const std::string& p) {
    prompts.push_back(p);
    return inner->complete(p);
  });
  cfg.verification = false;
  run_cos(ad.dialogue, cfg);
  ASSERT_EQ(prompts.size(), 4u);
  EXPECT_NE(prompts[0].find("With encoded information of [IMAGE_1]"), std::string::npos);
  EXPECT_NE(prompts[1].find("Target-aspect pairs: (digital camera, battery life)\n"), std::string::npos);
  EXPECT_NE(prompts[3].find("sextuples: (Ava, digital camera, battery life, drains, negative, it drains fast, sadly)"),
            std::string::npos);
}

TEST(Cos, StepThreeMismatchIsNoted) {
  const auto ad = fixture("camera_dialogue.jsonl");
  PipelineConfig cfg;
  cfg.backend = std::make_shared<FunctionBackend>([](const std::string& p) -> std::string {
    switch (step_of(p)) {
      case 1: return "(camera, zoom)";
      case 2: return "(Ava, camera, zoom, fine)";
      case 3: return "(Ava, camera, lens, fine, positive, r)";
      default: return "None";
    }
  });
  cfg.verification = false;
  const auto r = run_cos(ad.dialogue, cfg);
  ASSERT_EQ(r.traces[2].notes.size(), 1u);
  EXPECT_NE(r.traces[2].notes[0].find("lens"), std::string::npos);
}

TEST(Cos, InvalidInputs) {
  PipelineConfig cfg;
  EXPECT_THROW(run_cos(fixture("camera_dialogue.jsonl").dialogue, cfg), std::invalid_argument);
  cfg.backend = canned();
  cfg.max_retries = -1;
  EXPECT_THROW(run_cos(fixture("camera_dialogue.jsonl").dialogue, cfg), std::invalid_argument);
}

TEST(Cos, ScriptedTableReproducesRecordedSession) {
  const auto ad = fixture("phone_dialogue.jsonl");
  Corpus gold{{ad}, {}};
  auto replay = std::make_shared<GoldReplayBackend>(gold);
  ScriptedBackend recorder;
  PipelineConfig cfg;
  cfg.backend = std::make_shared<FunctionBackend>([&](const std::string& p) {
    std::string c = replay->complete(p);
    recorder.add(p, c);
    return c;
  });
  const auto first = run_cos(ad.dialogue, cfg);
  auto scripted = std::make_shared<ScriptedBackend>(ScriptedBackend::from_json(recorder.to_json()));
  cfg.backend = scripted;
  const auto second = run_cos(ad.dialogue, cfg);
  EXPECT_EQ(second.sextuples, first.sextuples);
  EXPECT_EQ(second.flips, first.flips);
  EXPECT_EQ(first.flips, ad.flips);
  EXPECT_EQ(scripted->calls(), 8u);
}

TEST(GoldReplay, TwentyDialoguesScorePerfectly) {
  const Corpus gold = synthetic(41, 20);
  PipelineConfig cfg;
  cfg.backend = std::make_shared<GoldReplayBackend>(gold);
  const auto outcomes = run_cos_corpus(gold, cfg);
  for (const auto& o : outcomes) ASSERT_TRUE(std::holds_alternative<CosResult>(o));
  const auto s = score_corpus(to_corpus(gold, outcomes), gold);
  EXPECT_EQ(s.sextuples.sextuple_micro.f1, 1.0);
  EXPECT_EQ(s.flips.flip_trig.f1, 1.0);
}

TEST(GoldReplay, RotatedSentimentsHurtMicroOnly) {
  const Corpus gold = synthetic(41, 20);
  PipelineConfig cfg;
  cfg.backend = std::make_shared<GoldReplayBackend>(gold, GoldReplayOptions{true});
  const auto s = score_corpus(to_corpus(gold, run_cos_corpus(gold, cfg)), gold);
  EXPECT_EQ(s.sextuples.sextuple_identification.f1, 1.0);
  EXPECT_LT(s.sextuples.sextuple_micro.f1, s.sextuples.sextuple_identification.f1);
}

TEST(GoldReplay, UnknownDialogueIsABackendError) {
  Corpus gold{{fixture("camera_dialogue.jsonl")}, {}};
  GoldReplayBackend b(gold);
  EXPECT_THROW(b.complete("hello"), BackendError);
  const auto other = fixture("phone_dialogue.jsonl");
  const std::string p = default_templates().step(1).render({{"dialogue", render_dialogue(other.dialogue)}, {"media", ""}});
  EXPECT_THROW(b.complete(p), BackendError);
}

TEST(CorpusRun, ParallelKeepsOrderAndCapturesFailures) {
  Corpus c = synthetic(43, 12);
  const std::string bad = c.dialogues[5].dialogue.doc_id;
  Corpus gold = c;
  gold.dialogues.erase(gold.dialogues.begin() + 5);  // replay cannot answer this one
  PipelineConfig cfg;
  cfg.backend = std::make_shared<GoldReplayBackend>(gold);
  cfg.max_retries = 0;
  const auto seq = run_cos_corpus(c, cfg, 1);
  const auto par = run_cos_corpus(c, cfg, 4);
  ASSERT_EQ(par.size(), c.dialogues.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    const auto doc = trace_document(par[i]);
    EXPECT_EQ(doc["doc_id"], c.dialogues[i].dialogue.doc_id);
    EXPECT_EQ(doc, trace_document(seq[i]));
  }
  ASSERT_TRUE(std::holds_alternative<PipelineError>(par[5]));
  EXPECT_TRUE(std::get<PipelineError>(par[5]).backend_failure);
  const Corpus pred = to_corpus(c, par);
  EXPECT_TRUE(pred.dialogues[5].sextuples.empty());
  EXPECT_EQ(pred.dialogues[6].sextuples.size(), c.dialogues[6].sextuples.size());
}

TEST(TraceIO, DocumentShape) {
  const auto ad = fixture("camera_dialogue.jsonl");
  std::atomic<int> v{0};
  PipelineConfig cfg;
  cfg.backend = canned();
  cfg.judge_backend = verdicts({"0", "1"}, &v);
  const auto doc = trace_document(CosOutcome{run_cos(ad.dialogue, cfg)});
  EXPECT_EQ(doc["doc_id"], ad.dialogue.doc_id);
  ASSERT_EQ(doc["steps"].size(), 4u);
  const auto& s1 = doc["steps"][0];
  EXPECT_EQ(s1["step"], "P1");
  EXPECT_EQ(s1["retry_count"], 1);
  EXPECT_EQ(s1["attempts"][0]["verification"]["verdict"], false);
  EXPECT_EQ(s1["parsed"][0][1], "battery life");
  EXPECT_EQ(doc["steps"][3]["parsed"], "None");
  EXPECT_FALSE(doc.contains("error"));
}
