//
// Copyright 2026 The lexsub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "lexsub/survey.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"
#include "lexsub/error.h"
#include "lexsub/survey_server.h"
#include "survey_replay.h"
#include "test_util.h"

namespace lexsub {
namespace {

using ::lexsub::testing::ReadFile;
using ::lexsub::testing::TempDir;
using ::lexsub::testing::WriteFile;
using Strings = std::vector<std::string>;

template <typename Fn>
ErrorCode CodeOf(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

CanonicalRecord Record(const std::string& id, const std::string& sentence,
                       const std::string& word,
                       const std::vector<std::pair<std::string, int>>& gold) {
  CanonicalRecord r;
  r.instance = MakeInstance(id, sentence, word, PartOfSpeech::kVerb);
  r.gold = GoldSet(id);
  for (const auto& [s, w] : gold) r.gold.Add(s, w);
  return r;
}

// A single-question survey built from one record.
struct OneRecord {
  std::vector<CanonicalRecord> records;
  PredictionFile a;
  PredictionFile b;
};

std::vector<SurveyQuestion> Generate(const OneRecord& in) {
  SurveyConfig c;
  c.n_per_task = 1;
  std::vector<CanonicalRecord> records;
  PredictionFile a;
  PredictionFile b;
  // Four copies so each task gets one question from the same record.
  for (int k = 0; k < 4; ++k) {
    CanonicalRecord r = in.records[0];
    r.instance.id += "_" + std::to_string(k);
    r.gold = GoldSet(r.instance.id);
    for (const auto& e : in.records[0].gold.entries()) {
      r.gold.Add(e.substitute, e.weight);
    }
    a[r.instance.id] = in.a.begin()->second;
    b[r.instance.id] = in.b.begin()->second;
    records.push_back(r);
  }
  return GenerateSurvey(records, a, b, c);
}

const SurveyQuestion& ByTask(const std::vector<SurveyQuestion>& qs,
                             SurveyTask t) {
  return *std::find_if(qs.begin(), qs.end(),
                       [&](const SurveyQuestion& q) { return q.task == t; });
}

TEST(GenerateTest, ExercisedExample) {
  OneRecord in;
  in.records = {Record("e1",
                       "Depending upon how many warrants and options are "
                       "exercised prior to completion of the transaction...",
                       "exercised", {{"use", 2}, {"employ", 1}})};
  in.a = {{"e1", {"execute", "apply", "employ"}}};
  in.b = {{"e1", {"execute", "use", "exert"}}};
  const auto qs = Generate(in);
  const SurveyQuestion& swr = ByTask(qs, SurveyTask::kSwr);
  ASSERT_EQ(swr.options.size(), 2u);
  for (const SurveyOption& o : swr.options) {
    if (o.display == Strings{"use"}) {
      EXPECT_EQ(o.sources, std::set<Source>{Source::kGold});
    } else {
      EXPECT_EQ(o.display, Strings{"execute"});
      EXPECT_EQ(o.sources,
                (std::set<Source>{Source::kSystemA, Source::kSystemB}));
    }
  }
  EXPECT_NE(swr.sentence_display.find("**exercised**"), std::string::npos);
  const SurveyQuestion& masked = ByTask(qs, SurveyTask::kSwrM);
  EXPECT_NE(masked.sentence_display.find("are ______ prior"),
            std::string::npos);
  EXPECT_EQ(masked.sentence_display.find("exercised"), std::string::npos);
}

TEST(GenerateTest, HissedSetsDoNotMerge) {
  OneRecord in;
  in.records = {Record("e2", "It hissed thoughtfully.", "hissed",
                       {{"buzz", 3}, {"hoot", 2}, {"say", 1}})};
  in.a = {{"e2", {"whistle", "say", "sigh"}}};
  in.b = {{"e2", {"whisper", "say", "mutter"}}};
  const auto qs = Generate(in);
  const SurveyQuestion& sr = ByTask(qs, SurveyTask::kSr);
  ASSERT_EQ(sr.options.size(), 3u);
  for (const SurveyOption& o : sr.options) {
    EXPECT_EQ(o.display.size(), 3u);
    EXPECT_EQ(o.sources.size(), 1u);
  }
}

TEST(GenerateTest, IdenticalTopOneMergesAllSources) {
  OneRecord in;
  in.records = {Record("m", "We said it.", "said", {{"stated", 1}})};
  in.a = {{"m", {"stated", "told", "spoke"}}};
  in.b = {{"m", {"stated", "voiced", "noted"}}};
  const auto qs = Generate(in);
  const SurveyQuestion& swr = ByTask(qs, SurveyTask::kSwr);
  ASSERT_EQ(swr.options.size(), 1u);
  EXPECT_EQ(swr.options[0].sources.size(), 3u);
}

TEST(GenerateTest, SetsMergeRegardlessOfOrder) {
  OneRecord in;
  in.records = {Record("s", "We said it.", "said",
                       {{"told", 3}, {"stated", 2}, {"spoke", 1}})};
  in.a = {{"s", {"spoke", "told", "stated"}}};
  in.b = {{"s", {"voiced", "noted", "told"}}};
  const SurveyQuestion& sr = ByTask(Generate(in), SurveyTask::kSr);
  ASSERT_EQ(sr.options.size(), 2u);
}

TEST(GenerateTest, DeterministicAndSized) {
  const auto s = replay::BuildReplaySurvey();
  SurveyConfig c;
  c.seed = replay::kSeed;
  const auto again = GenerateSurvey(s.records, s.a, s.b, c);
  EXPECT_EQ(QuestionsToJson(again, true), QuestionsToJson(s.questions, true));
  ASSERT_EQ(s.questions.size(), 60u);
  std::set<std::string> records;
  for (const auto& q : s.questions) records.insert(q.record_id);
  EXPECT_EQ(records.size(), 60u);
  EXPECT_EQ(s.questions[0].qid, "SWR-01");
  EXPECT_EQ(s.questions[59].qid, "SR_M-15");
  c.seed = replay::kSeed + 1;
  EXPECT_NE(QuestionsToJson(GenerateSurvey(s.records, s.a, s.b, c), true),
            QuestionsToJson(s.questions, true));
}

TEST(GenerateTest, InsufficientRecords) {
  const auto s = replay::BuildReplaySurvey();
  PredictionFile short_a = s.a;
  short_a["r0"] = {"only", "two"};
  SurveyConfig c;
  EXPECT_EQ(CodeOf([&] { GenerateSurvey(s.records, short_a, s.b, c); }),
            ErrorCode::kInsufficientRecords);
}

TEST(JsonTest, SourcesHiddenUnlessRequested) {
  const auto s = replay::BuildReplaySurvey();
  const std::string hidden = QuestionsToJson(s.questions, false);
  EXPECT_EQ(hidden.find("sources"), std::string::npos);
  EXPECT_EQ(hidden.find("system_a"), std::string::npos);
  EXPECT_EQ(hidden.find("record_id"), std::string::npos);
  const std::string full = QuestionsToJson(s.questions, true);
  EXPECT_EQ(QuestionsToJson(QuestionsFromJson(full), true), full);
  EXPECT_THROW(QuestionsFromJson(hidden), Error);
}

TEST(JsonTest, Responses) {
  const SurveyResponse r{"abc", "SWR-01", 2, 99};
  const SurveyResponse back = ResponseFromJson(ResponseToJson(r));
  EXPECT_EQ(back.respondent, "abc");
  EXPECT_EQ(back.choice, 2u);
  EXPECT_EQ(back.timestamp_ms, 99);
  EXPECT_EQ(CodeOf([] {
              ResponseFromJson(R"({"respondent":"a","qid":"q","choice":-1})");
            }),
            ErrorCode::kIndexOutOfRange);
}

TEST(StoreTest, RecordValidatesAndOverwrites) {
  const auto s = replay::BuildReplaySurvey();
  ResponseStore store(s.questions);
  store.Record({"u1", "SWR-01", 0, 1});
  store.Record({"u1", "SWR-01", 1, 2});
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.Responses()[0].choice, 1u);
  EXPECT_EQ(CodeOf([&] { store.Record({"u1", "XX-99", 0, 1}); }),
            ErrorCode::kUnknownQuestion);
  EXPECT_EQ(CodeOf([&] { store.Record({"u1", "SWR-01", 9, 1}); }),
            ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(CodeOf([&] { store.Record({"", "SWR-01", 0, 1}); }),
            ErrorCode::kInvalidArgument);
}

TEST(StoreTest, ReplaysLogAndSnapshot) {
  TempDir dir;
  const auto s = replay::BuildReplaySurvey();
  const auto log = dir / "responses.log";
  {
    ResponseStore store(s.questions, log);
    store.Record({"u1", "SWR-01", 0, 1});
    store.Record({"u2", "SWR-02", 0, 2});
    store.Compact();
    store.Record({"u1", "SWR-01", 1, 3});
  }
  // A torn final write is skipped on replay.
  WriteFile(log, ReadFile(log) + "{\"respondent\":\"u3\",\"qi");
  ResponseStore reopened(s.questions, log);
  EXPECT_EQ(reopened.size(), 2u);
  EXPECT_EQ(reopened.skipped_on_replay(), 1u);
  EXPECT_EQ(reopened.Responses()[0].choice, 1u);
}

TEST(StoreTest, ConcurrentRecords) {
  TempDir dir;
  const auto s = replay::BuildReplaySurvey();
  ResponseStore store(s.questions, dir / "log");
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (const auto& q : s.questions) {
        store.Record({"t" + std::to_string(t), q.qid, 0, 5});
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(store.size(), 8u * 60u);
  ResponseStore reopened(s.questions, dir / "log");
  EXPECT_EQ(reopened.size(), 8u * 60u);
}

TEST(AggregateTest, SharedOptionCreditsBoth) {
  SurveyQuestion q;
  q.qid = "SWR-01";
  q.task = SurveyTask::kSwr;
  q.options = {{{"use"}, {Source::kGold, Source::kSystemA}},
               {{"execute"}, {Source::kSystemB}}};
  const SurveyAggregate agg = Aggregate({q}, {{"u", "SWR-01", 0, 1}}, 1);
  EXPECT_EQ(agg.counts.at(SurveyTask::kSwr)[0], 1);
  EXPECT_EQ(agg.counts.at(SurveyTask::kSwr)[1], 1);
  EXPECT_EQ(agg.counts.at(SurveyTask::kSwr)[2], 0);
  EXPECT_EQ(agg.responses.at(SurveyTask::kSwr), 1);
  EXPECT_EQ(agg.Percent(SurveyTask::kSwr, Source::kGold), 100.0);
}

TEST(AggregateTest, Empty) {
  const SurveyAggregate agg = Aggregate({}, {});
  EXPECT_EQ(agg.respondents, 0u);
  for (Source s : kAllSources) EXPECT_EQ(agg.TotalPercent(s), 0.0);
}

TEST(AggregateTest, ReplayCounts) {
  const auto s = replay::BuildReplaySurvey();
  const SurveyAggregate agg = Aggregate(s.questions, s.responses);
  EXPECT_EQ(agg.respondents, 21u);
  const std::map<SurveyTask, std::array<long, 3>> want = {
      {SurveyTask::kSwr, {80, 141, 195}},
      {SurveyTask::kSwrM, {129, 114, 120}},
      {SurveyTask::kSr, {119, 89, 125}},
      {SurveyTask::kSrM, {88, 95, 112}}};
  for (const auto& [task, counts] : want) {
    EXPECT_EQ(agg.counts.at(task), counts) << TaskName(task);
    const long sum = counts[0] + counts[1] + counts[2];
    EXPECT_GE(sum, agg.responses.at(task));
  }
  EXPECT_EQ(agg.totals, (std::array<long, 3>{416, 439, 552}));
  EXPECT_NEAR(agg.TotalPercent(Source::kSystemB), 43.81, 0.005);
  EXPECT_NEAR(agg.TotalPercent(Source::kGold), 33.02, 0.005);
  EXPECT_NEAR(agg.TotalPercent(Source::kSystemA), 34.84, 0.005);
  EXPECT_NEAR(agg.Percent(SurveyTask::kSwr, Source::kSystemB), 61.90, 0.005);
  const std::string json = agg.ToJson("dropout", "concat");
  const auto j = nlohmann::json::parse(json);
  EXPECT_EQ(j["total"]["concat"]["count"], 552);
  EXPECT_NE(agg.FormatTable("Dropout", "ConCat").find("43.81%"),
            std::string::npos);
}

TEST(AggregateTest, OrderInvariant) {
  auto s = replay::BuildReplaySurvey();
  // Add resubmissions so the latest-wins rule matters.
  s.responses.push_back({"resp0", "SWR-01", 0, 1});
  s.responses.push_back({"resp1", "SWR-02", 1, 9999999999999});
  const std::string base =
      Aggregate(s.questions, s.responses).ToJson("a", "b");
  std::mt19937 gen(1);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(s.responses.begin(), s.responses.end(), gen);
    EXPECT_EQ(Aggregate(s.questions, s.responses).ToJson("a", "b"), base);
  }
}

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    survey_ = replay::BuildReplaySurvey();
    store_ = std::make_unique<ResponseStore>(survey_.questions,
                                             dir_ / "responses.log");
    SurveyServerConfig c;
    c.admin_token = "secret";
    c.name_a = "dropout";
    c.name_b = "concat";
    server_ = std::make_unique<SurveyServer>(*store_, c);
    port_ = server_->Start();
  }
  void TearDown() override { server_->Stop(); }

  httplib::Client Client() { return httplib::Client("127.0.0.1", port_); }

  TempDir dir_;
  replay::Survey survey_;
  std::unique_ptr<ResponseStore> store_;
  std::unique_ptr<SurveyServer> server_;
  int port_ = 0;
};

TEST_F(ServerTest, Health) {
  auto res = Client().Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["status"], "ok");
}

TEST_F(ServerTest, SurveyHidesSources) {
  auto res = Client().Get("/survey");
  ASSERT_TRUE(res);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_FALSE(j["respondent"].get<std::string>().empty());
  EXPECT_EQ(j["questions"].size(), 60u);
  EXPECT_EQ(res->body.find("sources"), std::string::npos);
  auto second = Client().Get("/survey");
  EXPECT_NE(nlohmann::json::parse(second->body)["respondent"], j["respondent"]);
}

TEST_F(ServerTest, ResponseLifecycle) {
  auto cli = Client();
  const std::string token =
      nlohmann::json::parse(cli.Get("/survey")->body)["respondent"];
  auto post = [&](const nlohmann::json& body) {
    return cli.Post("/response", body.dump(), "application/json");
  };
  auto ok = post({{"respondent", token}, {"qid", "SWR-01"}, {"choice", 0}});
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(nlohmann::json::parse(ok->body)["stored"], true);
  auto bad_qid = post({{"respondent", token}, {"qid", "NOPE"}, {"choice", 0}});
  EXPECT_EQ(bad_qid->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad_qid->body)["error"], "UnknownQuestion");
  auto bad_idx = post({{"respondent", token}, {"qid", "SWR-01"}, {"choice", 7}});
  EXPECT_EQ(bad_idx->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad_idx->body)["error"], "IndexOutOfRange");
  auto stranger = post({{"respondent", "forged"}, {"qid", "SWR-01"}, {"choice", 0}});
  EXPECT_EQ(stranger->status, 403);
  auto junk = cli.Post("/response", "{not json", "application/json");
  EXPECT_EQ(junk->status, 400);
  EXPECT_EQ(store_->size(), 1u);
}

TEST_F(ServerTest, AggregateRequiresToken) {
  auto cli = Client();
  EXPECT_EQ(cli.Get("/aggregate")->status, 403);
  EXPECT_EQ(cli.Get("/aggregate?token=wrong")->status, 403);
  auto ok = cli.Get("/aggregate", {{"Authorization", "Bearer secret"}});
  ASSERT_EQ(ok->status, 200);
  const auto j = nlohmann::json::parse(ok->body);
  EXPECT_TRUE(j.contains("aggregate"));
  EXPECT_NE(ok->body.find("sources"), std::string::npos);
  EXPECT_EQ(cli.Get("/aggregate?token=secret")->status, 200);
}

// The published counts come back through the HTTP API.
TEST_F(ServerTest, ReplayThroughHttp) {
  auto cli = Client();
  std::map<std::string, std::string> tokens;
  for (const auto& r : survey_.responses) {
    if (!tokens.count(r.respondent)) {
      tokens[r.respondent] =
          nlohmann::json::parse(cli.Get("/survey")->body)["respondent"];
    }
    const nlohmann::json body = {{"respondent", tokens[r.respondent]},
                                 {"qid", r.qid},
                                 {"choice", r.choice}};
    auto res = cli.Post("/response", body.dump(), "application/json");
    ASSERT_EQ(res->status, 200) << res->body;
  }
  auto agg = cli.Get("/aggregate?token=secret");
  const auto j = nlohmann::json::parse(agg->body)["aggregate"];
  EXPECT_EQ(j["respondents"], 21);
  EXPECT_EQ(j["total"]["concat"]["count"], 552);
  EXPECT_EQ(j["total"]["gold"]["count"], 416);
  EXPECT_EQ(j["total"]["dropout"]["count"], 439);
  EXPECT_EQ(j["tasks"]["SWR"]["concat"]["count"], 195);
}

}  // namespace
}  // namespace lexsub
