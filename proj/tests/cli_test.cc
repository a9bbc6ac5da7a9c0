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

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"
#include "lexsub/corpus.h"
#include "lexsub/survey.h"
#include "survey_replay.h"
#include "test_util.h"

namespace lexsub {
namespace {

using ::lexsub::testing::Cli;
using ::lexsub::testing::DataDir;
using ::lexsub::testing::FreePort;
using ::lexsub::testing::MiniWordNet;
using ::lexsub::testing::ReadFile;
using ::lexsub::testing::RunCommand;
using ::lexsub::testing::TempDir;
using ::lexsub::testing::WriteFile;

std::string Q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string Golden(const std::string& name) {
  return Q(DataDir() / "golden" / name);
}

// Imports the golden LS07 fixture into `dir`.
void ImportGolden(const TempDir& dir) {
  const auto r = RunCommand(Cli() + " import ls07 --context " +
                            Golden("ls07.xml") + " --gold " +
                            Golden("ls07.gold") + " --out-dir " +
                            Q(dir / "import"));
  ASSERT_EQ(r.status, 0);
}

TEST(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(RunCommand(Cli() + " --help").status, 0);
  EXPECT_EQ(RunCommand(Cli()).status, 1);
  EXPECT_EQ(RunCommand(Cli() + " bogus").status, 1);
  EXPECT_EQ(RunCommand(Cli() + " eval").status, 1);
}

TEST(CliTest, SubstituteWithFixture) {
  const auto r = RunCommand(
      Cli() + " substitute --sentence 'The food was good and cheap.' "
              "--target good --pos a --fixture " + Golden("fillmask.jsonl") +
      " --lexicon " + Q(MiniWordNet()));
  ASSERT_EQ(r.status, 0) << r.out;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    int rank;
    std::string surface;
    double score;
    ASSERT_TRUE(fields >> rank >> surface >> score) << line;
    EXPECT_EQ(rank, ++n);
    EXPECT_LE(score, 0.0);
  }
  EXPECT_GE(n, 1);
  EXPECT_LE(n, 10);
  EXPECT_NE(r.out.find("1 great "), std::string::npos) << r.out;
}

TEST(CliTest, SubstituteAuditListsRemovals) {
  const auto r = RunCommand(
      Cli() + " substitute --sentence 'The food was good and cheap.' "
              "--target good --pos a --audit --fixture " +
      Golden("fillmask.jsonl") + " --lexicon " + Q(MiniWordNet()));
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("removed"), std::string::npos) << r.out;
}

TEST(CliTest, AmbiguousTargetIsUsageError) {
  const auto r = RunCommand(
      Cli() + " substitute --sentence 'the cat and the dog' --target the "
              "--fixture " + Golden("fillmask.jsonl") + " 2>&1");
  EXPECT_EQ(r.status, 1);
}

TEST(CliTest, UnreachableBackendExitsTwo) {
  const auto r = RunCommand(
      Cli() + " substitute --sentence 'The cat sat.' --target sat "
              "--backend-url http://127.0.0.1:" + std::to_string(FreePort()));
  EXPECT_EQ(r.status, 2);
}

TEST(CliTest, ImportErrors) {
  TempDir dir;
  EXPECT_EQ(RunCommand(Cli() + " import ls07 --context /nonexistent --gold "
                               "/nonexistent --out-dir " + Q(dir.path()))
                .status,
            1);
  EXPECT_EQ(RunCommand(Cli() + " import nope --out-dir " + Q(dir.path()))
                .status,
            1);
}

TEST(CliTest, ImportSwordsMinVote) {
  TempDir dir;
  WriteFile(dir / "s.json",
            R"({"contexts":{"c1":{"context":"A bright day."}},)"
            R"("targets":{"t1":{"context_id":"c1","target":"bright","offset":2,"pos":"ADJ"}},)"
            R"("substitutes":{"s1":{"target_id":"t1","substitute":"sunny"},)"
            R"("s2":{"target_id":"t1","substitute":"clear"}},)"
            R"("substitute_labels":{"s1":["TRUE","TRUE","FALSE","FALSE"],)"
            R"("s2":["TRUE","FALSE","FALSE","FALSE"]}})");
  ASSERT_EQ(RunCommand(Cli() + " import swords --input " + Q(dir / "s.json") +
                       " --min-vote 0.5 --out-dir " + Q(dir / "out"))
                .status,
            0);
  const auto records = ReadCanonical(dir / "out/swords.jsonl");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].gold.size(), 1u);
  EXPECT_TRUE(records[0].gold.Contains("sunny"));
  EXPECT_NE(ReadFile(dir / "out/import_report.kv").find("records=1"),
            std::string::npos);
}

// The golden fixture end to end: import, generate, score.
TEST(CliTest, GoldenEndToEnd) {
  TempDir dir;
  ImportGolden(dir);
  const auto r = RunCommand(
      Cli() + " eval --canonical " + Q(dir / "import/ls07.jsonl") +
      " --generate --fixture " + Golden("fillmask.jsonl") + " --lexicon " +
      Q(MiniWordNet()) + " --out-dir " + Q(dir / "eval"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(ReadFile(dir / "eval/metrics.kv"),
            ReadFile(DataDir() / "golden/expected_metrics.kv"));
  EXPECT_EQ(ReadFile(dir / "eval/predictions.jsonl"),
            ReadFile(DataDir() / "golden/expected_predictions.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval/metrics.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "eval/manifest.toml"));
}

TEST(CliTest, JobsDoNotChangeOutput) {
  TempDir dir;
  ImportGolden(dir);
  for (const char* jobs : {"1", "4"}) {
    ASSERT_EQ(RunCommand(Cli() + " eval --canonical " +
                         Q(dir / "import/ls07.jsonl") +
                         " --generate --fixture " + Golden("fillmask.jsonl") +
                         " --lexicon " + Q(MiniWordNet()) + " --jobs " + jobs +
                         " --out-dir " + Q(dir / (std::string("j") + jobs)))
                  .status,
              0);
  }
  EXPECT_EQ(ReadFile(dir / "j1/predictions.jsonl"),
            ReadFile(dir / "j4/predictions.jsonl"));
  EXPECT_EQ(ReadFile(dir / "j1/metrics.kv"), ReadFile(dir / "j4/metrics.kv"));
}

TEST(CliTest, ManifestReRuns) {
  TempDir dir;
  ImportGolden(dir);
  ASSERT_EQ(RunCommand(Cli() + " eval --canonical " +
                       Q(dir / "import/ls07.jsonl") + " --predictions " +
                       Golden("expected_predictions.jsonl") + " --out-dir " +
                       Q(dir / "a"))
                .status,
            0);
  const std::string first = ReadFile(dir / "a/metrics.kv");
  std::filesystem::remove(dir / "a/metrics.kv");
  ASSERT_EQ(RunCommand(Cli() + " --config " + Q(dir / "a/manifest.toml")).status,
            0);
  EXPECT_EQ(ReadFile(dir / "a/metrics.kv"), first);
}

TEST(CliTest, EvalMissingIdsScoredUnanswered) {
  TempDir dir;
  ImportGolden(dir);
  WriteFile(dir / "p.jsonl", "{\"id\":\"1\",\"substitutes\":[\"tasty\"]}\n");
  ASSERT_EQ(RunCommand(Cli() + " eval --canonical " +
                       Q(dir / "import/ls07.jsonl") + " --predictions " +
                       Q(dir / "p.jsonl") + " --out-dir " + Q(dir / "e"))
                .status,
            0);
  const std::string kv = ReadFile(dir / "e/metrics.kv");
  EXPECT_NE(kv.find("n_instances=25"), std::string::npos);
  EXPECT_NE(kv.find("n_unanswered=24"), std::string::npos);
}

TEST(CliTest, PerturbIsDeterministic) {
  TempDir dir;
  const std::vector<std::pair<std::string, std::vector<std::string>>> docs = {
      {"The food was good and cheap.", {"The", "food", "was", "good", "and", "cheap"}},
      {"She was happy today.", {"She", "was", "happy", "today"}}};
  // One fixture entry per maskable word of each document.
  std::string fixture =
      "{\"capability\": \"fill_mask\", \"model_id\": \"perturb\", "
      "\"mask_marker\": \"<mask>\", \"separator\": \" </s></s> \"}\n";
  std::string text;
  for (const auto& [doc, words] : docs) {
    text += doc + "\n";
    for (const std::string& w : words) {
      std::string masked = doc;
      masked.replace(masked.find(w), w.size(), "<mask>");
      fixture += "{\"capability\": \"fill_mask\", \"text\": \"" + masked +
                 " </s></s> " + doc +
                 "\", \"response\": {\"predictions\": [{\"token\": \"stone\", "
                 "\"logprob\": -0.1}, {\"token\": \"river\", \"logprob\": -0.2}]}}\n";
    }
  }
  WriteFile(dir / "fixture.jsonl", fixture);
  WriteFile(dir / "docs.txt", text);
  for (const char* out : {"p1", "p2"}) {
    ASSERT_EQ(RunCommand(Cli() + " perturb --input " + Q(dir / "docs.txt") +
                         " --fraction 0.5 --seed 7 --fixture " +
                         Q(dir / "fixture.jsonl") + " --out-dir " +
                         Q(dir / out))
                  .status,
              0);
  }
  EXPECT_NE(ReadFile(dir / "p1/perturbed.txt"), text);
  EXPECT_EQ(ReadFile(dir / "p1/perturbed.txt"),
            ReadFile(dir / "p2/perturbed.txt"));
  EXPECT_EQ(ReadFile(dir / "p1/perturb_manifest.tsv"),
            ReadFile(dir / "p2/perturb_manifest.tsv"));
}

TEST(CliTest, PerplexityUniform) {
  TempDir dir;
  ImportGolden(dir);
  ASSERT_EQ(RunCommand(Cli() + " perplexity --canonical " +
                       Q(dir / "import/ls07.jsonl") + " --predictions " +
                       Golden("expected_predictions.jsonl") +
                       " --uniform-vocab 1000 --out-dir " + Q(dir / "pp"))
                .status,
            0);
  const std::string kv = ReadFile(dir / "pp/perplexity.kv");
  EXPECT_NE(kv.find("baseline=1000.00"), std::string::npos) << kv;
  EXPECT_NE(kv.find("top10=1000.00"), std::string::npos) << kv;
}

TEST(CliTest, SurveyExport) {
  TempDir dir;
  const auto s = replay::BuildReplaySurvey();
  WriteFile(dir / "questions.json", QuestionsToJson(s.questions, true));
  WriteFile(dir / "empty.log", "");
  ASSERT_EQ(RunCommand(Cli() + " survey export --questions " +
                       Q(dir / "questions.json") + " --log " +
                       Q(dir / "empty.log") + " --out-dir " + Q(dir / "zero"))
                .status,
            0);
  const auto zero = nlohmann::json::parse(ReadFile(dir / "zero/aggregate.json"));
  EXPECT_EQ(zero["respondents"], 0);

  std::string log;
  for (const auto& r : s.responses) log += ResponseToJson(r) + "\n";
  WriteFile(dir / "responses.log", log);
  ASSERT_EQ(RunCommand(Cli() + " survey export --questions " +
                       Q(dir / "questions.json") + " --log " +
                       Q(dir / "responses.log") +
                       " --name-a dropout --name-b concat --out-dir " +
                       Q(dir / "agg"))
                .status,
            0);
  const auto agg = nlohmann::json::parse(ReadFile(dir / "agg/aggregate.json"));
  EXPECT_EQ(agg["total"]["concat"]["count"], 552);
  EXPECT_NE(ReadFile(dir / "agg/aggregate.txt").find("43.81%"),
            std::string::npos);
}

TEST(CliTest, SurveyServeHealth) {
  TempDir dir;
  const auto s = replay::BuildReplaySurvey();
  WriteFile(dir / "questions.json", QuestionsToJson(s.questions, true));
  const int port = FreePort();
  const std::vector<std::string> args = {
      Cli(),         "survey",      "serve",
      "--questions", (dir / "questions.json").string(),
      "--port",      std::to_string(port),
      "--admin-token", "t",
      "--out-dir",   (dir / "srv").string()};
  const std::string log = (dir / "serve.log").string();
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    dup2(fd, STDOUT_FILENO);
    dup2(fd, STDERR_FILENO);
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(argv[0], argv.data());
    _exit(127);
  }
  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(1, 0);
  cli.set_read_timeout(5, 0);
  bool healthy = false;
  for (int i = 0; i < 100 && !healthy; ++i) {
    auto res = cli.Get("/health");
    healthy = res && res->status == 200;
    if (!healthy) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  if (!healthy) kill(pid, SIGKILL);
  ASSERT_TRUE(healthy) << ReadFile(dir / "serve.log");
  const auto survey = cli.Get("/survey");
  ASSERT_TRUE(survey);
  const std::string token = nlohmann::json::parse(survey->body)["respondent"];
  const nlohmann::json body = {{"respondent", token}, {"qid", "SWR-01"},
                               {"choice", 0}};
  const auto posted = cli.Post("/response", body.dump(), "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 200);
  kill(pid, SIGTERM);
  int status = 0;
  pid_t done = 0;
  for (int i = 0; i < 100 && done == 0; ++i) {
    done = waitpid(pid, &status, WNOHANG);
    if (done == 0) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  if (done == 0) {
    kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
  }
  ASSERT_EQ(done, pid) << "server did not exit";
  EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
  ResponseStore reopened(s.questions, dir / "srv/responses.log");
  EXPECT_EQ(reopened.size(), 1u);
}

}  // namespace
}  // namespace lexsub
