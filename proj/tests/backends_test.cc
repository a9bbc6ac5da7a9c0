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

#include "lexsub/backends.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"
#include "lexsub/error.h"
#include "test_util.h"

namespace lexsub {
namespace {

using ::lexsub::testing::TempDir;
using ::lexsub::testing::WriteFile;

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

TEST(WireTest, FillMaskRoundTrip) {
  const auto req = nlohmann::json::parse(FillMaskRequest("a <mask> b", 5));
  EXPECT_EQ(req["text"], "a <mask> b");
  EXPECT_EQ(req["top_k"], 5);
  const auto preds = ParseFillMaskResponse(
      R"({"predictions":[{"token":"good","logprob":-0.1},)"
      R"({"token":"fine","logprob":-0.5}]})",
      2);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].token, "good");
  EXPECT_DOUBLE_EQ(preds[1].logprob, -0.5);
}

TEST(WireTest, FillMaskViolations) {
  auto parse = [](const char* body, int k) {
    return [=] { ParseFillMaskResponse(body, k); };
  };
  const ErrorCode m = ErrorCode::kBackendMalformed;
  EXPECT_EQ(CodeOf(parse("not json", 1)), m);
  EXPECT_EQ(CodeOf(parse("[]", 1)), m);
  EXPECT_EQ(CodeOf(parse(R"({"predictions":3})", 1)), m);
  EXPECT_EQ(CodeOf(parse(R"({"predictions":[{"token":"a","logprob":"x"}]})",
                         1)),
            m);
  EXPECT_EQ(CodeOf(parse(R"({"predictions":[{"token":"a","logprob":0.5}]})",
                         1)),
            m);
  EXPECT_EQ(CodeOf(parse(R"({"predictions":[{"token":"a","logprob":-2},)"
                         R"({"token":"b","logprob":-1}]})",
                         2)),
            m);
  EXPECT_EQ(CodeOf(parse(R"({"predictions":[{"token":"a","logprob":-1},)"
                         R"({"token":"b","logprob":-2}]})",
                         1)),
            m);
}

TEST(WireTest, Embed) {
  const auto req = nlohmann::json::parse(EmbedRequest({"a", "b"}));
  EXPECT_EQ(req["texts"].size(), 2u);
  const auto v =
      ParseEmbedResponse(R"({"vectors":[[0.6,0.8],[1,0]]})", 2, 2);
  EXPECT_DOUBLE_EQ(v[0][1], 0.8);
  EXPECT_EQ(CodeOf([] { ParseEmbedResponse(R"({"vectors":[[1,0]]})", 2, 2); }),
            ErrorCode::kBackendMalformed);
  EXPECT_EQ(CodeOf([] { ParseEmbedResponse(R"({"vectors":[[1,0]]})", 1, 3); }),
            ErrorCode::kBackendMalformed);
  EXPECT_EQ(CodeOf([] { ParseEmbedResponse(R"({"vectors":[[2,0]]})", 1, 2); }),
            ErrorCode::kBackendMalformed);
}

TEST(WireTest, Score) {
  EXPECT_EQ(nlohmann::json::parse(ScoreRequest("x y"))["text"], "x y");
  const ScoreResult r =
      ParseScoreResponse(R"({"nll_sum":4.5,"token_count":3})");
  EXPECT_DOUBLE_EQ(r.nll_sum, 4.5);
  EXPECT_EQ(r.token_count, 3);
  EXPECT_EQ(CodeOf([] {
              ParseScoreResponse(R"({"nll_sum":0,"token_count":0})");
            }),
            ErrorCode::kZeroTokens);
  EXPECT_EQ(CodeOf([] {
              ParseScoreResponse(R"({"nll_sum":1,"token_count":1.5})");
            }),
            ErrorCode::kBackendMalformed);
  EXPECT_EQ(CodeOf([] {
              ParseScoreResponse(R"({"nll_sum":-1,"token_count":2})");
            }),
            ErrorCode::kBackendMalformed);
}

TEST(WireTest, SingleMask) {
  EXPECT_NO_THROW(CheckSingleMask("a <M> b", "<M>"));
  EXPECT_EQ(CodeOf([] { CheckSingleMask("a b", "<M>"); }),
            ErrorCode::kMaskCountError);
  EXPECT_EQ(CodeOf([] { CheckSingleMask("<M> <M>", "<M>"); }),
            ErrorCode::kMaskCountError);
}

TEST(WireTest, StripMarkers) {
  EXPECT_EQ(StripWhitespaceMarkers("\xC4\xA0good"), "good");
  EXPECT_EQ(StripWhitespaceMarkers("\xE2\x96\x81good"), "good");
  EXPECT_EQ(StripWhitespaceMarkers(" good "), "good");
  EXPECT_EQ(StripWhitespaceMarkers("##ing"), "##ing");
}

TEST(FixtureTest, LoadsAllCapabilities) {
  TempDir dir;
  WriteFile(dir / "f.jsonl",
            R"({"capability":"fill_mask","model_id":"m","mask_marker":"<mask>","separator":" | "}
{"capability":"fill_mask","text":"<mask> | x","response":{"predictions":[{"token":"a","logprob":-0.1},{"token":"b","logprob":-0.2},{"token":"c","logprob":-0.3}]}}
{"capability":"embed","model_id":"e1","dim":2}
{"capability":"embed","model_id":"e1","text":"x","response":{"vector":[0.6,0.8]}}
{"capability":"embed","model_id":"e2","dim":2}
{"capability":"embed","model_id":"e2","text":"x","response":{"vector":[1,0]}}
{"capability":"score","model_id":"s"}
{"capability":"score","text":"x","response":{"nll_sum":1.5,"token_count":3}}
)");
  const FixtureBackends fx = FixtureBackends::Load(dir / "f.jsonl");
  ASSERT_NE(fx.fill_mask(), nullptr);
  EXPECT_EQ(fx.fill_mask()->descriptor().separator, " | ");
  EXPECT_EQ(fx.fill_mask()->FillMask("<mask> | x", 2).size(), 2u);
  EXPECT_EQ(fx.fill_mask()->FillMask("<mask> | x", 10).size(), 3u);
  EXPECT_EQ(CodeOf([&] { fx.fill_mask()->FillMask("<mask> | y", 2); }),
            ErrorCode::kBackendUnavailable);
  const auto emb = fx.embedders();
  ASSERT_EQ(emb.size(), 2u);
  EXPECT_EQ(emb[0]->descriptor().model_id, "e1");
  EXPECT_DOUBLE_EQ(emb[1]->Embed({"x"})[0][0], 1.0);
  ASSERT_NE(fx.scorer(), nullptr);
  EXPECT_EQ(fx.scorer()->Score("x").token_count, 3);
}

TEST(FixtureTest, MissingCapabilityIsNull) {
  TempDir dir;
  WriteFile(dir / "f.jsonl", R"({"capability":"score","model_id":"s"})" "\n");
  const FixtureBackends fx = FixtureBackends::Load(dir / "f.jsonl");
  EXPECT_EQ(fx.fill_mask(), nullptr);
  EXPECT_TRUE(fx.embedders().empty());
}

TEST(FixtureTest, BadFiles) {
  TempDir dir;
  EXPECT_EQ(CodeOf([&] { FixtureBackends::Load(dir / "none.jsonl"); }),
            ErrorCode::kMissingFile);
  WriteFile(dir / "bad.jsonl", "{not json\n");
  EXPECT_EQ(CodeOf([&] { FixtureBackends::Load(dir / "bad.jsonl"); }),
            ErrorCode::kParseError);
}

TEST(UniformScorerTest, PerplexityEqualsVocab) {
  const UniformScorer u(50000);
  const ScoreResult r = u.Score("the  cat sat");
  EXPECT_EQ(r.token_count, 3);
  EXPECT_NEAR(std::exp(r.nll_sum / r.token_count), 50000.0, 1e-6);
  EXPECT_EQ(CodeOf([&] { u.Score("   "); }), ErrorCode::kZeroTokens);
  EXPECT_THROW(UniformScorer(1.0), Error);
}

// Local server speaking the wire protocol.
class FakeServer {
 public:
  FakeServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendDescriptor FillDescriptor(const std::string& url) {
  BackendDescriptor d;
  d.capability = Capability::kFillMask;
  d.endpoint = url;
  d.mask_marker = "<mask>";
  d.separator = " | ";
  d.model_id = "m";
  return d;
}

RetryPolicy FastRetry() {
  RetryPolicy p;
  p.attempts = 3;
  p.initial_backoff = std::chrono::milliseconds(1);
  p.timeout = std::chrono::seconds(2);
  return p;
}

TEST(HttpTest, RetriesOn503ThenSucceeds) {
  std::atomic<int> calls{0};
  FakeServer fake;
  fake.server().Post("/fill-mask", [&](const httplib::Request& req,
                                       httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["text"], "<mask> | x");
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"predictions":[{"token":"Ġfine","logprob":-0.2}]})",
                    "application/json");
  });
  const HttpFillMaskBackend backend(FillDescriptor(fake.url()), FastRetry());
  const auto preds = backend.FillMask("<mask> | x", 5);
  EXPECT_EQ(calls.load(), 3);
  ASSERT_EQ(preds.size(), 1u);
}

TEST(HttpTest, Persistent503IsUnavailable) {
  FakeServer fake;
  fake.server().Post("/fill-mask", [](const httplib::Request&,
                                      httplib::Response& res) {
    res.status = 503;
  });
  const HttpFillMaskBackend backend(FillDescriptor(fake.url()), FastRetry());
  EXPECT_EQ(CodeOf([&] { backend.FillMask("<mask>", 5); }),
            ErrorCode::kBackendUnavailable);
}

TEST(HttpTest, ClientErrorIsMalformed) {
  FakeServer fake;
  fake.server().Post("/score", [](const httplib::Request&,
                                  httplib::Response& res) {
    res.status = 400;
  });
  BackendDescriptor d;
  d.capability = Capability::kScore;
  d.endpoint = fake.url();
  d.model_id = "s";
  const HttpScoreBackend backend(d, FastRetry());
  EXPECT_EQ(CodeOf([&] { backend.Score("x"); }),
            ErrorCode::kBackendMalformed);
}

TEST(HttpTest, UnreachableIsUnavailable) {
  const int port = testing::FreePort();
  const HttpFillMaskBackend backend(
      FillDescriptor("http://127.0.0.1:" + std::to_string(port)), FastRetry());
  EXPECT_EQ(CodeOf([&] { backend.FillMask("<mask>", 5); }),
            ErrorCode::kBackendUnavailable);
}

TEST(HttpTest, EmbedAndScore) {
  FakeServer fake;
  fake.server().Post("/api/embed", [](const httplib::Request& req,
                                      httplib::Response& res) {
    const auto n = nlohmann::json::parse(req.body)["texts"].size();
    nlohmann::json v = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) v.push_back({0.0, 1.0});
    res.set_content(nlohmann::json{{"vectors", v}}.dump(), "application/json");
  });
  fake.server().Post("/api/score", [](const httplib::Request&,
                                      httplib::Response& res) {
    res.set_content(R"({"nll_sum":2.0,"token_count":4})", "application/json");
  });
  BackendDescriptor e;
  e.capability = Capability::kEmbed;
  e.endpoint = fake.url() + "/api/";
  e.model_id = "e";
  e.dim = 2;
  const HttpEmbedBackend embed(e, FastRetry());
  EXPECT_EQ(embed.Embed({"a", "b", "c"}).size(), 3u);
  BackendDescriptor s = e;
  s.capability = Capability::kScore;
  s.dim.reset();
  const HttpScoreBackend score(s, FastRetry());
  EXPECT_EQ(score.Score("a b c d").token_count, 4);
}

}  // namespace
}  // namespace lexsub
