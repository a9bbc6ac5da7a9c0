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

#include <cmath>
#include <fstream>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "lexsub/error.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kBackendMalformed, what);
}

json ParseBody(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    Malformed("response is not a JSON object");
  }
  return j;
}

double FiniteNumber(const json& v, const char* field) {
  if (!v.is_number()) Malformed(std::string(field) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) Malformed(std::string(field) + " is not finite");
  return d;
}

std::vector<TokenPrediction> ValidatePredictions(const json& j, int top_k,
                                                 bool truncate) {
  if (!j.contains("predictions") || !j["predictions"].is_array()) {
    Malformed("missing predictions array");
  }
  const json& arr = j["predictions"];
  std::vector<TokenPrediction> out;
  for (const json& p : arr) {
    if (truncate && static_cast<int>(out.size()) == top_k) break;
    if (!p.is_object() || !p.contains("token") || !p["token"].is_string() ||
        !p.contains("logprob")) {
      Malformed("prediction entry lacks token/logprob");
    }
    TokenPrediction tp;
    tp.token = p["token"].get<std::string>();
    tp.logprob = FiniteNumber(p["logprob"], "logprob");
    if (tp.logprob > 0.0) {
      Malformed("logprob " + std::to_string(tp.logprob) + " is positive");
    }
    if (!out.empty() && tp.logprob > out.back().logprob) {
      Malformed("predictions not sorted by non-increasing logprob");
    }
    out.push_back(std::move(tp));
  }
  if (static_cast<int>(out.size()) > top_k) {
    Malformed("received " + std::to_string(out.size()) +
              " predictions for top_k " + std::to_string(top_k));
  }
  return out;
}

std::vector<double> ValidateVector(const json& v,
                                   std::optional<std::size_t> dim) {
  if (!v.is_array()) Malformed("vector is not an array");
  std::vector<double> out;
  out.reserve(v.size());
  double norm = 0.0;
  for (const json& x : v) {
    out.push_back(FiniteNumber(x, "vector component"));
    norm += out.back() * out.back();
  }
  if (dim && out.size() != *dim) {
    Malformed("vector has dimension " + std::to_string(out.size()) +
              ", expected " + std::to_string(*dim));
  }
  if (out.empty()) Malformed("empty vector");
  if (std::abs(std::sqrt(norm) - 1.0) > 1e-6) {
    Malformed("vector is not unit length (norm " +
              std::to_string(std::sqrt(norm)) + ")");
  }
  return out;
}

ScoreResult ValidateScore(const json& j) {
  if (!j.contains("nll_sum") || !j.contains("token_count")) {
    Malformed("missing nll_sum/token_count");
  }
  ScoreResult r;
  r.nll_sum = FiniteNumber(j["nll_sum"], "nll_sum");
  if (r.nll_sum < 0.0) Malformed("negative nll_sum");
  const json& tc = j["token_count"];
  if (!tc.is_number_integer()) Malformed("token_count is not an integer");
  r.token_count = tc.get<long>();
  if (r.token_count < 0) Malformed("negative token_count");
  if (r.token_count == 0) throw Error(ErrorCode::kZeroTokens, "token_count 0");
  return r;
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl SplitUrl(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') {
      out.prefix.pop_back();
    }
  }
  return out;
}

}  // namespace

std::string_view CapabilityName(Capability c) {
  switch (c) {
    case Capability::kFillMask:
      return "fill_mask";
    case Capability::kEmbed:
      return "embed";
    case Capability::kScore:
      return "score";
  }
  return "unknown";
}

void BackendDescriptor::Validate() const {
  if (capability == Capability::kFillMask &&
      (mask_marker.empty() || separator.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "fill_mask backend '" + model_id +
                    "' must declare mask_marker and separator");
  }
}

std::string FillMaskRequest(std::string_view text, int top_k) {
  return json{{"text", text}, {"top_k", top_k}}.dump();
}

std::string EmbedRequest(const std::vector<std::string>& texts) {
  return json{{"texts", texts}}.dump();
}

std::string ScoreRequest(std::string_view text) {
  return json{{"text", text}}.dump();
}

std::vector<TokenPrediction> ParseFillMaskResponse(std::string_view body,
                                                   int top_k) {
  return ValidatePredictions(ParseBody(body), top_k, /*truncate=*/false);
}

std::vector<std::vector<double>> ParseEmbedResponse(
    std::string_view body, std::size_t expected_count,
    std::optional<std::size_t> dim) {
  const json j = ParseBody(body);
  if (!j.contains("vectors") || !j["vectors"].is_array()) {
    Malformed("missing vectors array");
  }
  if (j["vectors"].size() != expected_count) {
    Malformed("expected " + std::to_string(expected_count) + " vectors, got " +
              std::to_string(j["vectors"].size()));
  }
  std::vector<std::vector<double>> out;
  for (const json& v : j["vectors"]) {
    out.push_back(ValidateVector(v, dim));
    if (!dim) dim = out.back().size();
  }
  return out;
}

ScoreResult ParseScoreResponse(std::string_view body) {
  return ValidateScore(ParseBody(body));
}

void CheckSingleMask(std::string_view text, std::string_view marker) {
  if (marker.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty mask marker");
  }
  std::size_t count = 0;
  for (auto at = text.find(marker); at != std::string_view::npos;
       at = text.find(marker, at + marker.size())) {
    ++count;
  }
  if (count != 1) {
    throw Error(ErrorCode::kMaskCountError,
                "expected exactly one '" + std::string(marker) + "', found " +
                    std::to_string(count));
  }
}

std::string StripWhitespaceMarkers(std::string_view token) {
  static constexpr std::string_view kByteLevelSpace = "\xC4\xA0";  // U+0120
  static constexpr std::string_view kSentencePiece = "\xE2\x96\x81";  // U+2581
  for (;;) {
    if (token.starts_with(kByteLevelSpace)) {
      token.remove_prefix(kByteLevelSpace.size());
    } else if (token.starts_with(kSentencePiece)) {
      token.remove_prefix(kSentencePiece.size());
    } else if (!token.empty() &&
               std::isspace(static_cast<unsigned char>(token.front()))) {
      token.remove_prefix(1);
    } else {
      break;
    }
  }
  while (!token.empty() &&
         std::isspace(static_cast<unsigned char>(token.back()))) {
    token.remove_suffix(1);
  }
  return std::string(token);
}

HttpJsonClient::HttpJsonClient(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(policy) {}

namespace {

std::string Send(const std::string& base_url, const RetryPolicy& policy,
                 const std::string& path, const std::string* body) {
  const ParsedUrl url = SplitUrl(base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(policy.timeout);
  client.set_read_timeout(policy.timeout);
  client.set_write_timeout(policy.timeout);
  const std::string full_path = url.prefix + path;

  auto backoff = policy.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
    auto res = body ? client.Post(full_path, *body, "application/json")
                    : client.Get(full_path);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      return res->body;
    } else if (res->status == 503) {
      last_error = "HTTP 503";
    } else if (res->status >= 500) {
      throw Error(ErrorCode::kBackendUnavailable,
                  base_url + path + ": HTTP " + std::to_string(res->status));
    } else {
      throw Error(ErrorCode::kBackendMalformed,
                  base_url + path + ": HTTP " + std::to_string(res->status) +
                      " " + res->body);
    }
    if (attempt < policy.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorCode::kBackendUnavailable,
              base_url + path + " after " + std::to_string(policy.attempts) +
                  " attempts: " + last_error);
}

}  // namespace

std::string HttpJsonClient::Post(const std::string& path,
                                 const std::string& body) const {
  return Send(base_url_, policy_, path, &body);
}

std::string HttpJsonClient::Get(const std::string& path) const {
  return Send(base_url_, policy_, path, nullptr);
}

HttpFillMaskBackend::HttpFillMaskBackend(BackendDescriptor descriptor,
                                         RetryPolicy policy)
    : descriptor_(std::move(descriptor)),
      client_(descriptor_.endpoint, policy) {
  descriptor_.capability = Capability::kFillMask;
  descriptor_.Validate();
}

std::vector<TokenPrediction> HttpFillMaskBackend::FillMask(
    std::string_view text, int top_k) const {
  CheckSingleMask(text, descriptor_.mask_marker);
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k < 1");
  return ParseFillMaskResponse(
      client_.Post("/fill-mask", FillMaskRequest(text, top_k)), top_k);
}

HttpEmbedBackend::HttpEmbedBackend(BackendDescriptor descriptor,
                                   RetryPolicy policy)
    : descriptor_(std::move(descriptor)),
      client_(descriptor_.endpoint, policy) {
  descriptor_.capability = Capability::kEmbed;
}

std::vector<std::vector<double>> HttpEmbedBackend::Embed(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  return ParseEmbedResponse(client_.Post("/embed", EmbedRequest(texts)),
                            texts.size(), descriptor_.dim);
}

HttpScoreBackend::HttpScoreBackend(BackendDescriptor descriptor,
                                   RetryPolicy policy)
    : descriptor_(std::move(descriptor)),
      client_(descriptor_.endpoint, policy) {
  descriptor_.capability = Capability::kScore;
}

ScoreResult HttpScoreBackend::Score(std::string_view text) const {
  if (Trim(text).empty()) {
    throw Error(ErrorCode::kZeroTokens, "empty text");
  }
  return ParseScoreResponse(client_.Post("/score", ScoreRequest(text)));
}

// Fixture backends -----------------------------------------------------------

namespace {

[[noreturn]] void UnknownKey(const BackendDescriptor& d,
                             std::string_view text) {
  throw Error(ErrorCode::kBackendUnavailable,
              "fixture " + std::string(CapabilityName(d.capability)) + " '" +
                  d.model_id + "' has no entry for text '" + std::string(text) +
                  "'");
}

class FixtureFillMask : public FillMaskBackend {
 public:
  explicit FixtureFillMask(BackendDescriptor d) : descriptor_(std::move(d)) {}
  const BackendDescriptor& descriptor() const override { return descriptor_; }

  std::vector<TokenPrediction> FillMask(std::string_view text,
                                        int top_k) const override {
    CheckSingleMask(text, descriptor_.mask_marker);
    if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k < 1");
    const auto it = entries.find(std::string(text));
    if (it == entries.end()) UnknownKey(descriptor_, text);
    // A server answers top_k; the canned list may hold more.
    return ValidatePredictions(it->second, top_k, /*truncate=*/true);
  }

  std::map<std::string, json, std::less<>> entries;

 private:
  BackendDescriptor descriptor_;
};

class FixtureEmbed : public EmbedBackend {
 public:
  explicit FixtureEmbed(BackendDescriptor d) : descriptor_(std::move(d)) {}
  const BackendDescriptor& descriptor() const override { return descriptor_; }

  std::vector<std::vector<double>> Embed(
      const std::vector<std::string>& texts) const override {
    std::vector<std::vector<double>> out;
    for (const std::string& t : texts) {
      const auto it = entries.find(t);
      if (it == entries.end()) UnknownKey(descriptor_, t);
      if (!it->second.contains("vector")) Malformed("fixture entry lacks vector");
      out.push_back(ValidateVector(it->second["vector"], descriptor_.dim));
    }
    return out;
  }

  std::map<std::string, json, std::less<>> entries;

 private:
  BackendDescriptor descriptor_;
};

class FixtureScore : public ScoreBackend {
 public:
  explicit FixtureScore(BackendDescriptor d) : descriptor_(std::move(d)) {}
  const BackendDescriptor& descriptor() const override { return descriptor_; }

  ScoreResult Score(std::string_view text) const override {
    if (Trim(text).empty()) throw Error(ErrorCode::kZeroTokens, "empty text");
    const auto it = entries.find(std::string(text));
    if (it == entries.end()) UnknownKey(descriptor_, text);
    return ValidateScore(it->second);
  }

  std::map<std::string, json, std::less<>> entries;

 private:
  BackendDescriptor descriptor_;
};

}  // namespace

struct FixtureBackends::Impl {
  std::unique_ptr<FixtureFillMask> fill_mask;
  std::unique_ptr<FixtureScore> score;
  std::vector<std::unique_ptr<FixtureEmbed>> embed;
};

FixtureBackends::FixtureBackends() : impl_(std::make_unique<Impl>()) {}
FixtureBackends::FixtureBackends(FixtureBackends&&) noexcept = default;
FixtureBackends& FixtureBackends::operator=(FixtureBackends&&) noexcept =
    default;
FixtureBackends::~FixtureBackends() = default;

FixtureBackends FixtureBackends::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  FixtureBackends fx;
  Impl& impl = *fx.impl_;
  const std::string endpoint = "fixture:" + path.string();

  auto fail = [&](int line_no, const std::string& what) {
    throw Error(ErrorCode::kParseError, path.string() + ":" +
                                            std::to_string(line_no) + ": " +
                                            what);
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() ||
        !rec.contains("capability") || !rec["capability"].is_string()) {
      fail(line_no, "not a fixture record");
    }
    const std::string cap = rec["capability"];
    const std::string model_id = rec.value("model_id", std::string());
    const bool is_entry = rec.contains("text");
    if (is_entry && (!rec["text"].is_string() || !rec.contains("response"))) {
      fail(line_no, "entry needs string text and a response");
    }

    if (cap == "fill_mask") {
      if (!is_entry) {
        BackendDescriptor d;
        d.capability = Capability::kFillMask;
        d.endpoint = endpoint;
        d.model_id = model_id;
        d.mask_marker = rec.value("mask_marker", std::string());
        d.separator = rec.value("separator", std::string());
        d.Validate();
        impl.fill_mask = std::make_unique<FixtureFillMask>(d);
      } else {
        if (!impl.fill_mask) fail(line_no, "fill_mask entry before descriptor");
        impl.fill_mask->entries[rec["text"]] = rec["response"];
      }
    } else if (cap == "embed") {
      if (!is_entry) {
        BackendDescriptor d;
        d.capability = Capability::kEmbed;
        d.endpoint = endpoint;
        d.model_id = model_id;
        if (rec.contains("dim")) d.dim = rec["dim"].get<std::size_t>();
        impl.embed.push_back(std::make_unique<FixtureEmbed>(d));
      } else {
        FixtureEmbed* target = nullptr;
        for (auto& e : impl.embed) {
          if (e->descriptor().model_id == model_id) target = e.get();
        }
        if (!target) fail(line_no, "embed entry for undeclared model");
        target->entries[rec["text"]] = rec["response"];
      }
    } else if (cap == "score") {
      if (!is_entry) {
        BackendDescriptor d;
        d.capability = Capability::kScore;
        d.endpoint = endpoint;
        d.model_id = model_id;
        impl.score = std::make_unique<FixtureScore>(d);
      } else {
        if (!impl.score) fail(line_no, "score entry before descriptor");
        impl.score->entries[rec["text"]] = rec["response"];
      }
    } else {
      fail(line_no, "unknown capability '" + cap + "'");
    }
  }
  return fx;
}

const FillMaskBackend* FixtureBackends::fill_mask() const {
  return impl_->fill_mask.get();
}

const ScoreBackend* FixtureBackends::scorer() const {
  return impl_->score.get();
}

std::vector<const EmbedBackend*> FixtureBackends::embedders() const {
  std::vector<const EmbedBackend*> out;
  for (const auto& e : impl_->embed) out.push_back(e.get());
  return out;
}

UniformScorer::UniformScorer(double vocab_size) : vocab_size_(vocab_size) {
  if (!(vocab_size > 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "vocab_size must exceed 1");
  }
  descriptor_.capability = Capability::kScore;
  descriptor_.endpoint = "fixture:uniform";
  descriptor_.model_id = "uniform-" + std::to_string(vocab_size);
}

ScoreResult UniformScorer::Score(std::string_view text) const {
  const auto tokens = SplitWhitespace(text);
  if (tokens.empty()) throw Error(ErrorCode::kZeroTokens, "no tokens");
  ScoreResult r;
  r.token_count = static_cast<long>(tokens.size());
  r.nll_sum = static_cast<double>(tokens.size()) * std::log(vocab_size_);
  return r;
}

}  // namespace lexsub
