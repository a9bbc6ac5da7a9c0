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

#ifndef LEXSUB_BACKENDS_H_
#define LEXSUB_BACKENDS_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexsub {

enum class Capability { kFillMask, kEmbed, kScore };

std::string_view CapabilityName(Capability c);

// Which model backs a run, and how to talk to it. fill_mask descriptors
// must declare the mask marker and the separator placed between the masked
// and original halves of a prompt.
struct BackendDescriptor {
  Capability capability = Capability::kFillMask;
  std::string endpoint;  // base URL or "fixture:<file>"
  std::string mask_marker;
  std::string separator;
  std::string model_id;
  std::optional<std::size_t> dim;  // embed only

  void Validate() const;
};

struct TokenPrediction {
  std::string token;
  double logprob = 0.0;
};

struct ScoreResult {
  double nll_sum = 0.0;
  long token_count = 0;
};

class FillMaskBackend {
 public:
  virtual ~FillMaskBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  // Sorted by non-increasing logprob, at most top_k entries.
  virtual std::vector<TokenPrediction> FillMask(std::string_view text,
                                                int top_k) const = 0;
};

class EmbedBackend {
 public:
  virtual ~EmbedBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  // One unit vector per text, constant dimension.
  virtual std::vector<std::vector<double>> Embed(
      const std::vector<std::string>& texts) const = 0;
};

class ScoreBackend {
 public:
  virtual ~ScoreBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual ScoreResult Score(std::string_view text) const = 0;
};

// Wire protocol. Bodies are UTF-8 JSON:
//   POST /fill-mask {"text","top_k"} -> {"predictions":[{"token","logprob"}]}
//   POST /embed     {"texts":[...]}  -> {"vectors":[[...], ...]}
//   POST /score     {"text"}         -> {"nll_sum","token_count"}
// The parsers below validate a response body and throw kBackendMalformed
// on any violation (kZeroTokens for token_count == 0).
std::string FillMaskRequest(std::string_view text, int top_k);
std::string EmbedRequest(const std::vector<std::string>& texts);
std::string ScoreRequest(std::string_view text);

std::vector<TokenPrediction> ParseFillMaskResponse(std::string_view body,
                                                   int top_k);
std::vector<std::vector<double>> ParseEmbedResponse(
    std::string_view body, std::size_t expected_count,
    std::optional<std::size_t> dim);
ScoreResult ParseScoreResponse(std::string_view body);

// Throws kMaskCountError unless `text` contains `marker` exactly once.
void CheckSingleMask(std::string_view text, std::string_view marker);

// Strips word-initial whitespace markers (U+0120 'Ġ', U+2581 '▁', spaces)
// that byte-level and sentencepiece tokenizers prefix to tokens.
std::string StripWhitespaceMarkers(std::string_view token);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{30};
};

// POSTs JSON to base_url + path. Transport failures and HTTP 503 are
// retried with exponential backoff; exhausting the attempts throws
// kBackendUnavailable. Other non-200 statuses throw kBackendMalformed.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(std::string base_url, RetryPolicy policy = {});

  std::string Post(const std::string& path, const std::string& body) const;
  std::string Get(const std::string& path) const;

  const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
  RetryPolicy policy_;
};

class HttpFillMaskBackend : public FillMaskBackend {
 public:
  HttpFillMaskBackend(BackendDescriptor descriptor, RetryPolicy policy = {});
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<TokenPrediction> FillMask(std::string_view text,
                                        int top_k) const override;

 private:
  BackendDescriptor descriptor_;
  HttpJsonClient client_;
};

class HttpEmbedBackend : public EmbedBackend {
 public:
  HttpEmbedBackend(BackendDescriptor descriptor, RetryPolicy policy = {});
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<std::vector<double>> Embed(
      const std::vector<std::string>& texts) const override;

 private:
  BackendDescriptor descriptor_;
  HttpJsonClient client_;
};

class HttpScoreBackend : public ScoreBackend {
 public:
  HttpScoreBackend(BackendDescriptor descriptor, RetryPolicy policy = {});
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  ScoreResult Score(std::string_view text) const override;

 private:
  BackendDescriptor descriptor_;
  HttpJsonClient client_;
};

// Canned backends read from a line-delimited JSON mapping file. Each line is
// either a descriptor record (no "text") or an entry keyed by exact text:
//   {"capability":"fill_mask","model_id":"m","mask_marker":"<mask>",
//    "separator":" </s></s> "}
//   {"capability":"fill_mask","text":"...","response":{"predictions":[...]}}
//   {"capability":"embed","model_id":"mini","dim":4}
//   {"capability":"embed","model_id":"mini","text":"...",
//    "response":{"vector":[...]}}
//   {"capability":"score","model_id":"gpt2"}
//   {"capability":"score","text":"...",
//    "response":{"nll_sum":1.5,"token_count":3}}
// Responses are validated by the wire parsers at query time. A text with
// no entry throws kBackendUnavailable.
class FixtureBackends {
 public:
  static FixtureBackends Load(const std::filesystem::path& path);

  FixtureBackends(FixtureBackends&&) noexcept;
  FixtureBackends& operator=(FixtureBackends&&) noexcept;
  ~FixtureBackends();

  // nullptr when the file declares no such capability.
  const FillMaskBackend* fill_mask() const;
  const ScoreBackend* scorer() const;
  // In declaration order.
  std::vector<const EmbedBackend*> embedders() const;

 private:
  FixtureBackends();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Assigns every whitespace-delimited token NLL = ln(vocab_size). Text
// without tokens throws kZeroTokens.
class UniformScorer : public ScoreBackend {
 public:
  explicit UniformScorer(double vocab_size);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  ScoreResult Score(std::string_view text) const override;

 private:
  BackendDescriptor descriptor_;
  double vocab_size_;
};

}  // namespace lexsub

#endif  // LEXSUB_BACKENDS_H_
