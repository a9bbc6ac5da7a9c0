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

#ifndef LEXSUB_QUALITY_EVAL_H_
#define LEXSUB_QUALITY_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexsub/backends.h"
#include "lexsub/corpus.h"
#include "lexsub/engine.h"
#include "lexsub/types.h"

namespace lexsub {

// The sentence with the target span replaced by `substitute`. When the
// target is the first word of the sentence and starts with an uppercase
// letter, the substitute is capitalized to match. Throws kInvalidArgument
// for an empty substitute.
std::string SubstituteInSentence(const TargetInstance& instance,
                                 std::string_view substitute);

// Cosine of two vectors; 0 when either is all zeros. Clamped to [-1, 1].
double Cosine(const std::vector<double>& a, const std::vector<double>& b);

// Mean cosine between original and substituted sentences, per embedder.
struct SimilarityColumn {
  std::string model_id;
  double gold = 0.0;    // gold substitute
  double system = 0.0;  // system prediction
};

struct SimilarityReport {
  std::string setting;  // "top1" or "random1"
  std::vector<SimilarityColumn> columns;
  double gold_average = 0.0;    // mean of the per-embedder gold means
  double system_average = 0.0;  // mean of the per-embedder system means
  std::size_t n_pairs = 0;      // instances scored
  std::size_t n_skipped = 0;    // instances without predictions

  // Values are shown x100 with two decimals.
  std::string FormatTable() const;
  std::string FormatKeyValues() const;
};

struct SimilarityResult {
  SimilarityReport top1;
  SimilarityReport random1;
};

// Top-1 pairs the heaviest gold substitute (ties: first listed) with
// prediction[0]. Random-1 takes one 64-bit draw per instance, in record
// order, and uses it modulo each list's length, so gold and system get the
// same index. Gold lists are ordered heaviest first. Records with no
// predictions are skipped and counted.
SimilarityResult SimilarityTop1Random1(
    const std::vector<CanonicalRecord>& records,
    const PredictionFile& predictions,
    const std::vector<const EmbedBackend*>& embedders, std::uint64_t seed,
    int jobs = 1);

struct PerturbationConfig {
  double fraction = 0.25;  // in (0, 1]
  std::uint64_t seed = 0;
  // Every whitespace token with a non-empty core is eligible, ignoring the
  // length and stopword rules.
  bool all_tokens = false;
};

// Bundled English stopword list (version 1).
const std::set<std::string>& DefaultStopwords();
inline constexpr int kStopwordListVersion = 1;

// One sampled position.
struct PerturbationEdit {
  std::size_t doc = 0;
  std::size_t token = 0;  // index among whitespace-delimited tokens
  std::string original;   // token core (surrounding punctuation removed)
  std::string replacement;  // equals original when no survivor exists
};

struct PerturbationResult {
  std::vector<std::string> documents;
  std::vector<PerturbationEdit> manifest;  // doc order, then draw order
  std::vector<std::size_t> eligible;       // eligible tokens per document
};

// A token's core is the token with leading and trailing non-letters
// removed. Eligible cores are purely alphabetic, at least three code points
// long, and not stopwords (case-folded).
bool IsEligibleToken(std::string_view core, const std::set<std::string>& stopwords);

// Per document, samples ceil(fraction * n_eligible) eligible positions
// without replacement and replaces each with the engine's top-1 survivor
// for the token in its document. Whitespace and punctuation around the
// token are kept. Sampling is sequential; engine calls run on `jobs`
// threads.
PerturbationResult PerturbCorpus(const std::vector<std::string>& documents,
                                 const SubstitutionEngine& engine,
                                 const PerturbationConfig& config,
                                 const std::set<std::string>& stopwords,
                                 int jobs = 1);

// "# seed=..\tfraction=..\n" then "doc\ttoken\toriginal\treplacement".
std::string ManifestTsv(const PerturbationResult& result,
                        const PerturbationConfig& config);

// exp(nll_sum / token_count). Throws kZeroTokens for token_count < 1.
double SentencePerplexity(const ScoreResult& score);

struct PerplexityInstance {
  std::string id;
  double baseline = 0.0;
  double gold = 0.0;
  double top10 = 0.0;
  double topmatch = 0.0;
  std::vector<std::string> gold_sentences;
  std::vector<std::string> top10_sentences;
  std::vector<std::string> topmatch_sentences;
};

struct PerplexityColumn {
  double mean = 0.0;
  std::size_t n_sentences = 0;
};

struct PerplexityReport {
  PerplexityColumn baseline;
  PerplexityColumn gold;
  PerplexityColumn top10;
  PerplexityColumn topmatch;
  std::size_t n_instances = 0;
  std::size_t n_skipped = 0;  // records without predictions
  std::vector<PerplexityInstance> per_instance;

  std::string FormatTable() const;
  std::string FormatKeyValues() const;
};

// Per instance: the original sentence (baseline), every gold substitute,
// the first ten predictions (Top-10) and the first k predictions with k the
// number of gold entries (Top-Match). Each instance averages its
// sentences' perplexities; columns average instances. Each distinct
// sentence is scored once.
PerplexityReport ComputePerplexity(const std::vector<CanonicalRecord>& records,
                                   const PredictionFile& predictions,
                                   const ScoreBackend& scorer, int jobs = 1);

}  // namespace lexsub

#endif  // LEXSUB_QUALITY_EVAL_H_
