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

#ifndef LEXSUB_ENGINE_H_
#define LEXSUB_ENGINE_H_

#include <set>
#include <string>
#include <string_view>

#include "lexsub/backends.h"
#include "lexsub/lexicon.h"
#include "lexsub/types.h"

namespace lexsub {

struct Prompt {
  std::string text;
  std::string mask_marker;
  std::string separator;
};

// The masked sentence, then the separator, then the untouched original:
// "The cat <M> on the mat. | The cat sat on the mat.". Whitespace in the
// sentence is kept verbatim on both sides. Throws kOffsetMismatch when the
// instance span does not cover its surface.
Prompt BuildPrompt(const TargetInstance& instance,
                   std::string_view mask_marker, std::string_view separator);

// The sentence with the target span replaced by `mask_marker`.
std::string MaskSentence(const TargetInstance& instance,
                         std::string_view mask_marker);

// Queries the backend with the prompt and maps its top k_raw predictions,
// in backend order, to unfiltered candidates. Whitespace markers are
// stripped from the surfaces.
CandidateList GenerateCandidates(const TargetInstance& instance,
                                 const FillMaskBackend& backend, int k_raw);

// True when one surface is the other plus an inflectional suffix
// (s, es, ed, d, ing, er, est), allowing for a dropped final e, a doubled
// final consonant, and y -> i. Both inputs are case-folded first.
bool IsInflectionalVariant(std::string_view a, std::string_view b);

// IsInflectionalVariant, or (with a lexicon) any-POS lemma sets that meet.
bool IsMorphVariant(std::string_view a, std::string_view b,
                    const Lexicon* lexicon);

struct PostprocessOptions {
  int max_out = 10;
  std::set<Relation> excluded_relations = {Relation::kAntonym};
};

// Filters survivors in this order: subword fragments and non-alphabetic
// surfaces, case-folded duplicates (first, i.e. highest-scoring, wins),
// the target itself (surface or lemma), morphological variants of the
// target, then lexicon relations. Survivors are lowercased, truncated to
// max_out and re-ranked 1..n; removed candidates stay in the list with
// their reason. Candidates already removed on input are left untouched,
// so the function is idempotent. `lexicon` may be null, which disables
// lemma matching and relation filtering.
CandidateList Postprocess(const CandidateList& candidates,
                          const TargetInstance& instance,
                          const Lexicon* lexicon,
                          const PostprocessOptions& options);

struct EngineOptions {
  int k_raw = 30;
  PostprocessOptions postprocess;
};

// Generate + postprocess against a fixed backend and lexicon. Holds
// references only; the backend and lexicon must outlive the engine.
class SubstitutionEngine {
 public:
  SubstitutionEngine(const FillMaskBackend& backend, const Lexicon* lexicon,
                     EngineOptions options = {});

  CandidateList Substitute(const TargetInstance& instance) const;

  const EngineOptions& options() const { return options_; }
  const FillMaskBackend& backend() const { return backend_; }

 private:
  const FillMaskBackend& backend_;
  const Lexicon* lexicon_;
  EngineOptions options_;
};

}  // namespace lexsub

#endif  // LEXSUB_ENGINE_H_
