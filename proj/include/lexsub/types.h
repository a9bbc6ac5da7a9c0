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

#ifndef LEXSUB_TYPES_H_
#define LEXSUB_TYPES_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexsub {

enum class PartOfSpeech { kNoun, kVerb, kAdj, kAdv, kOther };

// "noun", "verb", "adj", "adv", "other".
std::string_view PosName(PartOfSpeech pos);
PartOfSpeech PosFromName(std::string_view name);

// Maps benchmark POS tags onto the four lexicon classes: n -> noun,
// v -> verb, a/j -> adj, r -> adv. Penn-style (NN, VBD, JJR, RB) and
// universal (NOUN, VERB, ADJ, ADV) tags are accepted too. Anything else
// is kOther.
PartOfSpeech PosFromTag(std::string_view tag);

// One sentence with one marked target word. Offsets count code points.
struct TargetInstance {
  std::string id;
  std::string sentence;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string surface;
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::kOther;

  // Throws kOffsetMismatch when the span does not cover `surface` exactly,
  // and kInvalidArgument for an empty span or a surface with whitespace.
  void Validate() const;
};

// Locates `word` in `sentence` and builds a validated instance. Throws
// kInvalidArgument when the word occurs zero or several times; the message
// lists every occurrence's code point offset.
TargetInstance MakeInstance(std::string id, std::string sentence,
                            std::string_view word, PartOfSpeech pos,
                            std::string lemma = {});

enum class RemovalReason {
  kSubword,
  kNonAlpha,
  kDuplicate,
  kSameAsTarget,
  kMorphVariant,
  kLexiconRelation,
};

std::string_view RemovalReasonName(RemovalReason reason);

struct Candidate {
  std::string surface;
  double score = 0.0;  // natural-log probability, <= 0
  int rank = 0;        // 1-based among survivors, 0 when removed
  std::optional<RemovalReason> removed_by;

  bool survives() const { return !removed_by.has_value(); }
};

struct CandidateList {
  std::string instance_id;
  std::vector<Candidate> candidates;

  std::vector<std::string> Survivors() const;
};

}  // namespace lexsub

#endif  // LEXSUB_TYPES_H_
