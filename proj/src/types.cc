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

#include "lexsub/types.h"

#include <string>

#include "lexsub/error.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

// True when the byte range is not glued to a letter on either side.
bool IsWordBoundary(std::string_view text, std::size_t begin,
                    std::size_t end) {
  if (begin > 0) {
    std::size_t b = begin - 1;
    while (b > 0 && (static_cast<unsigned char>(text[b]) & 0xC0) == 0x80) --b;
    const auto before = DecodeUtf8(text.substr(b, begin - b));
    if (!before.empty() && IsLetter(before.back())) return false;
  }
  if (end < text.size()) {
    const auto after = DecodeUtf8(text.substr(end, 4));
    if (!after.empty() && IsLetter(after.front())) return false;
  }
  return true;
}

}  // namespace

std::string_view PosName(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun:
      return "noun";
    case PartOfSpeech::kVerb:
      return "verb";
    case PartOfSpeech::kAdj:
      return "adj";
    case PartOfSpeech::kAdv:
      return "adv";
    case PartOfSpeech::kOther:
      return "other";
  }
  return "other";
}

PartOfSpeech PosFromName(std::string_view name) {
  if (name == "noun") return PartOfSpeech::kNoun;
  if (name == "verb") return PartOfSpeech::kVerb;
  if (name == "adj") return PartOfSpeech::kAdj;
  if (name == "adv") return PartOfSpeech::kAdv;
  if (name == "other") return PartOfSpeech::kOther;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown part of speech '" + std::string(name) + "'");
}

PartOfSpeech PosFromTag(std::string_view tag) {
  const std::string t = CaseFold(tag);
  if (t == "n" || t == "noun" || t.starts_with("nn")) return PartOfSpeech::kNoun;
  if (t == "v" || t == "verb" || t.starts_with("vb")) return PartOfSpeech::kVerb;
  if (t == "a" || t == "j" || t == "s" || t == "adj" || t.starts_with("jj"))
    return PartOfSpeech::kAdj;
  if (t == "r" || t == "adv" || t.starts_with("rb")) return PartOfSpeech::kAdv;
  return PartOfSpeech::kOther;
}

void TargetInstance::Validate() const {
  if (char_start >= char_end) {
    throw Error(ErrorCode::kInvalidArgument,
                "instance " + id + ": empty target span");
  }
  if (surface.empty() || ContainsWhitespace(surface)) {
    throw Error(ErrorCode::kInvalidArgument,
                "instance " + id + ": target surface '" + surface +
                    "' is empty or contains whitespace");
  }
  if (char_end > CodePointCount(sentence) ||
      CodePointSubstr(sentence, char_start, char_end) != surface) {
    throw Error(ErrorCode::kOffsetMismatch,
                "instance " + id + ": span [" + std::to_string(char_start) +
                    ", " + std::to_string(char_end) +
                    ") does not cover '" + surface + "'");
  }
}

TargetInstance MakeInstance(std::string id, std::string sentence,
                            std::string_view word, PartOfSpeech pos,
                            std::string lemma) {
  if (word.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty target word");
  }
  std::vector<std::size_t> hits;
  for (std::size_t at = sentence.find(word); at != std::string::npos;
       at = sentence.find(word, at + 1)) {
    if (IsWordBoundary(sentence, at, at + word.size())) hits.push_back(at);
  }
  if (hits.size() != 1) {
    std::string msg = "target '" + std::string(word) + "' occurs " +
                      std::to_string(hits.size()) + " times";
    if (!hits.empty()) {
      msg += " at code point offsets";
      for (std::size_t b : hits) {
        msg += " " + std::to_string(
                         CodePointCount(std::string_view(sentence).substr(0, b)));
      }
      msg += "; pass an explicit span";
    }
    throw Error(ErrorCode::kInvalidArgument, msg);
  }
  TargetInstance inst;
  inst.id = std::move(id);
  inst.char_start =
      CodePointCount(std::string_view(sentence).substr(0, hits[0]));
  inst.char_end = inst.char_start + CodePointCount(word);
  inst.sentence = std::move(sentence);
  inst.surface = std::string(word);
  inst.lemma = lemma.empty() ? CaseFold(word) : CaseFold(lemma);
  inst.pos = pos;
  inst.Validate();
  return inst;
}

std::string_view RemovalReasonName(RemovalReason reason) {
  switch (reason) {
    case RemovalReason::kSubword:
      return "subword";
    case RemovalReason::kNonAlpha:
      return "non_alpha";
    case RemovalReason::kDuplicate:
      return "duplicate";
    case RemovalReason::kSameAsTarget:
      return "same_as_target";
    case RemovalReason::kMorphVariant:
      return "morph_variant";
    case RemovalReason::kLexiconRelation:
      return "lexicon_relation";
  }
  return "unknown";
}

std::vector<std::string> CandidateList::Survivors() const {
  std::vector<std::string> out;
  for (const Candidate& c : candidates) {
    if (c.survives()) out.push_back(c.surface);
  }
  return out;
}

}  // namespace lexsub
