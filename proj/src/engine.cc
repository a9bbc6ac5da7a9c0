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

#include "lexsub/engine.h"

#include <algorithm>
#include <string>
#include <unordered_set>
#include <utility>

#include "lexsub/error.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

constexpr std::string_view kInflections[] = {"s",  "es", "ed", "d",
                                             "ing", "er", "est"};

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// True when `form` is `base` plus one inflectional suffix.
bool InflectsTo(const std::string& base, const std::string& form) {
  if (base.size() < 2 || form.size() <= base.size() - 1) return false;
  const char last = base.back();
  const std::string stem = base.substr(0, base.size() - 1);
  for (std::string_view suf : kInflections) {
    if (form == base + std::string(suf)) return true;
    const bool vowel_initial = IsVowel(suf.front());
    if (last == 'e' && vowel_initial && form == stem + std::string(suf)) {
      return true;
    }
    if (vowel_initial && !IsVowel(last) && last != 'y' && last != 'w' &&
        last != 'x' && std::isalpha(static_cast<unsigned char>(last)) &&
        form == base + last + std::string(suf)) {
      return true;
    }
    if (last == 'y' && suf != "s" && suf != "ing" && suf != "d" &&
        base.size() >= 2 && !IsVowel(base[base.size() - 2]) &&
        form == stem + "i" + std::string(suf)) {
      return true;
    }
  }
  return false;
}

bool IsSubwordFragment(std::string_view s) {
  if (s.empty()) return true;
  if (s.starts_with("##") || s.ends_with("@@")) return true;
  const char f = s.front();
  const char b = s.back();
  return f == '-' || f == '\'' || b == '-';
}

bool IsAlphabeticWord(std::string_view s) {
  bool has_letter = false;
  for (char32_t c : DecodeUtf8(s)) {
    if (IsLetter(c)) {
      has_letter = true;
    } else if (c != '-' && c != '\'') {
      return false;
    }
  }
  return has_letter;
}

}  // namespace

std::string MaskSentence(const TargetInstance& instance,
                         std::string_view mask_marker) {
  const std::size_t b = ByteOffset(instance.sentence, instance.char_start);
  const std::size_t e = ByteOffset(instance.sentence, instance.char_end);
  std::string out = instance.sentence.substr(0, b);
  out.append(mask_marker);
  out.append(instance.sentence.substr(e));
  return out;
}

Prompt BuildPrompt(const TargetInstance& instance,
                   std::string_view mask_marker, std::string_view separator) {
  if (mask_marker.empty() || separator.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask marker and separator must be non-empty");
  }
  instance.Validate();
  Prompt p;
  p.mask_marker = std::string(mask_marker);
  p.separator = std::string(separator);
  p.text = MaskSentence(instance, mask_marker);
  p.text.append(separator);
  p.text.append(instance.sentence);
  // The marker must not already occur in the sentence itself.
  CheckSingleMask(p.text, mask_marker);
  return p;
}

CandidateList GenerateCandidates(const TargetInstance& instance,
                                 const FillMaskBackend& backend, int k_raw) {
  if (k_raw < 1) throw Error(ErrorCode::kInvalidArgument, "k_raw < 1");
  const BackendDescriptor& d = backend.descriptor();
  const Prompt prompt = BuildPrompt(instance, d.mask_marker, d.separator);
  const auto predictions = backend.FillMask(prompt.text, k_raw);
  CandidateList out;
  out.instance_id = instance.id;
  int rank = 1;
  for (const TokenPrediction& p : predictions) {
    Candidate c;
    c.surface = StripWhitespaceMarkers(p.token);
    c.score = p.logprob;
    c.rank = rank++;
    out.candidates.push_back(std::move(c));
  }
  return out;
}

bool IsInflectionalVariant(std::string_view a, std::string_view b) {
  const std::string x = CaseFold(a);
  const std::string y = CaseFold(b);
  if (x == y) return false;
  return InflectsTo(x, y) || InflectsTo(y, x);
}

bool IsMorphVariant(std::string_view a, std::string_view b,
                    const Lexicon* lexicon) {
  const std::string x = CaseFold(a);
  const std::string y = CaseFold(b);
  if (x == y || x.empty() || y.empty()) return false;
  if (IsInflectionalVariant(x, y)) return true;
  if (lexicon == nullptr) return false;
  const auto lx = lexicon->LemmatizeAnyPos(x);
  if (lx.empty()) return false;
  const auto ly = lexicon->LemmatizeAnyPos(y);
  return std::any_of(lx.begin(), lx.end(),
                     [&](const std::string& l) { return ly.contains(l); });
}

CandidateList Postprocess(const CandidateList& candidates,
                          const TargetInstance& instance,
                          const Lexicon* lexicon,
                          const PostprocessOptions& options) {
  if (options.max_out < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_out < 1");
  }
  CandidateList out = candidates;
  const std::string target_surface = CaseFold(instance.surface);
  const std::string target_lemma = CaseFold(instance.lemma);

  auto remove = [](Candidate& c, RemovalReason why) {
    c.removed_by = why;
    c.rank = 0;
  };

  // (1) fragments and non-words
  for (Candidate& c : out.candidates) {
    if (!c.survives()) continue;
    if (IsSubwordFragment(c.surface)) {
      remove(c, RemovalReason::kSubword);
    } else if (!IsAlphabeticWord(c.surface)) {
      remove(c, RemovalReason::kNonAlpha);
    }
  }
  // (2) case-folded duplicates; input order is score order. Removed
  // candidates keep their original surface for audit output.
  std::unordered_set<std::string> seen;
  for (Candidate& c : out.candidates) {
    if (!c.survives()) continue;
    if (!seen.insert(CaseFold(c.surface)).second) {
      remove(c, RemovalReason::kDuplicate);
    }
  }
  // (3) the target itself, (4) its inflections or shared lemmas
  for (Candidate& c : out.candidates) {
    if (!c.survives()) continue;
    const std::string folded = CaseFold(c.surface);
    if (folded == target_surface || folded == target_lemma) {
      remove(c, RemovalReason::kSameAsTarget);
    } else if (IsMorphVariant(folded, target_surface, lexicon) ||
               IsMorphVariant(folded, target_lemma, lexicon)) {
      remove(c, RemovalReason::kMorphVariant);
    }
  }
  // (5) lexicon relations
  if (lexicon != nullptr && !options.excluded_relations.empty()) {
    std::vector<std::string> survivors;
    for (const Candidate& c : out.candidates) {
      if (c.survives()) survivors.push_back(CaseFold(c.surface));
    }
    const FilterResult filtered = lexicon->FilterCandidates(
        instance, survivors, options.excluded_relations);
    std::unordered_set<std::string> dropped;
    for (const auto& [surface, rel] : filtered.removed) dropped.insert(surface);
    for (Candidate& c : out.candidates) {
      if (c.survives() && dropped.contains(CaseFold(c.surface))) {
        remove(c, RemovalReason::kLexiconRelation);
      }
    }
  }
  // Truncate survivors after filtering and re-rank.
  std::vector<Candidate> kept;
  kept.reserve(out.candidates.size());
  int rank = 0;
  for (Candidate& c : out.candidates) {
    if (c.survives()) {
      if (rank == options.max_out) continue;
      c.surface = CaseFold(c.surface);
      c.rank = ++rank;
    }
    kept.push_back(std::move(c));
  }
  out.candidates = std::move(kept);
  return out;
}

SubstitutionEngine::SubstitutionEngine(const FillMaskBackend& backend,
                                       const Lexicon* lexicon,
                                       EngineOptions options)
    : backend_(backend), lexicon_(lexicon), options_(std::move(options)) {
  backend_.descriptor().Validate();
  if (options_.k_raw < 1 || options_.postprocess.max_out < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_raw and max_out must be >= 1");
  }
}

CandidateList SubstitutionEngine::Substitute(
    const TargetInstance& instance) const {
  return Postprocess(GenerateCandidates(instance, backend_, options_.k_raw),
                     instance, lexicon_, options_.postprocess);
}

}  // namespace lexsub
