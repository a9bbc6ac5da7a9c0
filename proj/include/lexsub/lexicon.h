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

#ifndef LEXSUB_LEXICON_H_
#define LEXSUB_LEXICON_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexsub/types.h"

namespace lexsub {

enum class Relation {
  kSynonym,
  kAntonym,
  kHypernym,
  kHyponym,
  kMeronym,
  kHolonym,
};

inline constexpr std::array<Relation, 6> kAllRelations = {
    Relation::kSynonym,  Relation::kAntonym, Relation::kHypernym,
    Relation::kHyponym,  Relation::kMeronym, Relation::kHolonym};

std::string_view RelationName(Relation r);
Relation RelationFromName(std::string_view name);

// Parses "antonym,synonym,..." (empty string -> empty set).
std::set<Relation> ParseRelationList(std::string_view list);

// Lowercase lemmas per relation, never containing the query lemma.
// Multiword lemmas use spaces.
struct RelationSet {
  std::array<std::set<std::string>, 6> members;

  const std::set<std::string>& operator[](Relation r) const {
    return members[static_cast<std::size_t>(r)];
  }
  std::set<std::string>& operator[](Relation r) {
    return members[static_cast<std::size_t>(r)];
  }
  bool empty() const;
};

struct FilterResult {
  std::vector<std::string> kept;
  // (surface, relation that triggered the removal)
  std::vector<std::pair<std::string, Relation>> removed;
};

// In-memory index of a WordNet-format database (index.*, data.*, *.exc for
// noun, verb, adj, adv). Immutable after Load, so concurrent reads are safe.
class Lexicon {
 public:
  // Throws kMissingFile when any of the twelve files is absent and
  // kParseError (file:line plus the offending line) on malformed input.
  static Lexicon Load(const std::filesystem::path& dir);

  // Number of distinct (lemma, pos) index entries.
  std::size_t entry_count() const { return index_.size(); }
  std::size_t synset_count() const { return synsets_.size(); }

  bool HasLemma(std::string_view lemma, PartOfSpeech pos) const;

  // One-hop relations unioned over every sense of (lemma, pos). Unknown
  // lemmas and kOther yield empty sets.
  RelationSet Relations(std::string_view lemma, PartOfSpeech pos) const;

  // Exception list first, then detachment suffix rules. Only forms that are
  // database lemmas are returned; the surface itself is included when it is
  // one.
  std::set<std::string> Lemmatize(std::string_view surface,
                                  PartOfSpeech pos) const;

  // Union of Lemmatize over the four lexicon classes.
  std::set<std::string> LemmatizeAnyPos(std::string_view surface) const;

  // Removes every survivor whose any-POS lemma set meets one of the
  // excluded relation sets of (target.lemma, target.pos). Order of kept
  // survivors is preserved.
  FilterResult FilterCandidates(const TargetInstance& target,
                                const std::vector<std::string>& survivors,
                                const std::set<Relation>& excluded) const;

 private:
  struct Pointer {
    std::string symbol;
    std::uint32_t target_offset = 0;
    PartOfSpeech target_pos = PartOfSpeech::kOther;
    int source_word = 0;  // 0 = whole synset
    int target_word = 0;
  };
  struct Synset {
    std::vector<std::string> words;  // lowercase, underscores kept
    std::vector<Pointer> pointers;
  };
  using SynsetKey = std::pair<int, std::uint32_t>;  // (pos index, offset)
  struct KeyHash {
    std::size_t operator()(const SynsetKey& k) const {
      return std::hash<std::uint64_t>()(
          (static_cast<std::uint64_t>(k.first) << 32) | k.second);
    }
  };

  const Synset* FindSynset(PartOfSpeech pos, std::uint32_t offset) const;

  std::unordered_map<SynsetKey, Synset, KeyHash> synsets_;
  std::map<std::pair<std::string, PartOfSpeech>, std::vector<std::uint32_t>>
      index_;
  std::array<std::unordered_map<std::string, std::vector<std::string>>, 4>
      exceptions_;
};

}  // namespace lexsub

#endif  // LEXSUB_LEXICON_H_
