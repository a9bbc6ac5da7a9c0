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

#ifndef LEXSUB_CORPUS_H_
#define LEXSUB_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexsub/types.h"

namespace lexsub {

struct GoldEntry {
  std::string substitute;  // lowercase; may contain spaces
  int weight = 0;          // > 0
};

// Annotator substitutes for one instance. Substitutes are case-folded on
// insertion and duplicates merge by summing weights, so entries stay
// unique. The mode is the single entry with strictly maximal weight.
class GoldSet {
 public:
  GoldSet() = default;
  explicit GoldSet(std::string instance_id) : instance_id_(std::move(instance_id)) {}

  // Throws kInvalidArgument for empty substitutes or weight <= 0.
  void Add(std::string_view substitute, int weight);

  const std::string& instance_id() const { return instance_id_; }
  const std::vector<GoldEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  int total_weight() const { return total_weight_; }
  std::optional<std::string> mode() const;
  // 0 for substitutes outside the set. Input is case-folded.
  int WeightOf(std::string_view substitute) const;
  bool Contains(std::string_view substitute) const {
    return WeightOf(substitute) > 0;
  }
  // Entries sorted by weight, heaviest first; ties keep insertion order.
  std::vector<GoldEntry> ByWeight() const;

  // Copy without multiword entries.
  GoldSet WithoutMultiword() const;

 private:
  std::string instance_id_;
  std::vector<GoldEntry> entries_;
  int total_weight_ = 0;
};

struct CanonicalRecord {
  TargetInstance instance;
  GoldSet gold;
  std::vector<std::string> tags;  // e.g. "short_context"
};

struct ImportReport {
  std::string dataset;
  std::size_t records = 0;
  std::size_t dropped_empty_gold = 0;
  std::size_t dropped_missing_context = 0;  // gold with no context
  std::size_t dropped_missing_gold = 0;     // context with no gold line
  std::size_t dropped_invalid_target = 0;   // e.g. whitespace in the target
  std::size_t short_context = 0;
  std::size_t multiword_gold = 0;
  // (instance id, gold substitute) pairs that look like annotation
  // artifacts, e.g. "@card@ hour period".
  std::vector<std::pair<std::string, std::string>> flagged;

  std::string Summary() const;
  // Stable "key=value" lines.
  std::string KeyValues() const;
};

struct ImportResult {
  std::vector<CanonicalRecord> records;
  ImportReport report;
};

// SemEval-2007 task 10: XML-like contexts with <lexelt item="w.p">,
// <instance id>, <context>..<head>w</head>..</context>; gold lines
// "w.p id :: sub weight;sub weight;". One record per gold line with at
// least one substitute, in gold-file order.
ImportResult ImportLs07(const std::filesystem::path& context_file,
                        const std::filesystem::path& gold_file);

// Parses one LS07 gold line into (item, id, entries). Throws kParseError.
struct Ls07GoldLine {
  std::string item;
  std::string id;
  std::vector<GoldEntry> entries;
};
Ls07GoldLine ParseLs07GoldLine(std::string_view line);

// CoInCo XML: <sent><targetsentence>..</targetsentence><tokens><token id
// wordform lemma posMASC ..><substitutions><subst lemma freq/>.. Offsets are
// recovered by matching token wordforms left to right.
ImportResult ImportCoinco(const std::filesystem::path& xml_file);

// Swords JSON release ({contexts, targets, substitutes, substitute_labels}).
// A substitute is kept when it has at least one TRUE vote and its vote
// fraction is >= min_vote_fraction: 0 gives "Swords 1", 0.5 "Swords 5".
ImportResult ImportSwords(const std::filesystem::path& json_file,
                          double min_vote_fraction);

// A record is a short context when its sentence has at most two words.
bool IsShortContext(std::string_view sentence);

// Canonical line-delimited format, one record per line with fixed field
// order: {"id","sentence","target":{"surface","lemma","pos","char_start",
// "char_end"},"gold":[{"sub","weight"}],"tags":[]}.
std::string CanonicalLine(const CanonicalRecord& record);
CanonicalRecord ParseCanonicalLine(std::string_view line);
void WriteCanonical(const std::filesystem::path& path,
                    const std::vector<CanonicalRecord>& records);
std::vector<CanonicalRecord> ReadCanonical(const std::filesystem::path& path);

// instance id -> ranked lowercase substitutes (at most 10, duplicate-free).
using PredictionFile = std::map<std::string, std::vector<std::string>>;

inline constexpr std::size_t kMaxPredictions = 10;

// Lowercases, drops duplicates, and truncates to kMaxPredictions.
std::vector<std::string> NormalizePredictions(
    const std::vector<std::string>& predictions);

// Lines {"id": "...", "substitutes": [...]} sorted by id.
void WritePredictions(const std::filesystem::path& path,
                      const PredictionFile& predictions);
// Normalizes each list; throws kDuplicateInstance on a repeated id and
// kParseError on malformed lines.
PredictionFile ReadPredictions(const std::filesystem::path& path);

}  // namespace lexsub

#endif  // LEXSUB_CORPUS_H_
