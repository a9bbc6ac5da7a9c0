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

#include "lexsub/lexicon.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <span>
#include <string>

#include "lexsub/error.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

constexpr std::array<PartOfSpeech, 4> kLexiconPos = {
    PartOfSpeech::kNoun, PartOfSpeech::kVerb, PartOfSpeech::kAdj,
    PartOfSpeech::kAdv};

int PosIndex(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun:
      return 0;
    case PartOfSpeech::kVerb:
      return 1;
    case PartOfSpeech::kAdj:
      return 2;
    case PartOfSpeech::kAdv:
      return 3;
    case PartOfSpeech::kOther:
      break;
  }
  return -1;
}

std::string FilePosName(PartOfSpeech pos) {
  return std::string(PosName(pos));
}

// Pointer pos letter; satellites ('s') live in the adjective files.
bool PosFromLetter(std::string_view letter, PartOfSpeech& out) {
  if (letter == "n") {
    out = PartOfSpeech::kNoun;
  } else if (letter == "v") {
    out = PartOfSpeech::kVerb;
  } else if (letter == "a" || letter == "s") {
    out = PartOfSpeech::kAdj;
  } else if (letter == "r") {
    out = PartOfSpeech::kAdv;
  } else {
    return false;
  }
  return true;
}

struct Detachment {
  std::string_view suffix;
  std::string_view ending;
};

constexpr Detachment kNounRules[] = {
    {"s", ""},     {"ses", "s"},  {"xes", "x"},   {"zes", "z"},
    {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"ies", "y"}};
constexpr Detachment kVerbRules[] = {
    {"s", ""},   {"ies", "y"}, {"es", "e"},  {"es", ""},
    {"ed", "e"}, {"ed", ""},   {"ing", "e"}, {"ing", ""}};
constexpr Detachment kAdjRules[] = {
    {"er", ""}, {"est", ""}, {"er", "e"}, {"est", "e"}};

std::span<const Detachment> RulesFor(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun:
      return kNounRules;
    case PartOfSpeech::kVerb:
      return kVerbRules;
    case PartOfSpeech::kAdj:
      return kAdjRules;
    default:
      return {};
  }
}

std::string ToKey(std::string_view lemma) {
  std::string key = CaseFold(Trim(lemma));
  std::replace(key.begin(), key.end(), ' ', '_');
  return key;
}

std::string FromKey(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

// Data files mark some adjectives with a syntactic position: "word(a)".
std::string StripAdjMarker(std::string_view word) {
  const auto paren = word.find('(');
  return CaseFold(word.substr(0, paren));
}

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path) {
    if (!std::filesystem::is_regular_file(path)) {
      throw Error(ErrorCode::kMissingFile, path.string());
    }
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(ErrorCode::kMissingFile, path.string());
  }

  bool Next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void Fail(const std::string& what, const std::string& line) {
    throw Error(ErrorCode::kParseError,
                path_.filename().string() + ":" + std::to_string(line_no_) +
                    ": " + what + ": '" + line + "'");
  }

  int line_no() const { return line_no_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

template <typename T>
bool ParseNumber(std::string_view s, T& out, int base = 10) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out, base);
  return res.ec == std::errc() && res.ptr == end;
}

// The license preamble lines in index/data files begin with two spaces.
bool IsPreamble(const std::string& line) {
  return line.empty() || line.starts_with("  ");
}

std::vector<std::string_view> Tokens(std::string_view line) {
  return SplitWhitespace(line);
}

std::optional<Relation> RelationOfSymbol(std::string_view symbol) {
  if (symbol == "!") return Relation::kAntonym;
  if (symbol == "@" || symbol == "@i") return Relation::kHypernym;
  if (symbol == "~" || symbol == "~i") return Relation::kHyponym;
  if (symbol == "%m" || symbol == "%s" || symbol == "%p")
    return Relation::kMeronym;
  if (symbol == "#m" || symbol == "#s" || symbol == "#p")
    return Relation::kHolonym;
  return std::nullopt;
}

}  // namespace

std::string_view RelationName(Relation r) {
  switch (r) {
    case Relation::kSynonym:
      return "synonym";
    case Relation::kAntonym:
      return "antonym";
    case Relation::kHypernym:
      return "hypernym";
    case Relation::kHyponym:
      return "hyponym";
    case Relation::kMeronym:
      return "meronym";
    case Relation::kHolonym:
      return "holonym";
  }
  return "unknown";
}

Relation RelationFromName(std::string_view name) {
  for (Relation r : kAllRelations) {
    if (RelationName(r) == name) return r;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown relation '" + std::string(name) + "'");
}

std::set<Relation> ParseRelationList(std::string_view list) {
  std::set<Relation> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto part =
        Trim(list.substr(start, comma == std::string_view::npos
                                    ? std::string_view::npos
                                    : comma - start));
    if (!part.empty()) out.insert(RelationFromName(part));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool RelationSet::empty() const {
  return std::all_of(members.begin(), members.end(),
                     [](const auto& s) { return s.empty(); });
}

Lexicon Lexicon::Load(const std::filesystem::path& dir) {
  // Check presence up front so an empty directory reports the first
  // missing file rather than a partial load.
  for (PartOfSpeech pos : kLexiconPos) {
    for (const std::string& name :
         {"index." + FilePosName(pos), "data." + FilePosName(pos),
          FilePosName(pos) + ".exc"}) {
      if (!std::filesystem::is_regular_file(dir / name)) {
        throw Error(ErrorCode::kMissingFile, (dir / name).string());
      }
    }
  }

  Lexicon lex;
  std::string line;
  for (PartOfSpeech pos : kLexiconPos) {
    const int pi = PosIndex(pos);
    LineReader data(dir / ("data." + FilePosName(pos)));
    while (data.Next(line)) {
      if (IsPreamble(line)) continue;
      const auto bar = line.find(" | ");
      if (bar == std::string::npos) data.Fail("missing gloss separator", line);
      const auto tok = Tokens(std::string_view(line).substr(0, bar));
      std::uint32_t offset = 0;
      int w_cnt = 0;
      if (tok.size() < 4 || !ParseNumber(tok[0], offset) ||
          !ParseNumber(tok[3], w_cnt, 16)) {
        data.Fail("bad synset header", line);
      }
      std::size_t i = 4;
      Synset synset;
      if (tok.size() < i + 2 * w_cnt + 1) data.Fail("truncated word list", line);
      for (int w = 0; w < w_cnt; ++w, i += 2) {
        synset.words.push_back(StripAdjMarker(tok[i]));
      }
      int p_cnt = 0;
      if (!ParseNumber(tok[i], p_cnt)) data.Fail("bad pointer count", line);
      ++i;
      if (tok.size() < i + 4 * static_cast<std::size_t>(p_cnt)) {
        data.Fail("truncated pointer list", line);
      }
      for (int p = 0; p < p_cnt; ++p, i += 4) {
        Pointer ptr;
        ptr.symbol = std::string(tok[i]);
        int st = 0;
        if (!ParseNumber(tok[i + 1], ptr.target_offset) ||
            !PosFromLetter(tok[i + 2], ptr.target_pos) ||
            tok[i + 3].size() != 4 || !ParseNumber(tok[i + 3], st, 16)) {
          data.Fail("bad pointer " + std::to_string(p), line);
        }
        ptr.source_word = st >> 8;
        ptr.target_word = st & 0xFF;
        synset.pointers.push_back(std::move(ptr));
      }
      lex.synsets_[{pi, offset}] = std::move(synset);
    }

    LineReader index(dir / ("index." + FilePosName(pos)));
    while (index.Next(line)) {
      if (IsPreamble(line)) continue;
      const auto tok = Tokens(line);
      int synset_cnt = 0;
      int p_cnt = 0;
      if (tok.size() < 4 || !ParseNumber(tok[2], synset_cnt) ||
          !ParseNumber(tok[3], p_cnt)) {
        index.Fail("bad index header", line);
      }
      const std::size_t first = 4 + p_cnt + 2;
      if (tok.size() != first + synset_cnt) {
        index.Fail("synset count does not match offsets", line);
      }
      std::vector<std::uint32_t> offsets;
      for (std::size_t k = first; k < tok.size(); ++k) {
        std::uint32_t off = 0;
        if (!ParseNumber(tok[k], off)) index.Fail("bad offset", line);
        if (!lex.synsets_.contains({pi, off})) {
          index.Fail("offset " + std::string(tok[k]) + " not found in data." +
                         FilePosName(pos),
                     line);
        }
        offsets.push_back(off);
      }
      lex.index_[{CaseFold(tok[0]), pos}] = std::move(offsets);
    }

    LineReader exc(dir / (FilePosName(pos) + ".exc"));
    while (exc.Next(line)) {
      const auto tok = Tokens(line);
      if (tok.empty()) continue;
      if (tok.size() < 2) exc.Fail("exception without base form", line);
      auto& bases = lex.exceptions_[pi][CaseFold(tok[0])];
      for (std::size_t k = 1; k < tok.size(); ++k) {
        bases.push_back(CaseFold(tok[k]));
      }
    }
  }
  return lex;
}

const Lexicon::Synset* Lexicon::FindSynset(PartOfSpeech pos,
                                           std::uint32_t offset) const {
  const auto it = synsets_.find({PosIndex(pos), offset});
  return it == synsets_.end() ? nullptr : &it->second;
}

bool Lexicon::HasLemma(std::string_view lemma, PartOfSpeech pos) const {
  if (PosIndex(pos) < 0) return false;
  return index_.contains({ToKey(lemma), pos});
}

RelationSet Lexicon::Relations(std::string_view lemma,
                               PartOfSpeech pos) const {
  RelationSet out;
  if (PosIndex(pos) < 0 || Trim(lemma).empty()) return out;
  const std::string key = ToKey(lemma);
  const auto it = index_.find({key, pos});
  if (it == index_.end()) return out;

  for (std::uint32_t offset : it->second) {
    const Synset* synset = FindSynset(pos, offset);
    if (synset == nullptr) continue;
    int word_no = 0;  // 1-based position of the lemma in this synset
    for (std::size_t w = 0; w < synset->words.size(); ++w) {
      if (synset->words[w] == key) {
        word_no = static_cast<int>(w) + 1;
      } else {
        out[Relation::kSynonym].insert(FromKey(synset->words[w]));
      }
    }
    for (const Pointer& ptr : synset->pointers) {
      const auto rel = RelationOfSymbol(ptr.symbol);
      if (!rel) continue;
      // Lexical pointers bind one word to one word; semantic pointers
      // (source 0) bind whole synsets.
      if (ptr.source_word != 0 && ptr.source_word != word_no) continue;
      const Synset* target = FindSynset(ptr.target_pos, ptr.target_offset);
      if (target == nullptr) continue;
      if (ptr.target_word != 0) {
        const auto t = static_cast<std::size_t>(ptr.target_word - 1);
        if (t < target->words.size()) {
          out[*rel].insert(FromKey(target->words[t]));
        }
      } else {
        for (const std::string& w : target->words) out[*rel].insert(FromKey(w));
      }
    }
  }
  const std::string self = FromKey(key);
  for (auto& members : out.members) members.erase(self);
  return out;
}

std::set<std::string> Lexicon::Lemmatize(std::string_view surface,
                                         PartOfSpeech pos) const {
  std::set<std::string> out;
  const int pi = PosIndex(pos);
  if (pi < 0) return out;
  const std::string key = ToKey(surface);
  if (key.empty()) return out;
  if (index_.contains({key, pos})) out.insert(FromKey(key));

  const auto exc = exceptions_[pi].find(key);
  if (exc != exceptions_[pi].end()) {
    for (const std::string& base : exc->second) {
      if (index_.contains({base, pos})) out.insert(FromKey(base));
    }
    return out;
  }
  for (const Detachment& rule : RulesFor(pos)) {
    if (key.size() <= rule.suffix.size() || !key.ends_with(rule.suffix)) {
      continue;
    }
    std::string base = key.substr(0, key.size() - rule.suffix.size());
    base.append(rule.ending);
    if (index_.contains({base, pos})) out.insert(FromKey(base));
  }
  return out;
}

std::set<std::string> Lexicon::LemmatizeAnyPos(std::string_view surface) const {
  std::set<std::string> out;
  for (PartOfSpeech pos : kLexiconPos) {
    out.merge(Lemmatize(surface, pos));
  }
  return out;
}

FilterResult Lexicon::FilterCandidates(
    const TargetInstance& target, const std::vector<std::string>& survivors,
    const std::set<Relation>& excluded) const {
  FilterResult result;
  if (excluded.empty() || PosIndex(target.pos) < 0) {
    result.kept = survivors;
    return result;
  }
  const RelationSet rels = Relations(target.lemma, target.pos);
  for (const std::string& surface : survivors) {
    std::optional<Relation> hit;
    if (!rels.empty()) {
      const auto lemmas = LemmatizeAnyPos(surface);
      for (Relation r : excluded) {
        const auto& members = rels[r];
        for (const std::string& l : lemmas) {
          // Multiword members can never equal a single-token lemma.
          if (members.contains(l)) {
            hit = r;
            break;
          }
        }
        if (hit) break;
      }
    }
    if (hit) {
      result.removed.emplace_back(surface, *hit);
    } else {
      result.kept.push_back(surface);
    }
  }
  return result;
}

}  // namespace lexsub
