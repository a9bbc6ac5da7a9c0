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

#include "lexsub/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "lexsub/error.h"
#include "lexsub/text.h"
#include "xml_scanner.h"

namespace lexsub {
namespace {

using nlohmann::ordered_json;
using internal::XmlScanner;

std::string ReadFile(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void ParseFail(const std::filesystem::path& file, int line,
                            const std::string& what) {
  throw Error(ErrorCode::kParseError,
              file.filename().string() + ":" + std::to_string(line) + ": " +
                  what);
}

bool ParseInt(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// "@card@", "@ord@" and similar placeholders left by the annotation tools.
bool LooksLikeArtifact(std::string_view sub) {
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (sub[i] != '@') continue;
    std::size_t j = i + 1;
    while (j < sub.size() &&
           (std::isalnum(static_cast<unsigned char>(sub[j])) || sub[j] == '_'))
      ++j;
    if (j > i + 1 && j < sub.size() && sub[j] == '@') return true;
  }
  return false;
}

void NoteGold(ImportReport& report, const CanonicalRecord& rec) {
  for (const GoldEntry& e : rec.gold.entries()) {
    if (ContainsWhitespace(e.substitute)) ++report.multiword_gold;
    if (LooksLikeArtifact(e.substitute)) {
      report.flagged.emplace_back(rec.instance.id, e.substitute);
    }
  }
  if (IsShortContext(rec.instance.sentence)) ++report.short_context;
}

void Finish(ImportResult& result) {
  result.report.records = result.records.size();
}

// Byte offset -> code point offset.
std::size_t CpOffset(std::string_view text, std::size_t byte) {
  return CodePointCount(text.substr(0, byte));
}

bool IsBoundary(std::string_view text, std::size_t b, std::size_t e) {
  auto letter_before = [&] {
    if (b == 0) return false;
    std::size_t s = b - 1;
    while (s > 0 && (static_cast<unsigned char>(text[s]) & 0xC0) == 0x80) --s;
    const auto cps = DecodeUtf8(text.substr(s, b - s));
    return !cps.empty() && (IsLetter(cps.back()) ||
                            std::isdigit(static_cast<unsigned char>(text[b - 1])));
  };
  auto letter_after = [&] {
    if (e >= text.size()) return false;
    const auto cps = DecodeUtf8(text.substr(e, 4));
    return !cps.empty() && (IsLetter(cps.front()) ||
                            std::isdigit(static_cast<unsigned char>(text[e])));
  };
  return !letter_before() && !letter_after();
}

}  // namespace

// GoldSet ---------------------------------------------------------------------

void GoldSet::Add(std::string_view substitute, int weight) {
  const std::string sub = CaseFold(Trim(substitute));
  if (sub.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty gold substitute");
  }
  if (weight <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "gold weight must be positive for '" + sub + "'");
  }
  total_weight_ += weight;
  for (GoldEntry& e : entries_) {
    if (e.substitute == sub) {
      e.weight += weight;
      return;
    }
  }
  entries_.push_back({sub, weight});
}

std::optional<std::string> GoldSet::mode() const {
  const GoldEntry* best = nullptr;
  bool tied = false;
  for (const GoldEntry& e : entries_) {
    if (best == nullptr || e.weight > best->weight) {
      best = &e;
      tied = false;
    } else if (e.weight == best->weight) {
      tied = true;
    }
  }
  if (best == nullptr || tied) return std::nullopt;
  return best->substitute;
}

int GoldSet::WeightOf(std::string_view substitute) const {
  const std::string key = CaseFold(substitute);
  for (const GoldEntry& e : entries_) {
    if (e.substitute == key) return e.weight;
  }
  return 0;
}

std::vector<GoldEntry> GoldSet::ByWeight() const {
  std::vector<GoldEntry> out = entries_;
  std::stable_sort(out.begin(), out.end(),
                   [](const GoldEntry& a, const GoldEntry& b) {
                     return a.weight > b.weight;
                   });
  return out;
}

GoldSet GoldSet::WithoutMultiword() const {
  GoldSet out(instance_id_);
  for (const GoldEntry& e : entries_) {
    if (!ContainsWhitespace(e.substitute)) out.Add(e.substitute, e.weight);
  }
  return out;
}

// Report ----------------------------------------------------------------------

std::string ImportReport::Summary() const {
  std::ostringstream os;
  os << "dataset: " << dataset << "\n"
     << "records imported: " << records << "\n"
     << "dropped (empty gold): " << dropped_empty_gold << "\n"
     << "dropped (gold without context): " << dropped_missing_context << "\n"
     << "dropped (context without gold): " << dropped_missing_gold << "\n"
     << "dropped (invalid target): " << dropped_invalid_target << "\n"
     << "short contexts (<= 2 words): " << short_context << "\n"
     << "multiword gold substitutes: " << multiword_gold << "\n"
     << "flagged gold substitutes: " << flagged.size() << "\n";
  for (const auto& [id, sub] : flagged) {
    os << "  " << id << ": " << sub << "\n";
  }
  return os.str();
}

std::string ImportReport::KeyValues() const {
  std::ostringstream os;
  os << "dataset=" << dataset << "\n"
     << "records=" << records << "\n"
     << "dropped_empty_gold=" << dropped_empty_gold << "\n"
     << "dropped_missing_context=" << dropped_missing_context << "\n"
     << "dropped_missing_gold=" << dropped_missing_gold << "\n"
     << "dropped_invalid_target=" << dropped_invalid_target << "\n"
     << "short_context=" << short_context << "\n"
     << "multiword_gold=" << multiword_gold << "\n"
     << "flagged=" << flagged.size() << "\n";
  return os.str();
}

bool IsShortContext(std::string_view sentence) {
  std::size_t words = 0;
  for (std::string_view tok : SplitWhitespace(sentence)) {
    const auto cps = DecodeUtf8(tok);
    if (std::any_of(cps.begin(), cps.end(), IsLetter)) ++words;
  }
  return words <= 2;
}

// LS07 ------------------------------------------------------------------------

Ls07GoldLine ParseLs07GoldLine(std::string_view line) {
  const auto sep = line.find("::");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::kParseError, "missing '::' in gold line");
  }
  const auto head = SplitWhitespace(line.substr(0, sep));
  if (head.size() != 2) {
    throw Error(ErrorCode::kParseError, "expected 'item id' before '::'");
  }
  Ls07GoldLine out;
  out.item = std::string(head[0]);
  out.id = std::string(head[1]);
  std::string_view rest = line.substr(sep + 2);
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const std::string_view part =
        Trim(rest.substr(0, semi == std::string_view::npos ? rest.size() : semi));
    rest = semi == std::string_view::npos ? std::string_view()
                                          : rest.substr(semi + 1);
    if (part.empty()) continue;
    const auto space = part.find_last_of(" \t");
    int weight = 0;
    if (space == std::string_view::npos ||
        !ParseInt(part.substr(space + 1), weight) || weight <= 0) {
      throw Error(ErrorCode::kParseError,
                  "entry '" + std::string(part) + "' lacks a positive weight");
    }
    out.entries.push_back({std::string(Trim(part.substr(0, space))), weight});
  }
  return out;
}

ImportResult ImportLs07(const std::filesystem::path& context_file,
                        const std::filesystem::path& gold_file) {
  struct Context {
    std::string item;
    std::string sentence;
    std::string head;
    std::size_t head_byte = 0;
    bool has_head = false;
    int line = 0;
  };
  const std::string doc = ReadFile(context_file);
  std::unordered_map<std::string, Context> contexts;
  std::vector<std::string> context_order;
  {
    XmlScanner scanner(doc);
    std::string item;
    std::string id;
    Context cur;
    bool in_context = false;
    bool in_head = false;
    while (auto tok = scanner.Next()) {
      if (tok->kind == XmlScanner::Kind::kStart) {
        if (tok->name == "lexelt") {
          item = tok->attrs["item"];
        } else if (tok->name == "instance") {
          if (!tok->attrs.contains("id")) {
            ParseFail(context_file, tok->line, "<instance> without id");
          }
          id = tok->attrs["id"];
        } else if (tok->name == "context") {
          cur = Context{};
          cur.item = item;
          cur.line = tok->line;
          in_context = true;
        } else if (tok->name == "head" && in_context) {
          if (cur.has_head) {
            ParseFail(context_file, tok->line, "second <head> in context");
          }
          cur.has_head = true;
          cur.head_byte = cur.sentence.size();
          in_head = true;
        }
      } else if (tok->kind == XmlScanner::Kind::kEnd) {
        if (tok->name == "head") {
          in_head = false;
        } else if (tok->name == "context" && in_context) {
          in_context = false;
          if (id.empty()) ParseFail(context_file, cur.line, "context outside <instance>");
          if (contexts.contains(id)) {
            ParseFail(context_file, cur.line, "duplicate instance id " + id);
          }
          context_order.push_back(id);
          contexts[id] = std::move(cur);
          cur = Context{};
        }
      } else if (in_context) {
        cur.sentence.append(tok->text);
        if (in_head) cur.head.append(tok->text);
      }
    }
    if (in_context) ParseFail(context_file, cur.line, "unterminated <context>");
  }

  ImportResult result;
  result.report.dataset = "ls07";
  std::unordered_set<std::string> used;
  std::ifstream gold(gold_file, std::ios::binary);
  if (!std::filesystem::is_regular_file(gold_file) || !gold) {
    throw Error(ErrorCode::kMissingFile, gold_file.string());
  }
  std::string line;
  int line_no = 0;
  while (std::getline(gold, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    Ls07GoldLine parsed;
    try {
      parsed = ParseLs07GoldLine(line);
    } catch (const Error& e) {
      ParseFail(gold_file, line_no, std::string(e.what()) + ": '" + line + "'");
    }
    used.insert(parsed.id);
    if (parsed.entries.empty()) {
      ++result.report.dropped_empty_gold;
      continue;
    }
    const auto it = contexts.find(parsed.id);
    if (it == contexts.end()) {
      ++result.report.dropped_missing_context;
      continue;
    }
    const Context& ctx = it->second;
    if (!ctx.has_head) {
      throw Error(ErrorCode::kOffsetMismatch,
                  context_file.filename().string() + ":" +
                      std::to_string(ctx.line) + ": instance " + parsed.id +
                      " has no <head> target");
    }
    // Trim the context but keep its interior verbatim.
    const std::string_view raw(ctx.sentence);
    const auto lead = raw.find_first_not_of(" \t\r\n");
    const std::string_view trimmed = Trim(raw);
    const std::string head(Trim(ctx.head));
    const std::size_t head_byte =
        ctx.head_byte + (ctx.head.find_first_not_of(" \t\r\n") ==
                                 std::string::npos
                             ? 0
                             : ctx.head.find_first_not_of(" \t\r\n")) -
        (lead == std::string_view::npos ? 0 : lead);
    if (head.empty() || ContainsWhitespace(head)) {
      ++result.report.dropped_invalid_target;
      continue;
    }

    CanonicalRecord rec;
    rec.instance.id = parsed.id;
    rec.instance.sentence = std::string(trimmed);
    rec.instance.char_start = CpOffset(trimmed, head_byte);
    rec.instance.char_end = rec.instance.char_start + CodePointCount(head);
    rec.instance.surface = head;
    const std::string item = parsed.item.empty() ? ctx.item : parsed.item;
    const auto dot = item.rfind('.');
    rec.instance.lemma = CaseFold(item.substr(0, dot));
    rec.instance.pos = dot == std::string::npos
                           ? PartOfSpeech::kOther
                           : PosFromTag(item.substr(dot + 1));
    rec.instance.Validate();
    rec.gold = GoldSet(parsed.id);
    for (const GoldEntry& e : parsed.entries) rec.gold.Add(e.substitute, e.weight);
    if (IsShortContext(rec.instance.sentence)) rec.tags.push_back("short_context");
    NoteGold(result.report, rec);
    result.records.push_back(std::move(rec));
  }
  for (const std::string& id : context_order) {
    if (!used.contains(id)) ++result.report.dropped_missing_gold;
  }
  Finish(result);
  return result;
}

// CoInCo ----------------------------------------------------------------------

ImportResult ImportCoinco(const std::filesystem::path& xml_file) {
  struct PendingToken {
    std::map<std::string, std::string> attrs;
    std::vector<GoldEntry> subs;
    int line = 0;
  };
  const std::string doc = ReadFile(xml_file);
  ImportResult result;
  result.report.dataset = "coinco";

  XmlScanner scanner(doc);
  std::string sentence;
  bool in_sentence_text = false;
  std::size_t cursor = 0;  // byte cursor into the trimmed sentence
  std::string trimmed;
  bool have_sentence = false;
  std::optional<PendingToken> token;
  int sent_line = 0;

  auto place = [&](const std::string& wordform, std::size_t& b) {
    for (std::size_t at = trimmed.find(wordform, cursor);
         at != std::string::npos; at = trimmed.find(wordform, at + 1)) {
      if (IsBoundary(trimmed, at, at + wordform.size())) {
        b = at;
        return true;
      }
    }
    return false;
  };

  auto close_token = [&](PendingToken& t) {
    const std::string wordform = t.attrs["wordform"];
    const std::string id = t.attrs["id"];
    std::size_t b = 0;
    const bool found = !wordform.empty() && have_sentence && place(wordform, b);
    const bool is_target = !id.empty() && id != "XXX";
    if (found) cursor = b + wordform.size();
    if (!is_target) return;
    if (t.subs.empty()) {
      ++result.report.dropped_empty_gold;
      return;
    }
    if (ContainsWhitespace(wordform) || wordform.empty()) {
      ++result.report.dropped_invalid_target;
      return;
    }
    if (!found) {
      throw Error(ErrorCode::kOffsetMismatch,
                  xml_file.filename().string() + ":" + std::to_string(t.line) +
                      ": token " + id + " '" + wordform +
                      "' not found in its target sentence");
    }
    CanonicalRecord rec;
    rec.instance.id = id;
    rec.instance.sentence = trimmed;
    rec.instance.char_start = CpOffset(trimmed, b);
    rec.instance.char_end = rec.instance.char_start + CodePointCount(wordform);
    rec.instance.surface = wordform;
    rec.instance.lemma = CaseFold(t.attrs.contains("lemma") ? t.attrs["lemma"]
                                                            : wordform);
    const std::string tag = t.attrs.contains("posMASC") ? t.attrs["posMASC"]
                                                        : t.attrs["posTT"];
    rec.instance.pos = PosFromTag(tag);
    rec.instance.Validate();
    rec.gold = GoldSet(id);
    for (const GoldEntry& e : t.subs) rec.gold.Add(e.substitute, e.weight);
    if (IsShortContext(trimmed)) rec.tags.push_back("short_context");
    NoteGold(result.report, rec);
    result.records.push_back(std::move(rec));
  };

  while (auto tok = scanner.Next()) {
    if (tok->kind == XmlScanner::Kind::kStart) {
      if (tok->name == "sent") {
        sentence.clear();
        trimmed.clear();
        have_sentence = false;
        cursor = 0;
        sent_line = tok->line;
      } else if (tok->name == "targetsentence") {
        in_sentence_text = true;
        sentence.clear();
      } else if (tok->name == "token") {
        PendingToken t;
        t.attrs = tok->attrs;
        t.line = tok->line;
        if (tok->self_closing) {
          close_token(t);
        } else {
          token = std::move(t);
        }
      } else if (tok->name == "subst") {
        if (!token) ParseFail(xml_file, tok->line, "<subst> outside <token>");
        int freq = 0;
        const std::string sub = tok->attrs["lemma"];
        if (!ParseInt(tok->attrs["freq"], freq) || freq <= 0 || Trim(sub).empty()) {
          ParseFail(xml_file, tok->line, "bad <subst> lemma/freq");
        }
        token->subs.push_back({sub, freq});
      }
    } else if (tok->kind == XmlScanner::Kind::kEnd) {
      if (tok->name == "targetsentence") {
        in_sentence_text = false;
        trimmed = std::string(Trim(sentence));
        have_sentence = true;
      } else if (tok->name == "token" && token) {
        close_token(*token);
        token.reset();
      } else if (tok->name == "sent") {
        if (token) ParseFail(xml_file, sent_line, "unterminated <token>");
      }
    } else if (in_sentence_text) {
      sentence.append(tok->text);
    }
  }
  if (token) ParseFail(xml_file, token->line, "unterminated <token>");
  Finish(result);
  return result;
}

// Swords ----------------------------------------------------------------------

ImportResult ImportSwords(const std::filesystem::path& json_file,
                          double min_vote_fraction) {
  if (!(min_vote_fraction >= 0.0 && min_vote_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "min_vote_fraction must be in [0, 1]");
  }
  const std::string doc = ReadFile(json_file);
  nlohmann::json j = nlohmann::json::parse(doc, nullptr, false);
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParseError,
                json_file.filename().string() + ": " + what);
  };
  if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
  for (const char* key :
       {"contexts", "targets", "substitutes", "substitute_labels"}) {
    if (!j.contains(key) || !j[key].is_object()) {
      fail(std::string("missing object '") + key + "'");
    }
  }

  struct Votes {
    std::string substitute;
    int yes = 0;
    int total = 0;
  };
  std::map<std::string, std::vector<Votes>> by_target;
  for (const auto& [sid, sub] : j["substitutes"].items()) {
    if (!sub.is_object() || !sub.contains("target_id") ||
        !sub.contains("substitute") || !sub["substitute"].is_string()) {
      fail("substitute " + sid + " lacks target_id/substitute");
    }
    Votes v;
    v.substitute = sub["substitute"].get<std::string>();
    if (j["substitute_labels"].contains(sid)) {
      const auto& labels = j["substitute_labels"][sid];
      if (!labels.is_array()) fail("labels of " + sid + " are not a list");
      for (const auto& l : labels) {
        if (!l.is_string()) fail("non-string label for " + sid);
        const std::string s = l.get<std::string>();
        ++v.total;
        if (s == "TRUE" || s == "TRUE_IMPLICIT") ++v.yes;
      }
    }
    by_target[sub["target_id"].get<std::string>()].push_back(std::move(v));
  }

  ImportResult result;
  result.report.dataset = "swords";
  for (const auto& [tid, target] : j["targets"].items()) {
    if (!target.is_object() || !target.contains("context_id") ||
        !target.contains("target") || !target.contains("offset")) {
      fail("target " + tid + " lacks context_id/target/offset");
    }
    const std::string cid = target["context_id"].get<std::string>();
    if (!j["contexts"].contains(cid) ||
        !j["contexts"][cid].contains("context")) {
      fail("target " + tid + " references unknown context " + cid);
    }
    const std::string context = j["contexts"][cid]["context"].get<std::string>();
    const std::string word = target["target"].get<std::string>();
    const std::size_t offset = target["offset"].get<std::size_t>();

    GoldSet gold(tid);
    for (const Votes& v : by_target[tid]) {
      if (v.yes < 1 || v.total == 0) continue;
      const double frac = static_cast<double>(v.yes) / v.total;
      if (frac + 1e-12 >= min_vote_fraction) gold.Add(v.substitute, v.yes);
    }
    if (gold.empty()) {
      ++result.report.dropped_empty_gold;
      continue;
    }
    if (word.empty() || ContainsWhitespace(word)) {
      ++result.report.dropped_invalid_target;
      continue;
    }
    CanonicalRecord rec;
    rec.instance.id = tid;
    rec.instance.sentence = context;
    rec.instance.char_start = offset;
    rec.instance.char_end = offset + CodePointCount(word);
    rec.instance.surface = word;
    rec.instance.lemma = CaseFold(word);
    rec.instance.pos = PosFromTag(target.value("pos", std::string()));
    rec.instance.Validate();
    rec.gold = std::move(gold);
    if (IsShortContext(context)) rec.tags.push_back("short_context");
    NoteGold(result.report, rec);
    result.records.push_back(std::move(rec));
  }
  Finish(result);
  return result;
}

// Canonical format ------------------------------------------------------------

std::string CanonicalLine(const CanonicalRecord& record) {
  ordered_json j;
  j["id"] = record.instance.id;
  j["sentence"] = record.instance.sentence;
  ordered_json t;
  t["surface"] = record.instance.surface;
  t["lemma"] = record.instance.lemma;
  t["pos"] = PosName(record.instance.pos);
  t["char_start"] = record.instance.char_start;
  t["char_end"] = record.instance.char_end;
  j["target"] = std::move(t);
  ordered_json gold = ordered_json::array();
  for (const GoldEntry& e : record.gold.entries()) {
    ordered_json g;
    g["sub"] = e.substitute;
    g["weight"] = e.weight;
    gold.push_back(std::move(g));
  }
  j["gold"] = std::move(gold);
  j["tags"] = record.tags;
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

CanonicalRecord ParseCanonicalLine(std::string_view line) {
  const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kParseError, "canonical line is not a JSON object");
  }
  try {
    CanonicalRecord rec;
    rec.instance.id = j.at("id").get<std::string>();
    rec.instance.sentence = j.at("sentence").get<std::string>();
    const auto& t = j.at("target");
    rec.instance.surface = t.at("surface").get<std::string>();
    rec.instance.lemma = t.at("lemma").get<std::string>();
    rec.instance.pos = PosFromName(t.at("pos").get<std::string>());
    rec.instance.char_start = t.at("char_start").get<std::size_t>();
    rec.instance.char_end = t.at("char_end").get<std::size_t>();
    rec.gold = GoldSet(rec.instance.id);
    for (const auto& g : j.at("gold")) {
      rec.gold.Add(g.at("sub").get<std::string>(), g.at("weight").get<int>());
    }
    if (j.contains("tags")) rec.tags = j["tags"].get<std::vector<std::string>>();
    rec.instance.Validate();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

void WriteCanonical(const std::filesystem::path& path,
                    const std::vector<CanonicalRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path.string());
  for (const CanonicalRecord& r : records) out << CanonicalLine(r) << '\n';
}

std::vector<CanonicalRecord> ReadCanonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!std::filesystem::is_regular_file(path) || !in) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  std::vector<CanonicalRecord> out;
  std::unordered_set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      out.push_back(ParseCanonicalLine(line));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseError) throw;
      ParseFail(path, line_no, e.what());
    }
    if (!ids.insert(out.back().instance.id).second) {
      throw Error(ErrorCode::kDuplicateInstance,
                  path.filename().string() + ":" + std::to_string(line_no) +
                      ": " + out.back().instance.id);
    }
  }
  return out;
}

// Predictions -----------------------------------------------------------------

std::vector<std::string> NormalizePredictions(
    const std::vector<std::string>& predictions) {
  std::vector<std::string> out;
  for (const std::string& p : predictions) {
    if (out.size() == kMaxPredictions) break;
    std::string s = CaseFold(Trim(p));
    if (s.empty() || std::find(out.begin(), out.end(), s) != out.end()) {
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void WritePredictions(const std::filesystem::path& path,
                      const PredictionFile& predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path.string());
  for (const auto& [id, subs] : predictions) {
    ordered_json j;
    j["id"] = id;
    j["substitutes"] = NormalizePredictions(subs);
    out << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace)
        << '\n';
  }
}

PredictionFile ReadPredictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!std::filesystem::is_regular_file(path) || !in) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  PredictionFile out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j["id"].is_string() || !j.contains("substitutes") ||
        !j["substitutes"].is_array()) {
      ParseFail(path, line_no, "expected {\"id\", \"substitutes\"}");
    }
    std::vector<std::string> subs;
    for (const auto& s : j["substitutes"]) {
      if (!s.is_string()) ParseFail(path, line_no, "non-string substitute");
      subs.push_back(s.get<std::string>());
    }
    const std::string id = j["id"].get<std::string>();
    if (!out.emplace(id, NormalizePredictions(subs)).second) {
      throw Error(ErrorCode::kDuplicateInstance,
                  path.filename().string() + ":" + std::to_string(line_no) +
                      ": " + id);
    }
  }
  return out;
}

}  // namespace lexsub
