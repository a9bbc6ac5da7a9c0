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

#include <cstdlib>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "lexsub/error.h"
#include "test_util.h"

namespace lexsub {
namespace {

using ::lexsub::testing::MiniWordNet;
using ::lexsub::testing::ReadFile;
using ::lexsub::testing::TempDir;
using ::lexsub::testing::WriteFile;
using StrSet = std::set<std::string>;

const Lexicon& Mini() {
  static const Lexicon* lex = new Lexicon(Lexicon::Load(MiniWordNet()));
  return *lex;
}

// Expected sets below come from tests/data/wn_oracle.py, an independent
// reader of the same files.
TEST(LexiconTest, Loads) {
  EXPECT_EQ(Mini().entry_count(), 6992u);
  EXPECT_GT(Mini().synset_count(), 0u);
  EXPECT_TRUE(Mini().HasLemma("table", PartOfSpeech::kNoun));
  EXPECT_FALSE(Mini().HasLemma("running", PartOfSpeech::kVerb));
  EXPECT_FALSE(Mini().HasLemma("table", PartOfSpeech::kOther));
}

TEST(LexiconTest, Antonyms) {
  const auto& lex = Mini();
  EXPECT_EQ(lex.Relations("good", PartOfSpeech::kAdj)[Relation::kAntonym],
            (StrSet{"bad", "evil"}));
  EXPECT_EQ(lex.Relations("big", PartOfSpeech::kAdj)[Relation::kAntonym],
            (StrSet{"little"}));
  EXPECT_EQ(lex.Relations("easy", PartOfSpeech::kAdj)[Relation::kAntonym],
            (StrSet{"difficult", "uneasy"}));
  EXPECT_EQ(lex.Relations("rise", PartOfSpeech::kVerb)[Relation::kAntonym],
            (StrSet{"fall", "set"}));
  EXPECT_EQ(lex.Relations("end", PartOfSpeech::kNoun)[Relation::kAntonym],
            (StrSet{"beginning", "middle"}));
  EXPECT_TRUE(lex.Relations("dog", PartOfSpeech::kNoun)[Relation::kAntonym]
                  .empty());
}

TEST(LexiconTest, OtherRelations) {
  const RelationSet dog = Mini().Relations("dog", PartOfSpeech::kNoun);
  EXPECT_EQ(dog[Relation::kHypernym],
            (StrSet{"blighter", "bloke", "canid", "canine", "catch", "chap",
                    "cuss", "disagreeable woman", "domestic animal",
                    "domesticated animal", "fella", "feller", "fellow",
                    "gent", "lad", "sausage", "scoundrel", "stop", "support",
                    "unpleasant woman", "villain"}));
  EXPECT_EQ(dog[Relation::kSynonym],
            (StrSet{"andiron", "blackguard", "bounder", "cad",
                    "canis familiaris", "click", "detent", "dog-iron",
                    "domestic dog", "firedog", "frank", "frankfurter",
                    "frump", "heel", "hot dog", "hotdog", "hound", "pawl",
                    "weenie", "wiener", "wienerwurst"}));
  EXPECT_TRUE(dog[Relation::kHyponym].count("corgi"));
  const RelationSet car = Mini().Relations("car", PartOfSpeech::kNoun);
  EXPECT_EQ(car[Relation::kMeronym].size(), 58u);
  EXPECT_TRUE(car[Relation::kMeronym].count("car door"));
  for (Relation r : kAllRelations) {
    EXPECT_FALSE(dog[r].count("dog"));
  }
}

TEST(LexiconTest, UnknownAndOtherAreEmpty) {
  EXPECT_TRUE(Mini().Relations("zzzz", PartOfSpeech::kNoun).empty());
  EXPECT_TRUE(Mini().Relations("good", PartOfSpeech::kOther).empty());
}

TEST(LexiconTest, Lemmatize) {
  const auto& lex = Mini();
  EXPECT_EQ(lex.Lemmatize("running", PartOfSpeech::kVerb), (StrSet{"run"}));
  EXPECT_EQ(lex.Lemmatize("ran", PartOfSpeech::kVerb), (StrSet{"run"}));
  EXPECT_EQ(lex.Lemmatize("men", PartOfSpeech::kNoun), (StrSet{"man"}));
  EXPECT_EQ(lex.Lemmatize("tables", PartOfSpeech::kNoun), (StrSet{"table"}));
  EXPECT_EQ(lex.Lemmatize("table", PartOfSpeech::kNoun), (StrSet{"table"}));
  EXPECT_EQ(lex.Lemmatize("happier", PartOfSpeech::kAdj), (StrSet{"happy"}));
  EXPECT_TRUE(lex.Lemmatize("zzzz", PartOfSpeech::kNoun).empty());
  EXPECT_TRUE(lex.LemmatizeAnyPos("better").count("good"));
  EXPECT_TRUE(lex.LemmatizeAnyPos("better").count("well"));
}

TEST(LexiconTest, FilterCandidatesKeepsOrder) {
  const TargetInstance target =
      MakeInstance("1", "a good day", "good", PartOfSpeech::kAdj, "good");
  const FilterResult r = Mini().FilterCandidates(
      target, {"great", "bad", "fine", "evil", "worse"},
      {Relation::kAntonym});
  EXPECT_EQ(r.kept, (std::vector<std::string>{"great", "fine"}));
  ASSERT_EQ(r.removed.size(), 3u);
  EXPECT_EQ(r.removed[0].first, "bad");
  EXPECT_EQ(r.removed[2].first, "worse");  // lemmatizes to "bad"
  EXPECT_EQ(r.removed[0].second, Relation::kAntonym);
}

TEST(LexiconTest, EmptyExclusionKeepsEverything) {
  const TargetInstance target =
      MakeInstance("1", "a good day", "good", PartOfSpeech::kAdj, "good");
  const FilterResult r = Mini().FilterCandidates(target, {"bad"}, {});
  EXPECT_EQ(r.kept, (std::vector<std::string>{"bad"}));
}

TEST(LexiconTest, RelationNames) {
  for (Relation r : kAllRelations) {
    EXPECT_EQ(RelationFromName(RelationName(r)), r);
  }
  EXPECT_EQ(ParseRelationList(""), std::set<Relation>{});
  EXPECT_EQ(ParseRelationList("antonym,hypernym"),
            (std::set<Relation>{Relation::kAntonym, Relation::kHypernym}));
  EXPECT_THROW(ParseRelationList("antonym,bogus"), Error);
}

TEST(LexiconTest, MissingFile) {
  TempDir dir;
  try {
    Lexicon::Load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
  }
}

TEST(LexiconTest, TruncatedFileIsParseError) {
  TempDir dir;
  for (const auto& entry : std::filesystem::directory_iterator(MiniWordNet())) {
    std::filesystem::copy(entry.path(), dir / entry.path().filename().string());
  }
  const std::string data = ReadFile(dir / "data.noun");
  const auto cut = data.find('\n', data.size() / 2);
  WriteFile(dir / "data.noun", data.substr(0, cut) + "\n00012345 05 n 01 x\n");
  try {
    Lexicon::Load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("data.noun:"), std::string::npos);
  }
}

// Runs only when LEXSUB_WORDNET_DIR points at a full WordNet 3.0 dict.
TEST(LexiconTest, FullWordNetIfAvailable) {
  const char* dir = std::getenv("LEXSUB_WORDNET_DIR");
  if (dir == nullptr) GTEST_SKIP() << "LEXSUB_WORDNET_DIR not set";
  const Lexicon lex = Lexicon::Load(dir);
  EXPECT_GT(lex.entry_count(), 140000u);
  EXPECT_TRUE(lex.Relations("good", PartOfSpeech::kAdj)[Relation::kAntonym]
                  .count("bad"));
}

}  // namespace
}  // namespace lexsub
