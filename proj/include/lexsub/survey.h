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

#ifndef LEXSUB_SURVEY_H_
#define LEXSUB_SURVEY_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexsub/corpus.h"

namespace lexsub {

// SWR / SR: choose a single substitute / a three-word set with the target
// shown in bold. The _M variants hide the target behind a placeholder.
enum class SurveyTask { kSwr, kSwrM, kSr, kSrM };
inline constexpr std::array<SurveyTask, 4> kAllTasks = {
    SurveyTask::kSwr, SurveyTask::kSwrM, SurveyTask::kSr, SurveyTask::kSrM};
std::string_view TaskName(SurveyTask task);  // "SWR", "SWR_M", "SR", "SR_M"
SurveyTask TaskFromName(std::string_view name);

enum class Source { kGold, kSystemA, kSystemB };
inline constexpr std::array<Source, 3> kAllSources = {
    Source::kGold, Source::kSystemA, Source::kSystemB};
std::string_view SourceName(Source source);  // "gold", "system_a", "system_b"
Source SourceFromName(std::string_view name);

inline constexpr std::string_view kPlaceholder = "______";

struct SurveyOption {
  std::vector<std::string> display;  // one word, or a set of up to three
  std::set<Source> sources;
};

struct SurveyQuestion {
  std::string qid;
  SurveyTask task = SurveyTask::kSwr;
  std::string record_id;
  std::string sentence_display;  // "**target**" or the placeholder
  std::vector<SurveyOption> options;
  std::uint64_t display_order_seed = 0;
};

struct SurveyConfig {
  std::size_t n_per_task = 15;
  std::uint64_t seed = 0;
};

// Samples 4 * n_per_task distinct records (first n for SWR, next for
// SWR_M, then SR, SR_M) among those with a gold substitute and at least
// three predictions from each system. Single-word tasks offer each
// source's top-1; set tasks offer each source's top-3 (gold by weight).
// Options with equal displays merge (sets compare as sets) and carry every
// source. Option order is a shuffle seeded per question. Throws
// kInsufficientRecords when too few records qualify.
std::vector<SurveyQuestion> GenerateSurvey(
    const std::vector<CanonicalRecord>& records,
    const PredictionFile& predictions_a, const PredictionFile& predictions_b,
    const SurveyConfig& config);

// JSON array of questions. Sources are included only when asked for.
std::string QuestionsToJson(const std::vector<SurveyQuestion>& questions,
                            bool include_sources);
std::vector<SurveyQuestion> QuestionsFromJson(std::string_view json);

struct SurveyResponse {
  std::string respondent;
  std::string qid;
  std::size_t choice = 0;
  std::int64_t timestamp_ms = 0;
};

// Holds the latest response per (respondent, qid). With a log path every
// accepted response is appended to the log before it becomes visible, and
// the snapshot at `<log>.snapshot` plus the log are replayed on open.
// Thread-safe.
class ResponseStore {
 public:
  ResponseStore(std::vector<SurveyQuestion> questions,
                std::optional<std::filesystem::path> log_path = std::nullopt);

  // Throws kUnknownQuestion or kIndexOutOfRange; kInvalidArgument for an
  // empty respondent.
  void Record(const SurveyResponse& response);
  // Sorted by (respondent, qid).
  std::vector<SurveyResponse> Responses() const;
  std::size_t size() const;
  // Writes the snapshot atomically, then truncates the log.
  void Compact();
  // Lines in the log that could not be replayed (e.g. a torn final write).
  std::size_t skipped_on_replay() const { return skipped_on_replay_; }
  const std::vector<SurveyQuestion>& questions() const { return questions_; }

 private:
  void Validate(const SurveyResponse& response) const;
  void Replay(const std::filesystem::path& path);

  std::vector<SurveyQuestion> questions_;
  std::map<std::string, std::size_t> qid_index_;
  std::optional<std::filesystem::path> log_path_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, SurveyResponse> latest_;
  std::ofstream log_;
  std::size_t skipped_on_replay_ = 0;
};

std::string ResponseToJson(const SurveyResponse& response);
SurveyResponse ResponseFromJson(std::string_view json);

struct SurveyAggregate {
  std::size_t respondents = 0;
  std::size_t n_per_task = 15;
  std::map<SurveyTask, std::array<long, 3>> counts;  // indexed by Source
  std::map<SurveyTask, long> responses;
  std::array<long, 3> totals{};

  // count / (respondents * n_per_task) * 100; 0 without respondents.
  double Percent(SurveyTask task, Source source) const;
  // total / (respondents * 4 * n_per_task) * 100.
  double TotalPercent(Source source) const;
  std::string FormatTable(std::string_view name_a, std::string_view name_b) const;
  std::string ToJson(std::string_view name_a, std::string_view name_b) const;
};

// A chosen option credits every source it carries.
SurveyAggregate Aggregate(const std::vector<SurveyQuestion>& questions,
                          const std::vector<SurveyResponse>& responses,
                          std::size_t n_per_task = 15);

}  // namespace lexsub

#endif  // LEXSUB_SURVEY_H_
