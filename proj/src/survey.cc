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

#include "lexsub/survey.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "lexsub/error.h"
#include "lexsub/random.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

using nlohmann::ordered_json;

std::string Dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::vector<std::string> GoldTop(const GoldSet& gold, std::size_t n) {
  std::vector<std::string> out;
  for (const GoldEntry& e : gold.ByWeight()) {
    if (out.size() == n) break;
    out.push_back(e.substitute);
  }
  return out;
}

std::vector<std::string> Top(const std::vector<std::string>& preds,
                             std::size_t n) {
  return {preds.begin(), preds.begin() + std::min(n, preds.size())};
}

bool SameDisplay(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::string DisplaySentence(const TargetInstance& instance, bool masked) {
  const std::size_t b = ByteOffset(instance.sentence, instance.char_start);
  const std::size_t e = ByteOffset(instance.sentence, instance.char_end);
  const std::string middle =
      masked ? std::string(kPlaceholder)
             : "**" + instance.sentence.substr(b, e - b) + "**";
  return instance.sentence.substr(0, b) + middle + instance.sentence.substr(e);
}

}  // namespace

std::string_view TaskName(SurveyTask task) {
  switch (task) {
    case SurveyTask::kSwr:
      return "SWR";
    case SurveyTask::kSwrM:
      return "SWR_M";
    case SurveyTask::kSr:
      return "SR";
    case SurveyTask::kSrM:
      return "SR_M";
  }
  return "SWR";
}

SurveyTask TaskFromName(std::string_view name) {
  for (SurveyTask t : kAllTasks) {
    if (TaskName(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown survey task '" + std::string(name) + "'");
}

std::string_view SourceName(Source source) {
  switch (source) {
    case Source::kGold:
      return "gold";
    case Source::kSystemA:
      return "system_a";
    case Source::kSystemB:
      return "system_b";
  }
  return "gold";
}

Source SourceFromName(std::string_view name) {
  for (Source s : kAllSources) {
    if (SourceName(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown source '" + std::string(name) + "'");
}

std::vector<SurveyQuestion> GenerateSurvey(
    const std::vector<CanonicalRecord>& records,
    const PredictionFile& predictions_a, const PredictionFile& predictions_b,
    const SurveyConfig& config) {
  if (config.n_per_task < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_per_task must be >= 1");
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto a = predictions_a.find(records[i].instance.id);
    const auto b = predictions_b.find(records[i].instance.id);
    if (records[i].gold.empty() || a == predictions_a.end() ||
        b == predictions_b.end() || a->second.size() < 3 ||
        b->second.size() < 3) {
      continue;
    }
    pool.push_back(i);
  }
  const std::size_t needed = config.n_per_task * kAllTasks.size();
  if (pool.size() < needed) {
    throw Error(ErrorCode::kInsufficientRecords,
                std::to_string(pool.size()) + " eligible records, need " +
                    std::to_string(needed));
  }
  SeededRng rng(config.seed);
  const auto picks = rng.SampleWithoutReplacement(pool.size(), needed);
  std::vector<SurveyQuestion> out;
  out.reserve(needed);
  for (std::size_t q = 0; q < needed; ++q) {
    const SurveyTask task = kAllTasks[q / config.n_per_task];
    const CanonicalRecord& rec = records[pool[picks[q]]];
    const bool sets = task == SurveyTask::kSr || task == SurveyTask::kSrM;
    const bool masked = task == SurveyTask::kSwrM || task == SurveyTask::kSrM;
    const std::size_t width = sets ? 3 : 1;

    SurveyQuestion question;
    char qid[32];
    std::snprintf(qid, sizeof(qid), "%s-%02zu", std::string(TaskName(task)).c_str(),
                  q % config.n_per_task + 1);
    question.qid = qid;
    question.task = task;
    question.record_id = rec.instance.id;
    question.sentence_display = DisplaySentence(rec.instance, masked);
    question.display_order_seed = rng.Next();
    const std::pair<Source, std::vector<std::string>> offers[] = {
        {Source::kGold, GoldTop(rec.gold, width)},
        {Source::kSystemA, Top(predictions_a.at(rec.instance.id), width)},
        {Source::kSystemB, Top(predictions_b.at(rec.instance.id), width)}};
    for (const auto& [source, display] : offers) {
      auto it = std::find_if(
          question.options.begin(), question.options.end(),
          [&](const SurveyOption& o) { return SameDisplay(o.display, display); });
      if (it != question.options.end()) {
        it->sources.insert(source);
      } else {
        question.options.push_back({display, {source}});
      }
    }
    SeededRng(question.display_order_seed).Shuffle(question.options);
    out.push_back(std::move(question));
  }
  return out;
}

std::string QuestionsToJson(const std::vector<SurveyQuestion>& questions,
                            bool include_sources) {
  ordered_json arr = ordered_json::array();
  for (const SurveyQuestion& q : questions) {
    ordered_json j;
    j["qid"] = q.qid;
    j["task"] = TaskName(q.task);
    j["sentence"] = q.sentence_display;
    ordered_json options = ordered_json::array();
    for (const SurveyOption& o : q.options) {
      ordered_json oj;
      oj["display"] = o.display;
      if (include_sources) {
        std::vector<std::string> names;
        for (Source s : o.sources) names.emplace_back(SourceName(s));
        oj["sources"] = names;
      }
      options.push_back(std::move(oj));
    }
    j["options"] = std::move(options);
    if (include_sources) {
      j["record_id"] = q.record_id;
      j["display_order_seed"] = q.display_order_seed;
    }
    arr.push_back(std::move(j));
  }
  return Dump(arr);
}

std::vector<SurveyQuestion> QuestionsFromJson(std::string_view json) {
  const nlohmann::json arr = nlohmann::json::parse(json, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrorCode::kParseError, "questions must be a JSON array");
  }
  std::vector<SurveyQuestion> out;
  try {
    for (const auto& j : arr) {
      SurveyQuestion q;
      q.qid = j.at("qid").get<std::string>();
      q.task = TaskFromName(j.at("task").get<std::string>());
      q.sentence_display = j.at("sentence").get<std::string>();
      q.record_id = j.value("record_id", std::string());
      q.display_order_seed = j.value("display_order_seed", std::uint64_t{0});
      for (const auto& o : j.at("options")) {
        SurveyOption opt;
        opt.display = o.at("display").get<std::vector<std::string>>();
        if (!o.contains("sources")) {
          throw Error(ErrorCode::kParseError,
                      "question " + q.qid + " has an option without sources");
        }
        for (const auto& s : o.at("sources")) {
          opt.sources.insert(SourceFromName(s.get<std::string>()));
        }
        q.options.push_back(std::move(opt));
      }
      out.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return out;
}

std::string ResponseToJson(const SurveyResponse& r) {
  ordered_json j;
  j["respondent"] = r.respondent;
  j["qid"] = r.qid;
  j["choice"] = r.choice;
  j["timestamp_ms"] = r.timestamp_ms;
  return Dump(j);
}

SurveyResponse ResponseFromJson(std::string_view json) {
  const nlohmann::json j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kParseError, "response is not a JSON object");
  }
  try {
    SurveyResponse r;
    r.respondent = j.at("respondent").get<std::string>();
    r.qid = j.at("qid").get<std::string>();
    const auto& c = j.at("choice");
    if (!c.is_number_integer() || c.get<long long>() < 0) {
      throw Error(ErrorCode::kIndexOutOfRange, "choice must be an index >= 0");
    }
    r.choice = c.get<std::size_t>();
    r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

ResponseStore::ResponseStore(std::vector<SurveyQuestion> questions,
                             std::optional<std::filesystem::path> log_path)
    : questions_(std::move(questions)), log_path_(std::move(log_path)) {
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (!qid_index_.emplace(questions_[i].qid, i).second) {
      throw Error(ErrorCode::kDuplicateInstance,
                  "duplicate question id " + questions_[i].qid);
    }
  }
  if (log_path_) {
    const std::filesystem::path snapshot = log_path_->string() + ".snapshot";
    if (std::filesystem::exists(snapshot)) Replay(snapshot);
    if (std::filesystem::exists(*log_path_)) Replay(*log_path_);
    log_.open(*log_path_, std::ios::binary | std::ios::app);
    if (!log_) {
      throw Error(ErrorCode::kMissingFile,
                  "cannot open response log " + log_path_->string());
    }
  }
}

void ResponseStore::Replay(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    try {
      const SurveyResponse r = ResponseFromJson(line);
      Validate(r);
      latest_[{r.respondent, r.qid}] = r;
    } catch (const Error&) {
      ++skipped_on_replay_;
    }
  }
}

void ResponseStore::Validate(const SurveyResponse& r) const {
  if (r.respondent.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty respondent id");
  }
  const auto it = qid_index_.find(r.qid);
  if (it == qid_index_.end()) {
    throw Error(ErrorCode::kUnknownQuestion, "unknown question '" + r.qid + "'");
  }
  const std::size_t n = questions_[it->second].options.size();
  if (r.choice >= n) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "choice " + std::to_string(r.choice) + " for " + r.qid +
                    " with " + std::to_string(n) + " options");
  }
}

void ResponseStore::Record(const SurveyResponse& response) {
  Validate(response);
  SurveyResponse r = response;
  if (r.timestamp_ms == 0) {
    r.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (log_path_) {
    log_ << ResponseToJson(r) << '\n';
    log_.flush();
    if (!log_) throw Error(ErrorCode::kMissingFile, "response log write failed");
  }
  latest_[{r.respondent, r.qid}] = std::move(r);
}

std::vector<SurveyResponse> ResponseStore::Responses() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<SurveyResponse> out;
  out.reserve(latest_.size());
  for (const auto& [key, r] : latest_) out.push_back(r);
  return out;
}

std::size_t ResponseStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return latest_.size();
}

void ResponseStore::Compact() {
  if (!log_path_) return;
  std::lock_guard<std::mutex> lock(mu_);
  const std::filesystem::path snapshot = log_path_->string() + ".snapshot";
  const std::filesystem::path tmp = snapshot.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& [key, r] : latest_) out << ResponseToJson(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kMissingFile, "snapshot write failed");
  }
  std::filesystem::rename(tmp, snapshot);
  log_.close();
  log_.open(*log_path_, std::ios::binary | std::ios::trunc);
}

double SurveyAggregate::Percent(SurveyTask task, Source source) const {
  const auto it = counts.find(task);
  if (respondents == 0 || it == counts.end()) return 0.0;
  return 100.0 * it->second[static_cast<std::size_t>(source)] /
         static_cast<double>(respondents * n_per_task);
}

double SurveyAggregate::TotalPercent(Source source) const {
  if (respondents == 0) return 0.0;
  return 100.0 * totals[static_cast<std::size_t>(source)] /
         static_cast<double>(respondents * n_per_task * kAllTasks.size());
}

std::string SurveyAggregate::FormatTable(std::string_view name_a,
                                         std::string_view name_b) const {
  const std::string names[] = {"gold", std::string(name_a), std::string(name_b)};
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s", "task");
  os << buf;
  for (const std::string& n : names) {
    std::snprintf(buf, sizeof(buf), " %18s", n.c_str());
    os << buf;
  }
  os << "\n";
  auto cell = [&](long count, double pct) {
    char c[64];
    std::snprintf(c, sizeof(c), "%ld (%.2f%%)", count, pct);
    std::snprintf(buf, sizeof(buf), " %18s", c);
    os << buf;
  };
  for (SurveyTask t : kAllTasks) {
    std::snprintf(buf, sizeof(buf), "%-8s", std::string(TaskName(t)).c_str());
    os << buf;
    const auto it = counts.find(t);
    for (Source s : kAllSources) {
      cell(it == counts.end() ? 0 : it->second[static_cast<std::size_t>(s)],
           Percent(t, s));
    }
    os << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%-8s", "total");
  os << buf;
  for (Source s : kAllSources) {
    cell(totals[static_cast<std::size_t>(s)], TotalPercent(s));
  }
  os << "\nrespondents: " << respondents << "\n";
  return os.str();
}

std::string SurveyAggregate::ToJson(std::string_view name_a,
                                    std::string_view name_b) const {
  const std::string names[] = {"gold", std::string(name_a), std::string(name_b)};
  auto round2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::stod(buf);
  };
  ordered_json j;
  j["respondents"] = respondents;
  j["n_per_task"] = n_per_task;
  ordered_json tasks;
  for (SurveyTask t : kAllTasks) {
    ordered_json row;
    const auto it = counts.find(t);
    const auto rit = responses.find(t);
    row["responses"] = rit == responses.end() ? 0 : rit->second;
    for (Source s : kAllSources) {
      ordered_json cell;
      cell["source"] = SourceName(s);
      cell["count"] = it == counts.end() ? 0 : it->second[static_cast<std::size_t>(s)];
      cell["percent"] = round2(Percent(t, s));
      row[names[static_cast<std::size_t>(s)]] = std::move(cell);
    }
    tasks[std::string(TaskName(t))] = std::move(row);
  }
  j["tasks"] = std::move(tasks);
  ordered_json total;
  for (Source s : kAllSources) {
    ordered_json cell;
    cell["source"] = SourceName(s);
    cell["count"] = totals[static_cast<std::size_t>(s)];
    cell["percent"] = round2(TotalPercent(s));
    total[names[static_cast<std::size_t>(s)]] = std::move(cell);
  }
  j["total"] = std::move(total);
  return Dump(j);
}

SurveyAggregate Aggregate(const std::vector<SurveyQuestion>& questions,
                          const std::vector<SurveyResponse>& responses,
                          std::size_t n_per_task) {
  SurveyAggregate agg;
  agg.n_per_task = n_per_task;
  for (SurveyTask t : kAllTasks) {
    agg.counts[t] = {0, 0, 0};
    agg.responses[t] = 0;
  }
  std::map<std::string, const SurveyQuestion*> by_qid;
  for (const SurveyQuestion& q : questions) by_qid[q.qid] = &q;
  std::set<std::string> respondents;
  // Latest timestamp wins per (respondent, qid); ties keep the larger
  // choice so the result never depends on input order.
  std::map<std::pair<std::string, std::string>, const SurveyResponse*> latest;
  for (const SurveyResponse& r : responses) {
    const auto it = by_qid.find(r.qid);
    if (it == by_qid.end() || r.choice >= it->second->options.size()) continue;
    const SurveyResponse*& slot = latest[{r.respondent, r.qid}];
    if (slot == nullptr || r.timestamp_ms > slot->timestamp_ms ||
        (r.timestamp_ms == slot->timestamp_ms && r.choice > slot->choice)) {
      slot = &r;
    }
  }
  for (const auto& [key, rp] : latest) {
    const SurveyResponse& r = *rp;
    const auto it = by_qid.find(r.qid);
    respondents.insert(r.respondent);
    const SurveyQuestion& q = *it->second;
    ++agg.responses[q.task];
    for (Source s : q.options[r.choice].sources) {
      ++agg.counts[q.task][static_cast<std::size_t>(s)];
      ++agg.totals[static_cast<std::size_t>(s)];
    }
  }
  agg.respondents = respondents.size();
  return agg;
}

}  // namespace lexsub
