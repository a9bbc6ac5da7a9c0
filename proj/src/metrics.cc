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

#include "lexsub/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lexsub/error.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

constexpr std::size_t kOotLimit = 10;

void RequireGuesses(const std::vector<std::string>& guesses) {
  if (guesses.empty()) throw Error(ErrorCode::kEmptyGuesses, "no guesses");
}

void RequireAtMostTen(const std::vector<std::string>& guesses) {
  if (guesses.size() > kOotLimit) {
    throw Error(ErrorCode::kTooManyGuesses,
                std::to_string(guesses.size()) + " guesses, limit is 10");
  }
}

int SumWeights(const GoldSet& gold, const std::vector<std::string>& guesses) {
  int sum = 0;
  for (const std::string& g : guesses) sum += gold.WeightOf(g);
  return sum;
}

std::vector<std::string> Prefix(const std::vector<std::string>& v,
                                std::size_t n) {
  return {v.begin(), v.begin() + std::min(n, v.size())};
}

}  // namespace

double BestScore(const GoldSet& gold, const std::vector<std::string>& guesses) {
  RequireGuesses(guesses);
  if (gold.total_weight() == 0) return 0.0;
  return static_cast<double>(SumWeights(gold, guesses)) /
         (static_cast<double>(guesses.size()) * gold.total_weight());
}

std::optional<double> BestModeScore(const GoldSet& gold,
                                    const std::vector<std::string>& guesses) {
  RequireGuesses(guesses);
  const auto mode = gold.mode();
  if (!mode) return std::nullopt;
  return CaseFold(guesses.front()) == *mode ? 1.0 : 0.0;
}

double OotScore(const GoldSet& gold, const std::vector<std::string>& guesses) {
  RequireAtMostTen(guesses);
  if (gold.total_weight() == 0) return 0.0;
  return static_cast<double>(SumWeights(gold, guesses)) / gold.total_weight();
}

std::optional<double> OotModeScore(const GoldSet& gold,
                                   const std::vector<std::string>& guesses) {
  RequireAtMostTen(guesses);
  const auto mode = gold.mode();
  if (!mode) return std::nullopt;
  for (const std::string& g : guesses) {
    if (CaseFold(g) == *mode) return 1.0;
  }
  return 0.0;
}

double PrecisionAtK(const GoldSet& gold,
                    const std::vector<std::string>& predictions, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::size_t n = std::min<std::size_t>(k, predictions.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.Contains(predictions[i])) return 1.0;
  }
  return 0.0;
}

T3cMmp ComputeT3cMmp(
    const std::vector<const GoldSet*>& golds,
    const std::vector<const std::vector<std::string>*>& predictions) {
  if (golds.size() != predictions.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "gold and prediction counts differ");
  }
  long hits = 0;
  long slots = 0;
  long misses = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto& p = *predictions[i];
    const std::size_t n = std::min<std::size_t>(3, p.size());
    int h = 0;
    for (std::size_t j = 0; j < n; ++j) h += golds[i]->Contains(p[j]) ? 1 : 0;
    hits += h;
    slots += static_cast<long>(n);
    if (h == 0) ++misses;
  }
  T3cMmp out;
  if (slots > 0) out.t3c = 100.0 * hits / slots;
  if (!golds.empty()) out.mmp = 100.0 * misses / golds.size();
  return out;
}

std::string FormatPercent(double value) {
  // Half-up; the slack absorbs binary error on exact .xx5 ratios.
  const double cents = std::floor(value * 100.0 + 0.5 + 1e-7);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", cents / 100.0);
  return buf;
}

std::string MetricReport::FormatTable() const {
  std::ostringstream os;
  os << "metric      value\n";
  auto row = [&](const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-10s %6s\n", name, FormatPercent(v).c_str());
    os << buf;
  };
  row("best", best);
  row("best-mode", best_mode);
  row("oot", oot);
  row("oot-mode", oot_mode);
  row("P@1", p_at_1);
  row("P@3", p_at_3);
  row("T3C", t3c);
  row("MMP", mmp);
  os << "instances  " << n_instances << " (with mode " << n_with_mode
     << ", unanswered " << n_unanswered << ")\n";
  return os.str();
}

std::string MetricReport::FormatKeyValues() const {
  std::ostringstream os;
  os << "best=" << FormatPercent(best) << "\n"
     << "best_mode=" << FormatPercent(best_mode) << "\n"
     << "oot=" << FormatPercent(oot) << "\n"
     << "oot_mode=" << FormatPercent(oot_mode) << "\n"
     << "p1=" << FormatPercent(p_at_1) << "\n"
     << "p3=" << FormatPercent(p_at_3) << "\n"
     << "t3c=" << FormatPercent(t3c) << "\n"
     << "mmp=" << FormatPercent(mmp) << "\n"
     << "n_instances=" << n_instances << "\n"
     << "n_with_mode=" << n_with_mode << "\n"
     << "n_unanswered=" << n_unanswered << "\n";
  return os.str();
}

MetricReport Evaluate(const std::vector<CanonicalRecord>& records,
                      const PredictionFile& predictions,
                      const EvaluateOptions& options) {
  if (options.best_guesses < 1) {
    throw Error(ErrorCode::kInvalidArgument, "best_guesses must be >= 1");
  }
  MetricReport report;
  double best = 0, best_mode = 0, oot = 0, oot_mode = 0, p1 = 0, p3 = 0;
  std::vector<GoldSet> golds;
  std::vector<std::vector<std::string>> lists;
  golds.reserve(records.size());
  lists.reserve(records.size());
  for (const CanonicalRecord& rec : records) {
    GoldSet gold = options.exclude_multiword_gold ? rec.gold.WithoutMultiword()
                                                  : rec.gold;
    if (gold.empty()) continue;
    InstanceScores s;
    s.id = rec.instance.id;
    const auto it = predictions.find(rec.instance.id);
    std::vector<std::string> preds;
    if (it != predictions.end()) preds = NormalizePredictions(it->second);
    s.answered = !preds.empty();
    const bool has_mode = gold.mode().has_value();
    if (has_mode) ++report.n_with_mode;
    if (s.answered) {
      s.best = BestScore(gold, Prefix(preds, options.best_guesses));
      s.best_mode = BestModeScore(gold, preds);
      s.oot = OotScore(gold, preds);
      s.oot_mode = OotModeScore(gold, preds);
      s.p1 = PrecisionAtK(gold, preds, 1);
      s.p3 = PrecisionAtK(gold, preds, 3);
    } else {
      ++report.n_unanswered;
      if (has_mode) {
        s.best_mode = 0.0;
        s.oot_mode = 0.0;
      }
    }
    for (std::size_t j = 0; j < std::min<std::size_t>(3, preds.size()); ++j) {
      s.top3_hits += gold.Contains(preds[j]) ? 1 : 0;
      ++s.top3_size;
    }
    best += s.best;
    oot += s.oot;
    best_mode += s.best_mode.value_or(0.0);
    oot_mode += s.oot_mode.value_or(0.0);
    p1 += s.p1;
    p3 += s.p3;
    golds.push_back(std::move(gold));
    lists.push_back(std::move(preds));
    report.per_instance.push_back(std::move(s));
  }
  report.n_instances = report.per_instance.size();
  if (report.n_instances > 0) {
    const double n = static_cast<double>(report.n_instances);
    report.best = 100.0 * best / n;
    report.oot = 100.0 * oot / n;
    report.p_at_1 = 100.0 * p1 / n;
    report.p_at_3 = 100.0 * p3 / n;
  }
  if (report.n_with_mode > 0) {
    const double m = static_cast<double>(report.n_with_mode);
    report.best_mode = 100.0 * best_mode / m;
    report.oot_mode = 100.0 * oot_mode / m;
  }
  std::vector<const GoldSet*> gp;
  std::vector<const std::vector<std::string>*> lp;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    gp.push_back(&golds[i]);
    lp.push_back(&lists[i]);
  }
  const T3cMmp tm = ComputeT3cMmp(gp, lp);
  report.t3c = tm.t3c;
  report.mmp = tm.mmp;
  return report;
}

}  // namespace lexsub
