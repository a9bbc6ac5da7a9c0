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

#ifndef LEXSUB_METRICS_H_
#define LEXSUB_METRICS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lexsub/corpus.h"

namespace lexsub {

// Per-instance scores below take lowercase, duplicate-free guesses.

// Sum of gold weights of the guesses over |guesses| * total weight.
// Throws kEmptyGuesses.
double BestScore(const GoldSet& gold, const std::vector<std::string>& guesses);

// nullopt when the gold set has no mode; otherwise 1 iff guesses[0] is the
// mode. Throws kEmptyGuesses.
std::optional<double> BestModeScore(const GoldSet& gold,
                                    const std::vector<std::string>& guesses);

// Sum of gold weights of up to ten guesses over the total weight.
// Throws kTooManyGuesses for more than ten.
double OotScore(const GoldSet& gold, const std::vector<std::string>& guesses);

// nullopt without a mode; otherwise 1 iff the mode is among the guesses.
// Throws kTooManyGuesses for more than ten.
std::optional<double> OotModeScore(const GoldSet& gold,
                                   const std::vector<std::string>& guesses);

// 1 iff one of the first min(k, n) predictions is a gold substitute.
// Throws kInvalidArgument for k < 1.
double PrecisionAtK(const GoldSet& gold,
                    const std::vector<std::string>& predictions, int k);

struct T3cMmp {
  double t3c = 0.0;  // percent
  double mmp = 0.0;  // percent
};
// Over paired gold sets and predictions, each truncated to three.
T3cMmp ComputeT3cMmp(const std::vector<const GoldSet*>& golds,
                     const std::vector<const std::vector<std::string>*>& predictions);

struct EvaluateOptions {
  std::size_t best_guesses = 1;    // best-list is predictions[0..n)
  bool exclude_multiword_gold = false;
};

struct InstanceScores {
  std::string id;
  bool answered = false;
  double best = 0.0;
  std::optional<double> best_mode;
  double oot = 0.0;
  std::optional<double> oot_mode;
  double p1 = 0.0;
  double p3 = 0.0;
  int top3_hits = 0;
  int top3_size = 0;
};

// Percentages in [0, 100], kept at full precision; Format* round to two
// decimals.
struct MetricReport {
  double best = 0.0;
  double best_mode = 0.0;
  double oot = 0.0;
  double oot_mode = 0.0;
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  double t3c = 0.0;
  double mmp = 0.0;
  std::size_t n_instances = 0;
  std::size_t n_with_mode = 0;
  std::size_t n_unanswered = 0;
  std::vector<InstanceScores> per_instance;

  std::string FormatTable() const;
  // "best=33.33\n..." with the stable key order best, best_mode, oot,
  // oot_mode, p1, p3, t3c, mmp, n_instances, n_with_mode, n_unanswered.
  std::string FormatKeyValues() const;
};

// Scores each record against its predictions. Records without predictions
// count as unanswered: zero credit, still in every denominator.
MetricReport Evaluate(const std::vector<CanonicalRecord>& records,
                      const PredictionFile& predictions,
                      const EvaluateOptions& options = {});

// Two-decimal rendering used by both report formats.
std::string FormatPercent(double value);

}  // namespace lexsub

#endif  // LEXSUB_METRICS_H_
