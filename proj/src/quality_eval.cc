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

#include "lexsub/quality_eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include "lexsub/error.h"
#include "lexsub/parallel.h"
#include "lexsub/random.h"
#include "lexsub/text.h"

namespace lexsub {
namespace {

constexpr std::size_t kEmbedBatch = 64;

std::string Pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Embeds each distinct text once per backend.
std::unordered_map<std::string, std::vector<double>> EmbedAll(
    const EmbedBackend& backend, const std::vector<std::string>& texts,
    int jobs) {
  std::vector<std::string> unique = texts;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  const std::size_t batches = (unique.size() + kEmbedBatch - 1) / kEmbedBatch;
  std::vector<std::vector<std::vector<double>>> out(batches);
  ParallelFor(batches, jobs, [&](std::size_t b) {
    const auto first = unique.begin() + b * kEmbedBatch;
    const auto last = unique.begin() +
                      std::min(unique.size(), (b + 1) * kEmbedBatch);
    out[b] = backend.Embed(std::vector<std::string>(first, last));
    if (out[b].size() != static_cast<std::size_t>(last - first)) {
      throw Error(ErrorCode::kBackendMalformed, "embedding count mismatch");
    }
  });
  std::unordered_map<std::string, std::vector<double>> map;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    map.emplace(unique[i], std::move(out[i / kEmbedBatch][i % kEmbedBatch]));
  }
  return map;
}

// Whitespace-delimited token with its byte span and core span.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t core_begin = 0;
  std::size_t core_end = 0;
};

std::vector<Token> Tokenize(std::string_view doc) {
  std::vector<Token> out;
  const std::vector<char32_t> cps = DecodeUtf8(doc);
  std::size_t byte = 0;
  std::vector<std::size_t> offsets;  // byte offset of each code point
  offsets.reserve(cps.size() + 1);
  for (char32_t c : cps) {
    offsets.push_back(byte);
    byte += EncodeUtf8(std::u32string(1, c)).size();
  }
  offsets.push_back(byte);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && IsSpace(cps[i])) ++i;
    if (i == cps.size()) break;
    std::size_t j = i;
    while (j < cps.size() && !IsSpace(cps[j])) ++j;
    std::size_t cb = i;
    std::size_t ce = j;
    while (cb < ce && !IsLetter(cps[cb])) ++cb;
    while (ce > cb && !IsLetter(cps[ce - 1])) --ce;
    out.push_back({offsets[i], offsets[j], offsets[cb], offsets[ce]});
    i = j;
  }
  return out;
}

}  // namespace

std::string SubstituteInSentence(const TargetInstance& instance,
                                 std::string_view substitute) {
  if (Trim(substitute).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty substitute");
  }
  const std::size_t b = ByteOffset(instance.sentence, instance.char_start);
  const std::size_t e = ByteOffset(instance.sentence, instance.char_end);
  const std::vector<char32_t> before =
      DecodeUtf8(std::string_view(instance.sentence).substr(0, b));
  const bool initial = std::none_of(before.begin(), before.end(), IsLetter);
  std::string sub(substitute);
  if (initial && StartsWithUpper(instance.sentence.substr(b, e - b))) {
    sub = CapitalizeFirst(sub);
  }
  return instance.sentence.substr(0, b) + sub + instance.sentence.substr(e);
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kBackendMalformed, "vector dimensions differ");
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string SimilarityReport::FormatTable() const {
  std::ostringstream os;
  os << "setting: " << setting << " (" << n_pairs << " instances)\n";
  os << "model                      gold   system\n";
  for (const SimilarityColumn& c : columns) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-24s %7s %7s\n", c.model_id.c_str(),
                  Pct(c.gold).c_str(), Pct(c.system).c_str());
    os << buf;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-24s %7s %7s\n", "average",
                Pct(gold_average).c_str(), Pct(system_average).c_str());
  os << buf;
  return os.str();
}

std::string SimilarityReport::FormatKeyValues() const {
  std::ostringstream os;
  for (const SimilarityColumn& c : columns) {
    os << setting << "." << c.model_id << ".gold=" << Pct(c.gold) << "\n"
       << setting << "." << c.model_id << ".system=" << Pct(c.system) << "\n";
  }
  os << setting << ".average.gold=" << Pct(gold_average) << "\n"
     << setting << ".average.system=" << Pct(system_average) << "\n"
     << setting << ".n_pairs=" << n_pairs << "\n"
     << setting << ".n_skipped=" << n_skipped << "\n";
  return os.str();
}

SimilarityResult SimilarityTop1Random1(
    const std::vector<CanonicalRecord>& records,
    const PredictionFile& predictions,
    const std::vector<const EmbedBackend*>& embedders, std::uint64_t seed,
    int jobs) {
  if (embedders.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no embedding backends");
  }
  struct Pair {
    std::string original, gold_top1, sys_top1, gold_rand, sys_rand;
  };
  std::vector<Pair> pairs;
  std::size_t skipped = 0;
  SeededRng rng(seed);
  for (const CanonicalRecord& rec : records) {
    const auto it = predictions.find(rec.instance.id);
    if (it == predictions.end() || it->second.empty() || rec.gold.empty()) {
      ++skipped;
      continue;
    }
    const auto& preds = it->second;
    const auto gold = rec.gold.ByWeight();
    const std::uint64_t draw = rng.Next();
    Pair p;
    p.original = rec.instance.sentence;
    p.gold_top1 = SubstituteInSentence(rec.instance, gold.front().substitute);
    p.sys_top1 = SubstituteInSentence(rec.instance, preds.front());
    p.gold_rand =
        SubstituteInSentence(rec.instance, gold[draw % gold.size()].substitute);
    p.sys_rand = SubstituteInSentence(rec.instance, preds[draw % preds.size()]);
    pairs.push_back(std::move(p));
  }
  std::vector<std::string> texts;
  for (const Pair& p : pairs) {
    texts.insert(texts.end(), {p.original, p.gold_top1, p.sys_top1,
                               p.gold_rand, p.sys_rand});
  }

  SimilarityResult result;
  result.top1.setting = "top1";
  result.random1.setting = "random1";
  for (SimilarityReport* r : {&result.top1, &result.random1}) {
    r->n_pairs = pairs.size();
    r->n_skipped = skipped;
  }
  for (const EmbedBackend* backend : embedders) {
    const auto vec = EmbedAll(*backend, texts, jobs);
    auto cos = [&](const std::string& a, const std::string& b) {
      return Cosine(vec.at(a), vec.at(b));
    };
    double g1 = 0, s1 = 0, gr = 0, sr = 0;
    for (const Pair& p : pairs) {
      g1 += cos(p.original, p.gold_top1);
      s1 += cos(p.original, p.sys_top1);
      gr += cos(p.original, p.gold_rand);
      sr += cos(p.original, p.sys_rand);
    }
    const double n = pairs.empty() ? 1.0 : static_cast<double>(pairs.size());
    const std::string& id = backend->descriptor().model_id;
    result.top1.columns.push_back({id, g1 / n, s1 / n});
    result.random1.columns.push_back({id, gr / n, sr / n});
  }
  for (SimilarityReport* r : {&result.top1, &result.random1}) {
    for (const SimilarityColumn& c : r->columns) {
      r->gold_average += c.gold;
      r->system_average += c.system;
    }
    r->gold_average /= static_cast<double>(r->columns.size());
    r->system_average /= static_cast<double>(r->columns.size());
  }
  return result;
}

const std::set<std::string>& DefaultStopwords() {
  static const std::set<std::string> kWords = {
      "a", "about", "above", "after", "again", "against", "ain", "all", "am",
      "an", "and", "any", "are", "aren", "as", "at", "be", "because", "been",
      "before", "being", "below", "between", "both", "but", "by", "can",
      "couldn", "did", "didn", "do", "does", "doesn", "doing", "don", "down",
      "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
      "hasn", "have", "haven", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "i", "if", "in", "into",
      "is", "isn", "it", "its", "itself", "just", "ll", "ma", "me",
      "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor",
      "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
      "ours", "ourselves", "out", "over", "own", "re", "same", "shan", "she",
      "should", "shouldn", "so", "some", "such", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these",
      "they", "this", "those", "through", "to", "too", "under", "until", "up",
      "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when",
      "where", "which", "while", "who", "whom", "why", "will", "with", "won",
      "wouldn", "you", "your", "yours", "yourself", "yourselves", "also",
      "could", "would", "might", "must", "shall", "may", "said", "says",
      "one", "two", "new", "its", "it's", "via", "per"};
  return kWords;
}

bool IsEligibleToken(std::string_view core,
                     const std::set<std::string>& stopwords) {
  const std::vector<char32_t> cps = DecodeUtf8(core);
  if (cps.size() < 3) return false;
  if (!std::all_of(cps.begin(), cps.end(), IsLetter)) return false;
  return !stopwords.contains(CaseFold(core));
}

PerturbationResult PerturbCorpus(const std::vector<std::string>& documents,
                                 const SubstitutionEngine& engine,
                                 const PerturbationConfig& config,
                                 const std::set<std::string>& stopwords,
                                 int jobs) {
  if (!(config.fraction > 0.0 && config.fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fraction must be in (0, 1]");
  }
  struct Job {
    std::size_t doc;
    std::size_t token;
    TargetInstance instance;
  };
  PerturbationResult result;
  std::vector<std::vector<Token>> tokens(documents.size());
  std::vector<Job> work;
  SeededRng rng(config.seed);
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const std::string& doc = documents[d];
    tokens[d] = Tokenize(doc);
    std::vector<std::size_t> eligible;
    for (std::size_t t = 0; t < tokens[d].size(); ++t) {
      const Token& tok = tokens[d][t];
      const std::string_view core = std::string_view(doc).substr(
          tok.core_begin, tok.core_end - tok.core_begin);
      if (core.empty()) continue;
      if (config.all_tokens || IsEligibleToken(core, stopwords)) {
        eligible.push_back(t);
      }
    }
    result.eligible.push_back(eligible.size());
    const std::size_t count = std::min<std::size_t>(
        eligible.size(),
        static_cast<std::size_t>(
            std::ceil(config.fraction * eligible.size() - 1e-9)));
    for (std::size_t pick : rng.SampleWithoutReplacement(eligible.size(), count)) {
      const std::size_t t = eligible[pick];
      const Token& tok = tokens[d][t];
      Job job{d, t, {}};
      job.instance.id = std::to_string(d) + ":" + std::to_string(t);
      job.instance.sentence = doc;
      job.instance.char_start =
          CodePointCount(std::string_view(doc).substr(0, tok.core_begin));
      job.instance.surface = doc.substr(tok.core_begin, tok.core_end - tok.core_begin);
      job.instance.char_end =
          job.instance.char_start + CodePointCount(job.instance.surface);
      job.instance.lemma = CaseFold(job.instance.surface);
      job.instance.pos = PartOfSpeech::kOther;
      work.push_back(std::move(job));
    }
  }

  std::vector<std::string> replacement(work.size());
  ParallelFor(work.size(), jobs, [&](std::size_t i) {
    const auto survivors = engine.Substitute(work[i].instance).Survivors();
    const std::string& orig = work[i].instance.surface;
    if (survivors.empty()) {
      replacement[i] = orig;
    } else {
      replacement[i] = StartsWithUpper(orig) ? CapitalizeFirst(survivors.front())
                                             : survivors.front();
    }
  });

  // Apply per document, right to left so byte offsets stay valid.
  result.documents = documents;
  std::vector<std::vector<std::size_t>> by_doc(documents.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    by_doc[work[i].doc].push_back(i);
    result.manifest.push_back({work[i].doc, work[i].token,
                               work[i].instance.surface, replacement[i]});
  }
  for (std::size_t d = 0; d < documents.size(); ++d) {
    std::vector<std::size_t> order = by_doc[d];
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return work[a].token > work[b].token;
    });
    for (std::size_t i : order) {
      const Token& tok = tokens[d][work[i].token];
      result.documents[d].replace(tok.core_begin, tok.core_end - tok.core_begin,
                                  replacement[i]);
    }
  }
  return result;
}

std::string ManifestTsv(const PerturbationResult& result,
                        const PerturbationConfig& config) {
  std::ostringstream os;
  char frac[32];
  std::snprintf(frac, sizeof(frac), "%.17g", config.fraction);
  os << "# seed=" << config.seed << "\tfraction=" << frac
     << "\tall_tokens=" << (config.all_tokens ? "true" : "false")
     << "\tstopwords=v" << kStopwordListVersion << "\n";
  os << "doc\ttoken\toriginal\treplacement\n";
  for (const PerturbationEdit& e : result.manifest) {
    os << e.doc << "\t" << e.token << "\t" << e.original << "\t"
       << e.replacement << "\n";
  }
  return os.str();
}

double SentencePerplexity(const ScoreResult& score) {
  if (score.token_count < 1) {
    throw Error(ErrorCode::kZeroTokens, "token_count must be >= 1");
  }
  return std::exp(score.nll_sum / static_cast<double>(score.token_count));
}

std::string PerplexityReport::FormatTable() const {
  std::ostringstream os;
  os << "column      perplexity  sentences\n";
  auto row = [&](const char* name, const PerplexityColumn& c) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s %11s %10zu\n", name,
                  Num(c.mean).c_str(), c.n_sentences);
    os << buf;
  };
  row("baseline", baseline);
  row("gold", gold);
  row("top10", top10);
  row("topmatch", topmatch);
  os << "instances  " << n_instances << " (skipped " << n_skipped << ")\n";
  return os.str();
}

std::string PerplexityReport::FormatKeyValues() const {
  std::ostringstream os;
  os << "baseline=" << Num(baseline.mean) << "\n"
     << "gold=" << Num(gold.mean) << "\n"
     << "top10=" << Num(top10.mean) << "\n"
     << "topmatch=" << Num(topmatch.mean) << "\n"
     << "n_instances=" << n_instances << "\n"
     << "n_skipped=" << n_skipped << "\n";
  return os.str();
}

PerplexityReport ComputePerplexity(const std::vector<CanonicalRecord>& records,
                                   const PredictionFile& predictions,
                                   const ScoreBackend& scorer, int jobs) {
  PerplexityReport report;
  std::vector<const CanonicalRecord*> used;
  for (const CanonicalRecord& rec : records) {
    const auto it = predictions.find(rec.instance.id);
    if (it == predictions.end() || it->second.empty() || rec.gold.empty()) {
      ++report.n_skipped;
      continue;
    }
    PerplexityInstance inst;
    inst.id = rec.instance.id;
    for (const GoldEntry& g : rec.gold.entries()) {
      inst.gold_sentences.push_back(SubstituteInSentence(rec.instance, g.substitute));
    }
    const auto& preds = it->second;
    const std::size_t n10 = std::min<std::size_t>(kMaxPredictions, preds.size());
    const std::size_t k = std::min(rec.gold.size(), n10);
    for (std::size_t i = 0; i < n10; ++i) {
      inst.top10_sentences.push_back(SubstituteInSentence(rec.instance, preds[i]));
    }
    inst.topmatch_sentences.assign(inst.top10_sentences.begin(),
                                   inst.top10_sentences.begin() + k);
    report.per_instance.push_back(std::move(inst));
    used.push_back(&rec);
  }

  std::vector<std::string> unique;
  for (std::size_t i = 0; i < used.size(); ++i) {
    const PerplexityInstance& inst = report.per_instance[i];
    unique.push_back(used[i]->instance.sentence);
    unique.insert(unique.end(), inst.gold_sentences.begin(),
                  inst.gold_sentences.end());
    unique.insert(unique.end(), inst.top10_sentences.begin(),
                  inst.top10_sentences.end());
  }
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> ppl(unique.size());
  ParallelFor(unique.size(), jobs, [&](std::size_t i) {
    ppl[i] = SentencePerplexity(scorer.Score(unique[i]));
  });
  auto lookup = [&](const std::string& s) {
    const auto it = std::lower_bound(unique.begin(), unique.end(), s);
    return ppl[static_cast<std::size_t>(it - unique.begin())];
  };
  auto mean = [&](const std::vector<std::string>& sentences) {
    double sum = 0;
    for (const std::string& s : sentences) sum += lookup(s);
    return sum / static_cast<double>(sentences.size());
  };

  for (std::size_t i = 0; i < used.size(); ++i) {
    PerplexityInstance& inst = report.per_instance[i];
    inst.baseline = lookup(used[i]->instance.sentence);
    inst.gold = mean(inst.gold_sentences);
    inst.top10 = mean(inst.top10_sentences);
    inst.topmatch = mean(inst.topmatch_sentences);
    report.baseline.mean += inst.baseline;
    report.gold.mean += inst.gold;
    report.top10.mean += inst.top10;
    report.topmatch.mean += inst.topmatch;
    report.baseline.n_sentences += 1;
    report.gold.n_sentences += inst.gold_sentences.size();
    report.top10.n_sentences += inst.top10_sentences.size();
    report.topmatch.n_sentences += inst.topmatch_sentences.size();
  }
  report.n_instances = used.size();
  if (!used.empty()) {
    const double n = static_cast<double>(used.size());
    report.baseline.mean /= n;
    report.gold.mean /= n;
    report.top10.mean /= n;
    report.topmatch.mean /= n;
  }
  return report;
}

}  // namespace lexsub
