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

// lexsub: command-line entry point for the substitution engine, importers,
// metrics, quality evaluations and the preference survey.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lexsub/backends.h"
#include "lexsub/corpus.h"
#include "lexsub/engine.h"
#include "lexsub/error.h"
#include "lexsub/lexicon.h"
#include "lexsub/metrics.h"
#include "lexsub/parallel.h"
#include "lexsub/quality_eval.h"
#include "lexsub/survey.h"
#include "lexsub/survey_server.h"
#include "lexsub/text.h"

namespace fs = std::filesystem;

namespace lexsub {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBackend = 2;
constexpr const char* kVersion = "0.1.0";

// Usage errors detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendFlags {
  std::string url;
  std::string fixture;
  std::string mask_marker = "<mask>";
  std::string separator = " </s></s> ";
  std::string model_id = "roberta-base";
};

struct EngineFlags {
  int k_raw = 30;
  int max_out = 10;
  std::string exclude_relations = "antonym";
  std::string lexicon;
};

void AddBackendFlags(CLI::App* app, BackendFlags& f) {
  app->add_option("--backend-url", f.url, "Fill-mask server base URL")
      ->envname("LEXSUB_BACKEND_URL");
  app->add_option("--fixture", f.fixture, "Canned backend mapping file (JSONL)")
      ->envname("LEXSUB_FIXTURE");
  app->add_option("--mask-marker", f.mask_marker, "Mask token of the model")
      ->envname("LEXSUB_MASK_MARKER")
      ->capture_default_str();
  app->add_option("--separator", f.separator,
                  "Text between the masked and original sentence")
      ->envname("LEXSUB_SEPARATOR")
      ->capture_default_str();
  app->add_option("--model-id", f.model_id, "Model id recorded in reports")
      ->envname("LEXSUB_MODEL_ID")
      ->capture_default_str();
}

void AddEngineFlags(CLI::App* app, EngineFlags& f) {
  app->add_option("--k-raw", f.k_raw, "Raw predictions requested per target")
      ->envname("LEXSUB_K_RAW")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--max-out", f.max_out, "Survivors kept per target")
      ->envname("LEXSUB_MAX_OUT")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--exclude-relations", f.exclude_relations,
                  "Comma-separated lexicon relations to filter (may be empty)")
      ->envname("LEXSUB_EXCLUDE_RELATIONS")
      ->capture_default_str();
  app->add_option("--lexicon", f.lexicon, "WordNet-format database directory")
      ->envname("LEXSUB_LEXICON");
}

// Owns whichever fill-mask backend the flags select.
struct FillMaskHandle {
  std::optional<FixtureBackends> fixtures;
  std::unique_ptr<HttpFillMaskBackend> http;
  const FillMaskBackend* backend = nullptr;
};

FillMaskHandle MakeFillMask(const BackendFlags& f) {
  FillMaskHandle h;
  if (!f.fixture.empty() && !f.url.empty()) {
    throw UsageError("--fixture and --backend-url are mutually exclusive");
  }
  if (!f.fixture.empty()) {
    h.fixtures = FixtureBackends::Load(f.fixture);
    h.backend = h.fixtures->fill_mask();
    if (h.backend == nullptr) {
      throw UsageError("fixture " + f.fixture + " declares no fill_mask backend");
    }
  } else if (!f.url.empty()) {
    BackendDescriptor d;
    d.capability = Capability::kFillMask;
    d.endpoint = f.url;
    d.mask_marker = f.mask_marker;
    d.separator = f.separator;
    d.model_id = f.model_id;
    h.http = std::make_unique<HttpFillMaskBackend>(d);
    h.backend = h.http.get();
  } else {
    throw UsageError("a backend is required: --fixture or --backend-url");
  }
  return h;
}

std::optional<Lexicon> MaybeLexicon(const EngineFlags& f) {
  if (f.lexicon.empty()) return std::nullopt;
  return Lexicon::Load(f.lexicon);
}

EngineOptions MakeEngineOptions(const EngineFlags& f) {
  EngineOptions o;
  o.k_raw = f.k_raw;
  o.postprocess.max_out = f.max_out;
  o.postprocess.excluded_relations = ParseRelationList(f.exclude_relations);
  return o;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << text;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!fs::is_regular_file(path) || !in) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path PrepareOutDir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out-dir is required");
  fs::create_directories(dir);
  return fs::path(dir);
}

// Echo of the resolved configuration; `lexsub --config <file>` re-runs it.
void WriteManifest(const CLI::App& app, const fs::path& out_dir) {
  std::ostringstream os;
  os << "# lexsub " << kVersion << " run manifest\n";
  // Only the subcommand chain that ran, as one section.
  const CLI::App* leaf = &app;
  std::string section;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    section += (section.empty() ? "" : ".") + leaf->get_name();
  }
  os << "[" << section << "]\n";
  // Unset options (empty values) are left out so validators accept the file.
  std::istringstream lines(leaf->config_to_str(true, false));
  for (std::string line; std::getline(lines, line);) {
    if (!line.ends_with("=\"\"")) os << line << "\n";
  }
  WriteText(out_dir / "manifest.toml", os.str());
}

PredictionFile GeneratePredictions(const std::vector<CanonicalRecord>& records,
                                   const SubstitutionEngine& engine, int jobs) {
  std::vector<std::vector<std::string>> lists(records.size());
  ParallelFor(records.size(), jobs, [&](std::size_t i) {
    lists[i] = engine.Substitute(records[i].instance).Survivors();
  });
  PredictionFile out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[records[i].instance.id] = NormalizePredictions(lists[i]);
  }
  return out;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!fs::is_regular_file(path) || !in) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

volatile std::sig_atomic_t g_stop_requested = 0;

void StopServer(int) { g_stop_requested = 1; }

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Lexical substitution with concatenated prompts"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Re-run from a manifest.toml");
  app.require_subcommand(1);

  BackendFlags backend;
  EngineFlags engine_flags;
  int jobs = 1;
  std::string out_dir;
  std::uint64_t seed = 0;

  // substitute
  auto* sub = app.add_subcommand("substitute", "Rank substitutes for one target");
  std::string sentence, target, span, pos_tag = "other", lemma;
  bool audit = false;
  sub->add_option("--sentence", sentence, "Sentence text")->required();
  sub->add_option("--target", target, "Target word (must occur once)");
  sub->add_option("--span", span, "Target span START:END in code points");
  sub->add_option("--pos", pos_tag, "Target POS tag (n, v, a, r, ...)")
      ->capture_default_str();
  sub->add_option("--lemma", lemma, "Target lemma (default: lowercase surface)");
  sub->add_flag("--audit", audit, "Also print removed candidates with reasons");
  AddBackendFlags(sub, backend);
  AddEngineFlags(sub, engine_flags);

  // import
  auto* imp = app.add_subcommand("import", "Convert a benchmark release");
  std::string kind, context_file, gold_file, input_file;
  double min_vote = 0.0;
  imp->add_option("kind", kind, "ls07, coinco or swords")
      ->required()
      ->check(CLI::IsMember({"ls07", "coinco", "swords"}));
  imp->add_option("--context", context_file, "LS07 context file");
  imp->add_option("--gold", gold_file, "LS07 gold file");
  imp->add_option("--input", input_file, "CoInCo XML or Swords JSON");
  imp->add_option("--min-vote", min_vote,
                  "Swords: minimum vote fraction (0 = Swords 1, 0.5 = Swords 5)")
      ->envname("LEXSUB_MIN_VOTE")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  imp->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");

  // eval
  auto* ev = app.add_subcommand("eval", "Score predictions against gold");
  std::string canonical, predictions_file;
  bool generate = false;
  bool exclude_multiword = false;
  std::size_t best_guesses = 1;
  ev->add_option("--canonical", canonical, "Canonical JSONL")->required();
  ev->add_option("--predictions", predictions_file, "Prediction JSONL");
  ev->add_flag("--generate", generate, "Run the engine to produce predictions");
  ev->add_option("--best-guesses", best_guesses,
                 "Predictions scored by best (prefix length)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ev->add_flag("--exclude-multiword-gold", exclude_multiword,
               "Drop multiword gold entries before scoring");
  ev->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  ev->add_option("--jobs", jobs, "Worker threads")
      ->envname("LEXSUB_JOBS")
      ->check(CLI::PositiveNumber);
  AddBackendFlags(ev, backend);
  AddEngineFlags(ev, engine_flags);

  // perturb
  auto* pt = app.add_subcommand("perturb", "Substitute a fraction of tokens");
  double fraction = 0.25;
  bool all_tokens = false;
  std::string stopwords_file;
  pt->add_option("--input", input_file, "Documents, one per line")->required();
  pt->add_option("--fraction", fraction, "Fraction of eligible tokens")
      ->envname("LEXSUB_FRACTION")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  pt->add_option("--seed", seed, "Sampling seed")
      ->envname("LEXSUB_SEED")
      ->capture_default_str();
  pt->add_flag("--all-tokens", all_tokens,
               "Every token is eligible (no length or stopword rule)");
  pt->add_option("--stopwords", stopwords_file, "Stopword file, one per line");
  pt->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  pt->add_option("--jobs", jobs, "Worker threads")
      ->envname("LEXSUB_JOBS")
      ->check(CLI::PositiveNumber);
  AddBackendFlags(pt, backend);
  AddEngineFlags(pt, engine_flags);

  // perplexity
  auto* pp = app.add_subcommand("perplexity", "Perplexity of substituted sentences");
  std::string score_url;
  double uniform_vocab = 0.0;
  pp->add_option("--canonical", canonical, "Canonical JSONL")->required();
  pp->add_option("--predictions", predictions_file, "Prediction JSONL")->required();
  pp->add_option("--fixture", backend.fixture, "Canned score backend (JSONL)")
      ->envname("LEXSUB_FIXTURE");
  pp->add_option("--score-url", score_url, "Score server base URL")
      ->envname("LEXSUB_SCORE_URL");
  pp->add_option("--uniform-vocab", uniform_vocab,
                 "Use a uniform scorer over this vocabulary size");
  pp->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  pp->add_option("--jobs", jobs, "Worker threads")
      ->envname("LEXSUB_JOBS")
      ->check(CLI::PositiveNumber);

  // similarity
  auto* sm = app.add_subcommand("similarity", "Top-1 / Random-1 cosine similarity");
  std::vector<std::string> embed_urls;
  sm->add_option("--canonical", canonical, "Canonical JSONL")->required();
  sm->add_option("--predictions", predictions_file, "Prediction JSONL")->required();
  sm->add_option("--fixture", backend.fixture, "Canned embed backends (JSONL)")
      ->envname("LEXSUB_FIXTURE");
  sm->add_option("--embed", embed_urls, "MODEL_ID=URL, repeatable");
  sm->add_option("--seed", seed, "Random-1 seed")
      ->envname("LEXSUB_SEED")
      ->capture_default_str();
  sm->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  sm->add_option("--jobs", jobs, "Worker threads")
      ->envname("LEXSUB_JOBS")
      ->check(CLI::PositiveNumber);

  // survey
  auto* sv = app.add_subcommand("survey", "Preference survey");
  sv->require_subcommand(1);
  std::string pred_a, pred_b, questions_file, log_file, admin_token, static_dir;
  std::string name_a = "system_a", name_b = "system_b", host = "127.0.0.1";
  std::size_t n_per_task = 15;
  int port = 8080;
  auto* sg = sv->add_subcommand("generate", "Sample survey questions");
  sg->add_option("--canonical", canonical, "Canonical JSONL")->required();
  sg->add_option("--pred-a", pred_a, "Predictions of system A")->required();
  sg->add_option("--pred-b", pred_b, "Predictions of system B")->required();
  sg->add_option("--n-per-task", n_per_task, "Questions per task")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sg->add_option("--seed", seed, "Sampling seed")
      ->envname("LEXSUB_SEED")
      ->capture_default_str();
  sg->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  auto* ss = sv->add_subcommand("serve", "Serve questions and collect responses");
  ss->add_option("--questions", questions_file, "questions.json")->required();
  ss->add_option("--host", host, "Bind address")->capture_default_str();
  ss->add_option("--port", port, "Port (0 = any free port)")
      ->envname("LEXSUB_PORT")
      ->capture_default_str();
  ss->add_option("--admin-token", admin_token, "Token for GET /aggregate")
      ->envname("LEXSUB_ADMIN_TOKEN");
  ss->add_option("--static-dir", static_dir, "Static front-end files");
  ss->add_option("--n-per-task", n_per_task, "Percentage base per respondent")
      ->capture_default_str();
  ss->add_option("--name-a", name_a, "Label of system A")->capture_default_str();
  ss->add_option("--name-b", name_b, "Label of system B")->capture_default_str();
  ss->add_option("--out-dir", out_dir, "Directory for the response log")
      ->required()
      ->envname("LEXSUB_OUT_DIR");
  auto* sx = sv->add_subcommand("export", "Aggregate a response log");
  sx->add_option("--questions", questions_file, "questions.json")->required();
  sx->add_option("--log", log_file, "Response log (JSONL)");
  sx->add_option("--n-per-task", n_per_task, "Percentage base per respondent")
      ->capture_default_str();
  sx->add_option("--name-a", name_a, "Label of system A")->capture_default_str();
  sx->add_option("--name-b", name_b, "Label of system B")->capture_default_str();
  sx->add_option("--out-dir", out_dir, "Output directory")
      ->required()
      ->envname("LEXSUB_OUT_DIR");

  // A manifest section selects its subcommand.
  for (CLI::App* c : {sub, imp, ev, pt, pp, sm, sv, sg, ss, sx}) {
    c->configurable();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sub->parsed()) {
      if (target.empty() == span.empty()) {
        throw UsageError("give exactly one of --target or --span");
      }
      const PartOfSpeech pos = PosFromTag(pos_tag);
      TargetInstance instance;
      if (!target.empty()) {
        instance = MakeInstance("cli", sentence, target, pos, lemma);
      } else {
        const auto colon = span.find(':');
        if (colon == std::string::npos) throw UsageError("--span must be START:END");
        instance.id = "cli";
        instance.sentence = sentence;
        instance.char_start = std::stoul(span.substr(0, colon));
        instance.char_end = std::stoul(span.substr(colon + 1));
        instance.surface = CodePointSubstr(sentence, instance.char_start,
                                           instance.char_end);
        instance.lemma = lemma.empty() ? CaseFold(instance.surface) : lemma;
        instance.pos = pos;
        instance.Validate();
      }
      if (instance.lemma.empty()) instance.lemma = CaseFold(instance.surface);
      const FillMaskHandle fm = MakeFillMask(backend);
      const auto lexicon = MaybeLexicon(engine_flags);
      const SubstitutionEngine engine(*fm.backend, lexicon ? &*lexicon : nullptr,
                                      MakeEngineOptions(engine_flags));
      const CandidateList list = engine.Substitute(instance);
      for (const Candidate& c : list.candidates) {
        if (c.survives()) std::printf("%d %s %.6f\n", c.rank, c.surface.c_str(), c.score);
      }
      if (audit) {
        for (const Candidate& c : list.candidates) {
          if (!c.survives()) {
            std::printf("removed %s %s\n", c.surface.c_str(),
                        std::string(RemovalReasonName(*c.removed_by)).c_str());
          }
        }
      }
      return kExitOk;
    }

    if (imp->parsed()) {
      ImportResult result;
      if (kind == "ls07") {
        if (context_file.empty() || gold_file.empty()) {
          throw UsageError("ls07 needs --context and --gold");
        }
        result = ImportLs07(context_file, gold_file);
      } else {
        if (input_file.empty()) throw UsageError(kind + " needs --input");
        result = kind == "coinco" ? ImportCoinco(input_file)
                                  : ImportSwords(input_file, min_vote);
      }
      const fs::path dir = PrepareOutDir(out_dir);
      WriteCanonical(dir / (kind + ".jsonl"), result.records);
      WriteText(dir / "import_report.txt", result.report.Summary());
      WriteText(dir / "import_report.kv", result.report.KeyValues());
      WriteManifest(app, dir);
      std::cout << result.report.Summary();
      return kExitOk;
    }

    if (ev->parsed()) {
      if (generate == !predictions_file.empty()) {
        throw UsageError("give exactly one of --predictions or --generate");
      }
      const auto records = ReadCanonical(canonical);
      const fs::path dir = PrepareOutDir(out_dir);
      PredictionFile predictions;
      if (generate) {
        const FillMaskHandle fm = MakeFillMask(backend);
        const auto lexicon = MaybeLexicon(engine_flags);
        const SubstitutionEngine engine(*fm.backend,
                                        lexicon ? &*lexicon : nullptr,
                                        MakeEngineOptions(engine_flags));
        predictions = GeneratePredictions(records, engine, jobs);
        WritePredictions(dir / "predictions.jsonl", predictions);
      } else {
        predictions = ReadPredictions(predictions_file);
      }
      std::size_t missing = 0;
      for (const CanonicalRecord& r : records) {
        if (!predictions.contains(r.instance.id)) ++missing;
      }
      if (missing > 0) {
        std::cerr << "warning: " << missing
                  << " instances have no predictions and are scored as "
                     "unanswered\n";
      }
      EvaluateOptions options;
      options.best_guesses = best_guesses;
      options.exclude_multiword_gold = exclude_multiword;
      const MetricReport report = Evaluate(records, predictions, options);
      WriteText(dir / "metrics.txt", report.FormatTable());
      WriteText(dir / "metrics.kv", report.FormatKeyValues());
      WriteManifest(app, dir);
      std::cout << report.FormatTable();
      return kExitOk;
    }

    if (pt->parsed()) {
      if (!(fraction > 0.0)) throw UsageError("--fraction must be in (0, 1]");
      std::set<std::string> stopwords = DefaultStopwords();
      if (!stopwords_file.empty()) {
        stopwords.clear();
        for (const std::string& w : ReadLines(stopwords_file)) {
          if (!Trim(w).empty()) stopwords.insert(CaseFold(Trim(w)));
        }
      }
      const auto documents = ReadLines(input_file);
      const fs::path dir = PrepareOutDir(out_dir);
      const FillMaskHandle fm = MakeFillMask(backend);
      const auto lexicon = MaybeLexicon(engine_flags);
      const SubstitutionEngine engine(*fm.backend, lexicon ? &*lexicon : nullptr,
                                      MakeEngineOptions(engine_flags));
      PerturbationConfig config;
      config.fraction = fraction;
      config.seed = seed;
      config.all_tokens = all_tokens;
      const PerturbationResult result =
          PerturbCorpus(documents, engine, config, stopwords, jobs);
      std::string text;
      for (const std::string& d : result.documents) text += d + "\n";
      WriteText(dir / "perturbed.txt", text);
      WriteText(dir / "perturb_manifest.tsv", ManifestTsv(result, config));
      WriteManifest(app, dir);
      std::cout << "documents: " << result.documents.size()
                << "\nreplacement attempts: " << result.manifest.size() << "\n";
      return kExitOk;
    }

    if (pp->parsed()) {
      const int sources = (!backend.fixture.empty()) + (!score_url.empty()) +
                          (uniform_vocab > 0.0);
      if (sources != 1) {
        throw UsageError(
            "give exactly one of --fixture, --score-url or --uniform-vocab");
      }
      const auto records = ReadCanonical(canonical);
      const auto predictions = ReadPredictions(predictions_file);
      const fs::path dir = PrepareOutDir(out_dir);
      std::optional<FixtureBackends> fixtures;
      std::unique_ptr<ScoreBackend> owned;
      const ScoreBackend* scorer = nullptr;
      if (!backend.fixture.empty()) {
        fixtures = FixtureBackends::Load(backend.fixture);
        scorer = fixtures->scorer();
        if (scorer == nullptr) throw UsageError("fixture declares no score backend");
      } else if (!score_url.empty()) {
        BackendDescriptor d;
        d.capability = Capability::kScore;
        d.endpoint = score_url;
        d.model_id = "remote";
        owned = std::make_unique<HttpScoreBackend>(d);
        scorer = owned.get();
      } else {
        owned = std::make_unique<UniformScorer>(uniform_vocab);
        scorer = owned.get();
      }
      const PerplexityReport report =
          ComputePerplexity(records, predictions, *scorer, jobs);
      WriteText(dir / "perplexity.txt", report.FormatTable());
      WriteText(dir / "perplexity.kv", report.FormatKeyValues());
      WriteManifest(app, dir);
      std::cout << report.FormatTable();
      return kExitOk;
    }

    if (sm->parsed()) {
      if (backend.fixture.empty() == embed_urls.empty()) {
        throw UsageError("give exactly one of --fixture or --embed");
      }
      const auto records = ReadCanonical(canonical);
      const auto predictions = ReadPredictions(predictions_file);
      const fs::path dir = PrepareOutDir(out_dir);
      std::optional<FixtureBackends> fixtures;
      std::vector<std::unique_ptr<EmbedBackend>> owned;
      std::vector<const EmbedBackend*> embedders;
      if (!backend.fixture.empty()) {
        fixtures = FixtureBackends::Load(backend.fixture);
        embedders = fixtures->embedders();
      } else {
        for (const std::string& spec : embed_urls) {
          const auto eq = spec.find('=');
          if (eq == std::string::npos) throw UsageError("--embed needs MODEL_ID=URL");
          BackendDescriptor d;
          d.capability = Capability::kEmbed;
          d.model_id = spec.substr(0, eq);
          d.endpoint = spec.substr(eq + 1);
          owned.push_back(std::make_unique<HttpEmbedBackend>(d));
          embedders.push_back(owned.back().get());
        }
      }
      if (embedders.empty()) throw UsageError("no embedding backends configured");
      const SimilarityResult result =
          SimilarityTop1Random1(records, predictions, embedders, seed, jobs);
      WriteText(dir / "similarity.txt",
                result.top1.FormatTable() + "\n" + result.random1.FormatTable());
      WriteText(dir / "similarity.kv",
                result.top1.FormatKeyValues() + result.random1.FormatKeyValues());
      WriteManifest(app, dir);
      std::cout << result.top1.FormatTable() << "\n" << result.random1.FormatTable();
      return kExitOk;
    }

    if (sg->parsed()) {
      const auto records = ReadCanonical(canonical);
      SurveyConfig config;
      config.n_per_task = n_per_task;
      config.seed = seed;
      const auto questions = GenerateSurvey(records, ReadPredictions(pred_a),
                                            ReadPredictions(pred_b), config);
      const fs::path dir = PrepareOutDir(out_dir);
      WriteText(dir / "questions.json", QuestionsToJson(questions, true) + "\n");
      WriteManifest(app, dir);
      std::cout << "questions: " << questions.size() << "\n";
      return kExitOk;
    }

    if (ss->parsed()) {
      const fs::path dir = PrepareOutDir(out_dir);
      ResponseStore store(QuestionsFromJson(ReadText(questions_file)),
                          dir / "responses.log");
      SurveyServerConfig config;
      config.host = host;
      config.port = port;
      config.admin_token = admin_token;
      config.name_a = name_a;
      config.name_b = name_b;
      config.n_per_task = n_per_task;
      if (!static_dir.empty()) config.static_dir = fs::path(static_dir);
      WriteManifest(app, dir);
      SurveyServer server(store, config);
      std::signal(SIGINT, StopServer);
      std::signal(SIGTERM, StopServer);
      const int bound = server.Start();
      std::cout << "listening on " << host << ":" << bound << std::endl;
      while (g_stop_requested == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      server.Stop();
      store.Compact();
      return kExitOk;
    }

    if (sx->parsed()) {
      const auto questions = QuestionsFromJson(ReadText(questions_file));
      std::vector<SurveyResponse> responses;
      if (!log_file.empty()) {
        // Snapshot first, then the log; a torn final line is skipped.
        std::vector<fs::path> parts;
        const fs::path snapshot = log_file + ".snapshot";
        if (fs::exists(snapshot)) parts.push_back(snapshot);
        if (fs::exists(log_file) || parts.empty()) parts.emplace_back(log_file);
        for (const fs::path& part : parts) {
          for (const std::string& line : ReadLines(part)) {
            if (Trim(line).empty()) continue;
            try {
              responses.push_back(ResponseFromJson(line));
            } catch (const Error& e) {
              std::cerr << "warning: skipped log line: " << e.what() << "\n";
            }
          }
        }
      }
      const SurveyAggregate agg = Aggregate(questions, responses, n_per_task);
      const fs::path dir = PrepareOutDir(out_dir);
      WriteText(dir / "aggregate.json", agg.ToJson(name_a, name_b) + "\n");
      WriteText(dir / "aggregate.txt", agg.FormatTable(name_a, name_b));
      WriteManifest(app, dir);
      std::cout << agg.FormatTable(name_a, name_b);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool backend_failure = e.code() == ErrorCode::kBackendUnavailable ||
                                 e.code() == ErrorCode::kBackendMalformed;
    return backend_failure ? kExitBackend : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lexsub

int main(int argc, char** argv) { return lexsub::Main(argc, argv); }
