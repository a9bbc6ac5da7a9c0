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

// Python bindings for the substitution engine and evaluation harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lexsub/backends.h"
#include "lexsub/corpus.h"
#include "lexsub/engine.h"
#include "lexsub/error.h"
#include "lexsub/lexicon.h"
#include "lexsub/metrics.h"
#include "lexsub/quality_eval.h"
#include "lexsub/types.h"

namespace py = pybind11;

namespace lexsub {
namespace {

// Owns the backend and lexicon that a SubstitutionEngine refers to.
class PyEngine {
 public:
  PyEngine(std::shared_ptr<const FillMaskBackend> backend,
           std::shared_ptr<FixtureBackends> fixture,
           std::shared_ptr<const Lexicon> lexicon, EngineOptions options)
      : backend_(std::move(backend)),
        fixture_(std::move(fixture)),
        lexicon_(std::move(lexicon)),
        engine_(*Backend(), lexicon_.get(), std::move(options)) {}

  CandidateList Substitute(const std::string& sentence,
                           const std::string& target, const std::string& pos,
                           const std::string& lemma,
                           const std::string& id) const {
    py::gil_scoped_release release;
    return engine_.Substitute(
        MakeInstance(id, sentence, target, PosFromName(pos), lemma));
  }

  CandidateList SubstituteRecord(const std::string& canonical_line) const {
    const CanonicalRecord r = ParseCanonicalLine(canonical_line);
    py::gil_scoped_release release;
    return engine_.Substitute(r.instance);
  }

  const SubstitutionEngine& engine() const { return engine_; }

 private:
  const FillMaskBackend* Backend() const {
    if (backend_) return backend_.get();
    if (fixture_ == nullptr || fixture_->fill_mask() == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fixture declares no fill_mask capability");
    }
    return fixture_->fill_mask();
  }

  std::shared_ptr<const FillMaskBackend> backend_;
  std::shared_ptr<FixtureBackends> fixture_;
  std::shared_ptr<const Lexicon> lexicon_;
  SubstitutionEngine engine_;
};

EngineOptions MakeOptions(int k_raw, int max_out,
                          const std::string& exclude_relations) {
  EngineOptions o;
  o.k_raw = k_raw;
  o.postprocess.max_out = max_out;
  o.postprocess.excluded_relations = ParseRelationList(exclude_relations);
  return o;
}

py::dict MetricsDict(const MetricReport& m) {
  py::dict d;
  d["best"] = m.best;
  d["best_mode"] = m.best_mode;
  d["oot"] = m.oot;
  d["oot_mode"] = m.oot_mode;
  d["p1"] = m.p_at_1;
  d["p3"] = m.p_at_3;
  d["t3c"] = m.t3c;
  d["mmp"] = m.mmp;
  d["n_instances"] = m.n_instances;
  d["n_with_mode"] = m.n_with_mode;
  d["n_unanswered"] = m.n_unanswered;
  return d;
}

py::dict ImportDict(const ImportResult& r) {
  std::vector<std::string> lines;
  lines.reserve(r.records.size());
  for (const auto& rec : r.records) lines.push_back(CanonicalLine(rec));
  py::dict d;
  d["records"] = lines;
  d["report"] = r.report.KeyValues();
  return d;
}

std::vector<CanonicalRecord> ParseRecords(const std::vector<std::string>& lines) {
  std::vector<CanonicalRecord> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(ParseCanonicalLine(l));
  return out;
}

PredictionFile Normalized(const PredictionFile& raw) {
  PredictionFile out;
  for (const auto& [id, list] : raw) out[id] = NormalizePredictions(list);
  return out;
}

}  // namespace
}  // namespace lexsub

PYBIND11_MODULE(_core, m) {
  using namespace lexsub;
  m.doc() = "Lexical substitution with concatenated prompts";
  m.attr("__version__") = "0.1.0";

  // Messages carry the error code name as a prefix.
  py::register_exception<Error>(m, "LexsubError", PyExc_RuntimeError);

  m.def(
      "build_prompt",
      [](const std::string& sentence, const std::string& target,
         const std::string& mask_marker, const std::string& separator) {
        return BuildPrompt(
                   MakeInstance("", sentence, target, PartOfSpeech::kOther),
                   mask_marker, separator)
            .text;
      },
      py::arg("sentence"), py::arg("target"),
      py::arg("mask_marker") = "<mask>", py::arg("separator") = " </s></s> ",
      "Masked sentence, separator, then the original sentence.");

  py::class_<Candidate>(m, "Candidate")
      .def_readonly("surface", &Candidate::surface)
      .def_readonly("score", &Candidate::score)
      .def_readonly("rank", &Candidate::rank)
      .def_property_readonly(
          "removed_by",
          [](const Candidate& c) -> std::optional<std::string> {
            if (!c.removed_by) return std::nullopt;
            return std::string(RemovalReasonName(*c.removed_by));
          })
      .def("__repr__", [](const Candidate& c) {
        return "Candidate('" + c.surface + "', rank=" + std::to_string(c.rank) +
               ")";
      });

  py::class_<CandidateList>(m, "CandidateList")
      .def_readonly("instance_id", &CandidateList::instance_id)
      .def_readonly("candidates", &CandidateList::candidates)
      .def("survivors", &CandidateList::Survivors);

  py::class_<Lexicon, std::shared_ptr<Lexicon>>(m, "Lexicon")
      .def_static(
          "load",
          [](const std::filesystem::path& dir) {
            return std::make_shared<Lexicon>(Lexicon::Load(dir));
          },
          py::arg("dir"))
      .def_property_readonly("entry_count", &Lexicon::entry_count)
      .def(
          "relations",
          [](const Lexicon& lex, const std::string& lemma,
             const std::string& pos) {
            const RelationSet rs = lex.Relations(lemma, PosFromName(pos));
            std::map<std::string, std::set<std::string>> out;
            for (Relation r : kAllRelations) {
              out[std::string(RelationName(r))] = rs[r];
            }
            return out;
          },
          py::arg("lemma"), py::arg("pos"))
      .def(
          "lemmatize",
          [](const Lexicon& lex, const std::string& surface,
             const std::string& pos) {
            return lex.Lemmatize(surface, PosFromName(pos));
          },
          py::arg("surface"), py::arg("pos"));

  py::class_<PyEngine>(m, "Engine")
      .def_static(
          "from_fixture",
          [](const std::filesystem::path& fixture,
             std::shared_ptr<Lexicon> lexicon, int k_raw, int max_out,
             const std::string& exclude_relations) {
            auto fx = std::make_shared<FixtureBackends>(
                FixtureBackends::Load(fixture));
            return std::make_unique<PyEngine>(
                nullptr, fx, lexicon,
                MakeOptions(k_raw, max_out, exclude_relations));
          },
          py::arg("fixture"), py::arg("lexicon") = nullptr,
          py::arg("k_raw") = 30, py::arg("max_out") = 10,
          py::arg("exclude_relations") = "antonym")
      .def_static(
          "from_url",
          [](const std::string& url, std::shared_ptr<Lexicon> lexicon,
             const std::string& model_id, const std::string& mask_marker,
             const std::string& separator, int k_raw, int max_out,
             const std::string& exclude_relations) {
            BackendDescriptor d;
            d.endpoint = url;
            d.model_id = model_id;
            d.mask_marker = mask_marker;
            d.separator = separator;
            return std::make_unique<PyEngine>(
                std::make_shared<HttpFillMaskBackend>(d), nullptr, lexicon,
                MakeOptions(k_raw, max_out, exclude_relations));
          },
          py::arg("url"), py::arg("lexicon") = nullptr,
          py::arg("model_id") = "roberta-base",
          py::arg("mask_marker") = "<mask>",
          py::arg("separator") = " </s></s> ", py::arg("k_raw") = 30,
          py::arg("max_out") = 10, py::arg("exclude_relations") = "antonym")
      .def("substitute", &PyEngine::Substitute, py::arg("sentence"),
           py::arg("target"), py::arg("pos") = "other", py::arg("lemma") = "",
           py::arg("id") = "")
      .def("substitute_record", &PyEngine::SubstituteRecord,
           py::arg("canonical_line"),
           "Substitutes for the target of one canonical record line.")
      .def(
          "perturb",
          [](const PyEngine& e, const std::vector<std::string>& documents,
             double fraction, std::uint64_t seed, bool all_tokens, int jobs) {
            PerturbationConfig c;
            c.fraction = fraction;
            c.seed = seed;
            c.all_tokens = all_tokens;
            py::gil_scoped_release release;
            const PerturbationResult r = PerturbCorpus(
                documents, e.engine(), c, DefaultStopwords(), jobs);
            return std::make_pair(r.documents, ManifestTsv(r, c));
          },
          py::arg("documents"), py::arg("fraction") = 0.25,
          py::arg("seed") = 0, py::arg("all_tokens") = false,
          py::arg("jobs") = 1,
          "Returns (perturbed documents, manifest TSV).");

  m.def(
      "import_ls07",
      [](const std::filesystem::path& context, const std::filesystem::path& gold) {
        return ImportDict(ImportLs07(context, gold));
      },
      py::arg("context"), py::arg("gold"));
  m.def(
      "import_coinco",
      [](const std::filesystem::path& xml) { return ImportDict(ImportCoinco(xml)); },
      py::arg("xml"));
  m.def(
      "import_swords",
      [](const std::filesystem::path& json, double min_vote_fraction) {
        return ImportDict(ImportSwords(json, min_vote_fraction));
      },
      py::arg("json"), py::arg("min_vote_fraction") = 0.0);

  m.def(
      "evaluate",
      [](const std::vector<std::string>& records, const PredictionFile& predictions,
         std::size_t best_guesses, bool exclude_multiword_gold) {
        EvaluateOptions o;
        o.best_guesses = best_guesses;
        o.exclude_multiword_gold = exclude_multiword_gold;
        return MetricsDict(
            Evaluate(ParseRecords(records), Normalized(predictions), o));
      },
      py::arg("records"), py::arg("predictions"), py::arg("best_guesses") = 1,
      py::arg("exclude_multiword_gold") = false,
      "Scores canonical record lines against id -> ranked substitutes.");

  m.def(
      "perplexity_uniform",
      [](const std::vector<std::string>& records, const PredictionFile& predictions,
         double vocab_size) {
        const UniformScorer scorer(vocab_size);
        const PerplexityReport r = ComputePerplexity(
            ParseRecords(records), Normalized(predictions), scorer);
        py::dict d;
        d["baseline"] = r.baseline.mean;
        d["gold"] = r.gold.mean;
        d["top10"] = r.top10.mean;
        d["topmatch"] = r.topmatch.mean;
        d["n_instances"] = r.n_instances;
        return d;
      },
      py::arg("records"), py::arg("predictions"), py::arg("vocab_size"));
}
