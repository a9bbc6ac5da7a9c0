# Copyright 2026 The lexsub Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Smoke tests for the lexsub Python module."""

import json
import os
from pathlib import Path

import pytest

import lexsub

DATA = Path(os.environ.get("LEXSUB_TEST_DATA_DIR", Path(__file__).parents[1] / "data"))
GOLDEN = DATA / "golden"


@pytest.fixture(scope="module")
def lexicon():
    return lexsub.Lexicon.load(DATA / "mini_wordnet")


@pytest.fixture(scope="module")
def imported():
    return lexsub.import_ls07(GOLDEN / "ls07.xml", GOLDEN / "ls07.gold")


def test_build_prompt():
    assert (
        lexsub.build_prompt("The cat sat on the mat.", "sat", "<M>", " | ")
        == "The cat <M> on the mat. | The cat sat on the mat."
    )


def test_lexicon_relations(lexicon):
    assert lexicon.entry_count == 6992
    rel = lexicon.relations("good", "adj")
    assert {"bad", "evil"} <= rel["antonym"]
    assert "run" in lexicon.lemmatize("ran", "verb")


def test_import_report(imported):
    assert len(imported["records"]) == 25
    first = json.loads(imported["records"][0])
    assert set(first) == {"id", "sentence", "target", "gold", "tags"}
    assert "records=25" in imported["report"]


def test_golden_end_to_end(lexicon, imported):
    engine = lexsub.Engine.from_fixture(GOLDEN / "fillmask.jsonl", lexicon)
    predictions = {}
    for line in imported["records"]:
        record = json.loads(line)
        predictions[record["id"]] = engine.substitute_record(line).survivors()
    metrics = lexsub.evaluate(imported["records"], predictions)
    expected = {}
    for row in (GOLDEN / "expected_metrics.kv").read_text().splitlines():
        key, value = row.split("=")
        expected[key] = float(value)
    for key, value in expected.items():
        assert round(metrics[key] + 1e-9, 2) == pytest.approx(value), key


def test_audit_reasons(lexicon):
    engine = lexsub.Engine.from_fixture(GOLDEN / "fillmask.jsonl", lexicon)
    out = engine.substitute("The food was good and cheap.", "good", pos="adj")
    survivors = out.survivors()
    assert 0 < len(survivors) <= 10
    assert [c.rank for c in out.candidates if c.removed_by is None] == list(
        range(1, len(survivors) + 1)
    )
    assert all(c.rank == 0 for c in out.candidates if c.removed_by is not None)


def test_errors_carry_code():
    with pytest.raises(lexsub.LexsubError, match="InvalidArgument"):
        lexsub.build_prompt("a b a", "a")
    with pytest.raises(lexsub.LexsubError, match="MissingFile"):
        lexsub.Lexicon.load("/nonexistent")


def test_uniform_perplexity(imported):
    predictions = {json.loads(l)["id"]: ["nice"] for l in imported["records"]}
    report = lexsub.perplexity_uniform(imported["records"], predictions, 1000)
    for key in ("baseline", "gold", "top10", "topmatch"):
        assert report[key] == pytest.approx(1000.0)
