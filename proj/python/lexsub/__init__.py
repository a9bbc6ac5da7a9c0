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

"""Lexical substitution with concatenated prompts."""

from lexsub._core import (
    Candidate,
    CandidateList,
    Engine,
    Lexicon,
    LexsubError,
    __version__,
    build_prompt,
    evaluate,
    import_coinco,
    import_ls07,
    import_swords,
    perplexity_uniform,
)

__all__ = [
    "Candidate",
    "CandidateList",
    "Engine",
    "Lexicon",
    "LexsubError",
    "__version__",
    "build_prompt",
    "evaluate",
    "import_coinco",
    "import_ls07",
    "import_swords",
    "perplexity_uniform",
]
