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

"""Reference model server speaking the lexsub backend wire protocol.

POST /fill-mask {"text", "top_k"} -> {"predictions": [{"token", "logprob"}]}
POST /score     {"text"}          -> {"nll_sum", "token_count"}
POST /embed     {"texts"}         -> {"vectors": [[...], ...]}

Models load lazily from the Hugging Face hub (or a local path):

    python tools/sidecar.py --port 8500 --fill-mask roberta-base --score gpt2
"""

import argparse
import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class TransformersModels:
    """fill_mask, score and embed backed by transformers models."""

    def __init__(self, fill_mask=None, score=None, embed=None, device="cpu"):
        self._names = {"fill_mask": fill_mask, "score": score, "embed": embed}
        self._device = device
        self._loaded = {}
        self._lock = threading.Lock()

    def capabilities(self):
        return sorted(k for k, v in self._names.items() if v)

    def _get(self, kind):
        with self._lock:
            if kind not in self._loaded:
                name = self._names.get(kind)
                if not name:
                    raise LookupError(f"no {kind} model configured")
                self._loaded[kind] = self._load(kind, name)
            return self._loaded[kind]

    def _load(self, kind, name):
        import torch  # noqa: F401
        from transformers import (
            AutoModel,
            AutoModelForCausalLM,
            AutoModelForMaskedLM,
            AutoTokenizer,
        )

        tok = AutoTokenizer.from_pretrained(name)
        cls = {
            "fill_mask": AutoModelForMaskedLM,
            "score": AutoModelForCausalLM,
            "embed": AutoModel,
        }[kind]
        model = cls.from_pretrained(name).to(self._device).eval()
        return tok, model

    def fill_mask(self, text, top_k):
        import torch

        tok, model = self._get("fill_mask")
        enc = tok(text, return_tensors="pt", truncation=True).to(self._device)
        positions = (enc["input_ids"][0] == tok.mask_token_id).nonzero()
        if len(positions) != 1:
            raise ValueError("text must contain exactly one mask token")
        with torch.no_grad():
            logits = model(**enc).logits[0, positions[0, 0]]
        logprobs = torch.log_softmax(logits.float(), dim=-1)
        values, ids = logprobs.topk(top_k)
        tokens = tok.convert_ids_to_tokens(ids.tolist())
        return list(zip(tokens, values.tolist()))

    def score(self, text):
        import torch

        tok, model = self._get("score")
        ids = tok(text, return_tensors="pt")["input_ids"].to(self._device)
        if ids.shape[1] == 0:
            raise ValueError("text has no tokens")
        # Condition the first token on the beginning-of-text marker.
        bos = torch.tensor([[tok.bos_token_id]], device=self._device)
        full = torch.cat([bos, ids], dim=1)
        with torch.no_grad():
            logits = model(full).logits[0, :-1].float()
        logprobs = torch.log_softmax(logits, dim=-1)
        nll = -logprobs.gather(1, full[0, 1:].unsqueeze(1)).sum().item()
        return nll, int(ids.shape[1])

    def embed(self, texts):
        import torch

        tok, model = self._get("embed")
        enc = tok(texts, return_tensors="pt", padding=True, truncation=True).to(
            self._device
        )
        with torch.no_grad():
            hidden = model(**enc).last_hidden_state
        mask = enc["attention_mask"].unsqueeze(-1).float()
        pooled = (hidden * mask).sum(1) / mask.sum(1)
        return pooled.tolist()


def _finite(x):
    return isinstance(x, (int, float)) and math.isfinite(x)


def make_handler(models):
    """Request handler class bound to `models`."""

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _send(self, status, payload):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._send(200, {"status": "ok"})
            else:
                self._send(404, {"error": "NotFound"})

        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            try:
                req = json.loads(self.rfile.read(length) or b"null")
                if not isinstance(req, dict):
                    raise ValueError("body must be a JSON object")
                if self.path == "/fill-mask":
                    top_k = int(req["top_k"])
                    if top_k < 1:
                        raise ValueError("top_k must be >= 1")
                    preds = models.fill_mask(str(req["text"]), top_k)
                    out = {
                        "predictions": [
                            {"token": t, "logprob": min(0.0, float(lp))}
                            for t, lp in preds
                            if _finite(lp)
                        ]
                    }
                elif self.path == "/score":
                    nll, count = models.score(str(req["text"]))
                    out = {"nll_sum": max(0.0, float(nll)), "token_count": int(count)}
                elif self.path == "/embed":
                    texts = [str(t) for t in req["texts"]]
                    out = {"vectors": [[float(v) for v in row] for row in models.embed(texts)]}
                else:
                    self._send(404, {"error": "NotFound"})
                    return
            except (KeyError, TypeError, ValueError) as e:
                self._send(400, {"error": "BadRequest", "message": str(e)})
                return
            except LookupError as e:
                self._send(404, {"error": "NotConfigured", "message": str(e)})
                return
            except Exception as e:  # model failure: let the client retry
                self._send(503, {"error": "Unavailable", "message": str(e)})
                return
            self._send(200, out)

    return Handler


def make_server(models, host="127.0.0.1", port=0):
    return ThreadingHTTPServer((host, port), make_handler(models))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8500)
    parser.add_argument("--fill-mask", default="roberta-base")
    parser.add_argument("--score", default="gpt2")
    parser.add_argument("--embed", default=None)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args()
    models = TransformersModels(args.fill_mask, args.score, args.embed, args.device)
    server = make_server(models, args.host, args.port)
    print(f"listening on {args.host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    server.server_close()


if __name__ == "__main__":
    main()
