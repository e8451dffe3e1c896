"""Paraphrase-model provider protocol: in-process stub, HTTP, and stdio.

Requests are ``{"op": ..., "text": ..., "params": {...}}`` and responses are
``{"outputs": [...], "model_id": ..., "latency_ms": ...}``. Over HTTP the
request is POSTed to /v1/transform and GET /v1/health reports liveness; over
stdio each request and response is one JSON line. The stub implements every op
with small deterministic rules so the whole pipeline runs offline; the rules
are documented per op because tests apply them by hand.
"""
from __future__ import annotations

import json
import shlex
import subprocess

import numpy as np

from .encoder import fnv1a64
from .errors import ProviderMalformedResponse, ProviderUnavailable
from .text import (is_number_surface, normalize_space, replace_spans,
                   smart_join, split_sentences, tokenize)

OPS = ("backtranslate", "pegasus", "t5_qqp", "passive", "grammar",
       "mlm_fill", "csr")

STUB_VERSION = "stub-1"

# one replacement per source word; applying all of them is the stub's
# backtranslation candidate 0, which maximizes token edit distance
SYNONYMS: dict[str, str] = {
    "travelled": "journeyed",
    "travels": "journeys",
    "walked": "strolled",
    "ran": "sprinted",
    "bought": "purchased",
    "sold": "traded",
    "paid": "gave",
    "earns": "collects",
    "earned": "collected",
    "saves": "sets aside",
    "saved": "set aside",
    "speed": "pace",
    "constant": "steady",
    "total": "whole",
    "together": "jointly",
    "takes": "requires",
    "take": "require",
    "needs": "requires",
    "need": "require",
    "cut": "slice",
    "cuts": "slices",
    "holds": "contains",
    "hold": "contain",
    "weighs": "measures",
    "weighing": "measuring",
    "leaves": "departs",
    "long": "lengthy",
    "equal": "even",
    "pieces": "parts",
    "piece": "part",
    "trip": "journey",
    "money": "cash",
    "buys": "purchases",
}

_PREPOSITIONS = ("from", "at", "in", "with", "of", "per", "to")

# simple past -> past participle, for the rule-based passive rewrite
VERB_PP = {
    "ate": "eaten", "bought": "bought", "sold": "sold", "made": "made",
    "gave": "given", "took": "taken", "drove": "driven", "built": "built",
    "found": "found", "paid": "paid", "saved": "saved", "walked": "walked",
    "ran": "run", "read": "read", "wrote": "written", "earned": "earned",
    "spent": "spent", "cut": "cut", "filled": "filled", "picked": "picked",
    "planted": "planted", "painted": "painted", "carried": "carried",
    "delivered": "delivered", "collected": "collected", "counted": "counted",
    "shared": "shared", "used": "used", "mixed": "mixed", "packed": "packed",
}

_LOWERABLE_SUBJECT_STARTS = {"the", "a", "an", "my", "his", "her", "their",
                             "our", "its"}

FILL_WORDS = ("apple", "garden", "river", "market", "window", "teacher",
              "bridge", "basket", "village", "engine", "mountain", "letter",
              "bottle", "ticket", "farmer", "kitchen", "library", "road",
              "coin", "box", "train", "field", "store", "clock")


def _match_case(original: str, replacement: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


class ProviderClient:
    """Shared request/response handling; subclasses supply the transport."""

    def call(self, request: dict) -> dict:
        raise NotImplementedError

    def transform(self, op: str, text: str, **params) -> list[str]:
        response = self.call({"op": op, "text": text, "params": params})
        if not isinstance(response, dict) or "outputs" not in response:
            raise ProviderMalformedResponse(f"no outputs field in {response!r}")
        outputs = response["outputs"]
        if (not isinstance(outputs, list) or len(outputs) == 0
                or not all(isinstance(o, str) for o in outputs)):
            raise ProviderMalformedResponse(f"bad outputs {outputs!r}")
        return outputs

    def health(self) -> dict:
        return self.call({"op": "health", "text": "", "params": {}})


class StubProvider(ProviderClient):
    """Deterministic rule-based stand-in for the neural provider.

    Pure given (request, stub version): no randomness outside seeds passed in
    params, no state. Numbers are never rewritten by any op except mlm_fill,
    whose whole point is indiscriminate masking.
    """

    version = STUB_VERSION

    def call(self, request: dict) -> dict:
        op = request.get("op")
        text = request.get("text", "")
        params = request.get("params") or {}
        if op == "health":
            return {"ok": True, "ops": list(OPS)}
        if op not in OPS:
            raise ProviderMalformedResponse(f"unknown op {op!r}")
        outputs = getattr(self, f"_{op}")(text, params)
        return {"outputs": outputs,
                "model_id": f"{self.version}/{op}",
                "latency_ms": 0.0}

    # -- ops ---------------------------------------------------------------

    def _backtranslate(self, text: str, params: dict) -> list[str]:
        """Candidate j replaces synonym-table words at match positions
        divisible by j+1; candidate 0 therefore replaces every match."""
        k = int(params.get("num_candidates", 6))
        tokens = tokenize(text)
        matches = [t for t in tokens if t.surface.lower() in SYNONYMS]
        outputs = []
        for j in range(max(1, k)):
            edits = [(t.start, t.end, _match_case(t.surface, SYNONYMS[t.surface.lower()]))
                     for i, t in enumerate(matches) if i % (j + 1) == 0]
            outputs.append(replace_spans(text, edits))
        return outputs

    def _pegasus(self, text: str, params: dict) -> list[str]:
        """Keep the non-question sentences (falling back to the first
        sentence) and rotate the first one around its first comma, or else
        around its first preposition at token index >= 2."""
        tokens = tokenize(text)
        sentences = split_sentences(tokens)
        kept = [s for s in sentences
                if tokens[s[1] - 1].surface != "?"] or sentences[:1]

        def rotate(span):
            ts, te = span
            surfaces = [t.surface for t in tokens[ts:te]]
            terminal = "."
            if surfaces and surfaces[-1] in {".", "?", "!"}:
                surfaces = surfaces[:-1]
            cut = None
            if "," in surfaces:
                cut = surfaces.index(",") + 1
                rotated = surfaces[cut:] + surfaces[:cut - 1]
            else:
                for i, s in enumerate(surfaces):
                    if i >= 2 and s.lower() in _PREPOSITIONS:
                        cut = i
                        break
                rotated = surfaces[cut:] + surfaces[:cut] if cut else surfaces
            return smart_join(rotated + [terminal])

        parts = [rotate(kept[0])]
        for span in kept[1:]:
            a, b = tokens[span[0]].start, tokens[span[1] - 1].end
            parts.append(text[a:b])
        return [" ".join(parts)]

    def _t5_qqp(self, text: str, params: dict) -> list[str]:
        """Drop the first number; with no numbers, drop the last sentence
        (or the last 3 tokens of a one-sentence input)."""
        tokens = tokenize(text)
        for t in tokens:
            if is_number_surface(t.surface):
                return [normalize_space(replace_spans(text, [(t.start, t.end, "")]))]
        sentences = split_sentences(tokens)
        if len(sentences) > 1:
            a = tokens[sentences[0][0]].start
            b = tokens[sentences[-2][1] - 1].end
            return [text[a:b]]
        keep = tokens[:max(1, len(tokens) - 3)]
        return [smart_join([t.surface for t in keep])]

    def _passive(self, text: str, params: dict) -> list[str]:
        """Subject/verb/object swap on sentences whose verb is in a fixed
        simple-past table; anything else passes through unchanged."""
        tokens = tokenize(text)
        sentences = split_sentences(tokens)
        parts = []
        for ts, te in sentences:
            surfaces = [t.surface for t in tokens[ts:te]]
            terminal = ""
            if surfaces[-1] in {".", "?", "!"}:
                terminal = surfaces[-1]
                surfaces = surfaces[:-1]
            verb_at = next((i for i, s in enumerate(surfaces)
                            if i >= 1 and s.lower() in VERB_PP), None)
            a, b = tokens[ts].start, tokens[te - 1].end
            if verb_at is None or verb_at == len(surfaces) - 1:
                parts.append(text[a:b])
                continue
            subject = surfaces[:verb_at]
            obj = surfaces[verb_at + 1:]
            if subject[0].lower() in _LOWERABLE_SUBJECT_STARTS:
                subject[0] = subject[0].lower()
            plural = ((is_number_surface(obj[0]) and obj[0] != "1")
                      or (obj[-1].isalpha() and obj[-1].endswith("s")))
            aux = "were" if plural else "was"
            rebuilt = obj + [aux, VERB_PP[surfaces[verb_at].lower()], "by"] + subject
            if rebuilt[0].isalpha():
                rebuilt[0] = rebuilt[0][:1].upper() + rebuilt[0][1:]
            parts.append(smart_join(rebuilt + ([terminal] if terminal else [])))
        return [" ".join(parts)]

    def _grammar(self, text: str, params: dict) -> list[str]:
        out = normalize_space(text)
        for i, ch in enumerate(out):
            if ch.isalpha():
                out = out[:i] + ch.upper() + out[i + 1:]
                break
        if out and out[-1] not in ".?!":
            out += "."
        return [out]

    def _mlm_fill(self, text: str, params: dict) -> list[str]:
        """Mask round(rate * word_count) word tokens (at least one) chosen by
        the seeded rng and fill each from a fixed dictionary."""
        rate = float(params.get("mask_rate", 0.15))
        seed = int(params.get("seed", 0))
        tokens = tokenize(text)
        maskable = [t for t in tokens if t.surface.isalpha()]
        if not maskable or rate <= 0.0:
            return [text]
        k = min(len(maskable), max(1, round(rate * len(maskable))))
        rng = np.random.default_rng([seed, _text_key(text)])
        chosen = sorted(rng.choice(len(maskable), size=k, replace=False).tolist())
        edits = []
        for pos in chosen:
            tok = maskable[pos]
            fill = FILL_WORDS[int(rng.integers(len(FILL_WORDS)))]
            if fill == tok.surface.lower():
                fill = FILL_WORDS[(FILL_WORDS.index(fill) + 1) % len(FILL_WORDS)]
            edits.append((tok.start, tok.end, _match_case(tok.surface, fill)))
        return [replace_spans(text, edits)]

    def _csr(self, text: str, params: dict) -> list[str]:
        """Reorder whitespace-separated chunks by the caller-supplied original
        indices; without usable indices, echo the text."""
        order = params.get("order")
        chunks = text.split()
        if not isinstance(order, list) or len(order) != len(chunks):
            return [text]
        repaired = [c for _, c in sorted(zip(order, chunks), key=lambda p: p[0])]
        return [smart_join(repaired)]


def _text_key(text: str) -> int:
    return fnv1a64(text.encode("utf-8"))


class HttpProvider(ProviderClient):
    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def call(self, request: dict) -> dict:
        import requests

        try:
            if request.get("op") == "health":
                resp = requests.get(f"{self.base_url}/v1/health",
                                    timeout=self.timeout)
            else:
                resp = requests.post(f"{self.base_url}/v1/transform",
                                     json=request, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"{self.base_url}: {exc}") from exc
        if resp.status_code >= 500:
            raise ProviderUnavailable(
                f"{self.base_url} returned {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderMalformedResponse(
                f"{self.base_url} rejected request: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderMalformedResponse(f"non-JSON response: {exc}") from exc


class StdioProvider(ProviderClient):
    """Runs the provider command once and speaks JSON lines over its pipes."""

    def __init__(self, command: str):
        self.command = command
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.command), stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE, text=True, bufsize=1)
            except OSError as exc:
                raise ProviderUnavailable(f"{self.command}: {exc}") from exc
        return self._proc

    def call(self, request: dict) -> dict:
        proc = self._ensure()
        try:
            proc.stdin.write(json.dumps(request) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderUnavailable(f"{self.command}: {exc}") from exc
        if not line:
            raise ProviderUnavailable(f"{self.command}: closed the pipe")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderMalformedResponse(f"bad JSON line: {exc}") from exc

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)


def make_provider(spec: str) -> ProviderClient:
    """Build a provider from a CLI-style spec string.

    "stub" for the in-process rules, "http://..." or "https://..." for a
    remote endpoint, "stdio:<command>" to spawn a subprocess.
    """
    if spec == "stub":
        return StubProvider()
    if spec.startswith(("http://", "https://")):
        return HttpProvider(spec)
    if spec.startswith("stdio:"):
        return StdioProvider(spec[len("stdio:"):])
    raise ValueError(f"unrecognized provider spec {spec!r}")
