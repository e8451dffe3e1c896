"""Backend that answers with real seq2seq / MLM checkpoints.

Models load lazily on first use and stay cached. The loader is injectable
so tests can exercise the unavailable path without touching the network;
any load or generation failure surfaces as BackendUnavailable, which the
service reports as a 503.
"""
import logging

from .service import BackendUnavailable
from .transforms import DEFAULT_CANDIDATES, apply

log = logging.getLogger(__name__)

# op -> hub checkpoint; csr/grammar stay rule-based even in real mode
DEFAULT_MODEL_IDS = {
    "backtranslate_fwd": "Helsinki-NLP/opus-mt-en-de",
    "backtranslate_rev": "Helsinki-NLP/opus-mt-de-en",
    "pegasus": "tuner007/pegasus_paraphrase",
    "t5_qqp": "ramsrigouthamg/t5_paraphraser",
    "passive": "ramsrigouthamg/t5_paraphraser",
    "grammar": None,
    "mlm_fill": "bert-base-uncased",
    "csr": None,
}


def _default_loader(model_id: str):
    try:
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer, pipeline
    except ImportError as exc:
        raise BackendUnavailable(f"transformers not installed: {exc}") from exc
    try:
        if "bert" in model_id:
            return pipeline("fill-mask", model=model_id)
        tok = AutoTokenizer.from_pretrained(model_id)
        mdl = AutoModelForSeq2SeqLM.from_pretrained(model_id)
        return tok, mdl
    except Exception as exc:  # hub errors come in many flavours
        raise BackendUnavailable(f"cannot load {model_id}: {exc}") from exc


class RealBackend:
    """Neural paraphrasers behind the same transform() surface as the mock."""

    def __init__(self, model_ids: dict | None = None, loader=_default_loader):
        self.model_ids = dict(DEFAULT_MODEL_IDS)
        if model_ids:
            self.model_ids.update(model_ids)
        self._loader = loader
        self._cache: dict = {}

    def _load(self, key: str):
        if key not in self._cache:
            model_id = self.model_ids.get(key)
            if model_id is None:
                raise BackendUnavailable(f"no model configured for {key}")
            log.info("loading %s (%s)", key, model_id)
            self._cache[key] = self._loader(model_id)
        return self._cache[key]

    def _generate(self, loaded, text: str, n: int) -> list:
        tok, mdl = loaded
        ids = tok(text, return_tensors="pt", truncation=True).input_ids
        out = mdl.generate(ids, num_beams=max(4, n), num_return_sequences=n,
                           max_new_tokens=96)
        return [tok.decode(o, skip_special_tokens=True) for o in out]

    def transform(self, op: str, text: str, params: dict):
        if op in ("grammar", "csr"):
            # deterministic ops don't need a model even in real mode
            return apply(op, text, params), f"rule/{op}"
        if op == "backtranslate":
            n = int(params.get("num_candidates", DEFAULT_CANDIDATES))
            pivots = self._generate(self._load("backtranslate_fwd"), text,
                                    max(1, n // 2))
            outs = []
            for p in pivots:
                outs.extend(self._generate(self._load("backtranslate_rev"),
                                           p, 2))
            return outs[:max(1, n)] or [text], \
                self.model_ids["backtranslate_fwd"]
        if op in ("pegasus", "t5_qqp", "passive"):
            prompt = text if op == "pegasus" else f"paraphrase: {text}"
            outs = self._generate(self._load(op), prompt, 1)
            return outs, self.model_ids[op]
        if op == "mlm_fill":
            filler = self._load("mlm_fill")
            from .transforms import _split_word
            words = text.split()
            masked = list(words)
            # mask the longest content word; single mask keeps the pass cheap
            pick = max(range(len(words)),
                       key=lambda i: len(_split_word(words[i])[1]))
            head, _, tail = _split_word(words[pick])
            masked[pick] = f"{head}[MASK]{tail}"
            try:
                best = filler(" ".join(masked))[0]["token_str"]
            except Exception as exc:
                raise BackendUnavailable(f"mlm_fill failed: {exc}") from exc
            words[pick] = head + best + tail
            return [" ".join(words)], self.model_ids["mlm_fill"]
        raise BackendUnavailable(f"no real implementation for {op}")
