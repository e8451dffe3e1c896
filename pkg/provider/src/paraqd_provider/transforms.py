"""Deterministic mock transforms.

One rule-based stand-in per operation, used when the service runs with
--mock. Every function is pure: the same (text, params) always produces the
same outputs, across processes (hashing is crc32, never the builtin hash).
Numbers are left untouched by every op except mlm_fill and csr, whose
callers control the damage themselves.
"""
import re
from zlib import crc32

OPS = ("backtranslate", "pegasus", "t5_qqp", "passive", "grammar",
       "mlm_fill", "csr")

MOCK_VERSION = "mock-1"

DEFAULT_CANDIDATES = 6

# pivot-translation artifacts: slightly stilted synonym choices
SWAPS = {
    "travelled": "journeyed", "travels": "journeys", "speed": "velocity",
    "constant": "uniform", "bought": "purchased", "buys": "purchases",
    "saves": "puts aside", "save": "put aside", "total": "altogether",
    "take": "need", "took": "needed", "many": "numerous",
    "walked": "strolled", "earns": "makes", "cover": "manage",
    "leaves": "departs", "holds": "contains", "poured": "tipped",
}

# past tense -> past participle, for the toy passivizer
VERB_PP = {
    "ate": "eaten", "bought": "bought", "sold": "sold", "made": "made",
    "planted": "planted", "wrote": "written", "read": "read",
    "built": "built", "cut": "cut", "poured": "poured", "drove": "driven",
    "saved": "saved", "painted": "painted", "carried": "carried",
}

FILLERS = ("garden", "window", "basket", "silver", "morning", "village",
           "bridge", "market", "corner", "evening", "bottle", "mountain")

_PUNCT = ".,?!;:"


def _split_word(word):
    core = word.strip(_PUNCT)
    head = word[:word.index(core)] if core else word
    tail = word[len(head) + len(core):] if core else ""
    return head, core, tail


def _match_case(replacement: str, original: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _sentences(text: str) -> list[str]:
    return [s.strip() for s in re.findall(r"[^.?!]+[.?!]?", text)
            if s.strip()]


def _is_numeric(core: str) -> bool:
    return bool(re.fullmatch(r"\d+(?:\.\d+)?", core))


def backtranslate(text: str, params: dict) -> list[str]:
    """k pivot-and-back imitations. Candidate 0 rewrites every word the swap
    table knows; later candidates rewrite progressively fewer, so the list
    ranges from heavy to near-verbatim."""
    k = int(params.get("num_candidates", DEFAULT_CANDIDATES))
    words = text.split()
    hits = [i for i, w in enumerate(words)
            if _split_word(w)[1].lower() in SWAPS]
    outputs = []
    for j in range(max(1, k)):
        out = list(words)
        for i in hits[:max(0, len(hits) - j)]:
            head, core, tail = _split_word(out[i])
            out[i] = head + _match_case(SWAPS[core.lower()], core) + tail
        outputs.append(" ".join(out))
    return outputs


def pegasus(text: str, params: dict) -> list[str]:
    # sentence rotation; single sentences swap around their first comma
    sents = _sentences(text)
    if len(sents) >= 2:
        return [" ".join(sents[1:] + sents[:1])]
    if "," in text:
        left, right = text.split(",", 1)
        right = right.strip().rstrip(_PUNCT)
        return [f"{right}, {left.strip()}."]
    return [text]


def t5_qqp(text: str, params: dict) -> list[str]:
    """Fluent but lossy: quietly forgets a detail."""
    words = text.split()
    for i, w in enumerate(words):
        if _is_numeric(_split_word(w)[1]):
            return [" ".join(words[:i] + words[i + 1:])]
    sents = _sentences(text)
    if len(sents) >= 2:
        return [" ".join(sents[:-1])]
    return [" ".join(words[:max(1, len(words) - 2)])]


def passive(text: str, params: dict) -> list[str]:
    sents = _sentences(text)
    if not sents:
        return [text]
    words = sents[0].split()
    verb_at = next((i for i, w in enumerate(words)
                    if w.lower() in VERB_PP), None)
    if verb_at is None or verb_at == 0 or verb_at == len(words) - 1:
        return [text]
    subj = " ".join(words[:verb_at])
    obj_words = words[verb_at + 1:]
    head, core, _ = _split_word(obj_words[-1])
    obj_words[-1] = head + core
    obj = " ".join(obj_words)
    plural = (core.lower().endswith("s") and not _is_numeric(core)) or \
        (_is_numeric(_split_word(obj_words[0])[1]) and obj_words[0] != "1")
    aux = "were" if plural else "was"
    obj = obj[:1].upper() + obj[1:]
    first = f"{obj} {aux} {VERB_PP[words[verb_at].lower()]} by {subj}."
    return [" ".join([first] + sents[1:])]


def grammar(text: str, params: dict) -> list[str]:
    out = " ".join(text.split())
    out = re.sub(r"\s+([.,?!;:])", r"\1", out)
    for i, ch in enumerate(out):
        if ch.isalpha():
            out = out[:i] + ch.upper() + out[i + 1:]
            break
    if out and out[-1] not in ".?!":
        out += "."
    return [out]


def mlm_fill(text: str, params: dict) -> list[str]:
    rate = float(params.get("mask_rate", 0.15))
    seed = int(params.get("seed", 0))
    words = text.split()
    maskable = [i for i, w in enumerate(words)
                if _split_word(w)[1].isalpha()]
    if not maskable or rate <= 0.0:
        return [text]
    k = min(len(maskable), max(1, round(rate * len(maskable))))
    ranked = sorted(maskable,
                    key=lambda i: crc32(f"{seed}:{i}:{text}".encode()))
    for i in sorted(ranked[:k]):
        head, core, tail = _split_word(words[i])
        fill = FILLERS[crc32(f"{text}:{i}".encode()) % len(FILLERS)]
        if fill == core.lower():
            fill = FILLERS[(crc32(f"{text}:{i}".encode()) + 1) % len(FILLERS)]
        words[i] = head + _match_case(fill, core) + tail
    return [" ".join(words)]


def csr(text: str, params: dict) -> list[str]:
    """Corrupted-sentence reconstruction: put the surviving chunks back in
    the order the caller tagged them with."""
    chunks = text.split()
    order = params.get("order")
    if not isinstance(order, list) or len(order) != len(chunks):
        return [text]
    return [" ".join(c for _, c in sorted(zip(order, chunks),
                                          key=lambda p: p[0]))]


_DISPATCH = {op: globals()[op] for op in OPS}


def apply(op: str, text: str, params: dict) -> list[str]:
    return _DISPATCH[op](text, params)


class MockBackend:
    """Backend interface over the canned transforms."""

    def transform(self, op: str, text: str, params: dict):
        return apply(op, text, params), f"{MOCK_VERSION}/{op}"
