"""Rule-based lexicon sentiment (VADER-style) producing (pos, neg, neu) proportions.

The scoring rules follow the published VADER procedure (Hutto & Gilbert,
2014): lexicon valences are adjusted for preceding boosters and dampeners,
ALL-CAPS emphasis, negation in the three preceding tokens, "least", "but"
contrast and a few fixed idioms. Proportions come from the positive sum, the
negative sum (each valenced token offset by 1) and the count of neutral
tokens. Unlike the reference code, proportions are not rounded.
"""

from __future__ import annotations

import json
import math
import string
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import requests

from .errors import EmptyList, EmptySentence, SentimentServiceError

BOOST_INCR = 0.293
BOOST_DECR = -0.293
CAPS_INCR = 0.733
NEGATION_SCALAR = -0.74

DEFAULT_NEGATIONS = frozenset(
    """aint arent cannot cant couldnt darent didnt doesnt ain't aren't can't couldn't
    daren't didn't doesn't dont hadnt hasnt havent isnt mightnt mustnt neither don't
    hadn't hasn't haven't isn't mightn't mustn't neednt needn't never none nope nor
    not nothing nowhere oughtnt shant shouldnt uhuh wasnt werent oughtn't shan't
    shouldn't uh-uh wasn't weren't without wont wouldnt won't wouldn't rarely seldom
    despite""".split()
)

_BOOST_UP = """absolutely amazingly awfully completely considerable considerably decidedly
deeply effing enormous enormously entirely especially exceptional exceptionally extreme
extremely fabulously flipping flippin frackin fracking fricking frickin frigging friggin
fully fuckin fucking fuggin fugging greatly hella highly hugely incredible incredibly
intensely major majorly more most particularly purely quite really remarkably so
substantially thoroughly total totally tremendous tremendously uber unbelievably
unusually utter utterly very""".split()
_BOOST_DOWN = """almost barely hardly kinda kindof kind-of less little marginal marginally
occasional occasionally partly scarce scarcely slight slightly somewhat sorta sortof
sort-of""".split()

DEFAULT_BOOSTERS = {
    **{w: BOOST_INCR for w in _BOOST_UP},
    **{w: BOOST_DECR for w in _BOOST_DOWN},
    "just enough": BOOST_DECR,
    "kind of": BOOST_DECR,
    "sort of": BOOST_DECR,
}

DEFAULT_IDIOMS = {
    "the shit": 3.0,
    "the bomb": 3.0,
    "bad ass": 1.5,
    "badass": 1.5,
    "bus stop": 0.0,
    "yeah right": -2.0,
    "kiss of death": -1.5,
    "to die for": 3.0,
    "beating heart": 3.5,
}


@dataclass(frozen=True)
class SentimentTriple:
    pos: float
    neg: float
    neu: float

    def __post_init__(self) -> None:
        for name in ("pos", "neg", "neu"):
            value = getattr(self, name)
            if not (-1e-9 <= value <= 1 + 1e-9) or math.isnan(value):
                raise ValueError(f"{name}={value} outside [0, 1]")
        if abs(self.pos + self.neg + self.neu - 1.0) > 1e-6:
            raise ValueError(f"components sum to {self.pos + self.neg + self.neu}, not 1")

    def as_dict(self) -> dict[str, float]:
        return {"pos": self.pos, "neg": self.neg, "neu": self.neu}

    @classmethod
    def from_dict(cls, d: dict) -> SentimentTriple:
        return cls(float(d["pos"]), float(d["neg"]), float(d["neu"]))


NEUTRAL = SentimentTriple(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SentimentScores:
    """Full scoring output; only ``triple`` feeds the bias calculation."""

    triple: SentimentTriple
    compound: float


@dataclass(frozen=True)
class SentimentLexicon:
    valences: dict[str, float]
    boosters: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BOOSTERS))
    negations: frozenset[str] = DEFAULT_NEGATIONS
    idioms: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_IDIOMS))
    name: str = ""

    def __post_init__(self) -> None:
        if not self.valences:
            raise ValueError("lexicon is empty")
        bad = [t for t, v in self.valences.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite valences for {bad[:5]}")


def parse_lexicon(lines: Iterable[str], name: str = "") -> SentimentLexicon:
    """Read ``token<TAB>valence[<TAB>...]`` lines; extra columns are ignored."""
    valences: dict[str, float] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"{name or 'lexicon'}:{lineno}: expected token<TAB>valence")
        try:
            valences[parts[0]] = float(parts[1])
        except ValueError as exc:
            raise ValueError(f"{name or 'lexicon'}:{lineno}: bad valence {parts[1]!r}") from exc
    return SentimentLexicon(valences=valences, name=name)


def load_lexicon(path: str | Path | None = None) -> SentimentLexicon:
    """Load a lexicon file, or the bundled test lexicon when ``path`` is None."""
    if path is None:
        ref = resources.files("archivebias") / "data" / "test_lexicon.tsv"
        return parse_lexicon(ref.read_text(encoding="utf-8").splitlines(), name="bundled:test_lexicon")
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_lexicon(fh, name=str(path))


def tokenize(sentence: str) -> list[str]:
    """Whitespace split, stripping edge punctuation unless that leaves <= 2 chars.

    Short tokens keep their punctuation so emoticons such as ``:)`` survive.
    """
    tokens = []
    for raw in sentence.split():
        stripped = raw.strip(string.punctuation)
        tokens.append(raw if len(stripped) <= 2 else stripped)
    return tokens


def _caps_differential(tokens: Sequence[str]) -> bool:
    caps = sum(1 for t in tokens if t.isupper())
    return 0 < len(tokens) - caps < len(tokens)


def _normalize_compound(score: float, alpha: float = 15.0) -> float:
    value = score / math.sqrt(score * score + alpha)
    return max(-1.0, min(1.0, value))


def _punctuation_amplifier(text: str) -> float:
    exclaims = min(text.count("!"), 4) * 0.292
    questions = text.count("?")
    qm = 0.0
    if questions > 1:
        qm = questions * 0.18 if questions <= 3 else 0.96
    return exclaims + qm


class VaderEngine:
    """Native rule-based sentiment scorer over a :class:`SentimentLexicon`."""

    def __init__(self, lexicon: SentimentLexicon):
        self.lexicon = lexicon
        self._lex = lexicon.valences
        self._boost = lexicon.boosters
        self._neg = lexicon.negations

    @property
    def identity(self) -> str:
        return f"native-vader:{self.lexicon.name}"

    def _negated(self, word: str) -> bool:
        return word in self._neg or "n't" in word

    def _booster_scalar(self, word: str, valence: float, caps_diff: bool) -> float:
        scalar = self._boost.get(word.lower(), 0.0)
        if scalar == 0.0:
            return 0.0
        if valence < 0:
            scalar = -scalar
        if word.isupper() and caps_diff:
            scalar += CAPS_INCR if valence > 0 else -CAPS_INCR
        return scalar

    def _negation_check(self, valence: float, lower: list[str], back: int, i: int) -> float:
        if back == 0:
            if self._negated(lower[i - 1]):
                valence *= NEGATION_SCALAR
        elif back == 1:
            if lower[i - 2] == "never" and lower[i - 1] in ("so", "this"):
                valence *= 1.25
            elif lower[i - 2] == "without" and lower[i - 1] == "doubt":
                pass
            elif self._negated(lower[i - 2]):
                valence *= NEGATION_SCALAR
        else:
            if (lower[i - 3] == "never" and lower[i - 2] in ("so", "this")) or lower[i - 1] in ("so", "this"):
                valence *= 1.25
            elif lower[i - 3] == "without" and "doubt" in (lower[i - 2], lower[i - 1]):
                pass
            elif self._negated(lower[i - 3]):
                valence *= NEGATION_SCALAR
        return valence

    def _idiom_check(self, valence: float, lower: list[str], i: int) -> float:
        idioms = self.lexicon.idioms
        w3, w2, w1, w0 = lower[i - 3], lower[i - 2], lower[i - 1], lower[i]
        for seq in (f"{w1} {w0}", f"{w2} {w1} {w0}", f"{w2} {w1}", f"{w3} {w2} {w1}", f"{w3} {w2}"):
            if seq in idioms:
                valence = idioms[seq]
                break
        if len(lower) - 1 > i:
            seq = f"{w0} {lower[i + 1]}"
            if seq in idioms:
                valence = idioms[seq]
        if len(lower) - 1 > i + 1:
            seq = f"{w0} {lower[i + 1]} {lower[i + 2]}"
            if seq in idioms:
                valence = idioms[seq]
        for seq in (f"{w3} {w2} {w1}", f"{w3} {w2}", f"{w2} {w1}"):
            if seq in self._boost:
                valence += self._boost[seq]
        return valence

    def _least_check(self, valence: float, lower: list[str], i: int) -> float:
        if i > 1 and lower[i - 1] not in self._lex and lower[i - 1] == "least":
            if lower[i - 2] not in ("at", "very"):
                valence *= NEGATION_SCALAR
        elif i > 0 and lower[i - 1] not in self._lex and lower[i - 1] == "least":
            valence *= NEGATION_SCALAR
        return valence

    def _token_valence(self, tokens: list[str], lower: list[str], i: int, caps_diff: bool) -> float:
        word = lower[i]
        if word not in self._lex:
            return 0.0
        valence = self._lex[word]
        if word == "no" and i != len(tokens) - 1 and lower[i + 1] in self._lex:
            valence = 0.0
        if (
            (i > 0 and lower[i - 1] == "no")
            or (i > 1 and lower[i - 2] == "no")
            or (i > 2 and lower[i - 3] == "no" and lower[i - 1] in ("or", "nor"))
        ):
            valence = self._lex[word] * NEGATION_SCALAR
        if tokens[i].isupper() and caps_diff:
            valence += CAPS_INCR if valence > 0 else -CAPS_INCR
        for back in range(3):
            if i > back and lower[i - back - 1] not in self._lex:
                s = self._booster_scalar(tokens[i - back - 1], valence, caps_diff)
                if back == 1 and s != 0:
                    s *= 0.95
                elif back == 2 and s != 0:
                    s *= 0.9
                valence += s
                valence = self._negation_check(valence, lower, back, i)
                if back == 2:
                    valence = self._idiom_check(valence, lower, i)
        return self._least_check(valence, lower, i)

    def valences(self, sentence: str) -> list[float]:
        """Adjusted valence of every token, 0.0 for neutral ones."""
        tokens = tokenize(sentence)
        lower = [t.lower() for t in tokens]
        caps_diff = _caps_differential(tokens)
        out = []
        for i, word in enumerate(lower):
            if word in self._boost:
                out.append(0.0)
            elif word == "kind" and i < len(lower) - 1 and lower[i + 1] == "of":
                out.append(0.0)
            else:
                out.append(self._token_valence(tokens, lower, i, caps_diff))
        if "but" in lower:
            pivot = lower.index("but")
            out = [v * 0.5 if j < pivot else v * 1.5 if j > pivot else v for j, v in enumerate(out)]
        return out

    def scores(self, sentence: str) -> SentimentScores:
        if not sentence or not sentence.strip():
            raise EmptySentence("cannot score an empty sentence")
        vals = self.valences(sentence)
        if not vals:
            return SentimentScores(NEUTRAL, 0.0)
        amplifier = _punctuation_amplifier(sentence)
        total_valence = sum(vals)
        if total_valence > 0:
            total_valence += amplifier
        elif total_valence < 0:
            total_valence -= amplifier
        compound = _normalize_compound(total_valence)

        pos_sum = sum(v + 1 for v in vals if v > 0)
        neg_sum = sum(v - 1 for v in vals if v < 0)
        neu_count = sum(1 for v in vals if v == 0)
        if pos_sum > abs(neg_sum):
            pos_sum += amplifier
        elif pos_sum < abs(neg_sum):
            neg_sum -= amplifier
        total = pos_sum + abs(neg_sum) + neu_count
        if total == 0:
            return SentimentScores(NEUTRAL, compound)
        triple = SentimentTriple(abs(pos_sum) / total, abs(neg_sum) / total, neu_count / total)
        return SentimentScores(triple, compound)

    def sentence_sentiment(self, sentence: str) -> SentimentTriple:
        return self.scores(sentence).triple


def aggregate(triples: Sequence[SentimentTriple]) -> SentimentTriple:
    """Component-wise arithmetic mean."""
    if not triples:
        raise EmptyList("cannot aggregate zero sentiment triples")
    n = len(triples)
    pos = math.fsum(t.pos for t in triples) / n
    neg = math.fsum(t.neg for t in triples) / n
    neu = math.fsum(t.neu for t in triples) / n
    return SentimentTriple(pos, neg, neu)


class SentimentServiceClient:
    """Scores sentences through an external HTTP sentiment model.

    Contract: POST ``{"text": ...}`` and receive
    ``{"pos": ..., "neg": ..., "neu": ..., "compound": ...}``.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, session: requests.Session | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session or requests.Session()

    @property
    def identity(self) -> str:
        return f"service:{self.endpoint}"

    def scores(self, sentence: str) -> SentimentScores:
        if not sentence or not sentence.strip():
            raise EmptySentence("cannot score an empty sentence")
        try:
            resp = self.session.post(self.endpoint, json={"text": sentence}, timeout=self.timeout)
            resp.raise_for_status()
            data = resp.json()
            pos, neg, neu = float(data["pos"]), float(data["neg"]), float(data["neu"])
            compound = float(data.get("compound", 0.0))
        except (requests.RequestException, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise SentimentServiceError(f"{self.endpoint}: {exc}") from exc
        total = pos + neg + neu
        if total <= 0:
            raise SentimentServiceError(f"{self.endpoint}: components sum to {total}")
        # Services usually round to 3 decimals; renormalize so the triple sums to 1.
        try:
            triple = SentimentTriple(pos / total, neg / total, neu / total)
        except ValueError as exc:
            raise SentimentServiceError(f"{self.endpoint}: {exc}") from exc
        return SentimentScores(triple, compound)

    def sentence_sentiment(self, sentence: str) -> SentimentTriple:
        return self.scores(sentence).triple
