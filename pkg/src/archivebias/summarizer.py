"""Article and paragraph summaries under a token budget.

Two backends share the budget handling: a native extractive summarizer
(term-frequency sentence scoring) and a client for an external abstractive
summarization service.
"""

from __future__ import annotations

import enum
import logging
import re
import threading
import time
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import requests

from .errors import EmptyText, OverBudget, SummaryServiceError
from .text import count_tokens, split_paragraphs, split_sentences

logger = logging.getLogger(__name__)

_WORD = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


class OverlongPolicy(str, enum.Enum):
    REJECT = "reject"
    TRUNCATE = "truncate"
    CHUNK = "chunk"


class SummaryMethod(str, enum.Enum):
    EXTRACTIVE = "extractive"
    EXTERNAL_SERVICE = "external_service"


@dataclass(frozen=True)
class SummaryRequest:
    text: str
    max_tokens: int = 500
    overlong_policy: OverlongPolicy = OverlongPolicy.REJECT

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        object.__setattr__(self, "overlong_policy", OverlongPolicy(self.overlong_policy))


@dataclass(frozen=True)
class Summary:
    text: str
    method: SummaryMethod
    source_token_count: int
    sentences: tuple[str, ...] = ()


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        raw = (resources.files("archivebias") / "data" / "stopwords.txt").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in raw.splitlines() if w.strip() and not w.startswith("#"))


class BudgetedSummarizer:
    """Applies the token budget and overlong policy around ``_summarize``."""

    method: SummaryMethod

    def _summarize(self, text: str, max_tokens: int) -> tuple[str, tuple[str, ...]]:
        raise NotImplementedError

    @property
    def identity(self) -> str:
        return self.method.value

    def _within_budget(self, text: str, req: SummaryRequest) -> Summary:
        n_tokens = count_tokens(text)
        if n_tokens == 0:
            raise EmptyText("cannot summarize empty text")
        if n_tokens <= req.max_tokens:
            summary, sentences = self._summarize(text, req.max_tokens)
        elif req.overlong_policy is OverlongPolicy.REJECT:
            raise OverBudget(n_tokens, req.max_tokens)
        else:
            tokens = text.split()
            if req.overlong_policy is OverlongPolicy.TRUNCATE:
                chunks = [" ".join(tokens[: req.max_tokens])]
            else:
                chunks = [
                    " ".join(tokens[i : i + req.max_tokens]) for i in range(0, n_tokens, req.max_tokens)
                ]
            parts = [self._summarize(chunk, req.max_tokens) for chunk in chunks]
            summary = " ".join(p[0] for p in parts)
            sentences = tuple(s for p in parts for s in p[1])
        return Summary(text=summary, method=self.method, source_token_count=n_tokens, sentences=sentences)

    def summarize_article(self, req: SummaryRequest) -> Summary:
        return self._within_budget(req.text, req)

    def summarize_paragraphs(self, req: SummaryRequest) -> list[Summary]:
        paragraphs = split_paragraphs(req.text)
        if not paragraphs:
            raise EmptyText("cannot summarize empty text")
        return [self._within_budget(p, req) for p in paragraphs]


class ExtractiveSummarizer(BudgetedSummarizer):
    """Picks the highest-scoring sentences verbatim, keeping source order.

    A sentence scores the sum, over its non-stopword tokens, of each token's
    document frequency divided by the largest document frequency. The
    summary keeps ``max(1, floor(ratio * n_sentences))`` sentences; ties go
    to the earlier sentence.
    """

    method = SummaryMethod.EXTRACTIVE

    def __init__(self, stopwords: Iterable[str] | None = None, ratio: float = 0.2):
        if not 0 < ratio <= 1:
            raise ValueError("ratio must be in (0, 1]")
        self.stopwords = frozenset(stopwords) if stopwords is not None else load_stopwords()
        self.ratio = ratio

    def content_words(self, sentence: str) -> list[str]:
        return [w for w in _WORD.findall(sentence.lower()) if w not in self.stopwords]

    def score_sentences(self, sentences: list[str]) -> list[float]:
        words = [self.content_words(s) for s in sentences]
        freq = Counter(w for ws in words for w in ws)
        if not freq:
            return [0.0] * len(sentences)
        top = max(freq.values())
        # Integer sum, one division: equal scores stay exactly equal for tie-breaks.
        return [sum(freq[w] for w in ws) / top for ws in words]

    def budget(self, n_sentences: int) -> int:
        return max(1, int(self.ratio * n_sentences))

    def _summarize(self, text: str, max_tokens: int) -> tuple[str, tuple[str, ...]]:
        sentences = split_sentences(text)
        scores = self.score_sentences(sentences)
        ranked = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
        keep = sorted(ranked[: self.budget(len(sentences))])
        chosen = tuple(sentences[i] for i in keep)
        return " ".join(chosen), chosen


class SummaryServiceClient(BudgetedSummarizer):
    """Abstractive summaries from an HTTP service.

    Contract: POST ``{"text": ..., "max_tokens": ...}`` and receive
    ``{"summary": ...}``. Transient failures are retried like page fetches.
    """

    method = SummaryMethod.EXTERNAL_SERVICE

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        max_in_flight: int = 4,
        max_retries: int = 3,
        backoff: tuple[float, ...] = (1.0, 2.0, 4.0),
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._sleep = sleep

    @property
    def identity(self) -> str:
        return f"{self.method.value}:{self.endpoint}"

    def _post(self, payload: dict) -> dict:
        attempt = 0
        while True:
            with self._slots:
                try:
                    resp = self.session.post(self.endpoint, json=payload, timeout=self.timeout)
                    transient = resp.status_code >= 500
                    failure = f"HTTP {resp.status_code}"
                except (requests.Timeout, requests.ConnectionError) as exc:
                    resp, transient, failure = None, True, str(exc)
                except requests.RequestException as exc:
                    raise SummaryServiceError(f"{self.endpoint}: {exc}") from exc
            if resp is not None and not transient:
                if resp.status_code >= 400:
                    raise SummaryServiceError(f"{self.endpoint}: HTTP {resp.status_code}")
                try:
                    return resp.json()
                except ValueError as exc:
                    raise SummaryServiceError(f"{self.endpoint}: response is not JSON") from exc
            if attempt >= self.max_retries:
                raise SummaryServiceError(f"{self.endpoint}: {failure} after {attempt + 1} attempts")
            self._sleep(self.backoff[min(attempt, len(self.backoff) - 1)] if self.backoff else 0.0)
            attempt += 1

    def _summarize(self, text: str, max_tokens: int) -> tuple[str, tuple[str, ...]]:
        data = self._post({"text": text, "max_tokens": max_tokens})
        summary = data.get("summary") if isinstance(data, dict) else None
        if not isinstance(summary, str) or not summary.strip():
            raise SummaryServiceError(f"{self.endpoint}: empty or missing summary")
        summary = summary.strip()
        return summary, tuple(split_sentences(summary))
