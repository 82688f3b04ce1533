"""Per-article sentiment at three granularities and the summary-minus-sentences bias.

Bias for one article is ``(summary sentiment - mean sentence sentiment) * 100``
per component, in percentage points. The paragraph-level triple is reported
alongside but does not enter the delta.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

from .errors import NoArticles
from .sentiment import SentimentTriple, aggregate
from .summarizer import BudgetedSummarizer, OverlongPolicy, SummaryRequest
from .text import split_sentences


class SentimentPort(Protocol):
    def sentence_sentiment(self, sentence: str) -> SentimentTriple: ...


@dataclass(frozen=True)
class GranularitySentiments:
    article_level: SentimentTriple
    paragraph_level: SentimentTriple
    sentence_level: SentimentTriple

    def as_dict(self) -> dict:
        return {
            "article": self.article_level.as_dict(),
            "paragraph": self.paragraph_level.as_dict(),
            "sentence": self.sentence_level.as_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> GranularitySentiments:
        return cls(
            SentimentTriple.from_dict(d["article"]),
            SentimentTriple.from_dict(d["paragraph"]),
            SentimentTriple.from_dict(d["sentence"]),
        )


@dataclass(frozen=True)
class BiasTriple:
    pos_delta: float
    neg_delta: float
    neu_delta: float

    def as_dict(self) -> dict[str, float]:
        return {"pos": self.pos_delta, "neg": self.neg_delta, "neu": self.neu_delta}

    @classmethod
    def from_dict(cls, d: dict) -> BiasTriple:
        return cls(float(d["pos"]), float(d["neg"]), float(d["neu"]))

    @property
    def total(self) -> float:
        return self.pos_delta + self.neg_delta + self.neu_delta


@dataclass
class ArticleBias:
    url: str
    date: str
    granularities: GranularitySentiments
    bias: BiasTriple


@dataclass
class BiasResult:
    school: str
    keyword: str
    mean: BiasTriple | None  # None when the keyword matched nothing analysable
    article_count: int
    articles: list[ArticleBias] = field(default_factory=list)

    @property
    def per_article(self) -> list[BiasTriple]:
        return [a.bias for a in self.articles]


def _mean_sentiment(sentences: Sequence[str], sentiment: SentimentPort) -> SentimentTriple:
    return aggregate([sentiment.sentence_sentiment(s) for s in sentences])


def article_granularities(
    text: str,
    summarizer: BudgetedSummarizer,
    sentiment: SentimentPort,
    max_tokens: int = 500,
    overlong_policy: OverlongPolicy = OverlongPolicy.REJECT,
) -> GranularitySentiments:
    """Sentiment of the article summary, of paragraph summaries, and of sentences.

    Each level scores one sentence at a time and averages component-wise.
    Raises OverBudget / EmptyText from the summarizer unchanged.
    """
    req = SummaryRequest(text, max_tokens, overlong_policy)
    summary = summarizer.summarize_article(req)
    paragraph_summaries = summarizer.summarize_paragraphs(req)
    article_level = _mean_sentiment(summary.sentences or split_sentences(summary.text), sentiment)
    paragraph_level = aggregate(
        [_mean_sentiment(p.sentences or split_sentences(p.text), sentiment) for p in paragraph_summaries]
    )
    sentence_level = _mean_sentiment(split_sentences(text), sentiment)
    return GranularitySentiments(article_level, paragraph_level, sentence_level)


def compute_bias(g: GranularitySentiments) -> BiasTriple:
    """Article-summary minus sentence-average sentiment, in percentage points."""
    a, s = g.article_level, g.sentence_level
    return BiasTriple((a.pos - s.pos) * 100, (a.neg - s.neg) * 100, (a.neu - s.neu) * 100)


def aggregate_bias(articles: Sequence[ArticleBias], school: str, keyword: str) -> BiasResult:
    if not articles:
        raise NoArticles(f"{school}: no analysable articles for {keyword!r}")
    n = len(articles)
    mean = BiasTriple(
        math.fsum(a.bias.pos_delta for a in articles) / n,
        math.fsum(a.bias.neg_delta for a in articles) / n,
        math.fsum(a.bias.neu_delta for a in articles) / n,
    )
    return BiasResult(school=school, keyword=keyword, mean=mean, article_count=n, articles=list(articles))
