"""Keyword selection of corpus articles."""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass

from .corpus import ArticleRecord
from .errors import EmptyKeyword


class MatchMode(str, enum.Enum):
    SUBSTRING = "substring"
    WORD_BOUNDARY = "word_boundary"


@dataclass(frozen=True)
class KeywordQuery:
    keyword: str
    case_sensitive: bool = False
    match_mode: MatchMode = MatchMode.SUBSTRING
    search_title: bool = True

    def __post_init__(self) -> None:
        if not self.keyword or not self.keyword.strip():
            raise EmptyKeyword("keyword must be non-empty")
        object.__setattr__(self, "match_mode", MatchMode(self.match_mode))

    def haystack(self, article: ArticleRecord) -> str:
        text = f"{article.title}\n{article.text}" if self.search_title else article.text
        return text if self.case_sensitive else text.lower()

    @property
    def needle(self) -> str:
        return self.keyword if self.case_sensitive else self.keyword.lower()


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def contains(haystack: str, needle: str, mode: MatchMode) -> bool:
    if mode is MatchMode.SUBSTRING:
        return needle in haystack
    start = haystack.find(needle)
    while start != -1:
        end = start + len(needle)
        before_ok = start == 0 or not _is_word_char(haystack[start - 1])
        after_ok = end == len(haystack) or not _is_word_char(haystack[end])
        if before_ok and after_ok:
            return True
        start = haystack.find(needle, start + 1)
    return False


def matches(article: ArticleRecord, q: KeywordQuery) -> bool:
    return contains(q.haystack(article), q.needle, q.match_mode)


def query(corpus: Iterable[ArticleRecord], q: KeywordQuery) -> list[ArticleRecord]:
    """Articles whose title or body contains the keyword, in corpus order."""
    return [a for a in corpus if matches(a, q)]


def keyword_distribution(corpus: Iterable[ArticleRecord], queries: list[KeywordQuery]) -> dict[str, int]:
    """Match count per keyword; an article counts once for every keyword it contains."""
    counts = {q.keyword: 0 for q in queries}
    for article in corpus:
        for q in queries:
            if matches(article, q):
                counts[q.keyword] += 1
    return counts
