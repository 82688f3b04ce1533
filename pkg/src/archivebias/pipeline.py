"""Stage functions behind the CLI: scrape a site into the corpus, analyze keywords."""

from __future__ import annotations

import datetime as dt
import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from .bias import ArticleBias, BiasResult, GranularitySentiments, SentimentPort, aggregate_bias, article_granularities, compute_bias
from .config import SiteDescriptor, WatermarkRuleSet
from .corpus import ArticleRecord, CorpusStore, SourceKind
from .errors import (
    EmptyText,
    ExtractionEmpty,
    FetchError,
    NoArticles,
    OverBudget,
    SentimentServiceError,
    SummaryServiceError,
)
from .extractor import classify_source, extract_text, trim_watermarks
from .fetcher import FetchedPage, Fetcher
from .query import KeywordQuery, keyword_distribution, query
from .scraper import ArticleLink, enumerate_subpages, ensure_permitted, links_from_page, site_fetch
from .summarizer import BudgetedSummarizer, OverlongPolicy

logger = logging.getLogger(__name__)


class _ListingCache:
    """Remembers listing pages fetched during enumeration so they are not fetched twice."""

    def __init__(self, fetcher: Fetcher):
        self.fetcher = fetcher
        self.pages: dict[str, FetchedPage] = {}

    def fetch(self, url: str, rate_limit_ms: int = 1000) -> FetchedPage:
        if url not in self.pages:
            self.pages[url] = self.fetcher.fetch(url, rate_limit_ms)
        return self.pages[url]


@dataclass
class ScrapeCounts:
    school: str
    subpages: int = 0
    links: int = 0
    date_unparseable: int = 0
    out_of_range: int = 0
    already_stored: int = 0
    fetched: int = 0
    fetch_failed: int = 0
    encoding_failed: int = 0
    pdf: int = 0
    js_rendered: int = 0
    extraction_rejected: int = 0
    stored: int = 0

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def scrape_site(descriptor: SiteDescriptor, fetcher: Fetcher, store: CorpusStore) -> ScrapeCounts:
    """Enumerate, fetch, classify, extract and store one site's articles.

    URLs already in the store are skipped, so reruns resume where they left off.
    """
    ensure_permitted(descriptor)
    counts = ScrapeCounts(descriptor.school_id)
    listing = _ListingCache(fetcher)
    subpages = enumerate_subpages(descriptor, listing)
    counts.subpages = len(subpages)

    links: dict[str, ArticleLink] = {}
    for url in subpages:
        batch = links_from_page(site_fetch(listing, descriptor, url), descriptor)
        counts.date_unparseable += len(batch.skipped)
        counts.out_of_range += batch.out_of_range
        for link in batch:
            links.setdefault(link.url, link)
        for url_skipped, raw in batch.skipped:
            logger.info("%s: unparseable date %r for %s", descriptor.school_id, raw, url_skipped)
    counts.links = len(links)

    for link in links.values():
        if (descriptor.school_id, link.url) in store:
            counts.already_stored += 1
            continue
        try:
            page = site_fetch(fetcher, descriptor, link.url)
        except FetchError as exc:
            logger.warning("fetch failed: %s", exc)
            counts.fetch_failed += 1
            continue
        counts.fetched += 1
        kind = classify_source(page, descriptor.content_selector)
        if kind is SourceKind.TEXT and page.encoding_undetectable:
            logger.warning("%s: undetectable encoding, not extracted", link.url)
            counts.encoding_failed += 1
            continue
        if kind is not SourceKind.TEXT:
            # Kept so reruns skip it, but never analysed.
            store.put(ArticleRecord(descriptor.school_id, link.url, link.date, "", "", kind, page.fetched_at))
            if kind is SourceKind.PDF:
                counts.pdf += 1
            else:
                counts.js_rendered += 1
            continue
        try:
            record = extract_text(page, descriptor, link.date, url=link.url)
        except ExtractionEmpty as exc:
            logger.warning("extraction rejected: %s", exc)
            counts.extraction_rejected += 1
            continue
        store.put(record)
        counts.stored += 1
    return counts


@dataclass
class AnalysisCounts:
    articles_in_corpus: int = 0
    ineligible: Counter = field(default_factory=Counter)
    queried_matches: int = 0
    analyzed: int = 0
    excluded: Counter = field(default_factory=Counter)
    per_query: list[dict[str, Any]] = field(default_factory=list)

    def reconciles(self) -> bool:
        return self.analyzed + sum(self.excluded.values()) == self.queried_matches

    def as_dict(self) -> dict[str, Any]:
        return {
            "articles_in_corpus": self.articles_in_corpus,
            "ineligible": dict(sorted(self.ineligible.items())),
            "queried_matches": self.queried_matches,
            "analyzed": self.analyzed,
            "excluded": dict(sorted(self.excluded.items())),
            "per_query": self.per_query,
        }


_EXCLUSIONS = {
    OverBudget: "over_budget",
    EmptyText: "empty_text",
    SummaryServiceError: "summary_service_error",
    SentimentServiceError: "sentiment_service_error",
}


def analyze_corpus(
    store: CorpusStore,
    schools: list[str],
    queries: list[KeywordQuery],
    summarizer: BudgetedSummarizer,
    sentiment: SentimentPort,
    watermarks: dict[str, WatermarkRuleSet] | None = None,
    max_tokens: int = 500,
    overlong_policy: OverlongPolicy = OverlongPolicy.REJECT,
) -> tuple[list[BiasResult], dict[str, dict[str, int]], AnalysisCounts]:
    """Query each school's articles per keyword and compute bias results.

    Results come back ordered by school then keyword. Articles that fail
    summarization are excluded and counted by reason.
    """
    watermarks = watermarks or {}
    counts = AnalysisCounts()
    results: list[BiasResult] = []
    keyword_counts: dict[str, dict[str, int]] = {}

    for school in schools:
        articles = store.articles(school)
        counts.articles_in_corpus += len(articles)
        eligible = []
        for art in articles:
            if art.eligible:
                eligible.append(art)
            else:
                counts.ineligible[art.source_kind.value] += 1
        keyword_counts[school] = keyword_distribution(eligible, queries)
        rules = watermarks.get(school, WatermarkRuleSet(school))
        cache: dict[str, GranularitySentiments | str] = {}

        for q in queries:
            matched = query(eligible, q)
            analysed: list[ArticleBias] = []
            excluded: Counter = Counter()
            for art in matched:
                if art.url not in cache:
                    cache[art.url] = _granularities_or_reason(
                        art, rules, summarizer, sentiment, max_tokens, overlong_policy
                    )
                outcome = cache[art.url]
                if isinstance(outcome, str):
                    excluded[outcome] += 1
                    continue
                analysed.append(ArticleBias(art.url, art.date.isoformat(), outcome, compute_bias(outcome)))
            counts.queried_matches += len(matched)
            counts.analyzed += len(analysed)
            counts.excluded.update(excluded)
            counts.per_query.append(
                {
                    "school": school,
                    "keyword": q.keyword,
                    "matched": len(matched),
                    "analyzed": len(analysed),
                    "excluded": dict(sorted(excluded.items())),
                }
            )
            try:
                results.append(aggregate_bias(analysed, school, q.keyword))
            except NoArticles as exc:
                logger.warning("%s", exc)
                results.append(BiasResult(school, q.keyword, None, 0, []))
    return results, keyword_counts, counts


def _granularities_or_reason(
    art: ArticleRecord,
    rules: WatermarkRuleSet,
    summarizer: BudgetedSummarizer,
    sentiment: SentimentPort,
    max_tokens: int,
    overlong_policy: OverlongPolicy,
) -> GranularitySentiments | str:
    text = trim_watermarks(art, rules)
    try:
        return article_granularities(text, summarizer, sentiment, max_tokens, overlong_policy)
    except tuple(_EXCLUSIONS) as exc:
        reason = next(name for cls, name in _EXCLUSIONS.items() if isinstance(exc, cls))
        logger.info("excluded %s (%s): %s", art.url, reason, exc)
        return reason


def file_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def utc_timestamp() -> str:
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()
