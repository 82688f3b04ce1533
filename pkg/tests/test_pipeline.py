import pytest

from archivebias.config import load_config
from archivebias.corpus import CorpusStore, SourceKind
from archivebias.errors import SentimentServiceError
from archivebias.fetcher import FetchMode, Fetcher
from archivebias.pipeline import analyze_corpus, scrape_site
from archivebias.query import KeywordQuery
from archivebias.sentiment import VaderEngine, load_lexicon
from archivebias.summarizer import ExtractiveSummarizer

from conftest import GOLDEN_SITE


@pytest.fixture(scope="module")
def cfg():
    return load_config(GOLDEN_SITE / "config.json")


@pytest.fixture
def scraped(cfg, tmp_path):
    store = CorpusStore(tmp_path / "corpus")
    fetcher = Fetcher(FetchMode.REPLAY, GOLDEN_SITE / "replay")
    counts = {s.school_id: scrape_site(s, fetcher, store) for s in cfg.sites}
    return store, counts, fetcher


def test_scrape_counts(scraped):
    store, counts, _ = scraped
    g, h = counts["gazette"], counts["herald"]
    assert (g.subpages, g.links, g.date_unparseable, g.out_of_range) == (3, 30, 1, 1)
    assert (g.pdf, g.js_rendered, g.stored) == (1, 1, 28)
    assert (h.subpages, h.links, h.encoding_failed, h.stored) == (2, 20, 1, 19)
    kinds = [a.source_kind for a in store.articles("gazette")]
    assert kinds.count(SourceKind.PDF) == 1 and kinds.count(SourceKind.JS_RENDERED) == 1
    assert len(store.articles("herald")) == 19


def test_rescrape_resumes(cfg, scraped):
    store, _, _ = scraped
    before = store.snapshot_id()
    fetcher = Fetcher(FetchMode.REPLAY, GOLDEN_SITE / "replay")
    again = scrape_site(cfg.site("gazette"), fetcher, store)
    assert again.already_stored == 30
    assert again.fetched == 0
    assert store.snapshot_id() == before


def test_stored_text_keeps_watermarks(scraped):
    store, _, _ = scraped
    texts = [a.text for a in store.articles("gazette") if a.eligible]
    assert all(t.startswith("GAZETTE ONLINE") for t in texts)
    assert all(t.endswith("All rights reserved.") for t in texts)


def _analyze(cfg, store, sentiment=None):
    queries = [KeywordQuery(k) for k in cfg.keywords]
    watermarks = {s.school_id: s.watermark_rules for s in cfg.sites}
    return analyze_corpus(
        store, store.schools(), queries, ExtractiveSummarizer(), sentiment or VaderEngine(load_lexicon()), watermarks
    )


def test_analysis_reconciles_and_excludes_overlong(cfg, scraped):
    store, _, _ = scraped
    results, keyword_counts, counts = _analyze(cfg, store)
    assert counts.reconciles()
    assert counts.ineligible == {"pdf": 1, "js_rendered": 1}
    assert set(counts.excluded) == {"over_budget"}
    herald_india = next(r for r in results if r.school == "herald" and r.keyword == "India")
    assert herald_india.mean is None and keyword_counts["herald"]["India"] == 0
    assert [(r.school, r.keyword) for r in results][:4] == [
        ("gazette", "Israel"),
        ("gazette", "Palestine"),
        ("gazette", "India"),
        ("gazette", "China"),
    ]


class FlakySentiment:
    """Real scores, except sentences mentioning China fail."""

    def __init__(self):
        self.engine = VaderEngine(load_lexicon())

    def sentence_sentiment(self, sentence):
        if "China" in sentence:
            raise SentimentServiceError("unavailable")
        return self.engine.sentence_sentiment(sentence)


def test_service_failures_are_excluded_and_counted(cfg, scraped):
    store, _, _ = scraped
    results, _, counts = _analyze(cfg, store, FlakySentiment())
    assert counts.reconciles()
    assert counts.excluded["sentiment_service_error"] > 0
    china = [r for r in results if r.keyword == "China"]
    assert all(r.mean is None for r in china)
