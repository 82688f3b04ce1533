import datetime as dt
from pathlib import Path

import pytest

from archivebias.config import SiteDescriptor, Strategy

FIXTURES = Path(__file__).parent / "fixtures"
SITES = FIXTURES / "sites"
GOLDEN_SITE = FIXTURES / "golden_site"
GOLDEN_OUT = Path(__file__).parent / "golden"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    results = item.config.stash.setdefault(_CRITERIA, {})
    number, title = marker.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if rep.when == "call" or failed:
        prev = results.get((number, title), True)
        results[(number, title)] = prev and not failed


_CRITERIA = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_CRITERIA, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(results.items()):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


class FakeClock:
    """Monotonic clock whose sleep() just advances time."""

    def __init__(self, start: float = 1000.0):
        self.now = start
        self.sleeps: list[float] = []

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.now += seconds


@pytest.fixture
def clock():
    return FakeClock()


def _site(**kw) -> SiteDescriptor:
    base = dict(
        min_date=dt.date(2009, 1, 1),
        max_date=dt.date(2023, 12, 31),
        rate_limit=0,
        scraping_permitted=True,
    )
    base.update(kw)
    return SiteDescriptor(**base)


STRATEGY_SITES = {
    "nav_bar_max": _site(
        school_id="navsite",
        base_url="https://nav.example.edu/archive/",
        strategy=Strategy.NAV_BAR_MAX,
        page_url_template="/archive/page/{page}/",
        max_page_selector="nav.pagination a",
        article_link_selector="div.story",
        date_selector="span.date",
        date_formats=("%B %d, %Y",),
    ),
    "url_template": _site(
        school_id="tmplsite",
        base_url="https://tmpl.example.edu/news/",
        strategy=Strategy.URL_TEMPLATE,
        page_url_template="/news?page={page}",
        article_link_selector="li.story",
        date_selector="h3.day",
        date_formats=("%B %d, %Y",),
    ),
    "second_page_probe": _site(
        school_id="probesite",
        base_url="https://probe.example.edu/archives/",
        strategy=Strategy.SECOND_PAGE_PROBE,
        article_link_selector="article.teaser",
        date_selector="time",
        date_formats=("%Y-%m-%d",),
    ),
    "backend_api": _site(
        school_id="apisite",
        base_url="https://api.example.edu/",
        strategy=Strategy.BACKEND_API,
        api_endpoint="/wp-json/wp/v2/posts?per_page=5",
        date_formats=("%Y-%m-%dT%H:%M:%S",),
    ),
}


@pytest.fixture
def make_site():
    return _site
