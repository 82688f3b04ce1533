import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archivebias.config import WatermarkRuleSet
from archivebias.corpus import ArticleRecord, SourceKind
from archivebias.errors import ExtractionEmpty
from archivebias.extractor import classify_source, extract_text, trim_watermarks
from archivebias.fetcher import FetchedPage

DAY = dt.date(2015, 4, 2)


def page(html, content_type="text/html; charset=utf-8", url="https://gazette.example.edu/a/"):
    body = html.encode("utf-8") if isinstance(html, str) else html
    return FetchedPage(url, 200, body, content_type, "utf-8", "2024-01-01T00:00:00+00:00")


ARTICLE = """<html><head><title>x</title><script>var ad = 1;</script></head><body>
<nav>Home | News</nav>
<article><h1>Senate passes budget</h1>
<p>The senate met on <b>Tuesday</b> &amp; voted.</p>
<p>Students   were
   pleased.<br>Some were not.</p>
<!-- tracking -->
<div class="ad"><script>ads()</script></div>
<p>&copy; 2015 The Gazette. All rights reserved.</p>
</article>
<footer>Contact us</footer></body></html>"""


@pytest.fixture
def site(make_site):
    return make_site(
        school_id="gazette",
        base_url="https://gazette.example.edu/",
        strategy="url_template",
        page_url_template="/p/{page}",
        article_link_selector="li",
        date_formats=("%Y",),
        title_selector="h1",
        content_selector="article",
    )


def test_extracts_paragraphs_and_keeps_watermark(site):
    rec = extract_text(page(ARTICLE), site, DAY)
    assert rec.title == "Senate passes budget"
    assert rec.text.split("\n\n") == [
        "The senate met on Tuesday & voted.",
        "Students were pleased.",
        "Some were not.",
        "© 2015 The Gazette. All rights reserved.",
    ]
    assert rec.date == DAY and rec.school == "gazette" and rec.source_kind is SourceKind.TEXT


def test_trim_removes_footer_only_in_processing(site):
    rec = extract_text(page(ARTICLE), site, DAY)
    rules = WatermarkRuleSet("gazette", footer_patterns=(r"re:©\s*\d{4} The Gazette\. All rights reserved\.",))
    trimmed = trim_watermarks(rec, rules)
    assert trimmed == "The senate met on Tuesday & voted.\n\nStudents were pleased.\n\nSome were not."
    assert rec.text.endswith("All rights reserved.")


def test_trim_literal_header_and_repeats():
    rec = ArticleRecord("g", "u", DAY, text="GAZETTE ONLINE\n\nGAZETTE ONLINE Body text. Read more Read more")
    rules = WatermarkRuleSet("g", header_patterns=("GAZETTE ONLINE",), footer_patterns=("Read more",))
    assert trim_watermarks(rec, rules) == "Body text."


def test_trim_refuses_other_school():
    rec = ArticleRecord("g", "u", DAY, text="x")
    with pytest.raises(ValueError):
        trim_watermarks(rec, WatermarkRuleSet("h"))


def test_no_content_element(site):
    with pytest.raises(ExtractionEmpty):
        extract_text(page("<html><body><p>hi</p></body></html>"), site, DAY)


def test_headline_only_content_is_empty(site):
    with pytest.raises(ExtractionEmpty):
        extract_text(page("<article><h1>Just a title</h1></article>"), site, DAY)


def test_classify_pdf_by_type_and_magic():
    assert classify_source(page(b"%PDF-1.4 ...", "application/pdf")) is SourceKind.PDF
    assert classify_source(page(b"%PDF-1.7\n...", "application/octet-stream")) is SourceKind.PDF


def test_classify_js_shell():
    shell = '<html><body><div id="root"></div><script src="/main.js"></script></body></html>'
    assert classify_source(page(shell)) is SourceKind.JS_RENDERED
    assert classify_source(page(ARTICLE)) is SourceKind.TEXT
    # Scripts alone don't make a page JS-rendered.
    assert classify_source(page("<html><body><p>x</p><script></script></body></html>")) is SourceKind.TEXT


pieces = st.sampled_from(["Body text.", "GAZETTE ONLINE", "Read more", " ", "\n\n", "© 2012 The Gazette.", "x"])


@settings(max_examples=100, deadline=None)
@given(st.lists(pieces, min_size=1, max_size=12).map("".join))
def test_trim_is_idempotent(text):
    rules = WatermarkRuleSet(
        "g",
        header_patterns=("GAZETTE ONLINE",),
        footer_patterns=("Read more", r"re:©\s*\d{4} The Gazette\."),
    )
    once = trim_watermarks(ArticleRecord("g", "u", DAY, text=text), rules)
    twice = trim_watermarks(ArticleRecord("g", "u", DAY, text=once), rules)
    assert once == twice
