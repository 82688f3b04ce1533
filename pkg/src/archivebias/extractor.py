"""Article page classification, text extraction and watermark trimming."""

from __future__ import annotations

import datetime as dt
import re

from bs4 import BeautifulSoup, Comment, NavigableString, Tag

from .config import SiteDescriptor, WatermarkRuleSet
from .corpus import ArticleRecord, SourceKind
from .errors import ExtractionEmpty
from .fetcher import FetchedPage

BLOCK_TAGS = frozenset(
    """address article aside blockquote br dd details dialog div dl dt fieldset
    figcaption figure footer form h1 h2 h3 h4 h5 h6 header hr li main nav ol p
    pre section table tbody td tfoot th thead tr ul""".split()
)
SKIP_TAGS = frozenset("script style noscript template iframe svg head".split())

# Empty mount points left by client-side frameworks.
_APP_ROOT_SELECTORS = (
    "#root",
    "#app",
    "#__next",
    "#__nuxt",
    "[data-reactroot]",
    "[ng-app]",
    "[data-server-rendered]",
)


def _parse(page: FetchedPage) -> BeautifulSoup:
    return BeautifulSoup(page.text, "lxml")


def _is_pdf(page: FetchedPage) -> bool:
    ctype = page.content_type.split(";")[0].strip().lower()
    return ctype == "application/pdf" or page.body.lstrip()[:5] == b"%PDF-"


def classify_source(page: FetchedPage, content_selector: str = "article") -> SourceKind:
    if _is_pdf(page):
        return SourceKind.PDF
    if page.encoding_undetectable:
        return SourceKind.TEXT
    soup = _parse(page)
    content = soup.select_one(content_selector)
    if content is not None and content.get_text(strip=True):
        return SourceKind.TEXT
    has_scripts = soup.find("script") is not None
    mount = any(
        el is not None and not el.get_text(strip=True)
        for el in (soup.select_one(sel) for sel in _APP_ROOT_SELECTORS)
    )
    if has_scripts and mount:
        return SourceKind.JS_RENDERED
    return SourceKind.TEXT


def _normalize_line(text: str) -> str:
    return " ".join(text.split())


def block_text(root: Tag) -> list[str]:
    """Paragraph texts of ``root``; a paragraph ends at every block boundary."""
    paragraphs: list[str] = []
    current: list[str] = []

    def flush() -> None:
        line = _normalize_line("".join(current))
        if line:
            paragraphs.append(line)
        current.clear()

    def walk(node: Tag) -> None:
        for child in node.children:
            if isinstance(child, Comment):
                continue
            if isinstance(child, NavigableString):
                current.append(str(child))
            elif isinstance(child, Tag):
                if child.name in SKIP_TAGS:
                    continue
                if child.name in BLOCK_TAGS:
                    flush()
                    walk(child)
                    flush()
                else:
                    walk(child)

    walk(root)
    flush()
    return paragraphs


def extract_text(
    page: FetchedPage, descriptor: SiteDescriptor, date: dt.date, url: str | None = None
) -> ArticleRecord:
    """Title and body of a text article page, watermarks left in place."""
    soup = _parse(page)
    content = soup.select_one(descriptor.content_selector)
    if content is None:
        raise ExtractionEmpty(f"{page.url}: {descriptor.content_selector!r} matched nothing")
    title_el = soup.select_one(descriptor.title_selector) if descriptor.title_selector else None
    title = _normalize_line(title_el.get_text(" ")) if title_el is not None else ""
    paragraphs = block_text(content)
    # The headline often sits inside the content element as well.
    if paragraphs and title and paragraphs[0] == title:
        paragraphs = paragraphs[1:]
    body = "\n\n".join(paragraphs)
    if not body:
        raise ExtractionEmpty(f"{page.url}: no text in {descriptor.content_selector!r}")
    return ArticleRecord(
        school=descriptor.school_id,
        url=url or page.url,
        date=date,
        title=title,
        text=body,
        source_kind=SourceKind.TEXT,
        fetched_at=page.fetched_at,
    )


def _strip_header(text: str, pattern: str) -> str | None:
    if pattern.startswith("re:"):
        m = re.match(pattern[3:], text)
        if m and m.end() > 0:
            return text[m.end() :]
        return None
    if pattern and text.startswith(pattern):
        return text[len(pattern) :]
    return None


def _strip_footer(text: str, pattern: str) -> str | None:
    if pattern.startswith("re:"):
        m = re.search(f"(?:{pattern[3:]})\\Z", text)
        if m and m.start() < len(text):
            return text[: m.start()]
        return None
    if pattern and text.endswith(pattern):
        return text[: -len(pattern)]
    return None


def trim_watermarks(article: ArticleRecord, rules: WatermarkRuleSet) -> str:
    """Body text with configured headers and footers removed.

    Rules are applied until nothing more matches, so repeated watermarks go
    too and a second call is a no-op. Whitespace is trimmed only where
    something was cut.
    """
    if rules.school_id and rules.school_id != article.school:
        raise ValueError(f"rules for {rules.school_id!r} applied to {article.school!r}")
    text = article.text
    changed = True
    while changed and text:
        changed = False
        for pattern in rules.header_patterns:
            rest = _strip_header(text, pattern)
            if rest is not None:
                text, changed = rest.lstrip(), True
        for pattern in rules.footer_patterns:
            rest = _strip_footer(text, pattern)
            if rest is not None:
                text, changed = rest.rstrip(), True
    return text
