"""Archive subpage enumeration and per-day article link extraction."""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any
from urllib.parse import urlencode, urljoin, urlparse, parse_qsl, urlunparse

from bs4 import BeautifulSoup, Tag

from .config import SiteDescriptor, Strategy
from .errors import DateUnparseable, FetchError, PermissionDenied, StrategyDataMissing
from .fetcher import FetchedPage, Fetcher

logger = logging.getLogger(__name__)

# Listing pages past the end of an archive commonly answer with these.
_END_OF_ARCHIVE_STATUSES = {400, 404, 410}


@dataclass(frozen=True, order=True)
class ArticleLink:
    date: dt.date
    url: str


@dataclass
class LinkBatch:
    """Links pulled from one subpage plus what was dropped on the way."""

    links: list[ArticleLink] = field(default_factory=list)
    matched: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (url, raw date text)
    out_of_range: int = 0

    def __iter__(self):
        return iter(self.links)

    def __len__(self) -> int:
        return len(self.links)


def ensure_permitted(descriptor: SiteDescriptor) -> None:
    if not descriptor.scraping_permitted:
        raise PermissionDenied(f"scraping is not permitted for {descriptor.school_id}")


def site_fetch(fetcher: Fetcher, descriptor: SiteDescriptor, url: str) -> FetchedPage:
    ensure_permitted(descriptor)
    return fetcher.fetch(url, descriptor.rate_limit)


def parse_date(text: str, formats: tuple[str, ...]) -> dt.date:
    """Try ``formats`` in order; the first that parses wins."""
    cleaned = " ".join(text.split())
    for fmt in formats:
        try:
            return dt.datetime.strptime(cleaned, fmt).date()
        except ValueError:
            continue
    raise DateUnparseable(f"no format in {list(formats)} matches {cleaned!r}")


def _is_absolute(url: str) -> bool:
    parts = urlparse(url)
    return parts.scheme in ("http", "https") and bool(parts.netloc)


def _soup(html: str | bytes) -> BeautifulSoup:
    return BeautifulSoup(html, "lxml")


def _link_of(element: Tag) -> str | None:
    if element.name == "a" and element.get("href"):
        return element["href"]
    anchor = element.find("a", href=True)
    return anchor["href"] if anchor else None


def _date_text(element: Tag) -> str:
    return element.get("datetime") or element.get_text(" ", strip=True)


def extract_article_links(subpage_html: str | bytes | BeautifulSoup, descriptor: SiteDescriptor) -> LinkBatch:
    """Pull dated article links out of one archive listing page.

    Each element matched by ``article_link_selector`` is one article; its URL
    is its own ``href`` or that of its first descendant anchor. The date is
    read from a ``date_selector`` match inside the element, falling back to
    the closest preceding match in the document, which covers listings
    grouped under per-day headings.
    """
    soup = subpage_html if isinstance(subpage_html, BeautifulSoup) else _soup(subpage_html)
    items = soup.select(descriptor.article_link_selector)
    batch = LinkBatch(matched=len(items))
    if not items:
        return batch

    order: dict[int, int] = {}
    dated: list[Tag] = []
    if descriptor.date_selector:
        order = {id(node): i for i, node in enumerate(soup.descendants)}
        dated = soup.select(descriptor.date_selector)

    seen: set[str] = set()
    for item in items:
        href = _link_of(item)
        if not href:
            continue
        url = urljoin(descriptor.base_url, href.strip())
        if not _is_absolute(url):
            continue
        date_el = item.select_one(descriptor.date_selector) if descriptor.date_selector else None
        if date_el is None and dated:
            pos = order[id(item)]
            preceding = [d for d in dated if order[id(d)] < pos]
            date_el = preceding[-1] if preceding else None
        raw = _date_text(date_el) if date_el is not None else ""
        try:
            day = parse_date(raw, descriptor.date_formats)
        except DateUnparseable:
            batch.skipped.append((url, raw))
            continue
        if not descriptor.in_range(day):
            batch.out_of_range += 1
            continue
        if url in seen:
            continue
        seen.add(url)
        batch.links.append(ArticleLink(date=day, url=url))
    return batch


def _items_from_payload(payload: Any, items_key: str) -> list[Any]:
    node = payload
    for part in filter(None, items_key.split(".")):
        if not isinstance(node, dict):
            return []
        node = node.get(part, [])
    return node if isinstance(node, list) else []


def extract_api_links(payload: str | bytes, descriptor: SiteDescriptor) -> LinkBatch:
    """Article links from one JSON page of a backend listing API."""
    try:
        data = json.loads(payload) if payload and payload.strip() else []
    except json.JSONDecodeError as exc:
        raise StrategyDataMissing(f"{descriptor.school_id}: API response is not JSON ({exc})") from exc
    items = _items_from_payload(data, descriptor.api_items_key)
    batch = LinkBatch(matched=len(items))
    seen: set[str] = set()
    for item in items:
        if not isinstance(item, dict):
            continue
        href = item.get(descriptor.api_url_field)
        if not href:
            continue
        url = urljoin(descriptor.base_url, str(href))
        if not _is_absolute(url):
            continue
        raw = str(item.get(descriptor.api_date_field, ""))
        try:
            day = parse_date(raw, descriptor.date_formats)
        except DateUnparseable:
            batch.skipped.append((url, raw))
            continue
        if not descriptor.in_range(day):
            batch.out_of_range += 1
            continue
        if url not in seen:
            seen.add(url)
            batch.links.append(ArticleLink(date=day, url=url))
    return batch


def links_from_page(page: FetchedPage, descriptor: SiteDescriptor) -> LinkBatch:
    if descriptor.strategy is Strategy.BACKEND_API:
        return extract_api_links(page.text, descriptor)
    return extract_article_links(page.text, descriptor)


def page_url(template: str, page: int, base_url: str) -> str:
    """URL of listing page ``page``; page 1 is always the archive's base URL."""
    if page == 1:
        return base_url
    return urljoin(base_url, template.format(page=page))


def api_page_url(descriptor: SiteDescriptor, page: int) -> str:
    endpoint = urljoin(descriptor.base_url, descriptor.api_endpoint)
    parts = urlparse(endpoint)
    query = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True) if k != descriptor.api_page_param]
    query.append((descriptor.api_page_param, str(page)))
    return urlunparse(parts._replace(query=urlencode(query)))


_NUMBER = re.compile(r"\d+")


def infer_template(second_page_url: str) -> tuple[str, int]:
    """Turn the URL of listing page 2 into a ``{page}`` template.

    The last number in the URL is taken as the page counter. Returns the
    template and the counter's step: 1 when the number is 2 (``/page/2/``),
    otherwise the number itself, for offset-style paging such as
    ``?start=20``.
    """
    matches = list(_NUMBER.finditer(second_page_url))
    if not matches:
        raise StrategyDataMissing(f"no page number in next-page link {second_page_url!r}")
    last = matches[-1]
    value = int(last.group())
    if value == 0:
        raise StrategyDataMissing(f"cannot infer paging from {second_page_url!r}")
    template = second_page_url[: last.start()] + "{page}" + second_page_url[last.end() :]
    return template, (1 if value == 2 else value)


def _template_pages(
    descriptor: SiteDescriptor, fetcher: Fetcher, url_for: Any, first_page: FetchedPage | None = None
) -> list[str]:
    """Walk pages 1, 2, ... until one lists no articles (or is missing)."""
    urls: list[str] = []
    seen: set[str] = set()
    for page in range(1, descriptor.max_pages + 1):
        url = url_for(page)
        if url in seen:
            break
        if page == 1 and first_page is not None:
            fetched = first_page
        else:
            try:
                fetched = site_fetch(fetcher, descriptor, url)
            except FetchError as exc:
                if page > 1 and exc.status in _END_OF_ARCHIVE_STATUSES:
                    break
                raise
        if links_from_page(fetched, descriptor).matched == 0:
            break
        seen.add(url)
        urls.append(url)
    else:
        logger.warning("%s: stopped at the %d-page cap", descriptor.school_id, descriptor.max_pages)
    return urls


def enumerate_subpages(descriptor: SiteDescriptor, fetcher: Fetcher) -> list[str]:
    """Every listing-page URL of the archive, in page order."""
    ensure_permitted(descriptor)
    strategy = descriptor.strategy

    if strategy is Strategy.NAV_BAR_MAX:
        first = site_fetch(fetcher, descriptor, descriptor.base_url)
        soup = _soup(first.text)
        numbers = [
            int(m.group())
            for el in soup.select(descriptor.max_page_selector)
            for m in _NUMBER.finditer(el.get_text(" ", strip=True))
        ]
        if not numbers:
            raise StrategyDataMissing(
                f"{descriptor.school_id}: {descriptor.max_page_selector!r} found no page numbers"
            )
        last = min(max(numbers), descriptor.max_pages)
        urls = [page_url(descriptor.page_url_template, p, descriptor.base_url) for p in range(1, last + 1)]
        return list(dict.fromkeys(urls))

    if strategy is Strategy.URL_TEMPLATE:
        return _template_pages(
            descriptor, fetcher, lambda p: page_url(descriptor.page_url_template, p, descriptor.base_url)
        )

    if strategy is Strategy.SECOND_PAGE_PROBE:
        first = site_fetch(fetcher, descriptor, descriptor.base_url)
        nxt = _soup(first.text).select_one(descriptor.next_page_selector)
        if nxt is None or not _link_of(nxt):
            # No way forward: a single-page archive.
            return [descriptor.base_url] if links_from_page(first, descriptor).matched else []
        second = urljoin(descriptor.base_url, _link_of(nxt))
        template, step = infer_template(second)

        def url_for(p: int) -> str:
            if p == 1:
                return descriptor.base_url
            return template.format(page=p if step == 1 else (p - 1) * step)

        return _template_pages(descriptor, fetcher, url_for, first_page=first)

    if strategy is Strategy.BACKEND_API:
        return _template_pages(descriptor, fetcher, lambda p: api_page_url(descriptor, p))

    raise AssertionError(strategy)
