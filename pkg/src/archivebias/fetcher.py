"""Polite HTTP fetching with per-host rate limiting, retries and record/replay.

Replay fixtures live in a flat directory. Each response is stored as
``<sha256(url)>.body`` (raw bytes) next to ``<sha256(url)>.json`` holding the
status, content type, declared encoding and the original fetch time.
"""

from __future__ import annotations

import datetime as dt
import enum
import hashlib
import json
import logging
import re
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

import requests

from .errors import EncodingUndetectable, FetchError, ReplayMiss

logger = logging.getLogger(__name__)

USER_AGENT = "archivebias/0.1 (+research crawler)"

_CHARSET_HEADER = re.compile(r"charset\s*=\s*[\"']?([\w.:-]+)", re.I)
_CHARSET_META = re.compile(rb"<meta[^>]+charset\s*=\s*[\"']?([\w.:-]+)", re.I)


class FetchMode(str, enum.Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass(frozen=True)
class RawResponse:
    """What a transport hands back before any decoding."""

    status: int
    body: bytes
    content_type: str = ""


@dataclass(frozen=True)
class FetchedPage:
    url: str
    status: int
    body: bytes
    content_type: str
    encoding: str | None
    fetched_at: str
    encoding_undetectable: bool = False

    @property
    def text(self) -> str:
        if self.encoding is None:
            raise EncodingUndetectable(f"{self.url}: no usable character encoding")
        return self.body.decode(self.encoding)


def detect_encoding(body: bytes, content_type: str = "") -> str | None:
    """Return a codec that decodes ``body`` cleanly, or None.

    Declared charsets (header first, then ``<meta>``) are trusted only if they
    actually decode the bytes. Without a declaration UTF-8 is tried. There is
    deliberately no permissive fallback such as latin-1, which would accept
    any byte string and hide mangled text.
    """
    declared = []
    m = _CHARSET_HEADER.search(content_type or "")
    if m:
        declared.append(m.group(1))
    m = _CHARSET_META.search(body[:4096])
    if m:
        declared.append(m.group(1).decode("ascii", "replace"))
    candidates = declared or ["utf-8"]
    for name in candidates:
        try:
            body.decode(name)
        except (LookupError, UnicodeDecodeError):
            continue
        return name.lower()
    return None


def _utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()


class HostRateLimiter:
    """Serializes requests per host with a minimum spacing."""

    def __init__(self, clock: Callable[[], float] = time.monotonic, sleep: Callable[[float], None] = time.sleep):
        self._clock = clock
        self._sleep = sleep
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._last: dict[str, float] = {}

    def _lock_for(self, host: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(host, threading.Lock())

    def acquire(self, host: str, min_interval: float) -> threading.Lock:
        """Block until ``host`` may be contacted; returns the held host lock.

        The caller releases the lock once its request has been issued, so
        same-host requests never overlap.
        """
        lock = self._lock_for(host)
        lock.acquire()
        last = self._last.get(host)
        if last is not None:
            wait = min_interval - (self._clock() - last)
            if wait > 0:
                self._sleep(wait)
        self._last[host] = self._clock()
        return lock


def requests_transport(timeout: float = 30.0) -> Callable[[str], RawResponse]:
    session = requests.Session()
    session.headers["User-Agent"] = USER_AGENT

    def get(url: str) -> RawResponse:
        resp = session.get(url, timeout=timeout)
        return RawResponse(resp.status_code, resp.content, resp.headers.get("Content-Type", ""))

    return get


def fixture_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def write_fixture(directory: Path, url: str, response: RawResponse, fetched_at: str) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    key = fixture_key(url)
    (directory / f"{key}.body").write_bytes(response.body)
    meta = {
        "url": url,
        "status": response.status,
        "content_type": response.content_type,
        "encoding": detect_encoding(response.body, response.content_type),
        "fetched_at": fetched_at,
    }
    (directory / f"{key}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class Fetcher:
    """Fetch pages politely, or replay them from recorded fixtures.

    ``transport`` maps a URL to a :class:`RawResponse` and may raise
    ``requests`` exceptions for transport failures. Tests pass scripted
    transports; production uses :func:`requests_transport`.
    """

    def __init__(
        self,
        mode: FetchMode = FetchMode.LIVE,
        fixture_dir: str | Path | None = None,
        transport: Callable[[str], RawResponse] | None = None,
        max_retries: int = 3,
        backoff: tuple[float, ...] = (1.0, 2.0, 4.0),
        timeout: float = 30.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.mode = FetchMode(mode)
        if self.mode is not FetchMode.LIVE and fixture_dir is None:
            raise ValueError(f"{self.mode.value} mode needs a fixture directory")
        self.fixture_dir = Path(fixture_dir) if fixture_dir is not None else None
        self._transport = transport
        self._timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._sleep = sleep
        self.limiter = HostRateLimiter(clock=clock, sleep=sleep)
        self.network_calls = 0

    @property
    def transport(self) -> Callable[[str], RawResponse]:
        if self._transport is None:
            self._transport = requests_transport(self._timeout)
        return self._transport

    def fetch(self, url: str, rate_limit_ms: int = 1000) -> FetchedPage:
        if self.mode is FetchMode.REPLAY:
            return self._replay(url)
        response = self._fetch_with_retries(url, rate_limit_ms / 1000.0)
        fetched_at = _utc_now()
        if self.mode is FetchMode.RECORD:
            write_fixture(self.fixture_dir, url, response, fetched_at)
        if response.status >= 400:
            raise FetchError(url, f"HTTP {response.status}", status=response.status)
        return self._page(url, response, fetched_at)

    def _page(self, url: str, response: RawResponse, fetched_at: str) -> FetchedPage:
        encoding = detect_encoding(response.body, response.content_type)
        if encoding is None and not response.body.startswith(b"%PDF-"):
            logger.warning("undetectable encoding for %s; keeping raw bytes", url)
        return FetchedPage(
            url=url,
            status=response.status,
            body=response.body,
            content_type=response.content_type,
            encoding=encoding,
            fetched_at=fetched_at,
            encoding_undetectable=encoding is None,
        )

    def _fetch_with_retries(self, url: str, min_interval: float) -> RawResponse:
        host = urlparse(url).netloc.lower()
        attempt = 0
        while True:
            lock = self.limiter.acquire(host, min_interval)
            try:
                self.network_calls += 1
                response = self.transport(url)
                failure = f"HTTP {response.status}" if response.status >= 500 else None
            except (requests.Timeout, requests.ConnectionError) as exc:
                response, failure = None, f"{type(exc).__name__}: {exc}"
            except requests.RequestException as exc:
                raise FetchError(url, str(exc)) from exc
            finally:
                lock.release()
            if failure is None:
                return response
            if attempt >= self.max_retries:
                status = response.status if response is not None else None
                raise FetchError(url, f"{failure} after {attempt + 1} attempts", status=status)
            delay = self.backoff[min(attempt, len(self.backoff) - 1)] if self.backoff else 0.0
            logger.info("retrying %s in %.1fs (%s)", url, delay, failure)
            self._sleep(delay)
            attempt += 1

    def _replay(self, url: str) -> FetchedPage:
        key = fixture_key(url)
        meta_path = self.fixture_dir / f"{key}.json"
        body_path = self.fixture_dir / f"{key}.body"
        if not meta_path.exists() or not body_path.exists():
            raise ReplayMiss(url, "not recorded in fixture directory")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        status = int(meta["status"])
        if status >= 400:
            raise FetchError(url, f"HTTP {status} (recorded)", status=status)
        response = RawResponse(status, body_path.read_bytes(), meta.get("content_type", ""))
        return self._page(url, response, meta.get("fetched_at", ""))
