"""Per-site crawl descriptors and the pipeline configuration file.

The configuration is a single JSON document::

    {
      "corpus_dir": "corpus",
      "lexicon": "lexicon.tsv",
      "keywords": ["Israel", "Palestine"],
      "sites": [ { "school_id": "au", "base_url": "...", "strategy": "url_template", ... } ]
    }

Relative paths are resolved against the directory holding the file.
"""

from __future__ import annotations

import datetime as dt
import enum
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError


class Strategy(str, enum.Enum):
    NAV_BAR_MAX = "nav_bar_max"
    URL_TEMPLATE = "url_template"
    SECOND_PAGE_PROBE = "second_page_probe"
    BACKEND_API = "backend_api"


@dataclass(frozen=True)
class WatermarkRuleSet:
    """Header/footer patterns trimmed from article bodies before analysis.

    A pattern is a literal prefix (headers) or suffix (footers). Patterns
    starting with ``re:`` are regular expressions, anchored to the start or
    end of the body respectively.
    """

    school_id: str
    header_patterns: tuple[str, ...] = ()
    footer_patterns: tuple[str, ...] = ()


@dataclass(frozen=True)
class SiteDescriptor:
    school_id: str
    base_url: str
    strategy: Strategy
    date_formats: tuple[str, ...]
    article_link_selector: str = ""  # unused by backend_api
    min_date: dt.date = dt.date(1900, 1, 1)
    max_date: dt.date = dt.date(2100, 12, 31)
    date_selector: str = ""
    page_url_template: str = ""
    max_page_selector: str = ""
    next_page_selector: str = "a[rel~=next]"
    api_endpoint: str = ""
    api_page_param: str = "page"
    api_items_key: str = ""
    api_url_field: str = "link"
    api_date_field: str = "date"
    title_selector: str = "h1"
    content_selector: str = "article"
    rate_limit: int = 1000  # milliseconds between requests to one host
    scraping_permitted: bool = False
    max_pages: int = 10_000
    watermarks: WatermarkRuleSet | None = None

    def __post_init__(self) -> None:
        if not self.school_id:
            raise ConfigError("school_id must be non-empty")
        try:
            object.__setattr__(self, "strategy", Strategy(self.strategy))
        except ValueError as exc:
            raise ConfigError(f"{self.school_id}: unknown strategy {self.strategy!r}") from exc
        if self.rate_limit < 0:
            raise ConfigError(f"{self.school_id}: rate_limit must be >= 0")
        if self.min_date > self.max_date:
            raise ConfigError(f"{self.school_id}: min_date is after max_date")
        if not self.date_formats:
            raise ConfigError(f"{self.school_id}: at least one date format is required")
        if self.max_pages < 1:
            raise ConfigError(f"{self.school_id}: max_pages must be >= 1")
        required = {
            Strategy.NAV_BAR_MAX: ("max_page_selector", "page_url_template", "article_link_selector"),
            Strategy.URL_TEMPLATE: ("page_url_template", "article_link_selector"),
            Strategy.SECOND_PAGE_PROBE: ("next_page_selector", "article_link_selector"),
            Strategy.BACKEND_API: ("api_endpoint", "api_page_param", "api_url_field", "api_date_field"),
        }[self.strategy]
        missing = [name for name in required if not getattr(self, name)]
        if missing:
            raise ConfigError(
                f"{self.school_id}: strategy {self.strategy.value} requires {', '.join(missing)}"
            )
        if self.strategy in (Strategy.NAV_BAR_MAX, Strategy.URL_TEMPLATE):
            if "{page}" not in self.page_url_template:
                raise ConfigError(f"{self.school_id}: page_url_template needs a {{page}} placeholder")

    def in_range(self, day: dt.date) -> bool:
        return self.min_date <= day <= self.max_date

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> SiteDescriptor:
        data = dict(raw)
        try:
            data["strategy"] = Strategy(data["strategy"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad or missing strategy in site {raw.get('school_id')!r}") from exc
        for key in ("min_date", "max_date"):
            if key in data:
                data[key] = _parse_iso_date(data[key], key)
        if "date_formats" in data:
            data["date_formats"] = tuple(data["date_formats"])
        wm = data.pop("watermarks", None)
        if wm is not None:
            data["watermarks"] = WatermarkRuleSet(
                school_id=data.get("school_id", ""),
                header_patterns=tuple(wm.get("header_patterns", ())),
                footer_patterns=tuple(wm.get("footer_patterns", ())),
            )
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown site fields: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def watermark_rules(self) -> WatermarkRuleSet:
        return self.watermarks or WatermarkRuleSet(self.school_id)


def _parse_iso_date(value: Any, name: str) -> dt.date:
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError as exc:
        raise ConfigError(f"{name}: expected YYYY-MM-DD, got {value!r}") from exc


DEFAULT_CONCLUSIONS = {
    "within_school": (
        "Supported: within {school}, articles matching one keyword can be compared "
        "with articles matching another; larger mean shifts mark the keyword whose "
        "coverage departs more from its own summaries."
    ),
    "population": (
        "Supported: across the analysed schools (or across one school's articles), "
        "keywords can be ranked by how far their articles' summaries depart from "
        "their sentence-level tone."
    ),
    "invalid": (
        "Not supported: a shift for a keyword does not show that a school leans for "
        "or against that topic, since neither article subject matter nor authorship "
        "is controlled for."
    ),
}


@dataclass
class PipelineConfig:
    path: Path | None
    sites: list[SiteDescriptor]
    corpus_dir: Path
    lexicon: Path | None = None
    keywords: list[str] = field(default_factory=list)
    case_sensitive: bool = False
    match_mode: str = "substring"
    search_title: bool = True
    max_tokens: int = 500
    overlong_policy: str = "reject"
    summary_ratio: float = 0.2
    stopwords: Path | None = None
    max_retries: int = 3
    backoff: tuple[float, ...] = (1.0, 2.0, 4.0)
    timeout: float = 30.0
    histogram_bins: int = 10
    conclusions: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_CONCLUSIONS))
    raw_bytes: bytes = b""

    def site(self, school_id: str) -> SiteDescriptor:
        for site in self.sites:
            if site.school_id == school_id:
                return site
        raise ConfigError(f"no site configured for {school_id!r}")

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_bytes).hexdigest()


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(raw, base_dir=path.parent, path=path, raw_bytes=raw_bytes)


def config_from_dict(
    raw: dict[str, Any], base_dir: Path = Path("."), path: Path | None = None, raw_bytes: bytes = b""
) -> PipelineConfig:
    def resolve(value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base_dir / p

    sites = [SiteDescriptor.from_dict(s) for s in raw.get("sites", [])]
    ids = [s.school_id for s in sites]
    if len(ids) != len(set(ids)):
        raise ConfigError("duplicate school_id in sites")
    summ = raw.get("summarizer", {})
    fetch = raw.get("fetch", {})
    conclusions = dict(DEFAULT_CONCLUSIONS)
    conclusions.update(raw.get("conclusions", {}))
    cfg = PipelineConfig(
        path=path,
        sites=sites,
        corpus_dir=resolve(raw.get("corpus_dir", "corpus")),
        lexicon=resolve(raw.get("lexicon")),
        keywords=list(raw.get("keywords", [])),
        case_sensitive=bool(raw.get("case_sensitive", False)),
        match_mode=raw.get("match_mode", "substring"),
        search_title=bool(raw.get("search_title", True)),
        max_tokens=int(summ.get("max_tokens", 500)),
        overlong_policy=summ.get("overlong_policy", "reject"),
        summary_ratio=float(summ.get("ratio", 0.2)),
        stopwords=resolve(summ.get("stopwords")),
        max_retries=int(fetch.get("max_retries", 3)),
        backoff=tuple(float(b) for b in fetch.get("backoff", (1.0, 2.0, 4.0))),
        timeout=float(fetch.get("timeout", 30.0)),
        histogram_bins=int(raw.get("histogram_bins", 10)),
        conclusions=conclusions,
        raw_bytes=raw_bytes,
    )
    if cfg.match_mode not in ("substring", "word_boundary"):
        raise ConfigError(f"match_mode must be substring or word_boundary, not {cfg.match_mode!r}")
    if cfg.overlong_policy not in ("reject", "truncate", "chunk"):
        raise ConfigError(f"summarizer.overlong_policy {cfg.overlong_policy!r} is not reject/truncate/chunk")
    if not 0 < cfg.summary_ratio <= 1:
        raise ConfigError("summarizer.ratio must be in (0, 1]")
    if cfg.max_tokens < 1:
        raise ConfigError("summarizer.max_tokens must be >= 1")
    if cfg.histogram_bins < 2:
        raise ConfigError("histogram_bins must be >= 2")
    return cfg
