"""Date-grouped article corpus persisted as one JSON-lines file per school.

Each line of ``<corpus_dir>/<school>.jsonl`` is one article record. Writes
only append; when the same URL is written again the later line wins, and the
article keeps the position of its first insertion.
"""

from __future__ import annotations

import datetime as dt
import enum
import hashlib
import json
import os
import threading
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import StorageError, UnknownSchool

FIELDS = ("school", "url", "date", "title", "text", "source_kind", "fetched_at")


class SourceKind(str, enum.Enum):
    TEXT = "text"
    PDF = "pdf"
    JS_RENDERED = "js_rendered"


@dataclass(frozen=True)
class ArticleRecord:
    school: str
    url: str
    date: dt.date
    title: str = ""
    text: str = ""
    source_kind: SourceKind = SourceKind.TEXT
    fetched_at: str = ""

    @property
    def eligible(self) -> bool:
        """Whether the record may enter sentiment analysis."""
        return self.source_kind is SourceKind.TEXT and bool(self.text.strip())

    def to_json(self) -> str:
        obj = {
            "school": self.school,
            "url": self.url,
            "date": self.date.isoformat(),
            "title": self.title,
            "text": self.text,
            "source_kind": self.source_kind.value,
            "fetched_at": self.fetched_at,
        }
        return json.dumps(obj, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> ArticleRecord:
        obj = json.loads(line)
        return cls(
            school=obj["school"],
            url=obj["url"],
            date=dt.date.fromisoformat(obj["date"]),
            title=obj.get("title", ""),
            text=obj.get("text", ""),
            source_kind=SourceKind(obj.get("source_kind", "text")),
            fetched_at=obj.get("fetched_at", ""),
        )


# Extracted-but-untrimmed article; the name used by the extraction stage.
RawArticle = ArticleRecord


@dataclass
class DayRecord:
    school: str
    date: dt.date
    articles: list[ArticleRecord] = field(default_factory=list)


@dataclass(frozen=True)
class CorpusStats:
    school: str
    earliest_date: dt.date
    latest_date: dt.date
    day_count: int
    article_count: int


class CorpusStore:
    """Append-only JSONL corpus, partitioned by school.

    Partitions are loaded lazily. Only complete (newline-terminated) lines are
    read, so a reader never sees a half-written record.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._loaded: dict[str, dict[str, ArticleRecord]] = {}
        self._lock = threading.Lock()

    def _path(self, school: str) -> Path:
        if not school or "/" in school or school.startswith("."):
            raise ValueError(f"invalid school id {school!r}")
        return self.root / f"{school}.jsonl"

    def _partition(self, school: str) -> dict[str, ArticleRecord]:
        if school not in self._loaded:
            records: dict[str, ArticleRecord] = {}
            path = self._path(school)
            if path.exists():
                with path.open("r", encoding="utf-8") as fh:
                    for line in fh:
                        if not line.endswith("\n"):
                            break
                        if line.strip():
                            rec = ArticleRecord.from_json(line)
                            records[rec.url] = rec
            self._loaded[school] = records
        return self._loaded[school]

    def put(self, article: ArticleRecord) -> None:
        self.put_many([article])

    def put_many(self, articles: Iterable[ArticleRecord]) -> int:
        by_school: dict[str, list[ArticleRecord]] = {}
        for art in articles:
            if not art.school:
                raise ValueError("article has no school")
            if not isinstance(art.date, dt.date):
                raise ValueError(f"article {art.url} has no valid date")
            by_school.setdefault(art.school, []).append(art)
        written = 0
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            for school, batch in by_school.items():
                part = self._partition(school)
                try:
                    with self._path(school).open("a", encoding="utf-8") as fh:
                        fh.write("".join(a.to_json() + "\n" for a in batch))
                except OSError as exc:
                    raise StorageError(f"writing {school}: {exc}") from exc
                for art in batch:
                    part[art.url] = art
                written += len(batch)
        return written

    def __contains__(self, key: tuple[str, str]) -> bool:
        school, url = key
        return url in self._partition(school)

    def schools(self) -> list[str]:
        on_disk = {p.stem for p in self.root.glob("*.jsonl")} if self.root.exists() else set()
        return sorted(on_disk | {s for s, part in self._loaded.items() if part})

    def articles(self, school: str) -> list[ArticleRecord]:
        """All articles of a school in iteration order (date, then insertion)."""
        return [a for day in self.iterate(school) for a in day.articles]

    def iterate(
        self, school: str, start: dt.date | None = None, end: dt.date | None = None
    ) -> Iterator[DayRecord]:
        """DayRecords in ascending date order, ``start`` and ``end`` inclusive."""
        days: dict[dt.date, list[ArticleRecord]] = {}
        for art in self._partition(school).values():
            if (start is None or art.date >= start) and (end is None or art.date <= end):
                days.setdefault(art.date, []).append(art)
        for day in sorted(days):
            yield DayRecord(school, day, days[day])

    def stats(self, school: str) -> CorpusStats:
        part = self._partition(school)
        if not part:
            raise UnknownSchool(school)
        dates = {a.date for a in part.values()}
        return CorpusStats(
            school=school,
            earliest_date=min(dates),
            latest_date=max(dates),
            day_count=len(dates),
            article_count=len(part),
        )

    def export(self, out_dir: str | Path) -> list[Path]:
        """Write a compacted copy of every partition; returns the files written."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for school in self.schools():
            path = out / f"{school}.jsonl"
            tmp = path.with_suffix(".jsonl.tmp")
            with tmp.open("w", encoding="utf-8", newline="\n") as fh:
                for art in self.articles(school):
                    fh.write(art.to_json() + "\n")
            os.replace(tmp, path)
            written.append(path)
        return written

    @classmethod
    def import_from(cls, source_dir: str | Path, root: str | Path) -> CorpusStore:
        store = cls(root)
        for path in sorted(Path(source_dir).glob("*.jsonl")):
            with path.open("r", encoding="utf-8") as fh:
                store.put_many(ArticleRecord.from_json(line) for line in fh if line.strip())
        return store

    def snapshot_id(self) -> str:
        """Content hash of the compacted corpus."""
        h = hashlib.sha256()
        for school in self.schools():
            h.update(school.encode() + b"\0")
            for art in self.articles(school):
                h.update(art.to_json().encode("utf-8") + b"\n")
        return h.hexdigest()


def with_text(article: ArticleRecord, text: str) -> ArticleRecord:
    return replace(article, text=text)
