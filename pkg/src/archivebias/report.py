"""Result serialization plus plot-ready tables: bias table, histograms,
sentiment scatter, per-keyword distributions and keyword counts.

Values are kept at full precision in memory and in ``results.json``; the
bias table rounds to two decimals only when written.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from bisect import bisect_right
from collections.abc import Iterable, Sequence
from pathlib import Path

from .bias import ArticleBias, BiasResult, BiasTriple, GranularitySentiments
from .config import DEFAULT_CONCLUSIONS
from .errors import MalformedResults, StorageError

logger = logging.getLogger(__name__)

RESULTS_FORMAT = "archivebias-results/1"
GRANULARITIES = ("article", "paragraph", "sentence")
COMPONENTS = ("pos", "neg", "neu")


# -- results file -------------------------------------------------------------


def results_document(
    results: Sequence[BiasResult], keywords: Sequence[str], keyword_counts: dict[str, dict[str, int]]
) -> dict:
    return {
        "format": RESULTS_FORMAT,
        "keywords": list(keywords),
        "results": [
            {
                "school": r.school,
                "keyword": r.keyword,
                "article_count": r.article_count,
                "mean": r.mean.as_dict() if r.mean is not None else None,
                "articles": [
                    {
                        "url": a.url,
                        "date": a.date,
                        "sentiment": a.granularities.as_dict(),
                        "bias": a.bias.as_dict(),
                    }
                    for a in r.articles
                ],
            }
            for r in results
        ],
        "keyword_counts": keyword_counts,
    }


def dump_json(obj: object) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def load_results(path: str | Path) -> tuple[list[BiasResult], dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise StorageError(f"cannot read results {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedResults(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != RESULTS_FORMAT:
        raise MalformedResults(f"{path}: not an {RESULTS_FORMAT} document")
    try:
        results = [
            BiasResult(
                school=r["school"],
                keyword=r["keyword"],
                mean=BiasTriple.from_dict(r["mean"]) if r["mean"] is not None else None,
                article_count=int(r["article_count"]),
                articles=[
                    ArticleBias(
                        url=a["url"],
                        date=a["date"],
                        granularities=GranularitySentiments.from_dict(a["sentiment"]),
                        bias=BiasTriple.from_dict(a["bias"]),
                    )
                    for a in r["articles"]
                ],
            )
            for r in doc["results"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResults(f"{path}: {exc}") from exc
    return results, doc


# -- bias table ---------------------------------------------------------------


def fmt2(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _ordered(values: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(values))


def bias_table_rows(results: Sequence[BiasResult]) -> tuple[list[str], list[list[str]]]:
    """Wide table: one row per school, pos/neg/neu/n columns grouped by keyword."""
    schools = _ordered(r.school for r in results)
    keywords = _ordered(r.keyword for r in results)
    cells = {(r.school, r.keyword): r for r in results if r.mean is not None}
    header = ["school"] + [f"{kw}_{c}" for kw in keywords for c in (*COMPONENTS, "n")]
    rows = []
    for school in schools:
        row = [school]
        for kw in keywords:
            r = cells.get((school, kw))
            if r is None:
                row += ["", "", "", ""]
            else:
                row += [fmt2(r.mean.pos_delta), fmt2(r.mean.neg_delta), fmt2(r.mean.neu_delta), str(r.article_count)]
        rows.append(row)
    return header, rows


def _csv_text(header: list[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def bias_table_csv(results: Sequence[BiasResult]) -> str:
    header, rows = bias_table_rows(results)
    return _csv_text(header, rows)


def bias_table_json(results: Sequence[BiasResult]) -> str:
    rows = [
        {
            "school": r.school,
            "keyword": r.keyword,
            "pos": round(r.mean.pos_delta, 2) + 0.0,
            "neg": round(r.mean.neg_delta, 2) + 0.0,
            "neu": round(r.mean.neu_delta, 2) + 0.0,
            "n": r.article_count,
        }
        for r in results
        if r.mean is not None
    ]
    return dump_json(rows)


def emit_bias_table(results: Sequence[BiasResult], path: str | Path, fmt: str = "csv") -> Path:
    if not results:
        raise ValueError("no results to tabulate")
    text = bias_table_csv(results) if fmt == "csv" else bias_table_json(results)
    return _write(Path(path), text)


# -- histograms and scatter ---------------------------------------------------


def bin_edges(bins: int) -> list[float]:
    return [k / bins for k in range(bins + 1)]


def histogram(values: Iterable[float], bins: int) -> list[int]:
    """Counts over equal-width bins on [0, 1]; the last bin includes 1.0."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    edges = bin_edges(bins)
    counts = [0] * bins
    for v in values:
        if not -1e-9 <= v <= 1.0 + 1e-9:
            raise ValueError(f"value {v} outside [0, 1]")
        v = min(max(v, 0.0), 1.0)
        counts[min(bisect_right(edges, v) - 1, bins - 1)] += 1
    return counts


def emit_histograms(per_article: Sequence[GranularitySentiments], bins: int = 10) -> dict:
    """Per granularity and component, histogram counts of article sentiment.

    With a lexicon-sparse corpus expect spikes at 0 for pos/neg and at 1 for
    neu: sentences without lexicon hits score exactly (0, 0, 1).
    """
    out: dict = {"bin_edges": bin_edges(bins), "article_count": len(per_article)}
    for gran in GRANULARITIES:
        triples = [getattr(g, f"{gran}_level") for g in per_article]
        out[gran] = {c: histogram((getattr(t, c) for t in triples), bins) for c in COMPONENTS}
    return out


def unique_articles(results: Sequence[BiasResult]) -> dict[str, dict[str, ArticleBias]]:
    """school -> url -> article, each article once even if several keywords matched it."""
    by_school: dict[str, dict[str, ArticleBias]] = {}
    for r in results:
        seen = by_school.setdefault(r.school, {})
        for a in r.articles:
            seen.setdefault(a.url, a)
    return by_school


def histograms_by_school(results: Sequence[BiasResult], bins: int = 10) -> dict:
    return {
        school: emit_histograms([a.granularities for a in arts.values()], bins)
        for school, arts in unique_articles(results).items()
    }


SCATTER_HEADER = ["school", "url", "date"] + [f"{g}_{c}" for g in GRANULARITIES for c in COMPONENTS]


def scatter_rows(results: Sequence[BiasResult]) -> list[list[object]]:
    """One row per distinct article with all nine granularity/component values.

    Any pairwise scatter (e.g. article neg against sentence neg) is a pair of
    columns.
    """
    rows = []
    for school, arts in unique_articles(results).items():
        for a in arts.values():
            values = [getattr(getattr(a.granularities, f"{g}_level"), c) for g in GRANULARITIES for c in COMPONENTS]
            rows.append([school, a.url, a.date, *(repr(v) for v in values)])
    return rows


# -- distributions and keyword counts -----------------------------------------


def emit_distribution_data(results: Sequence[BiasResult]) -> dict:
    """school -> keyword -> granularity -> component -> per-article sentiment values."""
    out: dict = {}
    for r in results:
        per_kw = out.setdefault(r.school, {})
        per_kw[r.keyword] = {
            gran: {c: [getattr(getattr(a.granularities, f"{gran}_level"), c) for a in r.articles] for c in COMPONENTS}
            for gran in GRANULARITIES
        }
    return out


def emit_keyword_counts(counts: dict[str, dict[str, int]]) -> list[list[object]]:
    return [[school, kw, n] for school, per_kw in counts.items() for kw, n in per_kw.items()]


# -- conclusion notes ---------------------------------------------------------


def shift(mean: BiasTriple) -> float:
    """Total percentage points moved between components (half the L1 norm)."""
    return (abs(mean.pos_delta) + abs(mean.neg_delta) + abs(mean.neu_delta)) / 2


def annotate_conclusions(results: Sequence[BiasResult], templates: dict[str, str] | None = None) -> str:
    templates = {**DEFAULT_CONCLUSIONS, **(templates or {})}
    scored = [r for r in results if r.mean is not None]
    lines = ["Interpreting these results", "==========================", ""]

    for school in _ordered(r.school for r in scored):
        mine = sorted((r for r in scored if r.school == school), key=lambda r: (-shift(r.mean), r.keyword))
        if len(mine) < 2:
            continue
        lines.append(templates["within_school"].format(school=school))
        for r in mine:
            lines.append(f"  - {r.keyword}: shift {shift(r.mean):.2f} pp over {r.article_count} articles")
        lines.append("")

    keywords = _ordered(r.keyword for r in scored)
    if len(keywords) >= 2:
        lines.append(templates["population"])
        pooled = []
        for kw in keywords:
            arts = [a for r in scored if r.keyword == kw for a in r.articles]
            mean_shift = sum(shift(a.bias) for a in arts) / len(arts) if arts else 0.0
            pooled.append((kw, mean_shift, len(arts)))
        for kw, value, n in sorted(pooled, key=lambda t: (-t[1], t[0])):
            lines.append(f"  - {kw}: mean per-article shift {value:.2f} pp over {n} articles")
        lines.append("")

    lines.append(templates["invalid"])
    return "\n".join(lines) + "\n"


# -- writing ------------------------------------------------------------------


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(f"writing {path}: {exc}") from exc
    return path


def write_report(
    results: Sequence[BiasResult],
    keyword_counts: dict[str, dict[str, int]],
    out_dir: str | Path,
    fmt: str = "csv",
    bins: int = 10,
    conclusions: dict[str, str] | None = None,
) -> list[Path]:
    """Write every report artifact under ``out_dir``; returns the paths."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    scored = [r for r in results if r.mean is not None]
    if not scored:
        logger.warning("no keyword produced analysable articles; bias table will be empty")
    written = []
    if fmt == "csv":
        written.append(_write(out / "bias_table.csv", bias_table_csv(results)))
        written.append(_write(out / "scatter.csv", _csv_text(SCATTER_HEADER, scatter_rows(results))))
        written.append(
            _write(out / "keyword_counts.csv", _csv_text(["school", "keyword", "count"], emit_keyword_counts(keyword_counts)))
        )
    else:
        written.append(_write(out / "bias_table.json", bias_table_json(results)))
        scatter = [dict(zip(SCATTER_HEADER, [*row[:3], *(float(v) for v in row[3:])])) for row in scatter_rows(results)]
        written.append(_write(out / "scatter.json", dump_json(scatter)))
        written.append(_write(out / "keyword_counts.json", dump_json(keyword_counts)))
    written.append(_write(out / "histograms.json", dump_json(histograms_by_school(results, bins))))
    written.append(_write(out / "distributions.json", dump_json(emit_distribution_data(results))))
    written.append(_write(out / "conclusions.txt", annotate_conclusions(results, conclusions)))
    return written
