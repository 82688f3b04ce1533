"""Command line entry point: ``archivebias scrape|analyze|report|stats|export``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import PipelineConfig, load_config
from .corpus import CorpusStore
from .errors import ArchiveBiasError, ConfigError, EmptyKeyword, PermissionDenied, UnknownSchool
from .fetcher import FetchMode, Fetcher
from .pipeline import analyze_corpus, file_digest, scrape_site, utc_timestamp
from .query import KeywordQuery, MatchMode
from .report import dump_json, load_results, results_document, write_report
from .sentiment import SentimentServiceClient, VaderEngine, load_lexicon
from .summarizer import ExtractiveSummarizer, OverlongPolicy, SummaryServiceClient, load_stopwords

logger = logging.getLogger("archivebias")

SUMMARIZER_URL_ENV = "ARCHIVEBIAS_SUMMARIZER_URL"
SENTIMENT_URL_ENV = "ARCHIVEBIAS_SENTIMENT_URL"

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


DEFAULTS = {
    "config": None,
    "out": None,
    "keyword": None,
    "match_mode": None,
    "format": "csv",
    "summarizer": "native",
    "sentiment": "native",
    "replay": None,
    "record": None,
    "school": None,
    "verbose": 0,
}


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's unset flags from clobbering ones given before it.
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", type=Path, help="pipeline configuration (JSON)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--keyword", action="append", help="keyword to analyse (repeatable)")
    p.add_argument("--match-mode", choices=[m.value for m in MatchMode])
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--summarizer", choices=["native", "service"])
    p.add_argument("--sentiment", choices=["native", "service"])
    p.add_argument("--replay", type=Path, help="serve fetches from a recorded fixture directory")
    p.add_argument("--record", type=Path, help="record live fetches into a fixture directory")
    p.add_argument("--school", action="append", help="restrict to a school (repeatable)")
    p.add_argument("-v", "--verbose", action="count")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="archivebias", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("scrape", parents=[common], help="crawl configured archives into the corpus")
    sub.add_parser("analyze", parents=[common], help="query keywords and compute bias results")
    rep = sub.add_parser("report", parents=[common], help="emit tables and plot data from results")
    rep.add_argument("--results", type=Path, default=None, help="results.json (default: <out>/results.json)")
    sub.add_parser("stats", parents=[common], help="per-school corpus counts")
    sub.add_parser("export", parents=[common], help="write a compacted copy of the corpus")
    return parser


def _require_config(args: argparse.Namespace) -> PipelineConfig:
    if args.config is None:
        raise UsageError("--config is required for this command")
    return load_config(args.config)


def _schools(args: argparse.Namespace, store: CorpusStore) -> list[str]:
    available = store.schools()
    if not args.school:
        return available
    return [s for s in args.school if s in available] + [s for s in args.school if s not in available]


def cmd_scrape(args: argparse.Namespace) -> int:
    cfg = _require_config(args)
    if args.replay and args.record:
        raise UsageError("--replay and --record are mutually exclusive")
    sites = [cfg.site(s) for s in args.school] if args.school else cfg.sites
    if not sites:
        raise UsageError("no sites configured")
    for site in sites:
        if not site.scraping_permitted:
            raise PermissionDenied(f"scraping is not permitted for {site.school_id}")
    if args.replay:
        mode, fixture_dir = FetchMode.REPLAY, args.replay
    elif args.record:
        mode, fixture_dir = FetchMode.RECORD, args.record
    else:
        mode, fixture_dir = FetchMode.LIVE, None
    fetcher = Fetcher(mode, fixture_dir, max_retries=cfg.max_retries, backoff=cfg.backoff, timeout=cfg.timeout)
    store = CorpusStore(cfg.corpus_dir)
    summary = []
    for site in sites:
        counts = scrape_site(site, fetcher, store)
        logger.info("%s: %s", site.school_id, counts.as_dict())
        summary.append(counts.as_dict())
    manifest = {
        "command": "scrape",
        "config_hash": cfg.config_hash,
        "fetch_mode": mode.value,
        "finished_at": utc_timestamp(),
        "sites": summary,
    }
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "scrape_manifest.json").write_text(dump_json(manifest), encoding="utf-8")
    print(dump_json(summary), end="")
    return EXIT_OK


def _sentiment_backend(args: argparse.Namespace, cfg: PipelineConfig):
    if args.sentiment == "service":
        url = os.environ.get(SENTIMENT_URL_ENV)
        if not url:
            raise UsageError(f"--sentiment service needs {SENTIMENT_URL_ENV}")
        return SentimentServiceClient(url, timeout=cfg.timeout), f"service:{url}"
    lexicon = load_lexicon(cfg.lexicon)
    if cfg.lexicon is not None:
        lexicon_id = file_digest(Path(cfg.lexicon).read_bytes())
    else:
        lexicon_id = "bundled:test_lexicon"
    return VaderEngine(lexicon), lexicon_id


def _summarizer_backend(args: argparse.Namespace, cfg: PipelineConfig):
    if args.summarizer == "service":
        url = os.environ.get(SUMMARIZER_URL_ENV)
        if not url:
            raise UsageError(f"--summarizer service needs {SUMMARIZER_URL_ENV}")
        return SummaryServiceClient(url, max_retries=cfg.max_retries, backoff=cfg.backoff)
    return ExtractiveSummarizer(load_stopwords(cfg.stopwords), ratio=cfg.summary_ratio)


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _require_config(args)
    if args.out is None:
        raise UsageError("analyze needs --out")
    keywords = args.keyword or cfg.keywords
    if not keywords:
        raise UsageError("no keywords given (use --keyword or the config's keywords)")
    mode = MatchMode(args.match_mode or cfg.match_mode)
    queries = [KeywordQuery(k, cfg.case_sensitive, mode, cfg.search_title) for k in keywords]
    store = CorpusStore(cfg.corpus_dir)
    schools = _schools(args, store)
    if not schools:
        raise UsageError(f"corpus at {cfg.corpus_dir} is empty")
    sentiment, lexicon_id = _sentiment_backend(args, cfg)
    summarizer = _summarizer_backend(args, cfg)
    policy = OverlongPolicy(cfg.overlong_policy)
    watermarks = {s.school_id: s.watermark_rules for s in cfg.sites}

    started = utc_timestamp()
    results, keyword_counts, counts = analyze_corpus(
        store, schools, queries, summarizer, sentiment, watermarks, cfg.max_tokens, policy
    )
    if not counts.reconciles():
        raise ArchiveBiasError("analysis counts do not reconcile")
    for r in results:
        if r.mean is None:
            print(f"warning: {r.school}/{r.keyword}: no analysable articles", file=sys.stderr)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "results.json").write_text(
        dump_json(results_document(results, keywords, keyword_counts)), encoding="utf-8", newline="\n"
    )
    manifest = {
        "command": "analyze",
        "config_hash": cfg.config_hash,
        "corpus_snapshot": store.snapshot_id(),
        "schools": schools,
        "keywords": keywords,
        "match_mode": mode.value,
        "case_sensitive": cfg.case_sensitive,
        "lexicon_id": lexicon_id,
        "sentiment_backend": args.sentiment,
        "summarizer": {"backend": summarizer.identity, "max_tokens": cfg.max_tokens, "overlong_policy": policy.value},
        "started_at": started,
        "finished_at": utc_timestamp(),
        "counts": counts.as_dict(),
    }
    (args.out / "manifest.json").write_text(dump_json(manifest), encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.out is None:
        raise UsageError("report needs --out")
    results_path = args.results or args.out / "results.json"
    results, doc = load_results(results_path)
    bins, conclusions = 10, None
    if args.config is not None:
        cfg = load_config(args.config)
        bins, conclusions = cfg.histogram_bins, cfg.conclusions
    write_report(results, doc.get("keyword_counts", {}), args.out, args.format, bins, conclusions)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = _require_config(args)
    store = CorpusStore(cfg.corpus_dir)
    rows = []
    for school in _schools(args, store):
        try:
            st = store.stats(school)
        except UnknownSchool:
            print(f"{school}: no articles", file=sys.stderr)
            continue
        rows.append(
            {
                "school": st.school,
                "earliest_date": st.earliest_date.strftime("%Y/%m/%d"),
                "latest_date": st.latest_date.strftime("%Y/%m/%d"),
                "days": st.day_count,
                "articles": st.article_count,
            }
        )
    if args.format == "json":
        print(dump_json(rows), end="")
    else:
        print("school,earliest_date,latest_date,days,articles")
        for r in rows:
            print(",".join(str(v) for v in r.values()))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    cfg = _require_config(args)
    if args.out is None:
        raise UsageError("export needs --out")
    for path in CorpusStore(cfg.corpus_dir).export(args.out):
        print(path)
    return EXIT_OK


COMMANDS = {
    "scrape": cmd_scrape,
    "analyze": cmd_analyze,
    "report": cmd_report,
    "stats": cmd_stats,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, EmptyKeyword) as exc:
        print(f"archivebias: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArchiveBiasError, OSError) as exc:
        print(f"archivebias: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
