"""Command line entry point.

Stages and the files they exchange::

    extract   saved HTML pages        -> corpus.jsonl
    score     corpus.jsonl            -> scores.jsonl
    agree     scores.jsonl            -> alpha.csv
    enrich    corpus + scores         -> enriched.jsonl
    report    corpus + enriched       -> table1_left/right, table2, table3 (.csv, .md)
    run-all   score, agree, enrich and report in one go, plus manifest.json

Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .agreement import alpha_across_runs, alpha_per_article, split_runs, write_alpha_csv
from .analysis import (alpha_histogram, altmetric_table, bibliometric_table, mean_alpha,
                       mean_k_per_article)
from .config import PipelineConfig, load_config
from .corpus import (Corpus, ExtractionConfig, extract_article, load_extraction_config,
                     parse_corpus, write_corpus)
from .enrichment import (EnrichedArticle, FixtureAltmetricProvider, FixtureCitationProvider,
                         HttpAltmetricProvider, HttpCitationProvider, LookupCache, enrich)
from .errors import AuthError, ConfigError, ExtractionError, RicError
from .ratelimit import TokenBucket
from .report import render_tables, write_report
from .scoring import (MockScorer, RemoteScorer, ScoreCache, criterion_averages, read_scores,
                      score_corpus, write_scores)

log = logging.getLogger("ricalign")

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3


class StageError(Exception):
    def __init__(self, stage: str, exc: BaseException):
        self.stage = stage
        self.cause = exc
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


def _stage(name: str):
    """Tag any pipeline failure with the stage it happened in."""
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (ConfigError, StageError):
                raise
            except (RicError, OSError, ValueError) as exc:
                raise StageError(name, exc) from exc
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


def _utc() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --- extract --------------------------------------------------------------

def _extraction_config(cfg: PipelineConfig) -> ExtractionConfig:
    path = cfg.path("extraction")
    if path is None:
        raise ConfigError("paths.extraction is not set")
    try:
        return load_extraction_config(path)
    except (OSError, RicError) as exc:
        raise ConfigError(f"extraction config {path}: {exc}") from None


@_stage("extract")
def cmd_extract(html_dir: str | Path, cfg: PipelineConfig, out: Optional[Path] = None,
                keep_partial: bool = False) -> Path:
    """Extract every saved page in ``html_dir`` into a corpus file."""
    html_dir = Path(html_dir)
    selectors = _extraction_config(cfg)
    out = out or cfg.path("corpus")
    pages = sorted(p for p in html_dir.glob("*") if p.suffix.lower() in (".html", ".htm"))
    if not pages:
        raise StageError("extract", ExtractionError(f"no input pages in {html_dir}"))
    articles, failures = [], []
    for page in pages:
        try:
            art = extract_article(page.read_text(encoding="utf-8"), selectors, page.stem)
        except (ExtractionError, RicError) as exc:
            failures.append((page, exc))
            print(f"{page.name}: FAILED ({exc})")
            continue
        articles.append(art)
        print(f"{page.name}: {len(art.statements)} statements")
    if failures:
        if keep_partial:
            partial = out.with_name(out.name + ".partial")
            write_corpus(articles, partial)
            print(f"wrote {len(articles)} articles to {partial}")
        names = ", ".join(p.name for p, _ in failures)
        raise StageError("extract", ExtractionError(f"{len(failures)} page(s) failed: {names}"))
    Corpus(articles)  # duplicate check before writing
    write_corpus(articles, out)
    print(f"wrote {len(articles)} articles to {out}")
    return out


# --- pipeline stages ------------------------------------------------------

def make_scorer(cfg: PipelineConfig):
    s = cfg.scorer
    if s.kind == "mock":
        return MockScorer(seed=s.seed)
    return RemoteScorer(endpoint=s.endpoint, model=s.model, temperature=s.temperature)


def make_providers(cfg: PipelineConfig):
    p = cfg.provider
    if p.kind == "none":
        return None, None
    if p.kind == "fixture":
        cit, alt = cfg.path("citations"), cfg.path("altmetrics")
        return (FixtureCitationProvider(cit) if cit else None,
                FixtureAltmetricProvider(alt) if alt else None)
    bucket = TokenBucket(rate=p.rate)
    return (HttpCitationProvider(p.endpoint.rstrip("/") + "/citations", bucket=bucket),
            HttpAltmetricProvider(p.endpoint.rstrip("/") + "/altmetrics", bucket=bucket))


@_stage("ingest")
def stage_ingest(cfg: PipelineConfig) -> Corpus:
    return parse_corpus(cfg.path("corpus"), cfg.scorer.min_statement_chars)


@_stage("score")
def stage_score(cfg: PipelineConfig, corpus: Corpus, scorer=None):
    scorer = scorer or make_scorer(cfg)
    cache = ScoreCache(cfg.path("cache") / "scores.jsonl")
    s = cfg.scorer
    scores = score_corpus(corpus, scorer, runs=s.runs, cache=cache, concurrency=s.concurrency,
                          retries=s.retries, backoff=s.backoff)
    write_scores(scores, cfg.path("scores"))
    return scores, scorer.scorer_id


@_stage("agree")
def stage_agree(cfg: PipelineConfig, scores):
    alphas = alpha_per_article(scores, run=cfg.report.run, metric=cfg.report.metric)
    write_alpha_csv(alphas, cfg.path("scores").with_name("alpha.csv"))
    runs = split_runs(scores)
    across = alpha_across_runs(runs, cfg.report.metric) if len(runs) >= 2 else None
    return alphas, across


def _enriched_to_record(e: EnrichedArticle) -> dict:
    return {
        "article_id": e.article.article_id,
        "doi": e.article.doi,
        "mean_k": e.mean_k,
        "alpha": e.alpha.alpha,
        "citations": e.citation.citations if e.citation else None,
        "aas": e.altmetric.aas if e.altmetric else None,
        "news_mentions": e.altmetric.news_mentions if e.altmetric else None,
        "mendeley_readers": e.altmetric.mendeley_readers if e.altmetric else None,
        "errors": list(e.errors),
    }


@_stage("enrich")
def stage_enrich(cfg: PipelineConfig, corpus: Corpus, scores, alphas, providers=None):
    citation_provider, altmetric_provider = providers or make_providers(cfg)
    cache = LookupCache(cfg.path("cache") / "lookups.jsonl",
                        ttl=timedelta(days=cfg.provider.ttl_days))
    mean_ks = mean_k_per_article(scores, run=cfg.report.run)
    enriched = enrich(corpus, mean_ks, alphas, citation_provider, altmetric_provider,
                      cache=cache, concurrency=cfg.provider.concurrency)
    path = cfg.path("scores").with_name("enriched.jsonl")
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for e in enriched:
            fh.write(json.dumps(_enriched_to_record(e), sort_keys=True) + "\n")
    for e in enriched:
        for err in e.errors:
            log.warning("%s: %s", e.article.article_id, err)
    return enriched


@_stage("report")
def stage_report(cfg: PipelineConfig, scores, alphas, enriched, out: Path,
                 formats: Sequence[str] = ("csv", "md")):
    selected = [s for s in scores if s.run == cfg.report.run]
    tables = render_tables(alpha_histogram(alphas), criterion_averages(selected),
                           bibliometric_table(enriched), altmetric_table(enriched),
                           mean_alpha(alphas))
    return write_report(out, tables, formats)


def cmd_run_all(cfg: PipelineConfig, out: Optional[Path] = None,
                formats: Sequence[str] = ("csv", "md"), scorer=None, providers=None) -> Path:
    """Run every stage and write the report directory; returns its path."""
    cfg.validate()
    started = _utc()
    # build clients first so missing credentials fail before any work
    try:
        scorer = scorer or make_scorer(cfg)
        providers = providers or make_providers(cfg)
    except AuthError as exc:
        raise ConfigError(str(exc)) from exc
    except RicError as exc:
        raise StageError("setup", exc) from exc
    out = out or cfg.path("out")
    if cfg.paths.html_dir:
        cmd_extract(cfg.path("html_dir"), cfg)
    corpus = stage_ingest(cfg)
    scores, scorer_id = stage_score(cfg, corpus, scorer)
    alphas, across = stage_agree(cfg, scores)
    enriched = stage_enrich(cfg, corpus, scores, alphas, providers)
    written = stage_report(cfg, scores, alphas, enriched, out, formats)
    manifest = {
        "package_version": __version__,
        "config_hash": cfg.config_hash(),
        "config": cfg.as_dict(),
        "scorer_id": scorer_id,
        "started_at": started,
        "finished_at": _utc(),
        "articles": len(corpus),
        "statements": corpus.n_statements,
        "runs": cfg.scorer.runs,
        "failed_scorings": sum(s.failed for s in scores),
        "mean_alpha": mean_alpha(alphas),
        "alpha_across_runs": across.alpha if across else None,
        "articles_without_mean_k": sum(e.mean_k is None for e in enriched),
        "enrichment_errors": sum(len(e.errors) for e in enriched),
        "files": sorted(p.name for p in written),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return out


# --- argument parsing -----------------------------------------------------

def _resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig(base_dir=Path.cwd())
    if getattr(args, "corpus", None):
        cfg = cfg.replace("paths", corpus=str(Path(args.corpus).resolve()))
    if getattr(args, "out", None):
        cfg = cfg.replace("paths", out=str(Path(args.out).resolve()))
    if getattr(args, "runs", None) is not None:
        cfg = cfg.replace("scorer", runs=args.runs)
    if getattr(args, "scorer", None):
        cfg = cfg.replace("scorer", kind=args.scorer)
    if getattr(args, "extraction", None):
        cfg = cfg.replace("paths", extraction=str(Path(args.extraction).resolve()))
    return cfg.validate()


def _load_enriched(cfg: PipelineConfig, corpus: Corpus, alphas) -> list[EnrichedArticle]:
    from .enrichment import EMPTY_ALPHA, AltmetricRecord, CitationRecord
    path = cfg.path("scores").with_name("enriched.jsonl")
    stamp = datetime.fromtimestamp(path.stat().st_mtime, timezone.utc)
    out = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            art = corpus.get(rec["article_id"])
            if art is None:
                raise ConfigError(f"{path}: unknown article {rec['article_id']!r}")
            cit = alt = None
            if rec["citations"] is not None:
                cit = CitationRecord(art.doi, rec["citations"], "enriched.jsonl", stamp)
            if rec["aas"] is not None:
                alt = AltmetricRecord(art.doi, rec["aas"], rec["news_mentions"],
                                      rec["mendeley_readers"], "enriched.jsonl", stamp)
            out.append(EnrichedArticle(art, rec["mean_k"], alphas.get(art.article_id, EMPTY_ALPHA),
                                       cit, alt, tuple(rec["errors"])))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ricalign", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, corpus=True, runs=False, scorer=False, out=False, fmt=False):
        p.add_argument("--config", help="pipeline INI file")
        if corpus:
            p.add_argument("--corpus", help="corpus file (overrides paths.corpus)")
        if runs:
            p.add_argument("--runs", type=int, help="annotation runs (overrides scorer.runs)")
        if scorer:
            p.add_argument("--scorer", choices=("mock", "remote"))
        if out:
            p.add_argument("--out", help="report directory (overrides paths.out)")
        if fmt:
            p.add_argument("--format", choices=("csv", "md"), action="append",
                           help="table format(s) to write; default both")

    p = sub.add_parser("extract", help="saved HTML pages -> corpus file")
    p.add_argument("html_dir", nargs="?")
    common(p)
    p.add_argument("--extraction", help="selector config (overrides paths.extraction)")
    p.add_argument("--keep-partial", action="store_true",
                   help="on failure, still write the good pages to <corpus>.partial")

    common(sub.add_parser("score", help="score every statement"), runs=True, scorer=True)
    common(sub.add_parser("agree", help="per-article Krippendorff's alpha"))
    common(sub.add_parser("enrich", help="join citation and altmetric indicators"))
    common(sub.add_parser("report", help="write the report tables"), out=True, fmt=True)
    common(sub.add_parser("run-all", help="all stages, end to end"),
           runs=True, scorer=True, out=True, fmt=True)
    return parser


def _dispatch(args) -> None:
    cfg = _resolve_config(args)
    formats = tuple(args.format) if getattr(args, "format", None) else ("csv", "md")
    cmd = args.command
    if cmd == "extract":
        html_dir = args.html_dir or cfg.path("html_dir")
        if html_dir is None:
            raise ConfigError("no HTML directory given")
        cmd_extract(html_dir, cfg, keep_partial=args.keep_partial)
        return
    if cmd == "run-all":
        out = cmd_run_all(cfg, formats=formats)
        print(f"report written to {out}")
        return

    corpus = stage_ingest(cfg)
    if cmd == "score":
        try:
            scorer = make_scorer(cfg)
        except AuthError as exc:
            raise ConfigError(str(exc)) from exc
        scores, scorer_id = stage_score(cfg, corpus, scorer)
        print(f"scored {len(scores)} statement runs with {scorer_id} "
              f"({sum(s.failed for s in scores)} failed) -> {cfg.path('scores')}")
        return

    scores = _stage("ingest")(read_scores)(cfg.path("scores"))
    alphas, across = stage_agree(cfg, scores)
    if cmd == "agree":
        print(f"{len(alphas)} articles, mean alpha {mean_alpha(alphas)}"
              + (f", alpha across runs {across.alpha:.4f}" if across and across.alpha is not None else ""))
        return
    if cmd == "enrich":
        try:
            providers = make_providers(cfg)
        except AuthError as exc:
            raise ConfigError(str(exc)) from exc
        enriched = stage_enrich(cfg, corpus, scores, alphas, providers)
        n_cit = sum(e.citation is not None for e in enriched)
        n_alt = sum(e.altmetric is not None for e in enriched)
        print(f"{len(enriched)} articles, {n_cit} with citations, {n_alt} with altmetrics")
        return
    if cmd == "report":
        enriched = _load_enriched(cfg, corpus, alphas)
        written = stage_report(cfg, scores, alphas, enriched, cfg.path("out"), formats)
        for path in written:
            print(path)
        return
    raise ConfigError(f"unknown command {cmd}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
