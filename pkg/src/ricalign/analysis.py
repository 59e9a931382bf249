"""Per-article mean scores, score bins, alpha histogram and binned impact tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .agreement import AlphaResult
from .enrichment import EnrichedArticle
from .errors import MixedArticle, OutOfRange
from .scoring import ScoredStatement


@dataclass(frozen=True)
class BinLabel:
    label: str
    lo: float
    hi: float
    closed_top: bool = False

    def contains(self, x: float) -> bool:
        return self.lo <= x < self.hi or (self.closed_top and x == self.hi)


SCORE_BINS: tuple[BinLabel, ...] = (
    BinLabel("0 - 0.19", 0.0, 0.2),
    BinLabel("0.2 - 0.39", 0.2, 0.4),
    BinLabel("0.4 - 0.59", 0.4, 0.6),
    BinLabel("0.6 - 0.79", 0.6, 0.8),
    BinLabel("0.8 - 1", 0.8, 1.0, closed_top=True),
)
TOTAL_LABEL = "total"


def assign_bin(mean_k: float) -> BinLabel:
    if mean_k is None or not math.isfinite(mean_k) or not 0.0 <= mean_k <= 1.0:
        raise OutOfRange("mean_k", mean_k)
    for b in SCORE_BINS:
        if b.contains(mean_k):
            return b
    raise AssertionError(f"bins do not cover {mean_k}")


def article_mean_k(statements: Sequence[ScoredStatement]) -> Optional[float]:
    """Mean of every present criterion value of one article, pooled over statements."""
    if statements:
        first = statements[0]
        for s in statements:
            if s.article_id != first.article_id or s.run != first.run:
                raise MixedArticle(
                    f"expected article {first.article_id!r} run {first.run}, "
                    f"got {s.article_id!r} run {s.run}")
    values = [v for s in statements for v in s.scores.present]
    if not values:
        return None
    return min(1.0, max(0.0, math.fsum(values) / len(values)))


def mean_k_per_article(scores: Iterable[ScoredStatement], run: int = 0) -> dict[str, Optional[float]]:
    groups: dict[str, list[ScoredStatement]] = {}
    for s in scores:
        if s.run == run:
            groups.setdefault(s.article_id, []).append(s)
    return {aid: article_mean_k(group) for aid, group in groups.items()}


# --- alpha histogram ------------------------------------------------------

ALPHA_BANDS: tuple[str, ...] = ("< 0", "0 < 0.2", "0.2 < 0.4", "0.4 < 0.6",
                                "0.6 < 0.8", "0.8 < 1", "1", "NA")


@dataclass
class AlphaHistogram:
    counts: dict[str, int] = field(default_factory=lambda: {b: 0 for b in ALPHA_BANDS})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, band: str) -> int:
        return self.counts[band]


AlphaLike = Union[AlphaResult, float, None]


def _alpha_value(a: AlphaLike) -> Optional[float]:
    return a.alpha if isinstance(a, AlphaResult) else a


def _alpha_band(alpha: Optional[float]) -> str:
    if alpha is None:
        return "NA"
    if alpha == 1.0:
        return "1"
    if alpha < 0:
        return "< 0"
    for band, hi in zip(ALPHA_BANDS[1:5], (0.2, 0.4, 0.6, 0.8)):
        if alpha < hi:
            return band
    return "0.8 < 1"


def alpha_histogram(alphas: Union[Mapping[str, AlphaLike], Iterable[AlphaLike]]) -> AlphaHistogram:
    values = alphas.values() if isinstance(alphas, Mapping) else alphas
    hist = AlphaHistogram()
    for a in values:
        hist.counts[_alpha_band(_alpha_value(a))] += 1
    return hist


def mean_alpha(alphas: Union[Mapping[str, AlphaLike], Iterable[AlphaLike]]) -> Optional[float]:
    values = alphas.values() if isinstance(alphas, Mapping) else alphas
    present = [v for v in map(_alpha_value, values) if v is not None]
    return math.fsum(present) / len(present) if present else None


# --- binned impact tables -------------------------------------------------

@dataclass
class BinRow:
    bin: str
    papers: int = 0
    papers_matched: int = 0
    citations_total: int = 0
    aas_total: float = 0.0
    nm_total: int = 0
    mendeley_total: int = 0

    @staticmethod
    def _rate(total: float, n: int) -> Optional[float]:
        return total / n if n > 0 else None

    @property
    def citations_per_paper(self) -> Optional[float]:
        return self._rate(self.citations_total, self.papers_matched)

    @property
    def aas_per_paper(self) -> Optional[float]:
        return self._rate(self.aas_total, self.papers_matched)

    @property
    def nm_per_paper(self) -> Optional[float]:
        return self._rate(self.nm_total, self.papers_matched)


@dataclass
class ReportTable:
    rows: list[BinRow]
    total: BinRow
    excluded: int = 0  # articles without a mean score

    def row(self, label: str) -> BinRow:
        if label == TOTAL_LABEL:
            return self.total
        for r in self.rows:
            if r.bin == label:
                return r
        raise KeyError(label)


def _binned(enriched: Iterable[EnrichedArticle], add) -> ReportTable:
    rows = {b.label: BinRow(b.label) for b in SCORE_BINS}
    total = BinRow(TOTAL_LABEL)
    excluded = 0
    for e in enriched:
        if e.mean_k is None:
            excluded += 1
            continue
        for row in (rows[assign_bin(e.mean_k).label], total):
            row.papers += 1
            add(row, e)
    return ReportTable(rows=[rows[b.label] for b in SCORE_BINS], total=total, excluded=excluded)


def _add_citations(row: BinRow, e: EnrichedArticle) -> None:
    if e.citation is not None:
        row.papers_matched += 1
        row.citations_total += e.citation.citations


def _add_altmetrics(row: BinRow, e: EnrichedArticle) -> None:
    if e.altmetric is not None:
        row.papers_matched += 1
        row.aas_total += e.altmetric.aas
        row.nm_total += e.altmetric.news_mentions
        row.mendeley_total += e.altmetric.mendeley_readers


def bibliometric_table(enriched: Iterable[EnrichedArticle]) -> ReportTable:
    """Citations per score bin; rates divide by papers that have a citation record."""
    return _binned(enriched, _add_citations)


def altmetric_table(enriched: Iterable[EnrichedArticle]) -> ReportTable:
    """AAS, news mentions and Mendeley readers per score bin."""
    return _binned(enriched, _add_altmetrics)
