"""Krippendorff's alpha over rater-by-unit data with missing values.

    alpha = 1 - D_o / D_e

D_o averages the squared differences between values of the same unit (each
unit weighted by 1 / (m_u - 1)); D_e averages them over every pair drawn
from the pooled values of all pairable units. Units with fewer than two
values are dropped first. Differences are accumulated over value counts per
unit, so identical values contribute exactly zero.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Literal, Mapping, Optional, Sequence

from .errors import InsufficientRuns, MixedArticle, NonFiniteValue
from .numfmt import fmt
from .scoring import CRITERION_KEYS, ScoredStatement

Metric = Literal["nominal", "interval"]
METRICS = ("nominal", "interval")


@dataclass(frozen=True)
class ReliabilityMatrix:
    """Rows are raters, columns are units, ``None`` marks a missing value."""

    raters: tuple[Hashable, ...]
    units: tuple[Hashable, ...]
    values: tuple[tuple[object, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "raters", tuple(self.raters))
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "values", tuple(tuple(row) for row in self.values))
        if len(self.values) != len(self.raters):
            raise ValueError(f"{len(self.values)} rows for {len(self.raters)} raters")
        for row in self.values:
            if len(row) != len(self.units):
                raise ValueError(f"row of length {len(row)} for {len(self.units)} units")
            for v in row:
                if isinstance(v, float) and not math.isfinite(v):
                    raise NonFiniteValue(f"non-finite value {v!r}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]], raters=None, units=None) -> "ReliabilityMatrix":
        n_units = len(rows[0]) if rows else 0
        return cls(
            raters=tuple(raters) if raters is not None else tuple(range(len(rows))),
            units=tuple(units) if units is not None else tuple(range(n_units)),
            values=rows,
        )

    def unit_values(self) -> list[list[object]]:
        return [[row[j] for row in self.values if row[j] is not None]
                for j in range(len(self.units))]


@dataclass(frozen=True)
class AlphaResult:
    alpha: Optional[float]
    observed_disagreement: Optional[float]
    expected_disagreement: Optional[float]
    n_pairable_values: int
    n_units_used: int
    metric: str


def _delta2(metric: str, c, k) -> float:
    if metric == "interval":
        return (c - k) ** 2
    return 0.0 if c == k else 1.0


def _pair_sum(counts: Counter, metric: str) -> float:
    """Sum of delta^2 over ordered pairs of distinct positions in a multiset."""
    items = list(counts.items())
    total = 0.0
    for i, (c, nc) in enumerate(items):
        for k, nk in items[i + 1:]:
            total += nc * nk * _delta2(metric, c, k)
    return 2.0 * total


def krippendorff_alpha(matrix: ReliabilityMatrix, metric: Metric = "interval") -> AlphaResult:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    units = [u for u in matrix.unit_values() if len(u) >= 2]
    if metric == "interval":
        for u in units:
            for v in u:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise TypeError(f"interval metric needs numbers, got {v!r}")
                if not math.isfinite(v):
                    raise NonFiniteValue(f"non-finite value {v!r}")
    if not units:
        return AlphaResult(None, None, None, 0, 0, metric)

    n = sum(len(u) for u in units)
    pooled: Counter = Counter()
    within = 0.0
    for u in units:
        counts = Counter(u)
        pooled.update(counts)
        within += _pair_sum(counts, metric) / (len(u) - 1)
    d_o = within / n
    d_e = _pair_sum(pooled, metric) / (n * (n - 1))
    alpha = 1.0 if d_e == 0 else 1.0 - d_o / d_e
    return AlphaResult(alpha, d_o, d_e, n, len(units), metric)


# --- per-article and across-run views -------------------------------------

def article_reliability(article_scores: Sequence[ScoredStatement],
                        run: Optional[int] = None) -> ReliabilityMatrix:
    """Statements as raters, the six criteria as units."""
    if article_scores:
        article_id = article_scores[0].article_id
        run = article_scores[0].run if run is None else run
        seen: set[str] = set()
        for s in article_scores:
            if s.article_id != article_id or s.run != run:
                raise MixedArticle(
                    f"expected article {article_id!r} run {run}, got {s.article_id!r} run {s.run}")
            if s.statement_id in seen:
                raise MixedArticle(f"statement {s.statement_id!r} appears twice in {article_id!r}")
            seen.add(s.statement_id)
    return ReliabilityMatrix(
        raters=tuple(s.statement_id for s in article_scores),
        units=CRITERION_KEYS,
        values=tuple(s.scores.values for s in article_scores),
    )


def group_by_article(scores: Iterable[ScoredStatement]) -> dict[str, list[ScoredStatement]]:
    groups: dict[str, list[ScoredStatement]] = {}
    for s in scores:
        groups.setdefault(s.article_id, []).append(s)
    return groups


def alpha_per_article(scores: Iterable[ScoredStatement], run: int = 0,
                      metric: Metric = "interval") -> dict[str, AlphaResult]:
    selected = [s for s in scores if s.run == run]
    return {aid: krippendorff_alpha(article_reliability(group, run), metric)
            for aid, group in group_by_article(selected).items()}


def alpha_across_runs(runs: Sequence[Sequence[ScoredStatement]],
                      metric: Metric = "interval") -> AlphaResult:
    """One alpha for the whole corpus with each annotation run acting as a rater.

    Units are (article, statement, criterion) triples present in any run.
    """
    if len(runs) < 2:
        raise InsufficientRuns(f"need at least 2 runs, got {len(runs)}")
    by_run: list[dict[tuple, Optional[float]]] = []
    unit_order: dict[tuple, None] = {}
    for records in runs:
        cells: dict[tuple, Optional[float]] = {}
        for s in records:
            for key, v in zip(CRITERION_KEYS, s.scores.values):
                unit = (s.article_id, s.statement_id, key)
                cells[unit] = v
                unit_order.setdefault(unit, None)
        by_run.append(cells)
    units = tuple(unit_order)
    matrix = ReliabilityMatrix(
        raters=tuple(range(len(runs))),
        units=units,
        values=tuple(tuple(cells.get(u) for u in units) for cells in by_run),
    )
    return krippendorff_alpha(matrix, metric)


def split_runs(scores: Iterable[ScoredStatement]) -> list[list[ScoredStatement]]:
    runs: dict[int, list[ScoredStatement]] = {}
    for s in scores:
        runs.setdefault(s.run, []).append(s)
    return [runs[r] for r in sorted(runs)]


ALPHA_CSV_HEADER = ("article_id", "alpha", "d_o", "d_e", "n_units", "n_pairable")


def write_alpha_csv(alphas: Mapping[str, AlphaResult], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ALPHA_CSV_HEADER)
        for aid, r in alphas.items():
            w.writerow([aid, fmt(r.alpha, 4), fmt(r.observed_disagreement, 6),
                        fmt(r.expected_disagreement, 6), r.n_units_used, r.n_pairable_values])
    return path
