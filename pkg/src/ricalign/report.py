"""CSV and Markdown renderings of the four report tables.

Numbers are rounded half-up for display only: rates to one decimal,
criterion averages to two. Missing values are an empty CSV field and
``NA`` in Markdown.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Optional, Sequence

from .analysis import ALPHA_BANDS, AlphaHistogram, ReportTable
from .numfmt import fmt
from .scoring import CriterionAverage

TABLE1_LEFT_HEADER = ("alpha_band", "count")
TABLE1_RIGHT_HEADER = ("criterion", "average", "na")
TABLE2_HEADER = ("bin", "papers", "papers_matched", "citations_total", "citations_per_paper")
TABLE3_HEADER = ("bin", "papers_matched", "aas_total", "aas_per_paper", "nm_total",
                 "nm_per_paper", "mendeley_total")

Rows = list[list[Optional[str]]]


def table1_left_rows(hist: AlphaHistogram) -> Rows:
    return [[band, str(hist.counts[band])] for band in ALPHA_BANDS]


def table1_right_rows(averages: Sequence[CriterionAverage]) -> Rows:
    return [[f"{a.key} -- {a.name}", fmt(a.mean, 2, na=None), str(a.na_count)] for a in averages]


def table2_rows(table: ReportTable) -> Rows:
    return [[r.bin, str(r.papers), str(r.papers_matched), str(r.citations_total),
             fmt(r.citations_per_paper, 1, na=None)]
            for r in [*table.rows, table.total]]


def table3_rows(table: ReportTable) -> Rows:
    return [[r.bin, str(r.papers_matched), fmt(r.aas_total, 1), fmt(r.aas_per_paper, 1, na=None),
             str(r.nm_total), fmt(r.nm_per_paper, 1, na=None), str(r.mendeley_total)]
            for r in [*table.rows, table.total]]


def to_csv(header: Sequence[str], rows: Rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if c is None else c for c in row])
    return buf.getvalue()


def to_markdown(header: Sequence[str], rows: Rows, title: str = "",
                notes: Sequence[str] = ()) -> str:
    lines = []
    if title:
        lines += [f"## {title}", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] + ["---:"] * (len(header) - 1)) + "|")
    for row in rows:
        lines.append("| " + " | ".join("NA" if c is None else c for c in row) + " |")
    if notes:
        lines.append("")
        lines += [f"- {n}" for n in notes]
    return "\n".join(lines) + "\n"


def render_tables(hist: AlphaHistogram, averages: Sequence[CriterionAverage],
                  bibliometric: ReportTable, altmetric: ReportTable,
                  mean_alpha: Optional[float]) -> dict[str, tuple[tuple[str, ...], Rows, str, list[str]]]:
    """Table name -> (header, rows, title, notes)."""
    return {
        "table1_left": (TABLE1_LEFT_HEADER, table1_left_rows(hist), "Inter-rater agreement per article",
                        [f"articles: {hist.total}", f"mean alpha: {fmt(mean_alpha, 2, na='NA')}"]),
        "table1_right": (TABLE1_RIGHT_HEADER, table1_right_rows(averages), "Criterion averages",
                         []),
        "table2": (TABLE2_HEADER, table2_rows(bibliometric), "Citations by average K0-K5",
                   [f"articles without a mean score: {bibliometric.excluded}"]),
        "table3": (TABLE3_HEADER, table3_rows(altmetric), "Altmetrics by average K0-K5",
                   [f"articles without a mean score: {altmetric.excluded}"]),
    }


def write_report(out_dir: str | Path, tables: dict, formats: Sequence[str] = ("csv", "md")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows, title, notes) in tables.items():
        if "csv" in formats:
            path = out_dir / f"{name}.csv"
            path.write_text(to_csv(header, rows), encoding="utf-8", newline="")
            written.append(path)
        if "md" in formats:
            path = out_dir / f"{name}.md"
            path.write_text(to_markdown(header, rows, title, notes), encoding="utf-8", newline="")
            written.append(path)
    return written
