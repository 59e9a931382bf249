"""Rebuild the citation and altmetric tables from reference bin marginals.

Each bin gets ``papers`` articles at the bin's midpoint score; the first
``matched`` of them carry records whose values sum to the bin totals.
The printed tables should show the reference per-paper rates.
"""

from datetime import date, datetime, timezone

from ricalign.agreement import AlphaResult
from ricalign.analysis import altmetric_table, bibliometric_table
from ricalign.corpus import RicArticle
from ricalign.enrichment import AltmetricRecord, CitationRecord, EnrichedArticle
from ricalign.report import TABLE2_HEADER, TABLE3_HEADER, table2_rows, table3_rows, to_markdown

# mean score -> papers, matched, citations, AAS, news mentions
MARGINALS = {
    0.1: (20, 11, 3169, 10012, 1097),
    0.3: (19, 16, 2701, 16569, 2227),
    0.5: (180, 138, 39312, 211211, 20592),
    0.7: (252, 197, 58038, 302953, 37175),
    0.9: (51, 43, 12823, 71331, 8310),
}
STAMP = datetime(2024, 1, 1, tzinfo=timezone.utc)
NO_ALPHA = AlphaResult(None, None, None, 0, 0, "interval")


def split(total, n):
    q, r = divmod(total, n)
    return [q + (i < r) for i in range(n)]


def build():
    out, i = [], 0
    for mean_k, (papers, matched, cites, aas, nm) in MARGINALS.items():
        parts = list(zip(split(cites, matched), split(aas, matched), split(nm, matched)))
        for k in range(papers):
            i += 1
            doi = f"10.5555/synthetic.{i}"
            cit = alt = None
            if k < matched:
                c, a, n = parts[k]
                cit = CitationRecord(doi, c, "synthetic", STAMP)
                alt = AltmetricRecord(doi, float(a), n, 0, "synthetic", STAMP)
            art = RicArticle(f"p{i}", "synthetic", date(2019, 1, 1), doi)
            out.append(EnrichedArticle(art, mean_k, NO_ALPHA, cit, alt))
    return out


if __name__ == "__main__":
    enriched = build()
    print(to_markdown(TABLE2_HEADER, table2_rows(bibliometric_table(enriched)), "Citations"))
    print(to_markdown(TABLE3_HEADER, table3_rows(altmetric_table(enriched)), "Altmetrics"))
