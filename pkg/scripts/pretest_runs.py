"""Score a corpus several times with the mock scorer and report run-to-run alpha.

A cheap stand-in for checking annotation stability before paying for a
hosted model. Usage:

    python scripts/pretest_runs.py [corpus.jsonl] --runs 3 --seed 2024
"""

import argparse
from pathlib import Path

from ricalign.agreement import alpha_across_runs, alpha_per_article, split_runs
from ricalign.analysis import mean_alpha
from ricalign.corpus import parse_corpus
from ricalign.numfmt import fmt
from ricalign.scoring import MockScorer, score_corpus

SAMPLE = Path(__file__).resolve().parents[1] / "src" / "ricalign" / "data" / "sample" / "corpus.jsonl"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("corpus", nargs="?", default=str(SAMPLE))
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--metric", choices=("interval", "nominal"), default="interval")
    args = ap.parse_args()

    corpus = parse_corpus(args.corpus)
    scores = score_corpus(corpus, MockScorer(seed=args.seed), runs=args.runs)
    runs = split_runs(scores)
    for run, records in enumerate(runs):
        per_article = alpha_per_article(records, run=run, metric=args.metric)
        print(f"run {run}: mean per-article alpha {fmt(mean_alpha(per_article), 4, na='NA')}")
    if len(runs) >= 2:
        across = alpha_across_runs(runs, args.metric)
        print(f"alpha across {len(runs)} runs: {fmt(across.alpha, 4, na='NA')} "
              f"({across.n_units_used} units, {across.n_pairable_values} values)")


if __name__ == "__main__":
    main()
