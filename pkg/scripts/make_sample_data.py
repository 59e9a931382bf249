#!/usr/bin/env python3
"""Regenerate the bundled synthetic sample under src/ricalign/data/sample/.

Writes ten saved article pages (html/), the corpus extracted from them with
the bundled selector file, and citation/altmetric fixtures covering a subset
of the DOIs. Everything here is invented; nothing is taken from real pages.

    python scripts/make_sample_data.py
"""

from __future__ import annotations

import csv
import html
from pathlib import Path

from ricalign.corpus import extract_article, load_extraction_config, write_corpus

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "src" / "ricalign" / "data" / "sample"

# article id, title, date, DOI as printed on the page (None: no primary study link), statements
ARTICLES = [
    ("a01", "Heat waves and hospital admissions in European cities", "2019-07-02",
     "https://doi.org/10.5555/RIC.2019.0101", [
         ("Dr. Mara Feld", "The study links daily temperature records with admission data from 36 cities "
          "and the research question is laid out clearly. The statistical model is appropriate and "
          "the authors control for seasonality and air pollution in a convincing way."),
         ("Prof. Ilse Korn", "A solid piece of work, although not entirely new: similar associations "
          "were reported for North America. The conclusions are cautious and well supported."),
         ("Dr. Tobias Ranke", "I am less convinced by the exposure assessment, because station data "
          "from the city centre are assigned to whole regions. This could bias the estimates."),
         ("Prof. Lea Hartung", "The manuscript is well written and the figures are easy to read. "
          "The sampling of cities, however, leaves out most of Eastern Europe."),
     ]),
    ("a02", "A blood test for early detection of pancreatic cancer", "2020-02-13",
     "doi:10.5555/ric.2020.0207", [
         ("Prof. Hanna Vogt", "The idea is promising, but the validation cohort is small and the "
          "controls were not matched for age. The reported sensitivity is probably too optimistic."),
         ("Dr. Jonas Berg", "Methodologically the study has clear weaknesses; the cut-off was chosen "
          "on the same data it was evaluated on. The conclusions go far beyond what the data show."),
         ("Dr. Ruth Albers", "An important question, and the authors state their aims precisely. "
          "Still, I would not recommend using this test outside of research settings yet."),
     ]),
    ("a03", "Rewetting peatlands as a climate measure", "2021-05-20",
     "https://doi.org/10.5555/RIC.2021.0315", [
         ("Prof. Karl Moos", "This is an excellent and original synthesis of measurements from more "
          "than one hundred sites. The methods are described transparently."),
         ("Dr. Eva Lind", "The emission estimates are robust and the uncertainty analysis is "
          "exemplary. I fully agree with the conclusions drawn by the authors."),
         ("Dr. Paul Stern", "The paper is clearly structured. Whether the proposed rewetting rates "
          "are realistic is a political rather than a scientific question."),
         ("Prof. Nina Brandt", "A very good study. The only limitation is that methane fluxes in "
          "the first years after rewetting are poorly constrained by the data."),
         ("Dr. Ole Winter", "Convincing work with a large and well documented data set; the "
          "statistical treatment of site heterogeneity is appropriate."),
     ]),
    ("a04", "Machine learning predicts protein stability", "2021-11-03",
     "https://doi.org/10.5555/RIC.2021.0422", [
         ("Dr. Sven Adler", "The benchmark is comprehensive and the model clearly outperforms "
          "earlier approaches. The code and data are openly available, which I appreciate."),
     ]),
    ("a05", "Screen time and sleep in adolescents", "2022-01-18", None, [
         ("Prof. Greta Holm", "The cross-sectional design does not allow causal conclusions, yet "
          "the press release suggests exactly that. The questionnaire items are not validated."),
         ("Dr. Lukas Fink", "The sample is large, but self-reported screen time is notoriously "
          "unreliable. The effect sizes are very small."),
         ("Dr. Mira Sand", "An interesting descriptive study. The authors are careful in the "
          "discussion, more careful than the title suggests."),
         ("Prof. Dirk Eller", "The statistical analysis is adequate, although multiple testing "
          "is not addressed. I would have liked a clearer research question."),
     ]),
    ("a06", "Gene therapy for a rare form of blindness", "2022-06-09",
     "https://doi.org/10.5555/RIC.2022.0611", [
         ("Prof. Anke Reuter", "A remarkable result for patients with this mutation. With only "
          "twelve participants and no control group, the findings must be confirmed."),
         ("Dr. Felix Horn", "The trial was carefully conducted and the safety data are reassuring. "
          "The improvement in visual function is modest but meaningful."),
         ("Dr. Clara Weiss", "The paper is well written and the outcomes were defined in advance. "
          "Long-term follow-up is missing, which the authors acknowledge."),
     ]),
    ("a07", "Microplastics in deep-sea sediments", "2022-10-27",
     "https://doi.org/10.5555/RIC.2022.0719", [
         ("Dr. Jan Kessler", "The sampling design is impressive and contamination controls were "
          "applied throughout. This is a valuable contribution to the field."),
         ("Prof. Ute Behr", "The extrapolation to global sediment stocks rests on very few cores "
          "and is therefore highly uncertain. The authors should say so more clearly."),
         ("Dr. Max Roth", "Original and carefully executed. The spectroscopic identification of "
          "particles follows current best practice."),
         ("Dr. Iris Kuhn", "Well written, convincing figures, and conclusions that match the "
          "data. I have no major concerns."),
     ]),
    ("a08", "Intermittent fasting and weight loss: a randomised trial", "2023-03-14",
     "https://doi.org/10.5555/RIC.2023.0803", [
         ("Prof. Bernd Scholl", "A well designed randomised trial with a sensible comparison group. "
          "The result that fasting is not superior to calorie restriction is plausible."),
         ("Dr. Sara Jung", "Drop-out was high in both arms and the handling of missing data is "
          "not described in enough detail to judge the robustness of the analysis."),
     ]),
    ("a09", "Large language models in medical exams", "2023-09-05",
     "https://doi.org/10.5555/RIC.2023.0907", [
         ("Prof. Tim Vogel", "The research question is timely and clearly formulated. The "
          "evaluation, however, uses publicly available questions that may be in the training data."),
         ("Dr. Lena Brock", "An original study, but passing an exam says little about clinical "
          "competence. The authors overstate the implications."),
         ("Dr. Erik Sommer", "The statistics are descriptive only; no confidence intervals are "
          "reported for the accuracy values, which makes comparisons difficult."),
         ("Prof. Julia Pohl", "Methodologically simple but transparent. The manuscript is easy to "
          "follow and the limitations section is honest."),
         ("Dr. Noah Graf", "I consider the conclusions premature. Model versions change quickly "
          "and the results may not hold for the next release."),
         ("Dr. Pia Lorenz", "A useful snapshot. The comparison with human examinees is the most "
          "interesting part and is handled carefully."),
     ]),
    ("a10", "Ocean heat content reaches a new record", "2024-01-11",
     "https://doi.org/10.5555/RIC.2024.1001", [
         ("Prof. Heike Wald", "An update of an established data set, carried out with the usual "
          "care. The uncertainty estimates are sound."),
         ("Dr. Moritz Kern", "Not a new method, but an important and reliable confirmation of the "
          "warming trend. The conclusions are fully supported."),
         ("Dr. Sina Thal", "The paper is concise and clearly written. The comparison of the "
          "different reconstructions is convincing."),
         ("Dr. Robert Quast", "The statistical treatment of sparse early observations is "
          "appropriate and well documented."),
         ("Prof. Anna Falk", "Solid work. I only miss a discussion of the regional patterns "
          "behind the global number."),
     ]),
]

CITATIONS = {"a01": 212, "a02": 87, "a03": 455, "a04": 1290, "a07": 164, "a08": 61, "a10": 348}
ALTMETRICS = {  # aas, news mentions, mendeley readers
    "a01": (412.5, 38, 310), "a02": (1877.0, 142, 95), "a04": (96.25, 3, 880),
    "a07": (655.0, 71, 240), "a08": (2210.0, 189, 120), "a09": (3105.5, 260, 415),
    "a10": (988.0, 95, 205),
}

PAGE = """<!DOCTYPE html>
<html lang="de">
<head>
<meta charset="utf-8">
<title>{title} | Research in Context</title>
<script>window.tracking = {{"page": "{aid}"}};</script>
</head>
<body>
<nav class="site-nav"><a href="/">Start</a> | <a href="/angebote">Angebote</a></nav>
<article class="ric">
<p class="kicker">Research in Context</p>
<h1 class="story-title">{title}</h1>
<p class="meta">Published <time datetime="{date}">{date}</time></p>
{primary}
<h2 class="subtitle">Statements of independent experts</h2>
<blockquote class="pull-quote">&laquo;{quote}&raquo;</blockquote>
{statements}
</article>
<footer class="site-footer">Editorial team &middot; Contact &middot; Imprint</footer>
</body>
</html>
"""

STATEMENT = """<section class="statement">
<h3 class="expert-name">{reviewer}</h3>
<p class="affiliation">Institute for Example Studies, Sample University</p>
{paragraphs}
</section>"""


def render_page(aid, title, date, doi, statements) -> str:
    primary = ""
    if doi is not None:
        href = doi if doi.startswith("http") else f"https://doi.org/{doi.split(':', 1)[1]}"
        primary = (f'<p class="primary-study">Primary study: '
                   f'<a class="doi" href="{html.escape(href)}">{html.escape(doi)}</a></p>')
    blocks = []
    for i, (reviewer, text) in enumerate(statements):
        sentences = text.split(". ")
        paras = [". ".join(sentences[: len(sentences) // 2 or 1]),
                 ". ".join(sentences[len(sentences) // 2 or 1:])]
        paras = [p if p.endswith(".") else p + "." for p in paras if p]
        body = "\n".join(f"<p>{html.escape(p)}</p>" for p in paras)
        if i == 1:
            # a highlighted quote inside a statement; must not leak into the text
            body += '\n<blockquote class="pull-quote">Editorial highlight.</blockquote>'
        blocks.append(STATEMENT.format(reviewer=html.escape(reviewer), paragraphs=body))
    quote = html.escape(statements[0][1].split(". ")[0])
    return PAGE.format(aid=aid, title=html.escape(title), date=date, primary=primary,
                       quote=quote, statements="\n".join(blocks))


def main() -> None:
    html_dir = SAMPLE / "html"
    html_dir.mkdir(parents=True, exist_ok=True)
    for aid, title, date, doi, statements in ARTICLES:
        (html_dir / f"{aid}.html").write_text(render_page(aid, title, date, doi, statements),
                                              encoding="utf-8")

    selectors = load_extraction_config(SAMPLE / "extraction.ini")
    articles = [extract_article((html_dir / f"{aid}.html").read_text(encoding="utf-8"),
                                selectors, aid)
                for aid, *_ in ARTICLES]
    write_corpus(articles, SAMPLE / "corpus.jsonl")
    doi_of = {a.article_id: a.doi for a in articles}

    with (SAMPLE / "citations.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doi", "citations"])
        for aid, n in CITATIONS.items():
            w.writerow([doi_of[aid], n])
    with (SAMPLE / "altmetrics.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doi", "aas", "news_mentions", "mendeley_readers"])
        for aid, (aas, nm, readers) in ALTMETRICS.items():
            w.writerow([doi_of[aid], aas, nm, readers])

    n_st = sum(len(a.statements) for a in articles)
    print(f"{len(articles)} articles, {n_st} statements ({n_st / len(articles):.2f} per article)")


if __name__ == "__main__":
    main()
