import json
from datetime import date

import pytest
from hypothesis import given, strategies as st

from conftest import SAMPLE_DIR
from ricalign.corpus import (Corpus, ExtractionConfig, RicArticle, Statement, article_to_record,
                             extract_article, extract_doi, extract_statements,
                             load_extraction_config, normalize_doi, parse_corpus, write_corpus)
from ricalign.errors import ExtractionError, SchemaError

LONG = "This statement is comfortably longer than twenty characters."


def record(aid, doi=None, n=2, **over):
    rec = {"article_id": aid, "title": f"Title {aid}", "published": "2023-01-02", "doi": doi,
           "statements": [{"statement_id": f"s{i}", "reviewer": None, "text": f"{LONG} {i}"}
                          for i in range(n)]}
    rec.update(over)
    return rec


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


# --- parse_corpus ---------------------------------------------------------

def test_two_valid_lines(tmp_path):
    corpus = parse_corpus(write_lines(tmp_path / "c.jsonl", [record("a"), record("b", "10.1/x")]))
    assert [a.article_id for a in corpus] == ["a", "b"]
    assert corpus.articles[1].doi == "10.1/x"
    assert corpus.articles[0].published == date(2023, 1, 2)
    assert corpus.n_statements == 4


def test_duplicate_article_names_id(tmp_path):
    path = write_lines(tmp_path / "c.jsonl", [record("a"), record("dup"), record("dup")])
    with pytest.raises(SchemaError, match="dup") as info:
        parse_corpus(path)
    assert info.value.line == 3


def test_empty_file(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("")
    assert len(parse_corpus(path)) == 0


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        parse_corpus(tmp_path / "nope.jsonl")


@pytest.mark.parametrize("bad, fragment", [
    ({"title": None}, "title"),
    ({"published": "02.01.2023"}, "published"),
    ({"doi": "https://doi.org/10.1/X"}, "doi"),
    ({"statements": "text"}, "statements"),
    ({"statements": [{"statement_id": "s1", "text": "too short"}]}, "fewer than 20"),
    ({"statements": [{"statement_id": "s1", "text": LONG}, {"statement_id": "s1", "text": LONG}]},
     "duplicate statement_id"),
    ({"statements": [{"statement_id": "s1", "text": "   "}]}, "fewer than 20"),
])
def test_malformed_line_rejected_with_line_number(tmp_path, bad, fragment):
    path = write_lines(tmp_path / "c.jsonl", [record("ok"), record("bad", **bad)])
    with pytest.raises(SchemaError, match=fragment) as info:
        parse_corpus(path)
    assert info.value.line == 2


def test_missing_field(tmp_path):
    rec = record("a")
    del rec["title"]
    with pytest.raises(SchemaError, match="missing field 'title'"):
        parse_corpus(write_lines(tmp_path / "c.jsonl", [rec]))


def test_invalid_json(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(json.dumps(record("a")) + "\n{not json\n")
    with pytest.raises(SchemaError) as info:
        parse_corpus(path)
    assert info.value.line == 2


def test_min_chars_configurable(tmp_path):
    rec = record("a", statements=[{"statement_id": "s1", "text": "short but fine"}])
    path = write_lines(tmp_path / "c.jsonl", [rec])
    with pytest.raises(SchemaError):
        parse_corpus(path)
    assert parse_corpus(path, min_statement_chars=5).n_statements == 1


def test_model_invariants():
    with pytest.raises(SchemaError):
        Statement("s1", "  ")
    with pytest.raises(SchemaError):
        RicArticle("a", "t", date(2020, 1, 1), doi="10.1/ABC")
    with pytest.raises(SchemaError):
        RicArticle("a", "t", date(2020, 1, 1), statements=[Statement("s", LONG), Statement("s", LONG)])
    art = RicArticle("a", "t", date(2020, 1, 1))
    with pytest.raises(SchemaError):
        Corpus([art, art])


def test_round_trip_sample(tmp_path):
    corpus = parse_corpus(SAMPLE_DIR / "corpus.jsonl")
    again = parse_corpus(write_corpus(corpus, tmp_path / "copy.jsonl"))
    assert again == corpus
    assert (tmp_path / "copy.jsonl").read_bytes() == (SAMPLE_DIR / "corpus.jsonl").read_bytes()


_text = st.text(st.characters(blacklist_categories=("Cs",)), min_size=20, max_size=60).filter(
    lambda t: len("".join(t.split())) >= 20)


@given(st.lists(st.tuples(st.text(min_size=1, max_size=8), st.lists(_text, max_size=4)),
                max_size=5, unique_by=lambda x: x[0]),
       st.sampled_from([None, "10.1234/abc", "10.5555/x(1)y"]))
def test_round_trip_property(tmp_path_factory, items, doi):
    articles = [RicArticle(aid, f"title {aid}", date(2021, 3, 4), doi,
                           tuple(Statement(f"s{i}", t, reviewer=None if i % 2 else "R")
                                 for i, t in enumerate(texts)))
                for aid, texts in items]
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    first = parse_corpus(write_corpus(articles, path))
    second = parse_corpus(write_corpus(first, path))
    assert first == second == Corpus(articles)


# --- DOIs -----------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("https://doi.org/10.1000/XYZ123", "10.1000/xyz123"),
    ("no identifier here", None),
    ("see DOI:10.1000/abc.def.", "10.1000/abc.def"),
    ("(published as 10.1038/s41586-020-2649-2)", "10.1038/s41586-020-2649-2"),
    ("10.1000/a(b)c;", "10.1000/a(b)c"),
    ('<a href="https://doi.org/10.5555/RIC.1">x</a>', "10.5555/ric.1"),
    ("first 10.1000/one, then 10.1000/two", "10.1000/one"),
    ("", None),
])
def test_extract_doi(text, expected):
    assert extract_doi(text) == expected


def test_normalize_doi():
    assert normalize_doi("doi:10.1000/ABC") == "10.1000/abc"
    assert normalize_doi("https://dx.doi.org/10.1000/abc.") == "10.1000/abc"
    assert normalize_doi("not a doi") is None


@given(st.text(max_size=80))
def test_extract_doi_idempotent(text):
    once = extract_doi(text)
    if once is not None:
        assert extract_doi(once) == once


@given(st.from_regex(r"10\.[0-9]{4,6}/[A-Za-z0-9._;()/-]{1,20}[.,;)]{0,3}", fullmatch=True))
def test_extracted_doi_is_normalized(text):
    doi = extract_doi("DOI: " + text)
    if doi is not None:
        assert doi == doi.lower() and doi.startswith("10.") and "/" in doi
        assert doi[-1] not in ".,;"


# --- HTML extraction ------------------------------------------------------

PAGE = """<html><body>
<h1>Title</h1><time datetime="2022-03-04">4 March</time>
<h2 class="subtitle">Experts respond</h2>
<blockquote class="pull-quote">A quoted highlight that must vanish.</blockquote>
<div class="st"><b class="who">Dr. A</b><p>First statement text.</p></div>
<div class="st"><b class="who">Dr. B</b><p>Second <em>statement</em> text.</p>
  <blockquote class="pull-quote">Inner highlight.</blockquote></div>
<div class="st"><p>Third statement without name.</p></div>
</body></html>"""

CONFIG = ExtractionConfig(statement_selector="div.st", reviewer_selector=".who",
                          exclude_selectors=(".pull-quote", ".subtitle"))


def test_three_statements_pull_quote_removed():
    statements = extract_statements(PAGE, CONFIG)
    assert [s.text for s in statements] == ["First statement text.", "Second statement text.",
                                            "Third statement without name."]
    assert [s.reviewer for s in statements] == ["Dr. A", "Dr. B", None]
    assert [s.statement_id for s in statements] == ["s1", "s2", "s3"]
    assert all("highlight" not in s.text for s in statements)


def test_without_exclusions_quote_leaks():
    bare = ExtractionConfig(statement_selector="div.st", reviewer_selector=".who")
    assert "Inner highlight." in extract_statements(PAGE, bare)[1].text


def test_no_containers_is_error():
    with pytest.raises(ExtractionError):
        extract_statements(PAGE, ExtractionConfig(statement_selector="section.statement"))


@given(st.lists(st.sampled_from([".pull-quote", ".subtitle", ".who", "div.st:nth-of-type(2)",
                                 "p", "em", "div.st"]), max_size=5))
def test_exclusions_never_add_statements(extra):
    base = ExtractionConfig(statement_selector="div.st")
    counts = []
    cfg = base
    for sel in [None, *extra]:
        if sel is not None:
            cfg = cfg.with_exclusions(sel)
        try:
            counts.append(len(extract_statements(PAGE, cfg)))
        except ExtractionError:
            counts.append(0)
    assert counts == sorted(counts, reverse=True)


def test_bundled_pages_match_bundled_corpus():
    selectors = load_extraction_config(SAMPLE_DIR / "extraction.ini")
    corpus = parse_corpus(SAMPLE_DIR / "corpus.jsonl")
    pages = sorted((SAMPLE_DIR / "html").glob("*.html"))
    assert len(pages) == len(corpus) == 10
    for page in pages:
        art = extract_article(page.read_text(encoding="utf-8"), selectors, page.stem)
        assert art == corpus.get(page.stem)
        assert all("Editorial highlight" not in s.text for s in art.statements)
        assert all("Sample University" not in s.text for s in art.statements)
    # modelled on roughly four statements per article
    assert 3.5 <= corpus.n_statements / len(corpus) <= 4.0


def test_bundled_page_doi_and_metadata():
    selectors = load_extraction_config(SAMPLE_DIR / "extraction.ini")
    a02 = extract_article((SAMPLE_DIR / "html" / "a02.html").read_text(encoding="utf-8"),
                          selectors, "a02")
    assert a02.doi == "10.5555/ric.2020.0207"
    assert a02.published == date(2020, 2, 13)
    a05 = extract_article((SAMPLE_DIR / "html" / "a05.html").read_text(encoding="utf-8"),
                          selectors, "a05")
    assert a05.doi is None


def test_extraction_config_file(tmp_path):
    path = tmp_path / "sel.ini"
    path.write_text("statement_selector = div.st\nexclude_selectors = .a, .b ,, .c\n")
    cfg = load_extraction_config(path)
    assert cfg.exclude_selectors == (".a", ".b", ".c")
    assert cfg.reviewer_selector is None
    path.write_text("reviewer_selector = .x\n")
    with pytest.raises(SchemaError):
        load_extraction_config(path)


def test_article_without_date_fails():
    with pytest.raises(ExtractionError):
        extract_article('<div class="st">Some statement text here</div>',
                        ExtractionConfig(statement_selector="div.st"), "x")
