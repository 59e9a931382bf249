"""Review corpus data model, line-delimited corpus files and HTML extraction.

A corpus file holds one JSON object per line, one reviewed article each::

    {"article_id": "...", "title": "...", "published": "YYYY-MM-DD",
     "doi": "10...." | null,
     "statements": [{"statement_id": "...", "reviewer": "..." | null, "text": "..."}]}

Statements are extracted offline from saved article pages; which nodes count
as statements, reviewer names or editorial furniture (pull quotes, subtitles)
is decided entirely by an :class:`ExtractionConfig`.
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from bs4 import BeautifulSoup

from .errors import ExtractionError, SchemaError

MIN_STATEMENT_CHARS = 20

# registrant code then a suffix; quotes and angle brackets end a DOI embedded in markup
_DOI_RE = re.compile(r"10\.\d+(?:\.\d+)*/[^\s\"'<>]+", re.IGNORECASE)
_DOI_PREFIXES = ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/",
                 "http://dx.doi.org/", "doi.org/", "doi:")


@dataclass(frozen=True)
class Statement:
    statement_id: str
    text: str
    reviewer: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise SchemaError(f"statement {self.statement_id!r} has empty text")


@dataclass(frozen=True)
class RicArticle:
    article_id: str
    title: str
    published: date
    doi: Optional[str] = None
    statements: tuple[Statement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "statements", tuple(self.statements))
        if self.doi is not None and not is_normalized_doi(self.doi):
            raise SchemaError(f"article {self.article_id!r}: DOI {self.doi!r} is not normalized")
        seen: set[str] = set()
        for st in self.statements:
            if st.statement_id in seen:
                raise SchemaError(
                    f"article {self.article_id!r}: duplicate statement_id {st.statement_id!r}")
            seen.add(st.statement_id)


@dataclass
class Corpus:
    articles: list[RicArticle]
    # provenance only; two corpora with the same articles compare equal
    source_label: str = field(default="", compare=False)
    extracted_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc), compare=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for art in self.articles:
            if art.article_id in seen:
                raise SchemaError(f"duplicate article_id {art.article_id!r}")
            seen.add(art.article_id)

    def __len__(self) -> int:
        return len(self.articles)

    def __iter__(self):
        return iter(self.articles)

    def get(self, article_id: str) -> Optional[RicArticle]:
        for art in self.articles:
            if art.article_id == article_id:
                return art
        return None

    @property
    def n_statements(self) -> int:
        return sum(len(a.statements) for a in self.articles)


# --- DOIs -----------------------------------------------------------------

def is_normalized_doi(doi: str) -> bool:
    return doi == doi.lower() and doi.startswith("10.") and "/" in doi and doi == doi.strip()


def _strip_trailing(doi: str) -> str:
    while doi:
        last = doi[-1]
        if last in ".,;":
            doi = doi[:-1]
        elif last == ")" and doi.count("(") < doi.count(")"):
            doi = doi[:-1]
        else:
            break
    return doi


def normalize_doi(raw: str) -> Optional[str]:
    """Normalize a bare or prefixed DOI; ``None`` if it does not look like one."""
    s = raw.strip()
    low = s.lower()
    for prefix in _DOI_PREFIXES:
        if low.startswith(prefix):
            s = s[len(prefix):].strip()
            break
    m = _DOI_RE.match(s)
    if not m:
        return None
    return _strip_trailing(m.group(0).lower()) or None


def extract_doi(text: str) -> Optional[str]:
    """Return the first DOI found in ``text``, normalized, or ``None``.

    >>> extract_doi("https://doi.org/10.1000/XYZ123")
    '10.1000/xyz123'
    >>> extract_doi("see DOI:10.1000/abc.def.")
    '10.1000/abc.def'
    """
    if not text:
        return None
    m = _DOI_RE.search(text)
    if not m:
        return None
    return _strip_trailing(m.group(0).lower()) or None


# --- corpus files ---------------------------------------------------------

def _require(obj: dict, key: str, types, lineno: int, nullable: bool = False):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", lineno)
    value = obj[key]
    if value is None and nullable:
        return None
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaError(f"field {key!r} has wrong type {type(value).__name__}", lineno)
    return value


def _article_from_record(obj: object, lineno: int, min_chars: int) -> RicArticle:
    if not isinstance(obj, dict):
        raise SchemaError("record is not an object", lineno)
    article_id = _require(obj, "article_id", str, lineno)
    title = _require(obj, "title", str, lineno)
    published_raw = _require(obj, "published", str, lineno)
    try:
        published = date.fromisoformat(published_raw)
    except ValueError:
        raise SchemaError(f"published {published_raw!r} is not YYYY-MM-DD", lineno) from None
    doi = _require(obj, "doi", str, lineno, nullable=True)
    if doi is not None and not is_normalized_doi(doi):
        raise SchemaError(f"doi {doi!r} is not a normalized DOI", lineno)
    raw_statements = _require(obj, "statements", list, lineno)

    statements = []
    seen: set[str] = set()
    for raw in raw_statements:
        if not isinstance(raw, dict):
            raise SchemaError("statement is not an object", lineno)
        sid = _require(raw, "statement_id", str, lineno)
        text = _require(raw, "text", str, lineno)
        reviewer = _require(raw, "reviewer", str, lineno, nullable=True) if "reviewer" in raw else None
        if sid in seen:
            raise SchemaError(f"duplicate statement_id {sid!r} in article {article_id!r}", lineno)
        seen.add(sid)
        if len(re.sub(r"\s", "", text)) < min_chars:
            raise SchemaError(
                f"statement {sid!r} in article {article_id!r} has fewer than "
                f"{min_chars} non-whitespace characters", lineno)
        statements.append(Statement(statement_id=sid, text=text, reviewer=reviewer))
    return RicArticle(article_id=article_id, title=title, published=published,
                      doi=doi, statements=tuple(statements))


def parse_corpus(path: str | Path, min_statement_chars: int = MIN_STATEMENT_CHARS) -> Corpus:
    """Read a corpus file; any malformed line raises :class:`SchemaError`."""
    path = Path(path)
    articles: list[RicArticle] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None
            art = _article_from_record(obj, lineno, min_statement_chars)
            if art.article_id in seen:
                raise SchemaError(
                    f"duplicate article_id {art.article_id!r} (first seen on line "
                    f"{seen[art.article_id]})", lineno)
            seen[art.article_id] = lineno
            articles.append(art)
    mtime = datetime.fromtimestamp(path.stat().st_mtime, timezone.utc)
    return Corpus(articles=articles, source_label=path.name, extracted_at=mtime)


def article_to_record(article: RicArticle) -> dict:
    return {
        "article_id": article.article_id,
        "title": article.title,
        "published": article.published.isoformat(),
        "doi": article.doi,
        "statements": [
            {"statement_id": s.statement_id, "reviewer": s.reviewer, "text": s.text}
            for s in article.statements
        ],
    }


def write_corpus(articles: Iterable[RicArticle], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for art in articles:
            fh.write(json.dumps(article_to_record(art), ensure_ascii=False) + "\n")
    return path


# --- HTML extraction ------------------------------------------------------

@dataclass(frozen=True)
class ExtractionConfig:
    statement_selector: str
    reviewer_selector: Optional[str] = None
    exclude_selectors: tuple[str, ...] = ()
    title_selector: Optional[str] = "h1"
    date_selector: Optional[str] = "time"
    doi_selector: Optional[str] = None

    def with_exclusions(self, *selectors: str) -> "ExtractionConfig":
        return ExtractionConfig(
            statement_selector=self.statement_selector,
            reviewer_selector=self.reviewer_selector,
            exclude_selectors=self.exclude_selectors + tuple(selectors),
            title_selector=self.title_selector,
            date_selector=self.date_selector,
            doi_selector=self.doi_selector,
        )


def load_extraction_config(path: str | Path) -> ExtractionConfig:
    """Read a key-value selector file. A leading ``[extraction]`` header is optional."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(interpolation=None)
    if not re.search(r"^\s*\[", text, re.MULTILINE):
        text = "[extraction]\n" + text
    parser.read_string(text)
    if not parser.has_section("extraction"):
        raise SchemaError(f"{path}: no [extraction] section")
    sec = parser["extraction"]
    if not sec.get("statement_selector"):
        raise SchemaError(f"{path}: statement_selector is required")

    def opt(key: str, default: Optional[str]) -> Optional[str]:
        value = sec.get(key, default)
        return value.strip() or None if value is not None else None

    excludes = tuple(s.strip() for s in sec.get("exclude_selectors", "").split(",") if s.strip())
    return ExtractionConfig(
        statement_selector=sec["statement_selector"].strip(),
        reviewer_selector=opt("reviewer_selector", None),
        exclude_selectors=excludes,
        title_selector=opt("title_selector", "h1"),
        date_selector=opt("date_selector", "time"),
        doi_selector=opt("doi_selector", None),
    )


def _visible_text(node) -> str:
    return " ".join(node.get_text(" ", strip=True).split())


def _prepared_soup(html: str, selectors: ExtractionConfig) -> BeautifulSoup:
    soup = BeautifulSoup(html, "html.parser")
    for bad in soup(["script", "style", "template"]):
        bad.decompose()
    for sel in selectors.exclude_selectors:
        for node in soup.select(sel):
            node.decompose()
    return soup


def _statements_from_soup(soup: BeautifulSoup, selectors: ExtractionConfig) -> list[Statement]:
    containers = soup.select(selectors.statement_selector)
    statements = []
    for container in containers:
        reviewer = None
        if selectors.reviewer_selector:
            name_node = container.select_one(selectors.reviewer_selector)
            if name_node is not None:
                reviewer = _visible_text(name_node) or None
                name_node.decompose()
        text = _visible_text(container)
        if not text:
            continue
        statements.append(Statement(statement_id=f"s{len(statements) + 1}",
                                    text=text, reviewer=reviewer))
    return statements


def extract_statements(html: str, selectors: ExtractionConfig) -> list[Statement]:
    """Statements of one saved article page, in document order.

    Nodes matching any exclusion selector are dropped before containers are
    collected. Raises :class:`ExtractionError` when no container matches,
    which usually means the selectors no longer fit the page markup.
    """
    soup = _prepared_soup(html, selectors)
    if not soup.select(selectors.statement_selector):
        raise ExtractionError(f"no element matches {selectors.statement_selector!r}")
    return _statements_from_soup(soup, selectors)


def extract_article(html: str, selectors: ExtractionConfig, article_id: str) -> RicArticle:
    soup = _prepared_soup(html, selectors)
    if not soup.select(selectors.statement_selector):
        raise ExtractionError(
            f"{article_id}: no element matches {selectors.statement_selector!r}")

    title = ""
    if selectors.title_selector:
        node = soup.select_one(selectors.title_selector)
        if node is not None:
            title = _visible_text(node)

    published = None
    if selectors.date_selector:
        node = soup.select_one(selectors.date_selector)
        if node is not None:
            raw = node.get("datetime") or _visible_text(node)
            try:
                published = date.fromisoformat(raw[:10])
            except ValueError:
                published = None
    if published is None:
        raise ExtractionError(f"{article_id}: no publication date found")

    doi = None
    if selectors.doi_selector:
        node = soup.select_one(selectors.doi_selector)
        if node is not None:
            doi = extract_doi(node.get("href", "")) or extract_doi(_visible_text(node))

    # reviewer names are removed from the tree while collecting statements
    statements = _statements_from_soup(soup, selectors)
    return RicArticle(article_id=article_id, title=title, published=published,
                      doi=doi, statements=tuple(statements))
