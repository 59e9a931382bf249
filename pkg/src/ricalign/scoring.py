"""Turn review statements into six-criterion score vectors.

A scorer is anything with a ``scorer_id`` and a ``request(statement, run)``
method returning the raw reply text. Every reply goes through
:func:`parse_score_response`, the only place where a :class:`ScoreVector`
is built from untrusted input. :func:`score_statement` adds the cache,
retries and the all-NA fallback on top.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Sequence

import httpx

from .corpus import Corpus, Statement
from .errors import (AuthError, EmptyInput, MalformedResponse, MissingKey, OutOfRange,
                     ResponseError, SchemaError, TransportError)
from .kvstore import JsonlStore

log = logging.getLogger(__name__)

CRITERIA: tuple[tuple[str, str, str], ...] = (
    ("K0", "Research questions",
     "Examination of the research question (e.g. are the aims and rationale clearly formulated?)"),
    ("K1", "Originality",
     "Evaluation of originality (contribution, increase in knowledge in the literature or in the subject)"),
    ("K2", "Methods",
     "The strengths and weaknesses of the method described are clearly stated"),
    ("K3", "Writing",
     "Specific comments on the writing of the manuscript (e.g. spelling, organisation, illustrations, etc.)"),
    ("K4", "Results and conclusions",
     "Author's interpretation of the results and conclusions drawn from the results"),
    ("K5", "Statistics",
     "Comments on the statistics where appropriate (e.g. whether they are robust and fit for purpose "
     "and whether the controls and sampling mechanisms are sufficiently and well described)"),
)
CRITERION_KEYS: tuple[str, ...] = tuple(c[0] for c in CRITERIA)

SCORING_API_KEY_ENV = "SCORING_API_KEY"


@dataclass(frozen=True)
class ScoreVector:
    """Scores for K0..K5; ``None`` is NA, which is not the same as 0."""

    k0: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    k3: Optional[float] = None
    k4: Optional[float] = None
    k5: Optional[float] = None

    def __post_init__(self) -> None:
        for key, v in zip(CRITERION_KEYS, self.values):
            if v is not None and not (0.0 <= v <= 1.0):
                raise OutOfRange(key, v)

    @property
    def values(self) -> tuple[Optional[float], ...]:
        return (self.k0, self.k1, self.k2, self.k3, self.k4, self.k5)

    def __getitem__(self, key: str) -> Optional[float]:
        return self.values[CRITERION_KEYS.index(key)]

    @property
    def present(self) -> list[float]:
        return [v for v in self.values if v is not None]

    def to_dict(self) -> dict[str, Optional[float]]:
        return dict(zip(CRITERION_KEYS, self.values))

    @classmethod
    def from_values(cls, values: Sequence[Optional[float]]) -> "ScoreVector":
        vals = [None if v is None else float(v) for v in values]
        return cls(*vals)

    @classmethod
    def all_na(cls) -> "ScoreVector":
        return cls()


@dataclass(frozen=True)
class ScoredStatement:
    article_id: str
    statement_id: str
    run: int
    scores: ScoreVector
    scorer_id: str
    failed: bool = False

    @property
    def key(self) -> tuple[str, str, int, str]:
        return (self.article_id, self.statement_id, self.run, self.scorer_id)


# --- prompt ---------------------------------------------------------------

OPEN_MARK = "<<<STATEMENT>>>"
CLOSE_MARK = "<<<END STATEMENT>>>"

DEFAULT_INSTRUCTION = """\
You are given one expert statement about a recently published research article.
Rate how the expert judges the article on each of the following criteria with a
number between 0 and 1. A value close to 0 means the expert points out weaknesses
or problems for that criterion; a value close to 1 means the criterion is fulfilled
to the expert's satisfaction. If the statement does not contain enough information
to judge a criterion, or no clear decision is possible, use null.

{criteria}

Answer with exactly one JSON object with the keys "K0", "K1", "K2", "K3", "K4"
and "K5" and nothing else. Every value must be a number between 0 and 1, or null.

The statement is enclosed in the markers {open} and {close}.
"""


@dataclass(frozen=True)
class PromptTemplate:
    name: str = "ric-criteria"
    instruction: str = DEFAULT_INSTRUCTION

    @property
    def version(self) -> str:
        digest = hashlib.sha256(self.instruction.encode("utf-8")).hexdigest()[:12]
        return f"{self.name}-{digest}"


DEFAULT_TEMPLATE = PromptTemplate()


def _escape_markers(text: str) -> str:
    # "<<<" can never occur inside the delimited region
    return text.replace("<<<", "<\u200b<<")


def build_prompt(template: PromptTemplate, statement: Statement) -> str:
    criteria = "\n".join(f"{key}: {desc}" for key, _, desc in CRITERIA)
    head = template.instruction.format(criteria=criteria, open=OPEN_MARK, close=CLOSE_MARK)
    return f"{head}\n{OPEN_MARK}\n{_escape_markers(statement.text)}\n{CLOSE_MARK}\n"


# --- response parsing -----------------------------------------------------

def _first_object(raw: str) -> dict:
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pass
        else:
            if isinstance(obj, dict):
                return obj
        pos = raw.find("{", pos + 1)
    raise MalformedResponse(f"no JSON object in response: {raw[:80]!r}")


def _coerce(key: str, value: object) -> Optional[float]:
    if value is None:
        return None
    if isinstance(value, str) and value.strip().upper() in {"NA", "N/A"}:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedResponse(f"{key} has non-numeric value {value!r}")
    v = float(value)
    if not math.isfinite(v) or not 0.0 <= v <= 1.0:
        raise OutOfRange(key, value)
    return v


def parse_score_response(raw: str) -> ScoreVector:
    """Parse a scorer reply into a :class:`ScoreVector`.

    Leading or trailing prose is tolerated; the first JSON object in the text
    is used. ``null`` (or the string ``"NA"``) maps to NA.
    """
    if not isinstance(raw, str):
        raise MalformedResponse(f"response is {type(raw).__name__}, not text")
    obj = _first_object(raw)
    lowered = {str(k).strip().upper(): v for k, v in obj.items()}
    values = []
    for key in CRITERION_KEYS:
        if key not in lowered:
            raise MissingKey(key)
        values.append(_coerce(key, lowered[key]))
    return ScoreVector(*values)


# --- scorers --------------------------------------------------------------

class Scorer(Protocol):
    scorer_id: str

    def request(self, statement: Statement, run: int) -> str: ...


def mock_score(statement_text: str, run: int, seed: int, na_rate: float = 0.25) -> ScoreVector:
    """Deterministic stand-in for a language model.

    Each criterion takes four bytes of SHA-256 over (seed, run, text): two
    decide NA, two give the value, rounded to two decimals.
    """
    digest = hashlib.sha256(f"{seed}\x1f{run}\x1f{statement_text}".encode("utf-8")).digest()
    threshold = int(na_rate * 65536)
    values: list[Optional[float]] = []
    for i in range(len(CRITERION_KEYS)):
        chunk = digest[4 * i: 4 * i + 4]
        na_draw = int.from_bytes(chunk[:2], "big")
        value_draw = int.from_bytes(chunk[2:], "big")
        values.append(None if na_draw < threshold else round(value_draw / 65535, 2))
    return ScoreVector(*values)


@dataclass
class MockScorer:
    seed: int = 0
    template: PromptTemplate = DEFAULT_TEMPLATE
    na_rate: float = 0.25

    @property
    def scorer_id(self) -> str:
        return f"mock-seed{self.seed}@{self.template.version}"

    def request(self, statement: Statement, run: int) -> str:
        return json.dumps(mock_score(statement.text, run, self.seed, self.na_rate).to_dict())


class RemoteScorer:
    """Chat-completions style HTTP scorer.

    Sends ``{"model", "temperature", "messages"}`` to ``endpoint`` with a
    bearer token and reads ``choices[0].message.content``.
    """

    def __init__(self, endpoint: str, model: str = "gpt-4o-mini", api_key: str | None = None,
                 template: PromptTemplate = DEFAULT_TEMPLATE, temperature: float = 0.0,
                 timeout: float = 60.0, client: httpx.Client | None = None):
        api_key = api_key if api_key is not None else os.environ.get(SCORING_API_KEY_ENV)
        if not api_key:
            raise AuthError(f"remote scorer needs an API key in ${SCORING_API_KEY_ENV}")
        if not endpoint:
            raise AuthError("remote scorer needs scorer.endpoint")
        self.endpoint = endpoint
        self.model = model
        self.template = template
        self.temperature = temperature
        self._headers = {"Authorization": f"Bearer {api_key}"}
        self._client = client or httpx.Client(timeout=timeout)

    @property
    def scorer_id(self) -> str:
        return f"{self.model}@{self.template.version}"

    def request(self, statement: Statement, run: int) -> str:
        body = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": build_prompt(self.template, statement)}],
        }
        try:
            resp = self._client.post(self.endpoint, json=body, headers=self._headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"scorer request failed: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"scorer rejected credentials ({resp.status_code})")
        if resp.status_code >= 400:
            raise TransportError(f"scorer returned HTTP {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            # an unusable envelope is treated like an unusable answer
            return resp.text


# --- caching and retries --------------------------------------------------

def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ScoreCache:
    """Score cache keyed by statement content, scorer id and run.

    Keyed by content rather than statement id so a re-extracted corpus
    reuses earlier scores. Only successful parses are stored.
    """

    def __init__(self, path: str | Path | None = None):
        self._store = JsonlStore(path)

    @staticmethod
    def key(text: str, scorer_id: str, run: int) -> str:
        return f"{content_hash(text)}|{scorer_id}|{run}"

    def get(self, text: str, scorer_id: str, run: int) -> Optional[ScoreVector]:
        hit = self._store.get(self.key(text, scorer_id, run))
        if hit is None:
            return None
        return ScoreVector.from_values([hit.get(k) for k in CRITERION_KEYS])

    def put(self, text: str, scorer_id: str, run: int, scores: ScoreVector) -> None:
        self._store.put(self.key(text, scorer_id, run), scores.to_dict())

    def __len__(self) -> int:
        return len(self._store)


def score_statement(scorer: Scorer, statement: Statement, run: int, *, article_id: str = "",
                    cache: ScoreCache | None = None, retries: int = 3,
                    backoff: float = 1.0, factor: float = 2.0,
                    sleep: Callable[[float], None] = time.sleep) -> ScoredStatement:
    """Score one statement.

    Unusable replies are retried ``retries`` times with exponential backoff;
    after that the statement gets an all-NA vector with ``failed=True``.
    Transport errors are retried on the same schedule and re-raised once the
    budget is spent. Auth errors are raised immediately.
    """
    scorer_id = scorer.scorer_id
    if cache is not None:
        hit = cache.get(statement.text, scorer_id, run)
        if hit is not None:
            return ScoredStatement(article_id, statement.statement_id, run, hit, scorer_id)

    delay = backoff
    for attempt in range(retries + 1):
        last = attempt == retries
        try:
            raw = scorer.request(statement, run)
        except AuthError:
            raise
        except TransportError:
            if last:
                raise
            log.warning("transport error scoring %s/%s, retrying", article_id, statement.statement_id)
        else:
            try:
                scores = parse_score_response(raw)
            except ResponseError as exc:
                log.warning("unusable reply for %s/%s (attempt %d): %s",
                            article_id, statement.statement_id, attempt + 1, exc)
            else:
                if cache is not None:
                    cache.put(statement.text, scorer_id, run, scores)
                return ScoredStatement(article_id, statement.statement_id, run, scores, scorer_id)
        if not last:
            sleep(delay)
            delay *= factor

    log.error("giving up on %s/%s after %d attempts", article_id, statement.statement_id, retries + 1)
    return ScoredStatement(article_id, statement.statement_id, run, ScoreVector.all_na(),
                           scorer_id, failed=True)


def score_corpus(corpus: Corpus, scorer: Scorer, runs: int = 1, *,
                 cache: ScoreCache | None = None, concurrency: int = 4, retries: int = 3,
                 backoff: float = 1.0, sleep: Callable[[float], None] = time.sleep
                 ) -> list[ScoredStatement]:
    """Score every statement ``runs`` times; output order is run, article, statement."""
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    jobs = [(run, art.article_id, st) for run in range(runs)
            for art in corpus.articles for st in art.statements]

    def work(job):
        run, article_id, st = job
        return score_statement(scorer, st, run, article_id=article_id, cache=cache,
                               retries=retries, backoff=backoff, sleep=sleep)

    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(work, jobs))


# --- score files ----------------------------------------------------------

def scored_to_record(s: ScoredStatement) -> dict:
    return {"article_id": s.article_id, "statement_id": s.statement_id, "run": s.run,
            "scorer_id": s.scorer_id, "failed": s.failed, "scores": s.scores.to_dict()}


def write_scores(scores: Iterable[ScoredStatement], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for s in scores:
            fh.write(json.dumps(scored_to_record(s)) + "\n")
    return path


def read_scores(path: str | Path) -> list[ScoredStatement]:
    out: list[ScoredStatement] = []
    seen: set[tuple] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                scores = rec["scores"]
                vector = ScoreVector.from_values([scores[k] for k in CRITERION_KEYS])
                item = ScoredStatement(str(rec["article_id"]), str(rec["statement_id"]),
                                       int(rec["run"]), vector, str(rec["scorer_id"]),
                                       bool(rec.get("failed", False)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, OutOfRange) as exc:
                raise SchemaError(f"bad score record: {exc}", lineno) from None
            if item.run < 0:
                raise SchemaError("run must be >= 0", lineno)
            if item.key in seen:
                raise SchemaError(f"duplicate score record {item.key}", lineno)
            seen.add(item.key)
            out.append(item)
    return out


# --- summaries ------------------------------------------------------------

@dataclass(frozen=True)
class CriterionAverage:
    key: str
    name: str
    mean: Optional[float]
    na_count: int


def criterion_averages(scores: Sequence[ScoredStatement]) -> list[CriterionAverage]:
    if not scores:
        raise EmptyInput("criterion_averages needs at least one scored statement")
    out = []
    for idx, (key, name, _) in enumerate(CRITERIA):
        present = [s.scores.values[idx] for s in scores if s.scores.values[idx] is not None]
        mean = math.fsum(present) / len(present) if present else None
        out.append(CriterionAverage(key, name, mean, len(scores) - len(present)))
    return out
