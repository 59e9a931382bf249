"""Citation and altmetric indicators per DOI.

Two provider families share one small contract (``provider_id`` plus
``fetch(doi)`` returning a record or ``None``):

* fixture providers read CSV exports (``doi,citations`` and
  ``doi,aas,news_mentions,mendeley_readers``) and are the reference path;
* HTTP providers issue ``GET {endpoint}/{doi}`` with a bearer token taken
  from ``$ENRICH_API_TOKEN``, rate limited by a token bucket.

Lookups go through a persistent :class:`LookupCache`; misses are cached too,
so a warm cache never reaches the provider.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Mapping, Optional, Protocol, Union

import httpx

from .agreement import AlphaResult
from .corpus import Corpus, RicArticle, is_normalized_doi, normalize_doi
from .errors import AuthError, RateLimitExceeded, RicError, SchemaError, TransportError
from .kvstore import JsonlStore
from .ratelimit import TokenBucket

log = logging.getLogger(__name__)

ENRICH_API_TOKEN_ENV = "ENRICH_API_TOKEN"
DEFAULT_TTL = timedelta(days=30)

Clock = Callable[[], datetime]


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class CitationRecord:
    doi: str
    citations: int
    source: str
    retrieved_at: datetime

    def __post_init__(self) -> None:
        if self.citations < 0:
            raise SchemaError(f"{self.doi}: negative citation count {self.citations}")


@dataclass(frozen=True)
class AltmetricRecord:
    doi: str
    aas: float
    news_mentions: int
    mendeley_readers: int
    source: str
    retrieved_at: datetime

    def __post_init__(self) -> None:
        for name in ("aas", "news_mentions", "mendeley_readers"):
            v = getattr(self, name)
            if v < 0 or (isinstance(v, float) and not math.isfinite(v)):
                raise SchemaError(f"{self.doi}: invalid {name} {v!r}")


Record = Union[CitationRecord, AltmetricRecord]


@dataclass(frozen=True)
class EnrichedArticle:
    article: RicArticle
    mean_k: Optional[float]
    alpha: AlphaResult
    citation: Optional[CitationRecord] = None
    altmetric: Optional[AltmetricRecord] = None
    errors: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mean_k is not None and not 0.0 <= self.mean_k <= 1.0:
            raise ValueError(f"mean_k {self.mean_k} outside [0, 1]")


class CitationProvider(Protocol):
    provider_id: str

    def fetch(self, doi: str) -> Optional[CitationRecord]: ...


class AltmetricProvider(Protocol):
    provider_id: str

    def fetch(self, doi: str) -> Optional[AltmetricRecord]: ...


# --- fixture providers ----------------------------------------------------

def _read_fixture(path: Path, header: tuple[str, ...]) -> list[tuple[int, dict]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != header:
            raise SchemaError(f"{path}: expected header {','.join(header)}, got {reader.fieldnames}")
        return [(lineno, row) for lineno, row in enumerate(reader, start=2)]


def _fixture_doi(raw: str, path: Path, lineno: int) -> str:
    doi = normalize_doi(raw or "")
    if doi is None:
        raise SchemaError(f"{path.name}: {raw!r} is not a DOI", lineno)
    return doi


def _non_negative(raw: str, kind, name: str, path: Path, lineno: int):
    try:
        value = kind(raw)
    except (TypeError, ValueError):
        raise SchemaError(f"{path.name}: {name}={raw!r} is not a number", lineno) from None
    if value < 0 or not math.isfinite(value):
        raise SchemaError(f"{path.name}: {name}={raw!r} must be >= 0", lineno)
    return value


class FixtureCitationProvider:
    def __init__(self, path: str | Path, clock: Clock = utcnow):
        self.path = Path(path)
        self.provider_id = f"fixture-citations:{self.path.name}"
        self._clock = clock
        self._rows: dict[str, int] = {}
        for lineno, row in _read_fixture(self.path, ("doi", "citations")):
            doi = _fixture_doi(row["doi"], self.path, lineno)
            self._rows[doi] = _non_negative(row["citations"], int, "citations", self.path, lineno)

    def __len__(self) -> int:
        return len(self._rows)

    def fetch(self, doi: str) -> Optional[CitationRecord]:
        if doi not in self._rows:
            return None
        return CitationRecord(doi, self._rows[doi], self.provider_id, self._clock())


class FixtureAltmetricProvider:
    def __init__(self, path: str | Path, clock: Clock = utcnow):
        self.path = Path(path)
        self.provider_id = f"fixture-altmetrics:{self.path.name}"
        self._clock = clock
        self._rows: dict[str, tuple[float, int, int]] = {}
        header = ("doi", "aas", "news_mentions", "mendeley_readers")
        for lineno, row in _read_fixture(self.path, header):
            doi = _fixture_doi(row["doi"], self.path, lineno)
            self._rows[doi] = (
                _non_negative(row["aas"], float, "aas", self.path, lineno),
                _non_negative(row["news_mentions"], int, "news_mentions", self.path, lineno),
                _non_negative(row["mendeley_readers"], int, "mendeley_readers", self.path, lineno),
            )

    def __len__(self) -> int:
        return len(self._rows)

    def fetch(self, doi: str) -> Optional[AltmetricRecord]:
        if doi not in self._rows:
            return None
        aas, nm, readers = self._rows[doi]
        return AltmetricRecord(doi, aas, nm, readers, self.provider_id, self._clock())


# --- HTTP providers -------------------------------------------------------

class HttpProvider:
    """``GET {endpoint}/{doi}`` returning one JSON object, 404 for unknown DOIs."""

    kind = "http"

    def __init__(self, endpoint: str, token: str | None = None, *,
                 client: httpx.Client | None = None, bucket: TokenBucket | None = None,
                 attempts: int = 3, backoff: float = 1.0,
                 sleep: Callable[[float], None] = time.sleep, clock: Clock = utcnow):
        token = token if token is not None else os.environ.get(ENRICH_API_TOKEN_ENV)
        if not token:
            raise AuthError(f"HTTP provider needs a token in ${ENRICH_API_TOKEN_ENV}")
        if not endpoint:
            raise AuthError("HTTP provider needs provider.endpoint")
        self.endpoint = endpoint.rstrip("/")
        self.provider_id = f"{self.kind}:{self.endpoint}"
        self._headers = {"Authorization": f"Bearer {token}", "Accept": "application/json"}
        self._client = client or httpx.Client(timeout=30.0)
        self._bucket = bucket or TokenBucket(rate=5.0)
        self._attempts = attempts
        self._backoff = backoff
        self._sleep = sleep
        self._clock = clock

    def _get(self, doi: str) -> Optional[dict]:
        delay = self._backoff
        url = f"{self.endpoint}/{doi}"
        for attempt in range(1, self._attempts + 1):
            self._bucket.acquire()
            try:
                resp = self._client.get(url, headers=self._headers)
            except httpx.HTTPError as exc:
                failure: RicError = TransportError(f"GET {url} failed: {exc}")
            else:
                if resp.status_code == 404:
                    return None
                if resp.status_code in (401, 403):
                    raise AuthError(f"GET {url}: HTTP {resp.status_code}")
                if resp.status_code == 200:
                    try:
                        body = resp.json()
                    except ValueError:
                        body = None
                    if not isinstance(body, dict):
                        raise TransportError(f"GET {url}: response is not a JSON object")
                    return body
                if resp.status_code == 429:
                    failure = RateLimitExceeded(f"GET {url}: rate limited")
                else:
                    failure = TransportError(f"GET {url}: HTTP {resp.status_code}")
            if attempt == self._attempts:
                raise failure
            log.info("retrying %s in %.1fs (%s)", url, delay, failure)
            self._sleep(delay)
            delay *= 2
        raise AssertionError("unreachable")

    @staticmethod
    def _field(body: dict, name: str, kind):
        try:
            value = kind(body[name])
        except (KeyError, TypeError, ValueError):
            raise TransportError(f"response lacks numeric field {name!r}") from None
        return value


class HttpCitationProvider(HttpProvider):
    kind = "http-citations"

    def fetch(self, doi: str) -> Optional[CitationRecord]:
        body = self._get(doi)
        if body is None:
            return None
        return CitationRecord(doi, self._field(body, "citations", int), self.provider_id,
                              self._clock())


class HttpAltmetricProvider(HttpProvider):
    kind = "http-altmetrics"

    def fetch(self, doi: str) -> Optional[AltmetricRecord]:
        body = self._get(doi)
        if body is None:
            return None
        return AltmetricRecord(doi, self._field(body, "aas", float),
                               self._field(body, "news_mentions", int),
                               self._field(body, "mendeley_readers", int),
                               self.provider_id, self._clock())


# --- cache ----------------------------------------------------------------

def _record_to_json(record: Optional[Record]) -> Optional[dict]:
    if record is None:
        return None
    out = asdict(record)
    out["retrieved_at"] = record.retrieved_at.isoformat()
    out["type"] = "citation" if isinstance(record, CitationRecord) else "altmetric"
    return out


def _record_from_json(data: Optional[dict]) -> Optional[Record]:
    if data is None:
        return None
    data = dict(data)
    kind = data.pop("type")
    data["retrieved_at"] = datetime.fromisoformat(data["retrieved_at"])
    return CitationRecord(**data) if kind == "citation" else AltmetricRecord(**data)


class LookupCache:
    """Persistent (provider, DOI) -> record cache with a time-to-live."""

    def __init__(self, path: str | Path | None = None, ttl: timedelta = DEFAULT_TTL,
                 clock: Clock = utcnow):
        self._store = JsonlStore(path)
        self.ttl = ttl
        self._clock = clock

    def get(self, provider_id: str, doi: str) -> tuple[bool, Optional[Record]]:
        hit = self._store.get(f"{provider_id}|{doi}")
        if hit is None:
            return False, None
        if self._clock() - datetime.fromisoformat(hit["cached_at"]) > self.ttl:
            return False, None
        return True, _record_from_json(hit["record"])

    def put(self, provider_id: str, doi: str, record: Optional[Record]) -> None:
        self._store.put(f"{provider_id}|{doi}",
                        {"cached_at": self._clock().isoformat(), "record": _record_to_json(record)})


def _lookup(provider, doi: str, cache: Optional[LookupCache]):
    if not is_normalized_doi(doi):
        raise ValueError(f"{doi!r} is not a normalized DOI")
    if cache is not None:
        hit, record = cache.get(provider.provider_id, doi)
        if hit:
            return record
    record = provider.fetch(doi)
    if cache is not None:
        cache.put(provider.provider_id, doi, record)
    return record


def lookup_citations(provider: CitationProvider, doi: str,
                     cache: LookupCache | None = None) -> Optional[CitationRecord]:
    return _lookup(provider, doi, cache)


def lookup_altmetrics(provider: AltmetricProvider, doi: str,
                      cache: LookupCache | None = None) -> Optional[AltmetricRecord]:
    return _lookup(provider, doi, cache)


EMPTY_ALPHA = AlphaResult(None, None, None, 0, 0, "interval")


def enrich(corpus: Corpus, mean_ks: Mapping[str, Optional[float]],
           alphas: Mapping[str, AlphaResult],
           citation_provider: CitationProvider | None = None,
           altmetric_provider: AltmetricProvider | None = None, *,
           cache: LookupCache | None = None, concurrency: int = 4) -> list[EnrichedArticle]:
    """Join scores, agreement and impact indicators per article.

    At most ``concurrency`` articles are looked up at once. A failed lookup is
    recorded in ``errors`` of that article only.
    """
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")

    def one(article: RicArticle) -> EnrichedArticle:
        citation = altmetric = None
        errors: list[str] = []
        if article.doi is not None:
            if citation_provider is not None:
                try:
                    citation = lookup_citations(citation_provider, article.doi, cache)
                except RicError as exc:
                    errors.append(f"citations: {type(exc).__name__}: {exc}")
            if altmetric_provider is not None:
                try:
                    altmetric = lookup_altmetrics(altmetric_provider, article.doi, cache)
                except RicError as exc:
                    errors.append(f"altmetrics: {type(exc).__name__}: {exc}")
        return EnrichedArticle(article=article, mean_k=mean_ks.get(article.article_id),
                               alpha=alphas.get(article.article_id, EMPTY_ALPHA),
                               citation=citation, altmetric=altmetric, errors=tuple(errors))

    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(one, corpus.articles))
