"""Pipeline configuration, read from an INI file.

Relative paths are resolved against the directory of the config file. See
``data/sample/pipeline.ini`` for every key.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError


@dataclass(frozen=True)
class PathsConfig:
    corpus: str = "corpus.jsonl"
    scores: str = "work/scores.jsonl"
    cache: str = "work/cache"
    citations: Optional[str] = None
    altmetrics: Optional[str] = None
    out: str = "report"
    html_dir: Optional[str] = None
    extraction: Optional[str] = None


@dataclass(frozen=True)
class ScorerConfig:
    kind: str = "mock"
    model: str = "gpt-4o-mini"
    endpoint: str = ""
    runs: int = 1
    concurrency: int = 4
    retries: int = 3
    backoff: float = 1.0
    temperature: float = 0.0
    seed: int = 0
    min_statement_chars: int = 20


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "fixture"
    endpoint: str = ""
    concurrency: int = 4
    rate: float = 5.0
    ttl_days: float = 30.0


@dataclass(frozen=True)
class ReportConfig:
    metric: str = "interval"
    run: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    paths: PathsConfig = PathsConfig()
    scorer: ScorerConfig = ScorerConfig()
    provider: ProviderConfig = ProviderConfig()
    report: ReportConfig = ReportConfig()
    base_dir: Path = field(default=Path("."), compare=False)

    def path(self, name: str) -> Optional[Path]:
        raw = getattr(self.paths, name)
        if raw is None:
            return None
        p = Path(raw).expanduser()
        return p if p.is_absolute() else (self.base_dir / p)

    def replace(self, section: str, **changes) -> "PipelineConfig":
        updated = dataclasses.replace(getattr(self, section), **changes)
        return dataclasses.replace(self, **{section: updated})

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def validate(self) -> "PipelineConfig":
        s, p = self.scorer, self.provider
        if s.runs < 1:
            raise ConfigError("scorer.runs must be >= 1")
        if s.concurrency < 1 or p.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if s.retries < 0:
            raise ConfigError("scorer.retries must be >= 0")
        if s.kind not in ("mock", "remote"):
            raise ConfigError(f"scorer.kind must be mock or remote, not {s.kind!r}")
        if p.kind not in ("fixture", "http", "none"):
            raise ConfigError(f"provider.kind must be fixture, http or none, not {p.kind!r}")
        if p.rate <= 0 or p.ttl_days < 0:
            raise ConfigError("provider.rate must be > 0 and provider.ttl_days >= 0")
        if self.report.metric not in ("interval", "nominal"):
            raise ConfigError(f"report.metric must be interval or nominal, not {self.report.metric!r}")
        if not 0 <= self.report.run < s.runs:
            raise ConfigError(f"report.run must lie in [0, {s.runs})")
        if p.kind == "fixture":
            for name in ("citations", "altmetrics"):
                fixture = self.path(name)
                if fixture is not None and not fixture.is_file():
                    raise ConfigError(f"paths.{name}: {fixture} does not exist")
        return self


def _coerce(section: str, key: str, raw: str, default):
    kind = type(default) if default is not None else str
    try:
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if kind in (int, float):
            return kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: {raw!r} is not a valid {kind.__name__}") from None
    return raw.strip() or None if default is None else raw.strip()


def _section(parser: configparser.ConfigParser, name: str, cls):
    if not parser.has_section(name):
        return cls()
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    values = {}
    for key, raw in parser[name].items():
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        values[key] = _coerce(name, key, raw, getattr(defaults, key))
    return cls(**values)


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with path.open(encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = set(parser.sections()) - {"paths", "scorer", "provider", "report"}
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    return PipelineConfig(
        paths=_section(parser, "paths", PathsConfig),
        scorer=_section(parser, "scorer", ScorerConfig),
        provider=_section(parser, "provider", ProviderConfig),
        report=_section(parser, "report", ReportConfig),
        base_dir=path.parent.resolve(),
    )
