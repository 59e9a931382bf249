"""Append-only JSON-lines key-value store used for the score and lookup caches.

Each ``put`` appends one ``{"key": ..., "value": ...}`` line and flushes it;
on open the file is replayed and the last line for a key wins. A truncated
final line (crash mid-write) is ignored. Reads are served from memory and
need no lock; writes are serialized.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Optional


class JsonlStore:
    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._data: dict[str, Any] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue
                if isinstance(rec, dict) and "key" in rec:
                    self._data[rec["key"]] = rec.get("value")

    def get(self, key: str) -> Optional[Any]:
        return self._data.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def put(self, key: str, value: Any) -> None:
        line = json.dumps({"key": key, "value": value}, sort_keys=True, ensure_ascii=False)
        with self._lock:
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            self._data[key] = value
