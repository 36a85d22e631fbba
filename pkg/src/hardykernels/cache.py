"""Append-only on-disk cache of expensive evaluations.

Each record is one line

    <length:8 digits> <crc32:8 hex> <json payload>\\n

where the length and checksum refer to the UTF-8 payload.  Writers append
whole records under an exclusive advisory lock, so concurrent processes
never interleave bytes.  Records failing the framing or checksum test are
skipped with a warning.
"""
from __future__ import annotations

import fcntl
import json
import os
import warnings
import zlib
from dataclasses import dataclass
from pathlib import Path

from ._version import __version__


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def frame(payload: dict) -> bytes:
    body = canonical(payload).encode()
    return b"%08d %08x " % (len(body), zlib.crc32(body)) + body + b"\n"


def parse(line: bytes):
    """Payload of a framed record, or None if the record is damaged."""
    if len(line) < 19 or line[8:9] != b" " or line[17:18] != b" ":
        return None
    try:
        n = int(line[:8])
        crc = int(line[9:17], 16)
    except ValueError:
        return None
    body = line[18:]
    if len(body) != n or zlib.crc32(body) != crc:
        return None
    try:
        return json.loads(body)
    except ValueError:
        return None


@dataclass(frozen=True)
class CacheStats:
    path: str
    records: int
    corrupt: int
    size_bytes: int
    kinds: dict


class EvalCache:
    """Records map a canonical key to a value together with the budget it was
    computed under.  A lookup succeeds only if the cached budget is at least
    as strict as the requested one."""

    def __init__(self, path):
        self.path = Path(path)
        self._index = {}
        self._corrupt = 0
        self._load()

    def _load(self):
        self._index.clear()
        self._corrupt = 0
        if not self.path.exists():
            return
        with open(self.path, "rb") as f:
            fcntl.flock(f, fcntl.LOCK_SH)
            try:
                data = f.read()
            finally:
                fcntl.flock(f, fcntl.LOCK_UN)
        for line in data.split(b"\n"):
            if not line:
                continue
            rec = parse(line)
            if rec is None or "key" not in rec or "value" not in rec:
                self._corrupt += 1
                continue
            self._index.setdefault(canonical(rec["key"]), []).append(rec)
        if self._corrupt:
            warnings.warn(f"skipped {self._corrupt} damaged cache records in {self.path}", stacklevel=2)

    @staticmethod
    def _compatible(cached: dict, requested: dict) -> bool:
        return all(cached.get(k, float("inf")) <= v for k, v in requested.items())

    def get(self, key: dict, budget: dict):
        for rec in reversed(self._index.get(canonical(key), [])):
            if rec.get("version") == __version__ and self._compatible(rec.get("budget", {}), budget):
                return rec["value"]
        return None

    def put(self, key: dict, value, budget: dict):
        rec = {"key": key, "value": value, "budget": budget, "version": __version__}
        data = frame(rec)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX)
            try:
                os.write(fd, data)
            finally:
                fcntl.flock(fd, fcntl.LOCK_UN)
        finally:
            os.close(fd)
        self._index.setdefault(canonical(key), []).append(json.loads(data[18:]))

    def stats(self) -> CacheStats:
        self._load()
        kinds = {}
        n = 0
        for recs in self._index.values():
            for rec in recs:
                n += 1
                k = rec["key"].get("kind", "?") if isinstance(rec["key"], dict) else "?"
                kinds[k] = kinds.get(k, 0) + 1
        size = self.path.stat().st_size if self.path.exists() else 0
        return CacheStats(str(self.path), n, self._corrupt, size, dict(sorted(kinds.items())))

    def clear(self):
        if self.path.exists():
            with open(self.path, "r+b") as f:
                fcntl.flock(f, fcntl.LOCK_EX)
                try:
                    f.truncate(0)
                finally:
                    fcntl.flock(f, fcntl.LOCK_UN)
        self._index.clear()
        self._corrupt = 0
