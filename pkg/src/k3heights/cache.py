"""Content-addressed cache of orbit prefixes.

Keyed by surface hash, starting point and word prefix; values are the exact
coordinates after applying the prefix.  A memory layer is always active;
an optional directory adds persistence across processes with atomic writes
(temp file + rename).  Entries above max_prefix letters or max_entry_bytes
of serialized coordinates are not stored, so deep orbit tails are always
recomputed.  Because cached states are exact, replaying a cached prefix is
indistinguishable from stepping it: results never depend on cache state.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from typing import Optional, Sequence

from ._ints import as_int

DEFAULT_MAX_PREFIX = 32
DEFAULT_MAX_ENTRY_BYTES = 1 << 20


class OrbitCache:
    def __init__(
        self,
        surface_hash: str,
        cache_dir: Optional[str] = None,
        max_prefix: int = DEFAULT_MAX_PREFIX,
        max_entry_bytes: int = DEFAULT_MAX_ENTRY_BYTES,
    ):
        self.surface_hash = surface_hash
        self.cache_dir = cache_dir
        self.max_prefix = max_prefix
        self.max_entry_bytes = max_entry_bytes
        self.mem: dict = {}
        self.hits = 0
        self.misses = 0
        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)

    def _disk_path(self, point_key: str, letters: Sequence[int]) -> str:
        word = ",".join(str(l) for l in letters)
        digest = hashlib.sha256(
            f"{self.surface_hash}|{point_key}|{word}".encode()
        ).hexdigest()
        return os.path.join(self.cache_dir, digest + ".json")

    def prefix_states(self, point_key: str, letters: Sequence[int]) -> list:
        """States for prefixes 1..d of `letters`, longest contiguous run held."""
        out = []
        limit = min(len(letters), self.max_prefix)
        for n in range(1, limit + 1):
            key = (point_key, tuple(letters[:n]))
            state = self.mem.get(key)
            if state is None and self.cache_dir:
                state = self._load(point_key, letters[:n])
                if state is not None:
                    self.mem[key] = state
            if state is None:
                self.misses += 1
                break
            self.hits += 1
            out.append(state)
        return out

    def store(self, point_key: str, letters: Sequence[int], state: Sequence) -> None:
        if len(letters) > self.max_prefix:
            return
        key = (point_key, tuple(letters))
        if key in self.mem:
            return
        state = tuple(state)
        self.mem[key] = state
        if self.cache_dir:
            self._dump(point_key, letters, state)

    def _load(self, point_key: str, letters: Sequence[int]):
        path = self._disk_path(point_key, letters)
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, ValueError):
            return None
        try:
            return tuple(as_int(int(s, 16)) for s in data["coords"])
        except (KeyError, ValueError, TypeError):
            return None

    def _dump(self, point_key: str, letters: Sequence[int], state: Sequence) -> None:
        coords = [format(int(x), "x") for x in state]
        if sum(len(s) for s in coords) > self.max_entry_bytes:
            return
        path = self._disk_path(point_key, letters)
        if os.path.exists(path):
            return
        payload = json.dumps({"coords": coords})
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except OSError:
            try:
                os.unlink(tmp)
            except OSError:
                pass
