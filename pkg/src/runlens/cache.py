"""Byte-budget LRU cache for rendered analysis responses.

The cache stores the exact bytes a request produced, keyed by a digest of the
request coordinates.  Repeated requests are served from memory and are
byte-identical to the first response.  A per-key lock makes concurrent
requests for the same key compute once; distinct keys never block each other.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Any, Callable, Dict

from .serialize import parameter_hash

DEFAULT_CACHE_BYTES = 64 * 1024 * 1024


def cache_key(run_id: str, operation: str, **coordinates: Any) -> str:
    # Run id and operation stay in the clear so a whole run (or one
    # operation family) can be invalidated by prefix.
    return f"{run_id}/{operation}/{parameter_hash(coordinates)}"


class AnalysisCache:
    """LRU over response payloads with a total byte budget."""

    def __init__(self, max_bytes: int = DEFAULT_CACHE_BYTES):
        if max_bytes < 0:
            raise ValueError("cache budget must be non-negative")
        self.max_bytes = max_bytes
        self._entries: "OrderedDict[str, bytes]" = OrderedDict()
        self._size = 0
        self._lock = threading.Lock()
        self._in_flight: Dict[str, threading.Lock] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    @property
    def size_bytes(self) -> int:
        with self._lock:
            return self._size

    def get(self, key: str) -> "bytes | None":
        with self._lock:
            payload = self._entries.get(key)
            if payload is None:
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return payload

    def put(self, key: str, payload: bytes) -> None:
        with self._lock:
            old = self._entries.pop(key, None)
            if old is not None:
                self._size -= len(old)
            # An oversized payload is still returned to the caller, it just
            # never enters the cache.
            if len(payload) > self.max_bytes:
                return
            self._entries[key] = payload
            self._size += len(payload)
            while self._size > self.max_bytes:
                _, evicted = self._entries.popitem(last=False)
                self._size -= len(evicted)

    def get_or_compute(self, key: str, compute: Callable[[], bytes]) -> bytes:
        payload = self.get(key)
        if payload is not None:
            return payload
        with self._lock:
            gate = self._in_flight.setdefault(key, threading.Lock())
        with gate:
            # A racing thread may have filled the entry while we waited.
            with self._lock:
                payload = self._entries.get(key)
                if payload is not None:
                    self._entries.move_to_end(key)
                    self.hits += 1
                    return payload
            try:
                payload = compute()
                if not isinstance(payload, bytes):
                    raise TypeError("compute() must return bytes")
                self.put(key, payload)
            finally:
                with self._lock:
                    self._in_flight.pop(key, None)
            return payload

    def invalidate(self, prefix_key: "str | None" = None) -> None:
        with self._lock:
            if prefix_key is None:
                self._entries.clear()
                self._size = 0
                return
            stale = [k for k in self._entries if k.startswith(prefix_key)]
            for k in stale:
                self._size -= len(self._entries.pop(k))
