"""Canonical JSON encoding and the byte-budget response cache."""

from __future__ import annotations

import json
import threading

import numpy as np
import pytest

from runlens import ValidationError, cache_key, canonical_bytes, parameter_hash, sanitize
from runlens.cache import AnalysisCache


# ---------------------------------------------------------------------------
# sanitize / canonical bytes
# ---------------------------------------------------------------------------

def test_sanitize_unwraps_numpy_types():
    doc = sanitize({
        "i": np.int64(3),
        "f": np.float32(0.5),
        "flag": np.bool_(True),
        "arr": np.array([[1.0, 2.0], [3.0, 4.0]]),
        "t": (1, 2, 3),
    })
    assert doc == {"i": 3, "f": 0.5, "flag": True,
                   "arr": [[1.0, 2.0], [3.0, 4.0]], "t": [1, 2, 3]}
    assert isinstance(doc["i"], int)
    assert isinstance(doc["flag"], bool)
    assert isinstance(doc["arr"], list)


def test_sanitize_maps_non_finite_to_null():
    assert sanitize({"a": float("nan"), "b": float("inf"), "c": -float("inf")}) \
        == {"a": None, "b": None, "c": None}
    assert sanitize(np.array([1.0, np.nan]))[1] is None


def test_sanitize_rejects_foreign_objects():
    with pytest.raises(ValidationError):
        sanitize({"x": object()})
    with pytest.raises(ValidationError):
        sanitize({"x": {1, 2}})


def test_canonical_bytes_are_compact_and_sorted():
    payload = canonical_bytes({"b": 1, "a": [1, 2], "c": {"z": 0, "y": 1}})
    assert payload == b'{"a":[1,2],"b":1,"c":{"y":1,"z":0}}'
    # key order in the input never shows through
    assert payload == canonical_bytes({"c": {"y": 1, "z": 0}, "a": (1, 2), "b": 1})
    assert json.loads(payload) == {"a": [1, 2], "b": 1, "c": {"y": 1, "z": 0}}


def test_parameter_hash_is_order_insensitive_and_stable():
    h1 = parameter_hash({"at": 2.0, "candidate": "a"})
    h2 = parameter_hash({"candidate": "a", "at": 2.0})
    assert h1 == h2
    assert len(h1) == 64 and all(c in "0123456789abcdef" for c in h1)
    assert parameter_hash({"at": 2.5, "candidate": "a"}) != h1


def test_cache_key_keeps_run_and_operation_in_the_clear():
    key = cache_key("run-7", "coverage", at=1.5)
    assert key.startswith("run-7/coverage/")
    assert key.split("/")[2] == parameter_hash({"at": 1.5})
    # coordinate order is irrelevant
    assert cache_key("r", "op", a=1, b=2) == cache_key("r", "op", b=2, a=1)


# ---------------------------------------------------------------------------
# the cache itself
# ---------------------------------------------------------------------------

def test_cache_hit_returns_the_original_bytes():
    cache = AnalysisCache(max_bytes=1024)
    cache.put("k", b"payload")
    assert cache.get("k") == b"payload"
    assert cache.hits == 1 and cache.misses == 0
    assert cache.get("other") is None
    assert cache.misses == 1


def test_lru_eviction_respects_the_byte_budget():
    cache = AnalysisCache(max_bytes=10)
    cache.put("a", b"aaaa")
    cache.put("b", b"bbbb")
    cache.get("a")  # refresh a so b is the eviction candidate
    cache.put("c", b"cccc")
    assert cache.get("a") == b"aaaa"
    assert cache.get("b") is None
    assert cache.get("c") == b"cccc"
    assert cache.size_bytes <= 10


def test_oversized_payload_bypasses_the_cache():
    cache = AnalysisCache(max_bytes=4)
    cache.put("big", b"too large to store")
    assert len(cache) == 0 and cache.size_bytes == 0
    # but get_or_compute still returns it to the caller
    out = cache.get_or_compute("big", lambda: b"too large to store")
    assert out == b"too large to store"
    assert len(cache) == 0


def test_replacing_a_key_updates_accounting():
    cache = AnalysisCache(max_bytes=100)
    cache.put("k", b"xxxxxxxxxx")
    assert cache.size_bytes == 10
    cache.put("k", b"yy")
    assert cache.size_bytes == 2
    assert cache.get("k") == b"yy"
    assert len(cache) == 1


def test_get_or_compute_runs_once_per_key():
    cache = AnalysisCache(max_bytes=1024)
    calls = []

    def compute() -> bytes:
        calls.append(1)
        return b"result"

    assert cache.get_or_compute("k", compute) == b"result"
    assert cache.get_or_compute("k", compute) == b"result"
    assert len(calls) == 1
    assert cache.hits == 1


def test_concurrent_requests_for_one_key_compute_once():
    cache = AnalysisCache(max_bytes=1 << 20)
    started = threading.Barrier(8)
    calls = []
    lock = threading.Lock()

    def compute() -> bytes:
        with lock:
            calls.append(1)
        return b"shared"

    results = []

    def worker():
        started.wait()
        results.append(cache.get_or_compute("k", compute))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [b"shared"] * 8
    assert len(calls) == 1


def test_failed_compute_releases_the_gate():
    cache = AnalysisCache(max_bytes=1024)

    def boom() -> bytes:
        raise RuntimeError("compute failed")

    with pytest.raises(RuntimeError):
        cache.get_or_compute("k", boom)
    # the key is not poisoned: a later compute succeeds
    assert cache.get_or_compute("k", lambda: b"ok") == b"ok"


def test_invalidate_by_prefix_and_wholesale():
    cache = AnalysisCache(max_bytes=1024)
    cache.put("run-1/coverage/abc", b"1")
    cache.put("run-1/merge/def", b"2")
    cache.put("run-2/coverage/ghi", b"3")
    cache.invalidate("run-1/")
    assert cache.get("run-1/coverage/abc") is None
    assert cache.get("run-1/merge/def") is None
    assert cache.get("run-2/coverage/ghi") == b"3"
    cache.invalidate()
    assert len(cache) == 0 and cache.size_bytes == 0


def test_budget_must_be_non_negative():
    with pytest.raises(ValueError):
        AnalysisCache(max_bytes=-1)
