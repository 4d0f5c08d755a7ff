"""The lift cache: env override, atomic writes, corruption recovery."""

import json
import os
from fractions import Fraction

import pytest

from starkheegner.cache import (
    CACHE_ENV,
    cache_dir,
    cached_moment_lift,
    load_entry,
    store_entry,
)


@pytest.fixture
def tmp_cache(tmp_path, monkeypatch):
    path = tmp_path / "cache"
    monkeypatch.setenv(CACHE_ENV, str(path))
    return path


def test_env_override_and_default(tmp_cache, monkeypatch):
    assert cache_dir() == tmp_cache
    monkeypatch.delenv(CACHE_ENV)
    assert cache_dir().name == ".shp-cache"


def test_store_and_load_round_trip(tmp_cache):
    parts = {"kind": "demo", "x": "1"}
    assert load_entry(parts) is None
    store_entry(parts, {"y": ["2", "3"]})
    assert load_entry(parts) == {"y": ["2", "3"]}
    # a different key is a miss
    assert load_entry({"kind": "demo", "x": "2"}) is None
    # no stray temp files survive a successful write
    assert all(name.endswith(".json") for name in os.listdir(tmp_cache))


def test_lift_round_trip_preserves_all_queries(tmp_cache):
    cold = cached_moment_lift("11a", 11, 6)
    assert cold.iterations > 0
    warm = cached_moment_lift("11a", 11, 6)
    assert warm.iterations == 0  # restored, not recomputed
    assert warm.vectors == cold.vectors
    path = (Fraction(0), None)
    assert warm.path_moments(*path) == cold.path_moments(*path)
    for b in (0, 3, 7):
        assert warm.ball_moments(b, 1, *path) == cold.ball_moments(b, 1, *path)


def test_unreadable_entry_is_recomputed_and_rewritten(tmp_cache):
    cold = cached_moment_lift("11a", 11, 6)
    (entry,) = list(tmp_cache.iterdir())
    entry.write_text("{definitely not json", encoding="utf-8")
    again = cached_moment_lift("11a", 11, 6)
    assert again.iterations > 0
    assert again.vectors == cold.vectors
    # the rewritten entry is good again
    warm = cached_moment_lift("11a", 11, 6)
    assert warm.iterations == 0


def test_inconsistent_payload_is_not_trusted(tmp_cache):
    cold = cached_moment_lift("11a", 11, 6)
    (entry,) = list(tmp_cache.iterdir())
    doc = json.loads(entry.read_text(encoding="utf-8"))
    row = [int(x) for x in doc["payload"]["vectors"][0]]
    row[0] += 1  # breaks the zeroth-moment sanity check
    doc["payload"]["vectors"][0] = [str(x) for x in row]
    entry.write_text(json.dumps(doc), encoding="utf-8")
    again = cached_moment_lift("11a", 11, 6)
    assert again.iterations > 0
    assert again.vectors == cold.vectors


def test_key_separates_instances(tmp_cache):
    cached_moment_lift("11a", 11, 4)
    cached_moment_lift("11a", 11, 6)
    assert len(list(tmp_cache.iterdir())) == 2
