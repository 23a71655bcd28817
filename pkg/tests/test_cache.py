"""Suggestion cache: exact keys, TTL, LRU."""

from __future__ import annotations

from scopeline import FimPrompt, GenerationParams, LanguageFamily, TriggerKind
from scopeline.cache import SuggestionCache, make_cache_key


class FakeClock:
    def __init__(self) -> None:
        self.t = 0.0

    def __call__(self) -> float:
        return self.t


def key_for(prefix: str, suffix: str = "", kind=TriggerKind.MULTI_LINE,
            max_tokens: int = 120):
    prompt = FimPrompt(prefix, suffix, LanguageFamily.INDENT, True)
    return make_cache_key(prompt, kind, GenerationParams(max_tokens, False))


def test_exact_key_hit_and_miss():
    cache = SuggestionCache()
    cache.put(key_for("abc"), "result")
    assert cache.get(key_for("abc")) == "result"
    assert cache.get(key_for("abd")) is None
    assert cache.get(key_for("abc", suffix="x")) is None
    assert cache.get(key_for("abc", kind=TriggerKind.SINGLE_LINE)) is None
    assert cache.get(key_for("abc", max_tokens=64)) is None


def test_ttl_expiry():
    clock = FakeClock()
    cache = SuggestionCache(ttl_s=300.0, clock=clock)
    cache.put(key_for("a"), "v")
    clock.t = 299.0
    assert cache.get(key_for("a")) == "v"
    clock.t = 301.0
    assert cache.get(key_for("a")) is None
    assert len(cache) == 0


def test_lru_eviction():
    cache = SuggestionCache(max_entries=2)
    cache.put(key_for("a"), "1")
    cache.put(key_for("b"), "2")
    assert cache.get(key_for("a")) == "1"  # refresh a
    cache.put(key_for("c"), "3")  # evicts b
    assert cache.get(key_for("b")) is None
    assert cache.get(key_for("a")) == "1"
    assert cache.get(key_for("c")) == "3"


def test_hit_count_tracked():
    cache = SuggestionCache()
    key = key_for("a")
    cache.put(key, "v")
    cache.get(key)
    cache.get(key)
    assert cache._store[key].hit_count == 2


def test_invalidate_all():
    cache = SuggestionCache()
    cache.put(key_for("a"), "v")
    cache.invalidate_all()
    assert cache.get(key_for("a")) is None
