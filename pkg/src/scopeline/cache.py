"""LRU + TTL cache for post-processed suggestions.

Keys are exact: fingerprints of the window-limited prefix and suffix,
the decision kind, and the generation-parameter fingerprint.  Keying on
the window rather than the whole file keeps typing far below the window
from thrashing the cache.
"""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

from .backend import FimPrompt, make_fingerprint
from .trigger import GenerationParams, TriggerKind

CacheKey = tuple[str, str, str, str]

DEFAULT_MAX_ENTRIES = 512
DEFAULT_TTL_S = 300.0


def make_cache_key(prompt: FimPrompt, kind: TriggerKind, params: GenerationParams) -> CacheKey:
    return (
        make_fingerprint(prompt.prefix),
        make_fingerprint(prompt.suffix),
        kind.value,
        params.fingerprint(),
    )


@dataclass
class CacheEntry:
    text: str
    created_at: float
    hit_count: int = 0


class SuggestionCache:
    def __init__(
        self,
        max_entries: int = DEFAULT_MAX_ENTRIES,
        ttl_s: float = DEFAULT_TTL_S,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        if max_entries < 1:
            raise ValueError("max_entries must be >= 1")
        self._store: OrderedDict[CacheKey, CacheEntry] = OrderedDict()
        self._max = max_entries
        self._ttl = ttl_s
        self._clock = clock

    def __len__(self) -> int:
        return len(self._store)

    def get(self, key: CacheKey) -> str | None:
        entry = self._store.get(key)
        if entry is None:
            return None
        if self._clock() - entry.created_at > self._ttl:
            del self._store[key]
            return None
        entry.hit_count += 1
        self._store.move_to_end(key)
        return entry.text

    def put(self, key: CacheKey, text: str) -> None:
        self._store[key] = CacheEntry(text, self._clock())
        self._store.move_to_end(key)
        while len(self._store) > self._max:
            self._store.popitem(last=False)

    def invalidate_all(self) -> None:
        self._store.clear()
