"""Per-tier caches: exact prompt cache and semantic vector cache.

Both are LRU over a bounded number of entries. The prompt cache is keyed by
a 64-bit hash of the canonical prompt; the vector cache is keyed the same
way but looked up by cosine similarity of the query embedding against the
stored vectors (hit when the nearest one clears the threshold). Entries
store only the response size in tokens, which is all the simulator needs.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .ann import AnnResult, ExactIndex, GraphIndex, make_index


@dataclass
class CacheEntry:
    """One cached response: identity, size and access bookkeeping."""

    key: int
    payload_tokens: int
    inserted_at_ms: float
    last_access_ms: float
    hit_count: int = 0
    embedding: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.payload_tokens < 0:
            raise ValueError("payload_tokens must be >= 0")
        if self.last_access_ms < self.inserted_at_ms:
            raise ValueError("last_access_ms must be >= inserted_at_ms")


class PromptCache:
    """Exact-match LRU cache over prompt hashes."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self._entries: "OrderedDict[int, CacheEntry]" = OrderedDict()
        self.lookups = 0
        self.hits = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: int) -> bool:
        return key in self._entries

    def entries(self) -> Iterable[CacheEntry]:
        return self._entries.values()

    def lookup(self, key: int, now_ms: float) -> Optional[CacheEntry]:
        """Hit iff the key is present; a hit refreshes recency and hit count."""
        self.lookups += 1
        entry = self._entries.get(key)
        if entry is None:
            return None
        entry.last_access_ms = now_ms
        entry.hit_count += 1
        self._entries.move_to_end(key)
        self.hits += 1
        return entry

    def insert(self, key: int, payload_tokens: int, now_ms: float) -> Optional[CacheEntry]:
        """Store an entry; returns the evicted entry when capacity overflows."""
        if self.capacity == 0:
            return None
        if key in self._entries:
            entry = self._entries[key]
            entry.payload_tokens = payload_tokens
            entry.last_access_ms = now_ms
            self._entries.move_to_end(key)
            return None
        self._entries[key] = CacheEntry(
            key=key, payload_tokens=payload_tokens, inserted_at_ms=now_ms, last_access_ms=now_ms
        )
        if len(self._entries) > self.capacity:
            _, evicted = self._entries.popitem(last=False)
            return evicted
        return None


class VectorCache:
    """Semantic LRU cache: nearest-neighbour lookup with a similarity threshold."""

    def __init__(
        self,
        capacity: int,
        dim: int,
        similarity_threshold: float,
        ann_mode: str = "exact",
        ann_m: int = 16,
        ann_ef: int = 64,
        rng: Optional[np.random.Generator] = None,
    ):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        if not -1.0 <= similarity_threshold <= 1.0:
            raise ValueError(
                f"similarity_threshold must be within [-1, 1], got {similarity_threshold}"
            )
        self.capacity = capacity
        self.dim = dim
        self.similarity_threshold = similarity_threshold
        self.index = make_index(ann_mode, dim, m=ann_m, ef=ann_ef, rng=rng)
        self._entries: "OrderedDict[int, CacheEntry]" = OrderedDict()
        self.lookups = 0
        self.hits = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: int) -> bool:
        return key in self._entries

    def entries(self) -> Iterable[CacheEntry]:
        return self._entries.values()

    def semantic_lookup(
        self, query: np.ndarray, now_ms: float, threshold: Optional[float] = None
    ) -> Optional[Tuple[CacheEntry, float]]:
        """Find the nearest stored vector; hit iff its cosine clears the
        threshold. Hits refresh recency and hit count; misses mutate nothing."""
        if np.asarray(query).shape[0] != self.dim:
            raise ValueError(f"query dimension {np.asarray(query).shape[0]} != cache dimension {self.dim}")
        tau = self.similarity_threshold if threshold is None else threshold
        self.lookups += 1
        found = self.index.nearest(query) if len(self._entries) else None
        if found is None:
            return None
        key, sim = found
        if sim < tau:
            return None
        entry = self._entries[key]
        entry.last_access_ms = now_ms
        entry.hit_count += 1
        self._entries.move_to_end(key)
        self.hits += 1
        return entry, sim

    def ann_query(self, query: np.ndarray, k: int) -> AnnResult:
        """Top-k (entry id, similarity), best first; k beyond the entry count
        returns everything ranked."""
        return self.index.query(query, k)

    def insert(
        self, key: int, embedding: np.ndarray, payload_tokens: int, now_ms: float
    ) -> Optional[CacheEntry]:
        """Store an embedding entry; returns the LRU entry evicted, if any."""
        if self.capacity == 0:
            return None
        if key in self._entries:
            entry = self._entries[key]
            entry.payload_tokens = payload_tokens
            entry.last_access_ms = now_ms
            self._entries.move_to_end(key)
            return None
        vec = np.asarray(embedding, dtype=np.float64)
        self.index.add(key, vec)
        self._entries[key] = CacheEntry(
            key=key,
            payload_tokens=payload_tokens,
            inserted_at_ms=now_ms,
            last_access_ms=now_ms,
            embedding=vec,
        )
        if len(self._entries) > self.capacity:
            evicted_key, evicted = self._entries.popitem(last=False)
            self.index.remove(evicted_key)
            return evicted
        return None


def top_entries_by_hits(cache, top_n: int) -> List[CacheEntry]:
    """Most-hit entries of a cache, ties broken by key for determinism."""
    return sorted(cache.entries(), key=lambda e: (-e.hit_count, e.key))[:top_n]


def sync_from_parent(child, parent, top_n: int, now_ms: float) -> int:
    """Copy the parent's ``top_n`` most-hit entries into the child.

    Entries the child already holds are left untouched, so repeating a sync
    is a no-op; copies start with fresh access bookkeeping and respect the
    child's capacity (the child may evict to make room). Returns the number
    of entries actually written.
    """
    copied = 0
    for entry in top_entries_by_hits(parent, top_n):
        if entry.key in child:
            continue
        if isinstance(child, VectorCache):
            if entry.embedding is None:
                continue
            child.insert(entry.key, entry.embedding, entry.payload_tokens, now_ms)
        else:
            child.insert(entry.key, entry.payload_tokens, now_ms)
        copied += 1
    return copied


def dump_cache_entries(caches: List[Tuple[str, str, object]], path: str) -> None:
    """Write cache contents as tab-separated lines: tier, kind, entry id,
    hit count, insertion timestamp."""
    with open(path, "w", encoding="utf-8") as fh:
        for tier_label, kind, cache in caches:
            for entry in cache.entries():
                fh.write(
                    f"{tier_label}\t{kind}\t{entry.key}\t{entry.hit_count}\t{entry.inserted_at_ms!r}\n"
                )
