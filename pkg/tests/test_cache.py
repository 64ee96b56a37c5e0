import numpy as np
import pytest

from edgesim.cache import (
    CacheEntry,
    PromptCache,
    VectorCache,
    dump_cache_entries,
    sync_from_parent,
    top_entries_by_hits,
)


class ReferenceLRU:
    """Doubly-linked-list LRU used as an independent oracle."""

    class Node:
        __slots__ = ("key", "prev", "nxt")

        def __init__(self, key):
            self.key = key
            self.prev = None
            self.nxt = None

    def __init__(self, capacity):
        self.capacity = capacity
        self.nodes = {}
        self.head = None  # most recent
        self.tail = None  # least recent

    def _unlink(self, node):
        if node.prev:
            node.prev.nxt = node.nxt
        else:
            self.head = node.nxt
        if node.nxt:
            node.nxt.prev = node.prev
        else:
            self.tail = node.prev
        node.prev = node.nxt = None

    def _push_front(self, node):
        node.nxt = self.head
        if self.head:
            self.head.prev = node
        self.head = node
        if self.tail is None:
            self.tail = node

    def lookup(self, key):
        node = self.nodes.get(key)
        if node is None:
            return False
        self._unlink(node)
        self._push_front(node)
        return True

    def insert(self, key):
        """Returns the evicted key, if any."""
        node = self.nodes.get(key)
        if node is not None:
            self._unlink(node)
            self._push_front(node)
            return None
        node = self.Node(key)
        self.nodes[key] = node
        self._push_front(node)
        if len(self.nodes) > self.capacity:
            victim = self.tail
            self._unlink(victim)
            del self.nodes[victim.key]
            return victim.key
        return None


class TestPromptCache:
    def test_read_your_write(self):
        cache = PromptCache(4)
        cache.insert(10, 5, now_ms=0.0)
        assert cache.lookup(10, now_ms=1.0) is not None

    def test_empty_miss(self):
        assert PromptCache(4).lookup(1, 0.0) is None

    def test_overflow_evicts_oldest_five(self):
        cache = PromptCache(5)
        for k in range(1, 11):
            cache.insert(k, 1, now_ms=float(k))
        assert cache.lookup(1, 11.0) is None
        assert len(cache) == 5
        assert cache.lookup(10, 12.0) is not None

    def test_single_slot(self):
        cache = PromptCache(1)
        cache.insert(1, 1, 0.0)
        evicted = cache.insert(2, 1, 1.0)
        assert evicted.key == 1
        assert cache.lookup(1, 2.0) is None

    def test_lookup_refreshes_recency(self):
        cache = PromptCache(3)
        for k in ("a", "b", "c"):
            cache.insert(hash(k), 1, 0.0)
        cache.lookup(hash("a"), 1.0)
        evicted = cache.insert(hash("d"), 1, 2.0)
        assert evicted.key == hash("b")

    def test_hit_count_and_timestamps(self):
        cache = PromptCache(2)
        cache.insert(7, 3, now_ms=5.0)
        entry = cache.lookup(7, now_ms=9.0)
        assert entry.hit_count == 1
        assert entry.inserted_at_ms == 5.0
        assert entry.last_access_ms == 9.0
        cache.lookup(8, 10.0)
        assert entry.hit_count == 1  # misses touch nothing

    def test_lru_oracle_equivalence(self):
        rng = np.random.default_rng(99)
        capacity = 32
        cache = PromptCache(capacity)
        oracle = ReferenceLRU(capacity)
        evictions, oracle_evictions = [], []
        for step in range(10_000):
            key = int(rng.integers(0, 100))
            if rng.random() < 0.5:
                evicted = cache.insert(key, 1, float(step))
                ref_evicted = oracle.insert(key)
                evictions.append(None if evicted is None else evicted.key)
                oracle_evictions.append(ref_evicted)
            else:
                hit = cache.lookup(key, float(step)) is not None
                assert hit == oracle.lookup(key)
            assert len(cache) <= capacity
        assert evictions == oracle_evictions
        assert set(oracle.nodes) == {e.key for e in cache.entries()}


def unit(rng, dim=16):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


class TestVectorCache:
    def test_self_similarity_hit(self):
        rng = np.random.default_rng(0)
        cache = VectorCache(capacity=8, dim=16, similarity_threshold=0.8)
        v = unit(rng)
        cache.insert(1, v, 10, 0.0)
        result = cache.semantic_lookup(v, 1.0)
        assert result is not None
        entry, sim = result
        assert entry.key == 1
        assert sim == pytest.approx(1.0)

    def test_orthogonal_miss(self):
        cache = VectorCache(capacity=8, dim=4, similarity_threshold=0.8)
        cache.insert(1, np.array([1.0, 0.0, 0.0, 0.0]), 10, 0.0)
        assert cache.semantic_lookup(np.array([0.0, 1.0, 0.0, 0.0]), 1.0) is None

    def test_threshold_above_one_never_hits(self):
        rng = np.random.default_rng(1)
        cache = VectorCache(capacity=32, dim=16, similarity_threshold=0.5)
        for i in range(20):
            cache.insert(i, unit(rng), 1, float(i))
        for _ in range(50):
            assert cache.semantic_lookup(unit(rng), 100.0, threshold=1.0 + 1e-9) is None

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(2)
        cache = VectorCache(capacity=64, dim=16, similarity_threshold=0.0)
        for i in range(40):
            cache.insert(i, unit(rng), 1, float(i))
        thresholds = [-1.0, -0.5, 0.0, 0.3, 0.6, 0.9]
        for _ in range(50):
            q = unit(rng)
            hits = [cache.semantic_lookup(q, 100.0, threshold=t) is not None for t in thresholds]
            # once it misses at some threshold, it misses at every higher one
            assert hits == sorted(hits, reverse=True)

    def test_miss_leaves_cache_unchanged(self):
        rng = np.random.default_rng(3)
        cache = VectorCache(capacity=8, dim=16, similarity_threshold=0.99)
        cache.insert(1, unit(rng), 1, 0.0)
        entry = next(iter(cache.entries()))
        before = (entry.hit_count, entry.last_access_ms)
        assert cache.semantic_lookup(unit(rng), 5.0) is None
        assert (entry.hit_count, entry.last_access_ms) == before

    def test_dimension_mismatch_rejected(self):
        cache = VectorCache(capacity=8, dim=16, similarity_threshold=0.5)
        with pytest.raises(ValueError):
            cache.semantic_lookup(np.ones(8), 0.0)

    def test_capacity_safety_and_eviction(self):
        rng = np.random.default_rng(4)
        cache = VectorCache(capacity=3, dim=16, similarity_threshold=0.0)
        vs = [unit(rng) for _ in range(4)]
        for i, v in enumerate(vs[:3]):
            cache.insert(i, v, 1, float(i))
        cache.semantic_lookup(vs[0], 10.0)  # touch key 0
        evicted = cache.insert(3, vs[3], 1, 11.0)
        assert evicted.key == 1
        assert len(cache) == 3
        assert 1 not in cache.index

    def test_invalid_threshold_rejected(self):
        with pytest.raises(ValueError, match="similarity_threshold"):
            VectorCache(capacity=4, dim=8, similarity_threshold=1.5)

    def test_ann_query_beyond_count_returns_all(self):
        rng = np.random.default_rng(5)
        cache = VectorCache(capacity=8, dim=16, similarity_threshold=0.0)
        for i in range(3):
            cache.insert(i, unit(rng), 1, float(i))
        result = cache.ann_query(unit(rng), 10)
        assert len(result) == 3
        sims = [s for _, s in result]
        assert sims == sorted(sims, reverse=True)


class TestExactOracleEquivalence:
    def test_decisions_and_rankings_match_brute_force(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(1, 400))
            cache = VectorCache(capacity=n, dim=16, similarity_threshold=0.0)
            stored = {}
            for i in range(n):
                v = unit(rng)
                cache.insert(i, v, 1, float(i))
                stored[i] = v
            tau = float(rng.uniform(0.0, 0.9))
            for _ in range(20):
                q = unit(rng)
                sims = {k: float(v @ q) for k, v in stored.items()}
                ranked = sorted(sims.items(), key=lambda kv: (-kv[1], kv[0]))
                k = int(rng.integers(1, 12))
                got = cache.ann_query(q, k)
                assert [key for key, _ in got] == [key for key, _ in ranked[:k]]
                best_key, best_sim = ranked[0]
                result = cache.semantic_lookup(q, 1000.0, threshold=tau)
                if best_sim >= tau:
                    assert result is not None and result[0].key == best_key
                else:
                    assert result is None


class TestSync:
    def test_empty_parent(self):
        child = PromptCache(4)
        parent = PromptCache(4)
        assert sync_from_parent(child, parent, 2, 0.0) == 0

    def test_top_by_hits(self):
        parent = PromptCache(8)
        for key, hits in ((1, 5), (2, 2), (3, 1)):
            parent.insert(key, 1, 0.0)
            for _ in range(hits):
                parent.lookup(key, 1.0)
        child = PromptCache(8)
        copied = sync_from_parent(child, parent, 2, 5.0)
        assert copied == 2
        assert 1 in child and 2 in child and 3 not in child

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        parent = VectorCache(capacity=8, dim=16, similarity_threshold=0.0)
        for i in range(5):
            parent.insert(i, unit(rng), 1, float(i))
            parent.semantic_lookup(parent._entries[i].embedding, float(i))
        child = VectorCache(capacity=8, dim=16, similarity_threshold=0.0)
        first = sync_from_parent(child, parent, 3, 10.0)
        snapshot = sorted((e.key, e.payload_tokens) for e in child.entries())
        second = sync_from_parent(child, parent, 3, 11.0)
        assert first == 3
        assert second == 0
        assert snapshot == sorted((e.key, e.payload_tokens) for e in child.entries())

    def test_copies_reset_counters_and_respect_capacity(self):
        parent = PromptCache(8)
        for key in range(6):
            parent.insert(key, 1, 0.0)
            for _ in range(key + 1):
                parent.lookup(key, 1.0)
        child = PromptCache(2)
        copied = sync_from_parent(child, parent, 4, 9.0)
        assert copied == 4
        assert len(child) == 2
        for entry in child.entries():
            assert entry.hit_count == 0
            assert entry.inserted_at_ms == 9.0

    def test_top_entries_tie_break(self):
        cache = PromptCache(8)
        for key in (5, 3, 9):
            cache.insert(key, 1, 0.0)
        top = top_entries_by_hits(cache, 3)
        assert [e.key for e in top] == [3, 5, 9]


class TestDump:
    def test_dump_format(self, tmp_path):
        cache = PromptCache(4)
        cache.insert(42, 1, 7.5)
        cache.lookup(42, 8.0)
        path = str(tmp_path / "caches.tsv")
        dump_cache_entries([("near_ran", "prompt", cache)], path)
        lines = open(path).read().splitlines()
        assert lines == ["near_ran\tprompt\t42\t1\t7.5"]


class TestEntryValidation:
    def test_rejects_bad_timestamps(self):
        with pytest.raises(ValueError):
            CacheEntry(key=1, payload_tokens=1, inserted_at_ms=5.0, last_access_ms=4.0)

    def test_rejects_negative_payload(self):
        with pytest.raises(ValueError):
            CacheEntry(key=1, payload_tokens=-1, inserted_at_ms=0.0, last_access_ms=0.0)
