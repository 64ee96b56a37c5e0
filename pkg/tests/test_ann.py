import numpy as np
import pytest

from edgesim.ann import ExactIndex, GraphIndex, make_index


def unit_rows(rng, n, dim):
    data = rng.normal(size=(n, dim))
    return data / np.linalg.norm(data, axis=1, keepdims=True)


class TestExactIndex:
    def test_single_vector(self):
        idx = ExactIndex(8)
        v = np.ones(8) / np.sqrt(8)
        idx.add(7, v)
        rng = np.random.default_rng(0)
        q = rng.normal(size=8)
        assert [key for key, _ in idx.query(q, 1)] == [7]

    def test_matches_brute_force_exactly(self):
        rng = np.random.default_rng(1)
        dim = 32
        data = unit_rows(rng, 2000, dim)
        idx = ExactIndex(dim)
        for i in range(len(data)):
            idx.add(i, data[i])
        for _ in range(100):
            q = unit_rows(rng, 1, dim)[0]
            sims = data @ q
            order = np.lexsort((np.arange(len(data)), -sims))[:10]
            got = idx.query(q, 10)
            assert [key for key, _ in got] == list(order)

    def test_k_beyond_count(self):
        rng = np.random.default_rng(2)
        idx = ExactIndex(8)
        for i in range(3):
            idx.add(i, unit_rows(rng, 1, 8)[0])
        result = idx.query(unit_rows(rng, 1, 8)[0], 50)
        assert len(result) == 3
        sims = [s for _, s in result]
        assert sims == sorted(sims, reverse=True)

    def test_remove(self):
        rng = np.random.default_rng(3)
        idx = ExactIndex(8)
        vs = unit_rows(rng, 5, 8)
        for i in range(5):
            idx.add(i, vs[i])
        idx.remove(2)
        assert len(idx) == 4
        assert 2 not in idx
        assert all(key != 2 for key, _ in idx.query(vs[2], 5))

    def test_large_keys_preserved(self):
        # 64-bit hash keys above 2^63 must survive ranking untouched.
        rng = np.random.default_rng(4)
        idx = ExactIndex(8)
        keys = [3, 2**64 - 1, 2**63 + 12345]
        vs = unit_rows(rng, 3, 8)
        for key, v in zip(keys, vs):
            idx.add(key, v)
        got = {key for key, _ in idx.query(vs[0], 3)}
        assert got == set(keys)

    def test_rejects_bad_input(self):
        idx = ExactIndex(8)
        with pytest.raises(ValueError):
            idx.add(1, np.zeros(8))
        idx.add(1, np.ones(8))
        with pytest.raises(ValueError):
            idx.add(1, np.ones(8))
        with pytest.raises(ValueError):
            idx.query(np.ones(4), 1)
        with pytest.raises(ValueError):
            idx.query(np.ones(8), 0)


class TestGraphIndex:
    def test_single_vector(self):
        idx = GraphIndex(8, rng=np.random.default_rng(0))
        v = np.ones(8)
        idx.add(3, v)
        assert [key for key, _ in idx.query(v, 1)] == [3]

    def test_recall_small_scale(self):
        rng = np.random.default_rng(5)
        dim, n, n_queries, k = 64, 2000, 50, 10
        data = unit_rows(rng, n, dim)
        queries = unit_rows(rng, n_queries, dim)
        exact = ExactIndex(dim)
        graph = GraphIndex(dim, m=16, ef=64, rng=np.random.default_rng(6))
        for i in range(n):
            exact.add(i, data[i])
            graph.add(i, data[i])
        hits = 0
        for q in queries:
            truth = {key for key, _ in exact.query(q, k)}
            got = {key for key, _ in graph.query(q, k)}
            hits += len(truth & got)
        assert hits / (n_queries * k) >= 0.95

    def test_deterministic_given_rng(self):
        rng = np.random.default_rng(7)
        data = unit_rows(rng, 300, 16)
        queries = unit_rows(rng, 10, 16)

        def build():
            g = GraphIndex(16, m=8, ef=32, rng=np.random.default_rng(42))
            for i in range(len(data)):
                g.add(i, data[i])
            return [g.query(q, 5) for q in queries]

        assert build() == build()

    def test_tombstones_filtered(self):
        rng = np.random.default_rng(8)
        data = unit_rows(rng, 200, 16)
        graph = GraphIndex(16, m=8, ef=32, rng=np.random.default_rng(9))
        for i in range(200):
            graph.add(i, data[i])
        removed = set(range(0, 200, 2))
        for key in removed:
            graph.remove(key)
        assert len(graph) == 100
        for q in unit_rows(rng, 20, 16):
            got = [key for key, _ in graph.query(q, 10)]
            assert removed.isdisjoint(got)
            assert len(got) == 10

    def test_rebuild_after_heavy_removal(self):
        rng = np.random.default_rng(10)
        data = unit_rows(rng, 300, 16)
        graph = GraphIndex(16, m=8, ef=32, rng=np.random.default_rng(11))
        for i in range(300):
            graph.add(i, data[i])
        for key in range(250):
            graph.remove(key)
        assert len(graph) == 50
        # Rebuild happened; queries stay correct against brute force.
        live = {i: data[i] for i in range(250, 300)}
        for q in unit_rows(rng, 20, 16):
            best = max(live, key=lambda key: float(live[key] @ q))
            got = graph.query(q, 1)
            assert got and got[0][0] == best

    def test_reinsert_after_remove(self):
        rng = np.random.default_rng(12)
        graph = GraphIndex(8, m=4, ef=16, rng=np.random.default_rng(13))
        v = unit_rows(rng, 1, 8)[0]
        graph.add(1, v)
        graph.remove(1)
        graph.add(1, v)
        assert [key for key, _ in graph.query(v, 1)] == [1]


class TestFactory:
    def test_modes(self):
        assert isinstance(make_index("exact", 8), ExactIndex)
        assert isinstance(make_index("approximate", 8, rng=np.random.default_rng(0)), GraphIndex)
        with pytest.raises(ValueError):
            make_index("fuzzy", 8)
