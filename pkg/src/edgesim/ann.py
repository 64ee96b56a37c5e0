"""Vector indexes: exact cosine scan and a navigable small-world graph.

Both store unit-normalized vectors and rank by cosine similarity (inner
product). The exact index is the reference behaviour; the graph index
trades exactness for sublinear search using a layered small-world graph
(``m`` links per node per layer, beam width ``ef``), with greedy descent
from the top layer and a best-first beam at the base layer.

Removal from the graph index is tombstone-based: dead nodes stay navigable
until they outnumber live ones, then the index is rebuilt.
"""

from __future__ import annotations

import heapq
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

AnnResult = List[Tuple[int, float]]  # (entry id, cosine similarity), best first


def _normalized(vec: np.ndarray) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("cannot index a zero vector")
    return arr / norm


def _rank_results(ids: np.ndarray, sims: np.ndarray, k: int) -> AnnResult:
    # Descending similarity, ascending id on exact ties.
    ids = np.asarray(ids, dtype=np.uint64)  # plain asarray would promote 64-bit keys to float
    order = np.lexsort((ids, -sims))[:k]
    return [(int(ids[i]), float(sims[i])) for i in order]


class ExactIndex:
    """Brute-force cosine index over a growing row matrix."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._matrix = np.zeros((64, dim), dtype=np.float64)
        self._ids: List[int] = []
        self._row_of: Dict[int, int] = {}
        self._alive = np.zeros(64, dtype=bool)

    def __len__(self) -> int:
        return len(self._row_of)

    def __contains__(self, entry_id: int) -> bool:
        return entry_id in self._row_of

    def _grow(self, needed: int) -> None:
        cap = self._matrix.shape[0]
        if needed <= cap:
            return
        new_cap = max(cap * 2, needed)
        matrix = np.zeros((new_cap, self.dim), dtype=np.float64)
        matrix[:cap] = self._matrix
        alive = np.zeros(new_cap, dtype=bool)
        alive[:cap] = self._alive
        self._matrix, self._alive = matrix, alive

    def add(self, entry_id: int, vec: np.ndarray) -> None:
        if entry_id in self._row_of:
            raise ValueError(f"entry id {entry_id} already indexed")
        vec = _normalized(vec)
        if vec.shape[0] != self.dim:
            raise ValueError(f"vector dimension {vec.shape[0]} != index dimension {self.dim}")
        row = len(self._ids)
        self._grow(row + 1)
        self._matrix[row] = vec
        self._alive[row] = True
        self._ids.append(entry_id)
        self._row_of[entry_id] = row

    def remove(self, entry_id: int) -> None:
        row = self._row_of.pop(entry_id)
        self._alive[row] = False

    def query(self, vec: np.ndarray, k: int) -> AnnResult:
        """True top-k by cosine; fewer than k entries returns all, ranked."""
        if k < 1:
            raise ValueError("k must be >= 1")
        vec = _normalized(vec)
        if vec.shape[0] != self.dim:
            raise ValueError(f"query dimension {vec.shape[0]} != index dimension {self.dim}")
        n = len(self._ids)
        if not self._row_of:
            return []
        sims = self._matrix[:n] @ vec
        ids = np.asarray(self._ids, dtype=np.uint64)
        live = self._alive[:n]
        return _rank_results(ids[live], sims[live], k)

    def nearest(self, vec: np.ndarray) -> Optional[Tuple[int, float]]:
        hits = self.query(vec, 1)
        return hits[0] if hits else None


class GraphIndex:
    """Layered small-world graph for approximate nearest-neighbour search."""

    def __init__(
        self,
        dim: int,
        m: int = 16,
        ef: int = 64,
        rng: Optional[np.random.Generator] = None,
        ef_construction: Optional[int] = None,
    ):
        if dim < 1 or m < 2 or ef < 1:
            raise ValueError("require dim >= 1, m >= 2, ef >= 1")
        self.dim = dim
        self.m = m
        # Base-layer degree: deliberately dense (6*m) so modest beam widths
        # keep recall high on unclustered data at the scales this simulator
        # runs at; upper layers stay sparse for cheap navigation.
        self.m0 = 6 * m
        self.ef = ef
        self.ef_construction = ef_construction if ef_construction is not None else max(128, ef)
        self._ml = 1.0 / math.log(m)
        self._rng = rng if rng is not None else np.random.default_rng(0)

        self._matrix = np.zeros((64, dim), dtype=np.float32)
        self._ids: List[int] = []
        self._row_of: Dict[int, int] = {}
        self._alive: List[bool] = []
        self._levels: List[int] = []
        self._links: List[List[List[int]]] = []  # row -> layer -> neighbour rows
        self._entry: Optional[int] = None
        self._max_level = -1
        self._dead = 0

    def __len__(self) -> int:
        return len(self._row_of)

    def __contains__(self, entry_id: int) -> bool:
        return entry_id in self._row_of

    def _grow(self, needed: int) -> None:
        cap = self._matrix.shape[0]
        if needed <= cap:
            return
        matrix = np.zeros((max(cap * 2, needed), self.dim), dtype=np.float32)
        matrix[:cap] = self._matrix
        self._matrix = matrix

    def _dist(self, row: int, vec: np.ndarray) -> float:
        return 1.0 - float(self._matrix[row] @ vec)

    def _dists(self, rows: List[int], vec: np.ndarray) -> np.ndarray:
        return 1.0 - self._matrix[rows] @ vec

    def _search_layer(
        self, vec: np.ndarray, entry_rows: List[int], layer: int, ef: int
    ) -> List[Tuple[float, int]]:
        """Best-first beam over one layer; returns (dist, row) sorted ascending."""
        visited = set(entry_rows)
        candidates: List[Tuple[float, int]] = []
        best: List[Tuple[float, int]] = []  # max-heap via negated distance
        for row, dist in zip(entry_rows, self._dists(entry_rows, vec)):
            heapq.heappush(candidates, (float(dist), row))
            heapq.heappush(best, (-float(dist), row))
        while candidates:
            dist, row = heapq.heappop(candidates)
            if len(best) >= ef and dist > -best[0][0]:
                break
            fresh = [nbr for nbr in self._links[row][layer] if nbr not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            fresh_dists = self._dists(fresh, vec)
            if len(best) >= ef:
                # Beam is full: only contenders below the current worst matter.
                bound = -best[0][0]
                order = np.flatnonzero(fresh_dists < bound)
                for i in order:
                    nbr_dist = float(fresh_dists[i])
                    if nbr_dist < -best[0][0]:
                        heapq.heappush(candidates, (nbr_dist, fresh[i]))
                        heapq.heapreplace(best, (-nbr_dist, fresh[i]))
            else:
                for nbr, nbr_dist in zip(fresh, fresh_dists):
                    nbr_dist = float(nbr_dist)
                    if len(best) < ef:
                        heapq.heappush(candidates, (nbr_dist, nbr))
                        heapq.heappush(best, (-nbr_dist, nbr))
                    elif nbr_dist < -best[0][0]:
                        heapq.heappush(candidates, (nbr_dist, nbr))
                        heapq.heapreplace(best, (-nbr_dist, nbr))
        return sorted((-neg, row) for neg, row in best)

    def _select_neighbors(self, candidates: List[Tuple[float, int]], m: int) -> List[int]:
        """Diversity-aware selection: keep a candidate only if it is closer to
        the query than to every neighbour already kept. One pairwise gemm per
        call; the greedy pass then runs on precomputed scalars."""
        if len(candidates) <= m:
            return [row for _, row in candidates]
        rows = [row for _, row in candidates]
        vectors = self._matrix[rows]
        pair_dist = 1.0 - vectors @ vectors.T
        min_dist_to_selected = np.full(len(rows), np.inf)
        selected: List[int] = []
        for i, (dist, row) in enumerate(candidates):
            if len(selected) >= m:
                break
            if min_dist_to_selected[i] > dist:
                selected.append(row)
                np.minimum(min_dist_to_selected, pair_dist[:, i], out=min_dist_to_selected)
        return selected

    def _prune(self, row: int, layer: int) -> None:
        limit = self.m0 if layer == 0 else self.m
        links = self._links[row][layer]
        if len(links) <= limit:
            return
        ranked = sorted(zip((float(d) for d in self._dists(links, self._matrix[row])), links))
        self._links[row][layer] = self._select_neighbors(ranked, limit)

    def add(self, entry_id: int, vec: np.ndarray) -> None:
        if entry_id in self._row_of:
            raise ValueError(f"entry id {entry_id} already indexed")
        vec = _normalized(vec).astype(np.float32)
        if vec.shape[0] != self.dim:
            raise ValueError(f"vector dimension {vec.shape[0]} != index dimension {self.dim}")
        level = int(-math.log(1.0 - float(self._rng.random())) * self._ml)
        row = len(self._ids)
        self._grow(row + 1)
        self._matrix[row] = vec
        self._ids.append(entry_id)
        self._row_of[entry_id] = row
        self._alive.append(True)
        self._levels.append(level)
        self._links.append([[] for _ in range(level + 1)])

        if self._entry is None:
            self._entry = row
            self._max_level = level
            return

        ep = [self._entry]
        for layer in range(self._max_level, level, -1):
            ep = [self._search_layer(vec, ep, layer, 1)[0][1]]
        for layer in range(min(level, self._max_level), -1, -1):
            candidates = self._search_layer(vec, ep, layer, self.ef_construction)
            limit = self.m0 if layer == 0 else self.m
            neighbours = self._select_neighbors(candidates, limit)
            self._links[row][layer] = list(neighbours)
            for nbr in neighbours:
                self._links[nbr][layer].append(row)
                self._prune(nbr, layer)
            ep = [r for _, r in candidates]
        if level > self._max_level:
            self._entry = row
            self._max_level = level

    def remove(self, entry_id: int) -> None:
        row = self._row_of.pop(entry_id)
        self._alive[row] = False
        self._dead += 1
        if self._dead > len(self._row_of) and self._dead > 64:
            self._rebuild()

    def _rebuild(self) -> None:
        live = sorted(self._row_of.items())  # (id, row), ascending id
        vectors = [(entry_id, self._matrix[row].copy()) for entry_id, row in live]
        self._matrix = np.zeros((max(64, len(vectors)), self.dim), dtype=np.float32)
        self._ids = []
        self._row_of = {}
        self._alive = []
        self._levels = []
        self._links = []
        self._entry = None
        self._max_level = -1
        self._dead = 0
        for entry_id, vec in vectors:
            self.add(entry_id, vec)

    def query(self, vec: np.ndarray, k: int) -> AnnResult:
        """Approximate top-k by cosine over live entries."""
        if k < 1:
            raise ValueError("k must be >= 1")
        vec = _normalized(vec).astype(np.float32)
        if vec.shape[0] != self.dim:
            raise ValueError(f"query dimension {vec.shape[0]} != index dimension {self.dim}")
        if not self._row_of:
            return []
        ep = [self._entry]
        for layer in range(self._max_level, 0, -1):
            ep = [self._search_layer(vec, ep, layer, 1)[0][1]]
        beam = self._search_layer(vec, ep, 0, max(self.ef, k))
        live = [(dist, row) for dist, row in beam if self._alive[row]]
        if len(live) < min(k, len(self._row_of)):
            # Tombstone-heavy neighbourhood: fall back to a scan over live rows.
            rows = sorted(self._row_of.values())
            live = sorted(zip((float(d) for d in self._dists(rows, vec)), rows))
        ids = np.asarray([self._ids[row] for _, row in live], dtype=np.uint64)
        sims = np.asarray([1.0 - dist for dist, _ in live])
        return _rank_results(ids, sims, k)

    def nearest(self, vec: np.ndarray) -> Optional[Tuple[int, float]]:
        hits = self.query(vec, 1)
        return hits[0] if hits else None


def make_index(
    mode: str,
    dim: int,
    m: int = 16,
    ef: int = 64,
    rng: Optional[np.random.Generator] = None,
):
    """Index factory for the two search modes."""
    if mode == "exact":
        return ExactIndex(dim)
    if mode == "approximate":
        return GraphIndex(dim, m=m, ef=ef, rng=rng)
    raise ValueError(f"ann_mode must be 'exact' or 'approximate', got {mode!r}")
