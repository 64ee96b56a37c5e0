"""Synthetic inference request streams.

Arrivals follow a Poisson process, popularity follows a truncated Zipf
distribution over a fixed prompt population, and embeddings are drawn as
cluster centres plus gaussian noise so that semantic similarity between
requests is tunable (sigma small: near-duplicates; sigma large: scattered).
Everything is a pure function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .rng import STREAM_WORKLOAD, prompt_key_for_rank, substream
from .topology import TierKind


class WorkloadClass(str, Enum):
    ULTRA_LOW = "ultra_low"
    MODERATE = "moderate"
    LATENCY_TOLERANT = "latency_tolerant"

    @classmethod
    def parse(cls, name: str) -> "WorkloadClass":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown workload class {name!r} (valid: {valid})") from None


#: Latency target interval per class, milliseconds (upper bound is the SLA).
LATENCY_TARGETS_MS: Dict[WorkloadClass, Tuple[float, float]] = {
    WorkloadClass.ULTRA_LOW: (1.0, 10.0),
    WorkloadClass.MODERATE: (10.0, 100.0),
    WorkloadClass.LATENCY_TOLERANT: (100.0, math.inf),
}

CLASS_ORDER = [WorkloadClass.ULTRA_LOW, WorkloadClass.MODERATE, WorkloadClass.LATENCY_TOLERANT]


class WorkloadKind(str, Enum):
    CONVERSATIONAL = "conversational"
    SEMANTIC_SEARCH = "semantic_search"
    RECOMMENDATION = "recommendation"
    BATCH_EMBEDDING = "batch_embedding"
    OFFLINE_GENERATION = "offline_generation"


def class_of(latency_target_ms: float) -> WorkloadClass:
    """Map a latency target to its class: (0,10] / (10,100] / (100,inf)."""
    if latency_target_ms <= 0:
        raise ValueError(f"latency target must be positive, got {latency_target_ms}")
    if latency_target_ms <= 10.0:
        return WorkloadClass.ULTRA_LOW
    if latency_target_ms <= 100.0:
        return WorkloadClass.MODERATE
    return WorkloadClass.LATENCY_TOLERANT


_KIND_TIER = {
    WorkloadKind.CONVERSATIONAL: TierKind.MEC,
    WorkloadKind.SEMANTIC_SEARCH: TierKind.REGIONAL_DC,
    WorkloadKind.RECOMMENDATION: TierKind.REGIONAL_DC,
    WorkloadKind.BATCH_EMBEDDING: TierKind.CORE_DC,
    WorkloadKind.OFFLINE_GENERATION: TierKind.CORE_DC,
}

_CLASS_TIER = {
    WorkloadClass.ULTRA_LOW: TierKind.MEC,
    WorkloadClass.MODERATE: TierKind.REGIONAL_DC,
    WorkloadClass.LATENCY_TOLERANT: TierKind.CORE_DC,
}


def default_tier_for(cls: WorkloadClass, kind: Optional[WorkloadKind] = None) -> TierKind:
    """Default placement tier for a workload (kind wins over class)."""
    if kind is not None:
        return _KIND_TIER[WorkloadKind(kind)]
    return _CLASS_TIER[WorkloadClass(cls)]


@dataclass
class Request:
    """One inference query produced by the generator."""

    id: int
    arrival_ms: float
    cls: WorkloadClass
    prompt_tokens: int
    output_tokens: int
    embedding: np.ndarray
    prompt_key: int
    population_rank: int

    def __post_init__(self) -> None:
        if self.prompt_tokens < 1:
            raise ValueError("prompt_tokens must be >= 1")
        if self.output_tokens < 0:
            raise ValueError("output_tokens must be >= 0")


@dataclass
class WorkloadConfig:
    """Knobs of the stream generator; defaults give a mixed moderate load."""

    duration_ms: float = 60_000.0
    rate_per_sec: float = 20.0
    class_mix: Tuple[float, float, float] = (0.4, 0.4, 0.2)
    zipf_s: float = 1.1
    n_prompts: int = 500
    n_clusters: int = 50
    cluster_noise_sigma: float = 0.05
    dim_e: int = 64
    prompt_token_range: Tuple[int, int] = (16, 128)
    output_token_ranges: Dict[WorkloadClass, Tuple[int, int]] = field(
        default_factory=lambda: {
            WorkloadClass.ULTRA_LOW: (1, 20),
            WorkloadClass.MODERATE: (20, 100),
            WorkloadClass.LATENCY_TOLERANT: (100, 500),
        }
    )

    def __post_init__(self) -> None:
        if self.duration_ms < 0:
            raise ValueError("duration_ms must be >= 0")
        if self.rate_per_sec <= 0:
            raise ValueError("rate_per_sec must be positive")
        if any(w < 0 for w in self.class_mix) or sum(self.class_mix) <= 0:
            raise ValueError("class_mix weights must be >= 0 with a positive sum")
        if self.zipf_s < 0:
            raise ValueError("zipf_s must be >= 0")
        if self.n_prompts < 1:
            raise ValueError("n_prompts must be >= 1")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.dim_e < 1:
            raise ValueError("dim_e must be >= 1")
        lo, hi = self.prompt_token_range
        if lo < 1 or lo > hi:
            raise ValueError("prompt_token_range must satisfy 1 <= lo <= hi")
        for cls, (olo, ohi) in self.output_token_ranges.items():
            if olo < 0 or olo > ohi:
                raise ValueError(f"output_token_ranges[{WorkloadClass(cls).value}] invalid")


def zipf_pmf(n_prompts: int, s: float) -> np.ndarray:
    """Normalized Zipf probabilities for ranks 1..n_prompts (s=0 is uniform)."""
    ranks = np.arange(1, n_prompts + 1, dtype=np.float64)
    weights = ranks ** (-s)
    return weights / weights.sum()


def cluster_centers(rng: np.random.Generator, n_clusters: int, dim: int) -> np.ndarray:
    """Unit-norm gaussian cluster centres (rows)."""
    centers = rng.normal(size=(n_clusters, dim))
    norms = np.linalg.norm(centers, axis=1, keepdims=True)
    return centers / norms


def generate_stream(seed: int, cfg: WorkloadConfig) -> List[Request]:
    """Generate the full request stream for a seed; identical seeds give
    element-wise identical streams."""
    rng = substream(seed, STREAM_WORKLOAD)
    centers = cluster_centers(rng, cfg.n_clusters, cfg.dim_e)
    cdf = np.cumsum(zipf_pmf(cfg.n_prompts, cfg.zipf_s))
    mix = np.asarray(cfg.class_mix, dtype=np.float64)
    mix_cdf = np.cumsum(mix / mix.sum())

    requests: List[Request] = []
    t = 0.0
    req_id = 0
    mean_gap_ms = 1000.0 / cfg.rate_per_sec
    while True:
        t += rng.exponential(mean_gap_ms)
        if t > cfg.duration_ms:
            break
        cls = CLASS_ORDER[int(np.searchsorted(mix_cdf, rng.random(), side="right"))]
        rank = int(np.searchsorted(cdf, rng.random(), side="right")) + 1
        n_in = int(rng.integers(cfg.prompt_token_range[0], cfg.prompt_token_range[1] + 1))
        olo, ohi = cfg.output_token_ranges[cls]
        n_out = int(rng.integers(olo, ohi + 1))
        center = centers[rank % cfg.n_clusters]
        vec = center + rng.normal(0.0, cfg.cluster_noise_sigma, cfg.dim_e)
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            vec = center.copy()
            norm = 1.0
        requests.append(
            Request(
                id=req_id,
                arrival_ms=t,
                cls=cls,
                prompt_tokens=n_in,
                output_tokens=n_out,
                embedding=vec / norm,
                prompt_key=prompt_key_for_rank(rank),
                population_rank=rank,
            )
        )
        req_id += 1
    return requests


def dump_stream(requests: List[Request], path: str) -> None:
    """Write one tab-separated record per request (exact decimal floats)."""
    with open(path, "w", encoding="utf-8") as fh:
        for req in requests:
            emb = ",".join(repr(float(v)) for v in req.embedding)
            fh.write(
                f"{req.id}\t{req.arrival_ms!r}\t{req.cls.value}\t{req.prompt_tokens}\t"
                f"{req.output_tokens}\t{req.population_rank}\t{emb}\n"
            )


def load_stream(path: str) -> List[Request]:
    """Read a stream written by :func:`dump_stream`."""
    requests = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            rid, arrival, cls, n_in, n_out, rank, emb = line.split("\t")
            requests.append(
                Request(
                    id=int(rid),
                    arrival_ms=float(arrival),
                    cls=WorkloadClass(cls),
                    prompt_tokens=int(n_in),
                    output_tokens=int(n_out),
                    embedding=np.array([float(v) for v in emb.split(",")]),
                    prompt_key=prompt_key_for_rank(int(rank)),
                    population_rank=int(rank),
                )
            )
    return requests
