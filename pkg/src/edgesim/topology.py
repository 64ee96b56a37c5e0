"""Tiered network hierarchy: RTT ranges, hardware, cache capacities, paths.

One node per tier. Tiers are ordered by distance from the user; each
non-topmost tier has the next tier upward as its parent. Only user-to-tier
round-trip times are configured, so the latency of a hop between two
adjacent tiers is modelled as the difference of their RTT samples, floored
at ``HOP_FLOOR_MS`` to keep overlapping ranges from producing free hops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .latency import HardwareProfile

HOP_FLOOR_MS = 0.5


class TierKind(IntEnum):
    """Network tiers ordered by distance from the user (nearest first)."""

    NEAR_RAN = 0
    MEC = 1
    REGIONAL_DC = 2
    CORE_DC = 3
    CLOUD = 4

    @classmethod
    def parse(cls, name: str) -> "TierKind":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            valid = ", ".join(k.name.lower() for k in cls)
            raise ValueError(f"unknown tier kind {name!r} (valid: {valid})") from None

    @property
    def label(self) -> str:
        return self.name.lower()


#: Default user<->tier RTT ranges in milliseconds.
DEFAULT_RTT_RANGES: Dict[TierKind, Tuple[float, float]] = {
    TierKind.NEAR_RAN: (1.0, 5.0),
    TierKind.MEC: (1.0, 10.0),
    TierKind.REGIONAL_DC: (10.0, 50.0),
    TierKind.CORE_DC: (50.0, 200.0),
    TierKind.CLOUD: (50.0, 150.0),
}


@dataclass
class TierSpec:
    """One tier: RTT interval, hardware, cache capacities, compute slots."""

    kind: TierKind
    rtt_ms_range: Tuple[float, float]
    hardware: HardwareProfile
    vector_cache_capacity: int = 0
    prompt_cache_capacity: int = 0
    max_concurrent: int = 1

    def __post_init__(self) -> None:
        lo, hi = self.rtt_ms_range
        if lo < 0:
            raise ValueError(f"tier {self.kind.label}: RTT lower bound must be >= 0, got {lo}")
        if lo > hi:
            raise ValueError(f"tier {self.kind.label}: inverted RTT range [{lo}, {hi}]")
        if self.vector_cache_capacity < 0 or self.prompt_cache_capacity < 0:
            raise ValueError(f"tier {self.kind.label}: cache capacities must be >= 0")
        if self.max_concurrent < 1:
            raise ValueError(f"tier {self.kind.label}: max_concurrent must be >= 1")


@dataclass
class Topology:
    """Validated tier chain; immutable after construction."""

    tiers: List[TierSpec]
    parent: Dict[TierKind, TierKind] = field(default_factory=dict)
    rtt_mode: str = "uniform"

    def tier(self, kind: TierKind) -> TierSpec:
        for spec in self.tiers:
            if spec.kind == kind:
                return spec
        raise KeyError(f"tier {kind.label} not present in topology")

    def has(self, kind: TierKind) -> bool:
        return any(spec.kind == kind for spec in self.tiers)

    @property
    def kinds(self) -> List[TierKind]:
        return [spec.kind for spec in self.tiers]

    @property
    def topmost(self) -> TierKind:
        return self.tiers[-1].kind

    def parent_of(self, kind: TierKind) -> Optional[TierKind]:
        return self.parent.get(kind)

    def ancestors(self, kind: TierKind) -> List[TierKind]:
        """Tiers strictly above ``kind``, nearest first."""
        chain = []
        current = self.parent.get(kind)
        while current is not None:
            chain.append(current)
            current = self.parent.get(current)
        return chain


def build_topology(tiers: List[TierSpec], rtt_mode: str = "uniform") -> Topology:
    """Validate tier specs and link each tier to the next one upward."""
    if not tiers:
        raise ValueError("topology requires at least one tier")
    if rtt_mode not in ("uniform", "midpoint"):
        raise ValueError(f"rtt_mode must be 'uniform' or 'midpoint', got {rtt_mode!r}")
    kinds = [spec.kind for spec in tiers]
    if len(set(kinds)) != len(kinds):
        dupes = sorted({k.label for k in kinds if kinds.count(k) > 1})
        raise ValueError(f"duplicate tier kinds: {', '.join(dupes)}")
    ordered = sorted(tiers, key=lambda spec: spec.kind)
    parent = {
        ordered[i].kind: ordered[i + 1].kind for i in range(len(ordered) - 1)
    }
    return Topology(tiers=ordered, parent=parent, rtt_mode=rtt_mode)


def sample_rtt_ms(tier: TierSpec, rng: np.random.Generator, mode: str = "uniform") -> float:
    """Draw a user<->tier RTT from the tier's interval.

    Uniform by default; ``midpoint`` mode returns the interval centre for
    deterministic runs. A degenerate interval returns its single point.
    """
    lo, hi = tier.rtt_ms_range
    if lo == hi:
        return lo
    if mode == "midpoint":
        return (lo + hi) / 2.0
    return float(rng.uniform(lo, hi))


def path_between(start: TierKind, end: TierKind, topo: Topology) -> List[TierKind]:
    """Tiers traversed between two tiers, following parent links.

    The result starts at ``start``, ends at ``end``, and is monotone in tier
    order (upward paths ascend; downward paths are the reverse walk).
    """
    for kind in (start, end):
        if not topo.has(kind):
            raise ValueError(f"tier {kind.label} not present in topology")
    if start == end:
        return [start]
    lower, upper = (start, end) if start < end else (end, start)
    chain = [lower]
    current = lower
    while current != upper:
        nxt = topo.parent_of(current)
        if nxt is None:
            raise ValueError(f"no path from {lower.label} to {upper.label}")
        chain.append(nxt)
        current = nxt
    return chain if start < end else list(reversed(chain))


def hop_latency_ms(upper_rtt_ms: float, lower_rtt_ms: float) -> float:
    """Latency of one inter-tier hop: RTT difference floored at HOP_FLOOR_MS."""
    return max(upper_rtt_ms - lower_rtt_ms, HOP_FLOOR_MS)


def path_hops_ms(
    path: List[TierKind], topo: Topology, rng: np.random.Generator
) -> List[Tuple[TierKind, float]]:
    """Per-hop latencies along a path, sampling each tier's RTT once.

    Returns one (destination tier, latency) pair per hop; an empty list for
    a single-tier path.
    """
    if len(path) < 2:
        return []
    samples = {kind: sample_rtt_ms(topo.tier(kind), rng, topo.rtt_mode) for kind in path}
    hops = []
    for src, dst in zip(path, path[1:]):
        upper, lower = (dst, src) if dst > src else (src, dst)
        hops.append((dst, hop_latency_ms(samples[upper], samples[lower])))
    return hops
