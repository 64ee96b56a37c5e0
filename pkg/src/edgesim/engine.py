"""Deterministic discrete-event engine.

Events are processed in (time, seq) order, seq being assigned at push time,
so identical scenarios replay identically. A request's plan is built at
arrival (cache lookups happen then); its stages then execute in sequence.
A stage's compute slice needs a slot at its tier: slots are limited by
``max_concurrent`` and contended slots queue FIFO, adding queueing delay to
the request's latency. Network slices are pure delays. Cache writes
produced by a plan are applied when the request completes, and periodic
sync ticks copy the most popular entries from each tier into its child.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .cache import PromptCache, VectorCache, sync_from_parent
from .policies import (
    ArchitectureKind,
    ExecutionPlan,
    NodeCaches,
    Outcome,
    PolicyContext,
    RagParams,
    dispatch,
)
from .ann import make_index
from .rng import STREAM_ANN, STREAM_DOCS, STREAM_RTT, substream
from .scenario import Scenario
from .topology import TierKind
from .workload import LATENCY_TARGETS_MS, Request, WorkloadClass, generate_stream


class EventKind(IntEnum):
    ARRIVAL = 0
    STAGE_COMPLETE = 1
    SYNC_TICK = 2


@dataclass
class Event:
    time_ms: float
    seq: int
    kind: EventKind
    request_id: int = -1


def percentile(samples: List[float], p: float) -> float:
    """Nearest-rank percentile over a sample list."""
    if not samples:
        raise ValueError("percentile of empty sample list")
    if not 0 <= p <= 100:
        raise ValueError(f"percentile p must be within [0, 100], got {p}")
    ordered = sorted(samples)
    rank = max(1, math.ceil(p / 100.0 * len(ordered)))
    return ordered[rank - 1]


def sync_tick_times(period_ms: float, duration_ms: float) -> List[float]:
    """Tick timestamps at period, 2*period, ... up to the run duration.
    A non-positive period disables syncing."""
    if period_ms <= 0:
        return []
    times = []
    k = 1
    while k * period_ms <= duration_ms:
        times.append(k * period_ms)
        k += 1
    return times


@dataclass
class GroupMetrics:
    request_count: int = 0
    completed_count: int = 0
    rejected_count: int = 0
    mean_ms: Optional[float] = None
    p50_ms: Optional[float] = None
    p90_ms: Optional[float] = None
    p99_ms: Optional[float] = None
    prompt_lookups: int = 0
    prompt_hits: int = 0
    prompt_hit_ratio: float = 0.0
    semantic_lookups: int = 0
    semantic_hits: int = 0
    semantic_hit_ratio: float = 0.0
    early_exit_count: int = 0
    early_exit_fraction: float = 0.0
    sla_violations: int = 0
    sla_violation_fraction: float = 0.0
    upstream_bytes_total: int = 0
    outcomes: Dict[str, int] = field(default_factory=dict)
    _samples: List[float] = field(default_factory=list, repr=False)

    def finalize(self) -> None:
        if self._samples:
            self.mean_ms = sum(self._samples) / len(self._samples)
            self.p50_ms = percentile(self._samples, 50)
            self.p90_ms = percentile(self._samples, 90)
            self.p99_ms = percentile(self._samples, 99)
        if self.prompt_lookups:
            self.prompt_hit_ratio = self.prompt_hits / self.prompt_lookups
        if self.semantic_lookups:
            self.semantic_hit_ratio = self.semantic_hits / self.semantic_lookups
        if self.completed_count:
            self.early_exit_fraction = self.early_exit_count / self.completed_count
            self.sla_violation_fraction = self.sla_violations / self.completed_count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "request_count": self.request_count,
            "completed_count": self.completed_count,
            "rejected_count": self.rejected_count,
            "mean_ms": self.mean_ms,
            "p50_ms": self.p50_ms,
            "p90_ms": self.p90_ms,
            "p99_ms": self.p99_ms,
            "prompt_lookups": self.prompt_lookups,
            "prompt_hits": self.prompt_hits,
            "prompt_hit_ratio": self.prompt_hit_ratio,
            "semantic_lookups": self.semantic_lookups,
            "semantic_hits": self.semantic_hits,
            "semantic_hit_ratio": self.semantic_hit_ratio,
            "early_exit_count": self.early_exit_count,
            "early_exit_fraction": self.early_exit_fraction,
            "sla_violations": self.sla_violations,
            "sla_violation_fraction": self.sla_violation_fraction,
            "upstream_bytes_total": self.upstream_bytes_total,
            "outcomes": dict(sorted(self.outcomes.items())),
        }


@dataclass
class MetricsReport:
    architecture: str
    seed: int
    overall: GroupMetrics
    per_class: Dict[str, GroupMetrics]
    per_tier_compute_ms: Dict[str, float]
    sync_copies: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "architecture": self.architecture,
            "seed": self.seed,
            "overall": self.overall.to_dict(),
            "per_class": {name: g.to_dict() for name, g in self.per_class.items()},
            "per_tier_compute_ms": dict(self.per_tier_compute_ms),
            "sync_copies": self.sync_copies,
        }


@dataclass
class RunResult:
    report: MetricsReport
    records: List[Dict[str, Any]]


@dataclass
class _Node:
    max_concurrent: int
    busy: int = 0
    queue: deque = field(default_factory=deque)  # (request_id, enqueue_time)


@dataclass
class _Exec:
    req: Request
    plan: ExecutionPlan
    stage_idx: int = 0
    phase: str = "start"  # start -> acquire -> release per stage
    waits: List[float] = field(default_factory=list)
    stage_end_ms: List[float] = field(default_factory=list)


class Engine:
    """Owns all mutable simulation state for one scenario run."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.topo = scenario.topology
        self._seq = 0
        self._heap: List[Tuple[float, int, Event]] = []

        ann_rng = substream(scenario.seed, STREAM_ANN)
        self.caches: Dict[TierKind, NodeCaches] = {}
        for tier in self.topo.tiers:
            node = NodeCaches()
            if tier.prompt_cache_capacity > 0:
                node.prompt = PromptCache(tier.prompt_cache_capacity)
            if tier.vector_cache_capacity > 0:
                node.vector = VectorCache(
                    capacity=tier.vector_cache_capacity,
                    dim=scenario.workload.dim_e,
                    similarity_threshold=scenario.cache.similarity_threshold,
                    ann_mode=scenario.cache.ann_mode,
                    ann_m=scenario.cache.ann_m,
                    ann_ef=scenario.cache.ann_ef,
                    rng=ann_rng,
                )
            self.caches[tier.kind] = node

        doc_index = None
        if scenario.architecture == ArchitectureKind.RAG_OVER_CDN:
            rag: RagParams = scenario.arch_params[ArchitectureKind.RAG_OVER_CDN]
            doc_rng = substream(scenario.seed, STREAM_DOCS)
            doc_index = make_index(
                scenario.cache.ann_mode,
                scenario.workload.dim_e,
                m=scenario.cache.ann_m,
                ef=scenario.cache.ann_ef,
                rng=ann_rng,
            )
            docs = doc_rng.normal(size=(rag.n_docs, scenario.workload.dim_e))
            docs /= np.linalg.norm(docs, axis=1, keepdims=True)
            for doc_id in range(rag.n_docs):
                doc_index.add(doc_id, docs[doc_id])

        self.ctx = PolicyContext(
            topo=self.topo,
            caches=self.caches,
            generation_model=scenario.models[scenario.generation_model],
            edge_models=scenario.models,
            seed=scenario.seed,
            rtt_rng=substream(scenario.seed, STREAM_RTT),
            architecture=scenario.architecture,
            params=scenario.active_params,
            caching_enabled=scenario.cache.enabled,
            vector_lookup_ms=scenario.cache.vector_lookup_ms,
            prompt_lookup_ms=scenario.cache.prompt_lookup_ms,
            per_tier_lookup_ms=scenario.cache.per_tier_lookup_ms,
            multipliers=scenario.quantization_multipliers,
            doc_index=doc_index,
        )

        self._nodes: Dict[TierKind, _Node] = {
            tier.kind: _Node(max_concurrent=tier.max_concurrent) for tier in self.topo.tiers
        }
        self._active: Dict[int, _Exec] = {}
        self._requests: Dict[int, Request] = {}
        self._records: Dict[int, Dict[str, Any]] = {}
        self._per_tier_compute: Dict[str, float] = {t.kind.label: 0.0 for t in self.topo.tiers}
        self._sync_copies = 0
        self._groups: Dict[str, GroupMetrics] = {
            "overall": GroupMetrics(),
            **{cls.value: GroupMetrics() for cls in WorkloadClass},
        }

    # -- event plumbing -------------------------------------------------

    def _push(self, time_ms: float, kind: EventKind, request_id: int = -1) -> None:
        event = Event(time_ms=time_ms, seq=self._seq, kind=kind, request_id=request_id)
        heapq.heappush(self._heap, (time_ms, self._seq, event))
        self._seq += 1

    # -- public API ------------------------------------------------------

    def run(self) -> RunResult:
        requests = generate_stream(self.scenario.seed, self.scenario.workload)
        return self.run_requests(requests)

    def run_requests(
        self, requests: List[Request], duration_ms: Optional[float] = None
    ) -> RunResult:
        if duration_ms is None:
            duration_ms = self.scenario.workload.duration_ms
        for req in requests:
            self._requests[req.id] = req
            self._push(req.arrival_ms, EventKind.ARRIVAL, req.id)
        for tick in sync_tick_times(self.scenario.cache.sync_period_ms, duration_ms):
            self._push(tick, EventKind.SYNC_TICK)

        while self._heap:
            _, _, event = heapq.heappop(self._heap)
            if event.kind == EventKind.ARRIVAL:
                self._on_arrival(event)
            elif event.kind == EventKind.STAGE_COMPLETE:
                self._advance(self._active[event.request_id], event.time_ms)
            else:
                self._on_sync(event.time_ms)

        return RunResult(report=self._build_report(), records=self._final_records())

    # -- event handlers ---------------------------------------------------

    def _on_arrival(self, event: Event) -> None:
        req = self._requests[event.request_id]
        plan = dispatch(req, self.ctx)
        state = _Exec(req=req, plan=plan, waits=[0.0] * len(plan.stages))
        self._active[req.id] = state
        self._advance(state, event.time_ms)

    def _on_sync(self, now_ms: float) -> None:
        children = [k for k in reversed(self.topo.kinds) if self.topo.parent_of(k) is not None]
        for child_kind in children:
            parent_kind = self.topo.parent_of(child_kind)
            child, parent = self.caches[child_kind], self.caches[parent_kind]
            top_n = self.scenario.cache.sync_top_n
            if child.prompt is not None and parent.prompt is not None:
                self._sync_copies += sync_from_parent(child.prompt, parent.prompt, top_n, now_ms)
            if child.vector is not None and parent.vector is not None:
                self._sync_copies += sync_from_parent(child.vector, parent.vector, top_n, now_ms)

    def _advance(self, state: _Exec, now_ms: float) -> None:
        plan = state.plan
        while True:
            if state.stage_idx >= len(plan.stages):
                self._complete(state, now_ms)
                return
            stage = plan.stages[state.stage_idx]
            if state.phase == "start":
                network_ms = stage.latency_ms - stage.compute_ms
                state.phase = "acquire"
                if network_ms > 0:
                    self._push(now_ms + network_ms, EventKind.STAGE_COMPLETE, state.req.id)
                    return
                continue
            if state.phase == "acquire":
                if stage.compute_ms <= 0:
                    self._finish_stage(state, now_ms)
                    continue
                node = self._nodes[stage.tier]
                if node.busy < node.max_concurrent:
                    self._grant(state, stage.tier, now_ms, wait_ms=0.0)
                    return
                cap = self.scenario.queue_cap
                if cap is not None and len(node.queue) >= cap:
                    self._reject(state, now_ms)
                    return
                node.queue.append((state.req.id, now_ms))
                state.phase = "waiting"
                return
            if state.phase == "release":
                node = self._nodes[stage.tier]
                node.busy -= 1
                self._grant_next(node, now_ms)
                self._finish_stage(state, now_ms)
                continue
            raise RuntimeError(f"request {state.req.id} in unexpected phase {state.phase}")

    def _grant(self, state: _Exec, tier: TierKind, now_ms: float, wait_ms: float) -> None:
        stage = state.plan.stages[state.stage_idx]
        node = self._nodes[tier]
        node.busy += 1
        state.waits[state.stage_idx] += wait_ms
        self._per_tier_compute[tier.label] += stage.compute_ms
        state.phase = "release"
        self._push(now_ms + stage.compute_ms, EventKind.STAGE_COMPLETE, state.req.id)

    def _grant_next(self, node: _Node, now_ms: float) -> None:
        if not node.queue:
            return
        request_id, enqueued_ms = node.queue.popleft()
        waiter = self._active[request_id]
        tier = waiter.plan.stages[waiter.stage_idx].tier
        self._grant(waiter, tier, now_ms, wait_ms=now_ms - enqueued_ms)

    def _finish_stage(self, state: _Exec, now_ms: float) -> None:
        state.stage_end_ms.append(now_ms)
        state.stage_idx += 1
        state.phase = "start"

    # -- completion and accounting ----------------------------------------

    def _sla_bound(self, cls: WorkloadClass) -> float:
        return LATENCY_TARGETS_MS[cls][1]

    def _complete(self, state: _Exec, now_ms: float) -> None:
        req, plan = state.req, state.plan
        for action in plan.deferred_inserts:
            caches = self.caches.get(action.tier)
            if caches is None:
                continue
            if action.kind == "vector" and caches.vector is not None:
                caches.vector.insert(action.key, action.embedding, action.payload_tokens, now_ms)
            elif action.kind == "prompt" and caches.prompt is not None:
                caches.prompt.insert(action.key, action.payload_tokens, now_ms)

        total_ms = now_ms - req.arrival_ms
        violated = total_ms > self._sla_bound(req.cls)
        self._records[req.id] = self._make_record(state, total_ms, violated, completed=True)
        for group in (self._groups["overall"], self._groups[req.cls.value]):
            group.request_count += 1
            group.completed_count += 1
            group._samples.append(total_ms)
            group.prompt_lookups += plan.prompt_lookups
            group.prompt_hits += plan.prompt_hits
            group.semantic_lookups += plan.semantic_lookups
            group.semantic_hits += plan.semantic_hits
            group.upstream_bytes_total += plan.upstream_bytes
            group.sla_violations += 1 if violated else 0
            group.early_exit_count += 1 if plan.outcome == Outcome.EARLY_EXIT else 0
            group.outcomes[plan.outcome.value] = group.outcomes.get(plan.outcome.value, 0) + 1
        del self._active[req.id]

    def _reject(self, state: _Exec, now_ms: float) -> None:
        req, plan = state.req, state.plan
        self._records[req.id] = self._make_record(state, None, False, completed=False)
        for group in (self._groups["overall"], self._groups[req.cls.value]):
            group.request_count += 1
            group.rejected_count += 1
            group.prompt_lookups += plan.prompt_lookups
            group.prompt_hits += plan.prompt_hits
            group.semantic_lookups += plan.semantic_lookups
            group.semantic_hits += plan.semantic_hits
        del self._active[req.id]

    def _make_record(
        self, state: _Exec, total_ms: Optional[float], violated: bool, completed: bool
    ) -> Dict[str, Any]:
        req, plan = state.req, state.plan
        stages = []
        for i, stage in enumerate(plan.stages):
            stages.append(
                {
                    "label": stage.label,
                    "tier": stage.tier.label,
                    "latency_ms": stage.latency_ms,
                    "wait_ms": state.waits[i] if i < len(state.waits) else 0.0,
                    "compute_ms": stage.compute_ms,
                    "upstream_bytes": stage.upstream_bytes,
                    "end_ms": state.stage_end_ms[i] if i < len(state.stage_end_ms) else None,
                }
            )
        return {
            "id": req.id,
            "class": req.cls.value,
            "architecture": self.scenario.architecture.value,
            "outcome": plan.outcome.value,
            "completed": completed,
            "arrival_ms": req.arrival_ms,
            "total_ms": total_ms,
            "sla_violated": violated,
            "queue_wait_ms": sum(state.waits),
            "stages": stages,
        }

    def _final_records(self) -> List[Dict[str, Any]]:
        return [self._records[rid] for rid in sorted(self._records)]

    def _build_report(self) -> MetricsReport:
        for group in self._groups.values():
            group.finalize()
        return MetricsReport(
            architecture=self.scenario.architecture.value,
            seed=self.scenario.seed,
            overall=self._groups["overall"],
            per_class={cls.value: self._groups[cls.value] for cls in WorkloadClass},
            per_tier_compute_ms=self._per_tier_compute,
            sync_copies=self._sync_copies,
        )


def run(scenario: Scenario) -> RunResult:
    """Run one scenario to completion."""
    return Engine(scenario).run()
