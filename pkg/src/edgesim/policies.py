"""Routing policies: the four edge deployment architectures.

Each policy maps one request, given the topology and current cache state,
to an ordered plan of latency-bearing stages. Network conventions:

* Reaching the serving edge tier costs that tier's sampled user RTT.
* Forwarding inside the hierarchy (parent fetches, split-inference
  fallback, RAG document transfer) walks parent links and pays per-hop RTT
  differences (floored), so a fallback's wire cost telescopes to roughly
  the upper tier's RTT.
* A cache-miss handled by fresh cloud generation pays the full user-cloud
  RTT (the miss is answered by a new round trip to the top of the chain).

Within one plan each tier's RTT is sampled at most once and reused.
Upstream traffic is charged once per upload: dim_e * 4 bytes for a
forwarded embedding, 4 bytes per token for prompts and documents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .ann import ExactIndex, GraphIndex
from .cache import PromptCache, VectorCache
from .latency import HardwareProfile, ModelProfile, LatencyBreakdown, Precision, generation_latency_ms
from .rng import confidence_for_request
from .topology import TierKind, Topology, hop_latency_ms, path_between, sample_rtt_ms
from .workload import Request

BYTES_PER_TOKEN = 4
BYTES_PER_EMBED_VALUE = 4

LOOKUP_LABELS = frozenset({"prompt_lookup", "vector_lookup", "retrieve"})


class ArchitectureKind(str, Enum):
    VECTOR_CACHE_ONLY = "vector_cache_only"
    SPLIT_INFERENCE = "split_inference"
    FULL_EDGE = "full_edge"
    RAG_OVER_CDN = "rag_over_cdn"

    @classmethod
    def parse(cls, name: str) -> "ArchitectureKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown architecture {name!r} (valid: {valid})") from None


class Outcome(str, Enum):
    CACHE_HIT = "cache_hit"
    EARLY_EXIT = "early_exit"
    FALLBACK = "fallback"
    FULL_GENERATION = "full_generation"
    RAG_GENERATION = "rag_generation"


@dataclass
class PlanStage:
    """One latency-bearing step: total duration, slice that occupies a
    compute slot at the tier, and bytes sent upstream."""

    label: str
    tier: TierKind
    latency_ms: float
    upstream_bytes: int = 0
    compute_ms: float = 0.0


@dataclass
class InsertAction:
    """Cache write to apply when the request completes."""

    tier: TierKind
    kind: str  # "prompt" | "vector"
    key: int
    payload_tokens: int
    embedding: Optional[np.ndarray] = None


@dataclass
class ExecutionPlan:
    stages: List[PlanStage]
    outcome: Outcome
    deferred_inserts: List[InsertAction] = field(default_factory=list)
    prompt_lookups: int = 0
    prompt_hits: int = 0
    semantic_lookups: int = 0
    semantic_hits: int = 0
    retrieved_docs: List[int] = field(default_factory=list)

    @property
    def total_ms(self) -> float:
        return sum(stage.latency_ms for stage in self.stages)

    @property
    def upstream_bytes(self) -> int:
        return sum(stage.upstream_bytes for stage in self.stages)

    def breakdown(self) -> LatencyBreakdown:
        """Bucket stage time into compute / network / cache lookup."""
        compute = network = lookup = 0.0
        for stage in self.stages:
            if stage.label in LOOKUP_LABELS:
                lookup += stage.latency_ms
            else:
                compute += stage.compute_ms
                network += stage.latency_ms - stage.compute_ms
        return LatencyBreakdown(compute_ms=compute, network_ms=network, cache_lookup_ms=lookup)


@dataclass
class VectorCacheOnlyParams:
    edge_tier: TierKind = TierKind.NEAR_RAN
    miss_mode: str = "cloud_generate"  # or "parent_fetch"
    use_prompt_cache: bool = False
    insert_on_miss: bool = True

    def __post_init__(self) -> None:
        if self.miss_mode not in ("cloud_generate", "parent_fetch"):
            raise ValueError(
                f"miss_mode must be 'cloud_generate' or 'parent_fetch', got {self.miss_mode!r}"
            )


@dataclass
class SplitInferenceParams:
    confidence_threshold: float = 0.5
    edge_encoder_latency_ms: float = 25.0
    edge_tier: TierKind = TierKind.MEC
    fallback_tier: TierKind = TierKind.CLOUD
    hybrid_cache: bool = True
    encoder_mode: str = "flat"  # or "layer_fraction"
    encoder_layers: int = 6
    decoder_layers: int = 18

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError(
                f"confidence_threshold must be within [0, 1], got {self.confidence_threshold}"
            )
        if self.encoder_mode not in ("flat", "layer_fraction"):
            raise ValueError(
                f"encoder_mode must be 'flat' or 'layer_fraction', got {self.encoder_mode!r}"
            )
        if self.encoder_layers < 1 or self.decoder_layers < 0:
            raise ValueError("encoder_layers must be >= 1 and decoder_layers >= 0")


@dataclass
class FullEdgeParams:
    edge_tier: TierKind = TierKind.REGIONAL_DC
    model: str = "edge"  # name in the scenario model registry


@dataclass
class RagParams:
    k: int = 10
    retrieval_tier: TierKind = TierKind.REGIONAL_DC
    generation_tier: TierKind = TierKind.CORE_DC
    per_doc_tokens: int = 64
    embed_latency_ms: float = 3.0
    retrieval_latency_ms: float = 8.0
    edge_tier: TierKind = TierKind.MEC
    n_docs: int = 1000

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.per_doc_tokens < 0 or self.n_docs < 1:
            raise ValueError("per_doc_tokens must be >= 0 and n_docs >= 1")


ArchitectureParams = Union[VectorCacheOnlyParams, SplitInferenceParams, FullEdgeParams, RagParams]


@dataclass
class NodeCaches:
    prompt: Optional[PromptCache] = None
    vector: Optional[VectorCache] = None


@dataclass
class PolicyContext:
    """Everything a policy needs besides the request itself."""

    topo: Topology
    caches: Dict[TierKind, NodeCaches]
    generation_model: ModelProfile
    edge_models: Dict[str, ModelProfile]
    seed: int
    rtt_rng: np.random.Generator
    architecture: ArchitectureKind
    params: ArchitectureParams
    caching_enabled: bool = True
    vector_lookup_ms: float = 5.0
    prompt_lookup_ms: float = 1.0
    per_tier_lookup_ms: Dict[TierKind, Dict[str, float]] = field(default_factory=dict)
    multipliers: Optional[Mapping[Precision, float]] = None
    doc_index: Optional[Union[ExactIndex, GraphIndex]] = None

    def lookup_cost_ms(self, tier: TierKind, kind: str) -> float:
        override = self.per_tier_lookup_ms.get(tier)
        if override and kind in override:
            return override[kind]
        return self.vector_lookup_ms if kind == "vector" else self.prompt_lookup_ms


class _RttSampler:
    """Samples each tier's RTT at most once per plan."""

    def __init__(self, ctx: PolicyContext):
        self._ctx = ctx
        self._samples: Dict[TierKind, float] = {}

    def __call__(self, kind: TierKind) -> float:
        if kind not in self._samples:
            tier = self._ctx.topo.tier(kind)
            self._samples[kind] = sample_rtt_ms(tier, self._ctx.rtt_rng, self._ctx.topo.rtt_mode)
        return self._samples[kind]


def _hop_stages(
    start: TierKind, end: TierKind, ctx: PolicyContext, rtt: _RttSampler, first_hop_bytes: int
) -> List[PlanStage]:
    path = path_between(start, end, ctx.topo)
    stages = []
    for i, (src, dst) in enumerate(zip(path, path[1:])):
        upper, lower = (dst, src) if dst > src else (src, dst)
        stages.append(
            PlanStage(
                label=f"hop_to_{dst.label}",
                tier=dst,
                latency_ms=hop_latency_ms(rtt(upper), rtt(lower)),
                upstream_bytes=first_hop_bytes if i == 0 else 0,
            )
        )
    return stages


def _generate_stage(
    ctx: PolicyContext, tier: TierKind, model: ModelProfile, n_out: int, n_ctx: int
) -> PlanStage:
    hw = ctx.topo.tier(tier).hardware
    gen_ms = generation_latency_ms(model, hw, n_out, n_ctx=n_ctx, multipliers=ctx.multipliers)
    return PlanStage(label="generate", tier=tier, latency_ms=gen_ms, compute_ms=gen_ms)


def _try_prompt(plan: ExecutionPlan, ctx: PolicyContext, tier: TierKind, req: Request) -> bool:
    caches = ctx.caches.get(tier)
    if not ctx.caching_enabled or caches is None or caches.prompt is None:
        return False
    cost = ctx.lookup_cost_ms(tier, "prompt")
    plan.stages.append(
        PlanStage(label="prompt_lookup", tier=tier, latency_ms=cost, compute_ms=cost)
    )
    plan.prompt_lookups += 1
    if caches.prompt.lookup(req.prompt_key, req.arrival_ms) is not None:
        plan.prompt_hits += 1
        return True
    return False


def _try_vector(plan: ExecutionPlan, ctx: PolicyContext, tier: TierKind, req: Request) -> bool:
    caches = ctx.caches.get(tier)
    if not ctx.caching_enabled or caches is None or caches.vector is None:
        return False
    cost = ctx.lookup_cost_ms(tier, "vector")
    plan.stages.append(
        PlanStage(label="vector_lookup", tier=tier, latency_ms=cost, compute_ms=cost)
    )
    plan.semantic_lookups += 1
    if caches.vector.semantic_lookup(req.embedding, req.arrival_ms) is not None:
        plan.semantic_hits += 1
        return True
    return False


def _miss_inserts(
    req: Request, ctx: PolicyContext, tiers: List[TierKind], with_prompt: bool
) -> List[InsertAction]:
    actions = []
    for tier in tiers:
        caches = ctx.caches.get(tier)
        if caches is None:
            continue
        if caches.vector is not None:
            actions.append(
                InsertAction(
                    tier=tier,
                    kind="vector",
                    key=req.prompt_key,
                    payload_tokens=req.output_tokens,
                    embedding=req.embedding,
                )
            )
        if with_prompt and caches.prompt is not None:
            actions.append(
                InsertAction(
                    tier=tier, kind="prompt", key=req.prompt_key, payload_tokens=req.output_tokens
                )
            )
    return actions


def plan_vector_cache_only(
    req: Request, ctx: PolicyContext, params: VectorCacheOnlyParams
) -> ExecutionPlan:
    """Edge vector-cache lookup; a hit is served in place, a miss is either
    fetched from ancestors (parent_fetch) or regenerated in the cloud."""
    edge = params.edge_tier
    rtt = _RttSampler(ctx)
    plan = ExecutionPlan(stages=[], outcome=Outcome.CACHE_HIT)
    plan.stages.append(PlanStage(label="edge_rtt", tier=edge, latency_ms=rtt(edge)))

    if params.use_prompt_cache and _try_prompt(plan, ctx, edge, req):
        return plan
    if _try_vector(plan, ctx, edge, req):
        return plan

    insert_tiers: List[TierKind] = [edge] if (params.insert_on_miss and ctx.caching_enabled) else []
    if params.miss_mode == "parent_fetch":
        current = edge
        upload = req.embedding.shape[0] * BYTES_PER_EMBED_VALUE
        for i, ancestor in enumerate(ctx.topo.ancestors(edge)):
            plan.stages.append(
                PlanStage(
                    label=f"hop_to_{ancestor.label}",
                    tier=ancestor,
                    latency_ms=hop_latency_ms(rtt(ancestor), rtt(current)),
                    upstream_bytes=upload if i == 0 else 0,
                )
            )
            if params.use_prompt_cache and _try_prompt(plan, ctx, ancestor, req):
                plan.deferred_inserts = _miss_inserts(req, ctx, insert_tiers, params.use_prompt_cache)
                return plan
            if _try_vector(plan, ctx, ancestor, req):
                plan.deferred_inserts = _miss_inserts(req, ctx, insert_tiers, params.use_prompt_cache)
                return plan
            current = ancestor
        top = ctx.topo.topmost
        plan.stages.append(_generate_stage(ctx, top, ctx.generation_model, req.output_tokens, req.prompt_tokens))
        insert_tiers = insert_tiers + ([top] if ctx.caching_enabled and top != edge else [])
    else:
        top = ctx.topo.topmost
        plan.stages.append(
            PlanStage(
                label="cloud_rtt",
                tier=top,
                latency_ms=rtt(top),
                upstream_bytes=req.prompt_tokens * BYTES_PER_TOKEN,
            )
        )
        plan.stages.append(_generate_stage(ctx, top, ctx.generation_model, req.output_tokens, req.prompt_tokens))
        insert_tiers = insert_tiers + ([top] if ctx.caching_enabled and top != edge else [])

    plan.outcome = Outcome.FALLBACK
    plan.deferred_inserts = _miss_inserts(req, ctx, insert_tiers, params.use_prompt_cache)
    return plan


def plan_split_inference(
    req: Request, ctx: PolicyContext, params: SplitInferenceParams
) -> ExecutionPlan:
    """Edge encoder with confidence-gated early exit; low-confidence requests
    optionally probe the edge semantic cache, then fall back upstream."""
    edge = params.edge_tier
    rtt = _RttSampler(ctx)
    plan = ExecutionPlan(stages=[], outcome=Outcome.EARLY_EXIT)
    plan.stages.append(PlanStage(label="edge_rtt", tier=edge, latency_ms=rtt(edge)))

    encode_ms = params.edge_encoder_latency_ms
    if params.encoder_mode == "layer_fraction":
        fraction = min(1.0, params.encoder_layers / ctx.generation_model.layers)
        full = generation_latency_ms(
            ctx.generation_model,
            ctx.topo.tier(edge).hardware,
            1,
            n_ctx=req.prompt_tokens,
            multipliers=ctx.multipliers,
        )
        encode_ms = full * fraction
    plan.stages.append(PlanStage(label="encode", tier=edge, latency_ms=encode_ms, compute_ms=encode_ms))

    confidence = confidence_for_request(ctx.seed, req.id)
    if confidence >= params.confidence_threshold:
        return plan

    if params.hybrid_cache and _try_vector(plan, ctx, edge, req):
        plan.outcome = Outcome.CACHE_HIT
        return plan

    plan.outcome = Outcome.FALLBACK
    upload = req.embedding.shape[0] * BYTES_PER_EMBED_VALUE
    plan.stages.extend(_hop_stages(edge, params.fallback_tier, ctx, rtt, upload))
    plan.stages.append(
        _generate_stage(ctx, params.fallback_tier, ctx.generation_model, req.output_tokens, req.prompt_tokens)
    )
    if params.hybrid_cache and ctx.caching_enabled:
        plan.deferred_inserts = _miss_inserts(req, ctx, [edge], with_prompt=False)
    return plan


def plan_full_edge(req: Request, ctx: PolicyContext, params: FullEdgeParams) -> ExecutionPlan:
    """Full generation on the configured edge tier; nothing travels upstream."""
    edge = params.edge_tier
    model = ctx.edge_models.get(params.model)
    if model is None:
        raise ValueError(f"full_edge model {params.model!r} not defined in the model registry")
    rtt = _RttSampler(ctx)
    plan = ExecutionPlan(stages=[], outcome=Outcome.FULL_GENERATION)
    plan.stages.append(PlanStage(label="edge_rtt", tier=edge, latency_ms=rtt(edge)))
    plan.stages.append(_generate_stage(ctx, edge, model, req.output_tokens, req.prompt_tokens))
    return plan


def plan_rag_over_cdn(req: Request, ctx: PolicyContext, params: RagParams) -> ExecutionPlan:
    """Embed at the edge, retrieve top-k documents from the CDN-side index,
    ship them to the generation tier, generate with the widened context."""
    if ctx.doc_index is None or len(ctx.doc_index) == 0:
        raise ValueError("rag_over_cdn requires a populated document index")
    rtt = _RttSampler(ctx)
    plan = ExecutionPlan(stages=[], outcome=Outcome.RAG_GENERATION)

    edge_rtt = rtt(params.edge_tier)
    plan.stages.append(
        PlanStage(
            label="embed",
            tier=params.edge_tier,
            latency_ms=edge_rtt + params.embed_latency_ms,
            compute_ms=params.embed_latency_ms,
        )
    )
    retrieved = ctx.doc_index.query(req.embedding, params.k)
    plan.retrieved_docs = [doc_id for doc_id, _ in retrieved]
    plan.stages.append(
        PlanStage(
            label="retrieve",
            tier=params.retrieval_tier,
            latency_ms=params.retrieval_latency_ms,
            compute_ms=params.retrieval_latency_ms,
        )
    )

    doc_tokens = len(retrieved) * params.per_doc_tokens
    transfer_ms = 0.0
    if params.retrieval_tier != params.generation_tier:
        hops = _hop_stages(params.retrieval_tier, params.generation_tier, ctx, rtt, 0)
        transfer_ms = sum(stage.latency_ms for stage in hops)
    plan.stages.append(
        PlanStage(
            label="transfer",
            tier=params.generation_tier,
            latency_ms=transfer_ms,
            upstream_bytes=doc_tokens * BYTES_PER_TOKEN,
        )
    )
    plan.stages.append(
        _generate_stage(
            ctx,
            params.generation_tier,
            ctx.generation_model,
            req.output_tokens,
            req.prompt_tokens + doc_tokens,
        )
    )
    return plan


def dispatch(req: Request, ctx: PolicyContext) -> ExecutionPlan:
    """Route a request through the configured architecture."""
    kind = ctx.architecture
    if kind == ArchitectureKind.VECTOR_CACHE_ONLY:
        return plan_vector_cache_only(req, ctx, ctx.params)
    if kind == ArchitectureKind.SPLIT_INFERENCE:
        return plan_split_inference(req, ctx, ctx.params)
    if kind == ArchitectureKind.FULL_EDGE:
        return plan_full_edge(req, ctx, ctx.params)
    if kind == ArchitectureKind.RAG_OVER_CDN:
        return plan_rag_over_cdn(req, ctx, ctx.params)
    raise ValueError(f"unhandled architecture {kind!r}")
