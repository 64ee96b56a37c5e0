"""Scenario configuration: a single JSON document drives a whole run.

Sections mirror the subsystems (topology, workload, architecture, cache).
Every key has a documented default except ``seed`` and
``architecture.kind``; invalid or unknown keys fail fast with a diagnostic
naming the offending key path, never a silent fallback.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .latency import HardwareProfile, ModelProfile, Precision
from .policies import (
    ArchitectureKind,
    ArchitectureParams,
    FullEdgeParams,
    RagParams,
    SplitInferenceParams,
    VectorCacheOnlyParams,
)
from .topology import DEFAULT_RTT_RANGES, TierKind, TierSpec, Topology, build_topology
from .workload import WorkloadClass, WorkloadConfig


class ConfigError(ValueError):
    """Scenario file or value rejected; message names the offending key."""


DEFAULT_HARDWARE: Dict[str, Dict[str, float]] = {
    "a100": {"flops_per_sec": 312e12, "mem_bandwidth_bytes_per_sec": 1.6e12},
    "edge_gpu": {"flops_per_sec": 30e12, "mem_bandwidth_bytes_per_sec": 300e9},
    "edge_npu": {"flops_per_sec": 4e12, "mem_bandwidth_bytes_per_sec": 100e9},
}

DEFAULT_MODELS: Dict[str, Dict[str, Any]] = {
    "cloud-llm": {
        "heads": 96,
        "embed_dim": 128,
        "layers": 96,
        "param_count": 175_000_000_000,
        "precision": "fp32",
        "base_per_token_ms": 350.0,
    },
    "edge-7b": {
        "heads": 32,
        "embed_dim": 128,
        "layers": 32,
        "param_count": 7_000_000_000,
        "precision": "int4",
        "base_per_token_ms": 48.0,
    },
}

_DEFAULT_TIER_HW = {
    TierKind.NEAR_RAN: "edge_npu",
    TierKind.MEC: "edge_gpu",
    TierKind.REGIONAL_DC: "edge_gpu",
    TierKind.CORE_DC: "a100",
    TierKind.CLOUD: "a100",
}

_DEFAULT_TIER_CAPS = {
    TierKind.NEAR_RAN: (256, 512, 16),
    TierKind.MEC: (1024, 2048, 16),
    TierKind.REGIONAL_DC: (4096, 8192, 32),
    TierKind.CORE_DC: (16384, 32768, 64),
    TierKind.CLOUD: (65536, 65536, 256),
}


def default_tier_dicts() -> List[Dict[str, Any]]:
    tiers = []
    for kind in TierKind:
        vec, prm, conc = _DEFAULT_TIER_CAPS[kind]
        tiers.append(
            {
                "kind": kind.label,
                "rtt_ms_range": list(DEFAULT_RTT_RANGES[kind]),
                "hardware": _DEFAULT_TIER_HW[kind],
                "vector_cache_capacity": vec,
                "prompt_cache_capacity": prm,
                "max_concurrent": conc,
            }
        )
    return tiers


@dataclass
class CacheSettings:
    enabled: bool = True
    similarity_threshold: float = 0.85
    ann_mode: str = "exact"
    ann_m: int = 16
    ann_ef: int = 64
    vector_lookup_ms: float = 5.0
    prompt_lookup_ms: float = 1.0
    per_tier_lookup_ms: Dict[TierKind, Dict[str, float]] = field(default_factory=dict)
    sync_period_ms: float = 0.0
    sync_top_n: int = 16


@dataclass
class OutputSettings:
    dir: str = "out"


@dataclass
class Scenario:
    seed: int
    topology: Topology
    hardware: Dict[str, HardwareProfile]
    models: Dict[str, ModelProfile]
    generation_model: str
    workload: WorkloadConfig
    architecture: ArchitectureKind
    arch_params: Dict[ArchitectureKind, ArchitectureParams]
    cache: CacheSettings
    queue_cap: Optional[int]
    quantization_multipliers: Optional[Dict[Precision, float]]
    output: OutputSettings

    @property
    def active_params(self) -> ArchitectureParams:
        return self.arch_params[self.architecture]


def _type_name(value: Any) -> str:
    return type(value).__name__


def _check_keys(section: Dict[str, Any], path: str, allowed: set, required: set = frozenset()) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {_type_name(section)}")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {path + '.' if path else ''}{key}")
    for key in required:
        if key not in section:
            raise ConfigError(f"missing required key {path + '.' if path else ''}{key}")


def _num(section: Dict[str, Any], key: str, path: str, default: Any = None) -> Any:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {_type_name(value)}")
    return value


def _int(section: Dict[str, Any], key: str, path: str, default: Any = None) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {_type_name(value)}")
    return value


def _str(section: Dict[str, Any], key: str, path: str, default: Any = None) -> str:
    value = section.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"{path}.{key}: expected a string, got {_type_name(value)}")
    return value


def _bool(section: Dict[str, Any], key: str, path: str, default: bool) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a boolean, got {_type_name(value)}")
    return value


def _pair(section: Dict[str, Any], key: str, path: str, default: Any) -> Tuple[float, float]:
    value = section.get(key, default)
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path}.{key}: expected a [lo, hi] pair")
    lo, hi = value
    for v in (lo, hi):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}: expected numeric bounds")
    return float(lo), float(hi)


def _tier_kind(name: Any, path: str) -> TierKind:
    if not isinstance(name, str):
        raise ConfigError(f"{path}: expected a tier name string")
    try:
        return TierKind.parse(name)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_hardware(data: Dict[str, Any]) -> Dict[str, HardwareProfile]:
    profiles = {}
    for name, entry in data.items():
        path = f"hardware.{name}"
        _check_keys(entry, path, {"flops_per_sec", "mem_bandwidth_bytes_per_sec"})
        try:
            profiles[name] = HardwareProfile(
                name=name,
                flops_per_sec=float(_num(entry, "flops_per_sec", path)),
                mem_bandwidth_bytes_per_sec=float(_num(entry, "mem_bandwidth_bytes_per_sec", path)),
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return profiles


def _parse_models(data: Dict[str, Any]) -> Dict[str, ModelProfile]:
    models = {}
    allowed = {"heads", "embed_dim", "layers", "param_count", "precision", "base_per_token_ms", "bytes_per_param"}
    for name, entry in data.items():
        path = f"models.{name}"
        _check_keys(entry, path, allowed, {"heads", "embed_dim", "layers", "param_count"})
        precision_name = _str(entry, "precision", path, "fp32")
        try:
            precision = Precision(precision_name.lower())
        except ValueError:
            valid = ", ".join(p.value for p in Precision)
            raise ConfigError(f"{path}.precision: unknown precision {precision_name!r} (valid: {valid})") from None
        base = entry.get("base_per_token_ms")
        if base is not None:
            base = float(_num(entry, "base_per_token_ms", path))
        bpp = entry.get("bytes_per_param")
        if bpp is not None:
            bpp = float(_num(entry, "bytes_per_param", path))
        try:
            models[name] = ModelProfile(
                name=name,
                heads=_int(entry, "heads", path),
                embed_dim=_int(entry, "embed_dim", path),
                layers=_int(entry, "layers", path),
                param_count=_int(entry, "param_count", path),
                precision=precision,
                base_per_token_ms=base,
                bytes_per_param=bpp,
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return models


def _parse_topology(data: Dict[str, Any], hardware: Dict[str, HardwareProfile]) -> Topology:
    _check_keys(data, "topology", {"rtt_mode", "tiers"})
    rtt_mode = _str(data, "rtt_mode", "topology", "uniform")
    tier_dicts = data.get("tiers", default_tier_dicts())
    if not isinstance(tier_dicts, list) or not tier_dicts:
        raise ConfigError("topology.tiers: expected a non-empty list of tiers")
    tiers = []
    allowed = {"kind", "rtt_ms_range", "hardware", "vector_cache_capacity", "prompt_cache_capacity", "max_concurrent"}
    for i, entry in enumerate(tier_dicts):
        path = f"topology.tiers.{i}"
        _check_keys(entry, path, allowed, {"kind"})
        kind = _tier_kind(entry.get("kind"), f"{path}.kind")
        hw_name = _str(entry, "hardware", path, _DEFAULT_TIER_HW[kind])
        if hw_name not in hardware:
            raise ConfigError(f"{path}.hardware: undefined hardware profile {hw_name!r}")
        defaults = _DEFAULT_TIER_CAPS[kind]
        try:
            tiers.append(
                TierSpec(
                    kind=kind,
                    rtt_ms_range=_pair(entry, "rtt_ms_range", path, list(DEFAULT_RTT_RANGES[kind])),
                    hardware=hardware[hw_name],
                    vector_cache_capacity=_int(entry, "vector_cache_capacity", path, defaults[0]),
                    prompt_cache_capacity=_int(entry, "prompt_cache_capacity", path, defaults[1]),
                    max_concurrent=_int(entry, "max_concurrent", path, defaults[2]),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        return build_topology(tiers, rtt_mode=rtt_mode)
    except ValueError as exc:
        raise ConfigError(f"topology: {exc}") from None


def _parse_workload(data: Dict[str, Any]) -> WorkloadConfig:
    allowed = {
        "duration_ms", "rate_per_sec", "class_mix", "zipf_s", "n_prompts", "n_clusters",
        "cluster_noise_sigma", "dim_e", "prompt_token_range", "output_token_ranges",
    }
    _check_keys(data, "workload", allowed)
    defaults = WorkloadConfig()
    mix = data.get("class_mix", list(defaults.class_mix))
    if not isinstance(mix, list) or len(mix) != 3:
        raise ConfigError("workload.class_mix: expected three weights [ultra_low, moderate, latency_tolerant]")
    ranges = dict(defaults.output_token_ranges)
    if "output_token_ranges" in data:
        entry = data["output_token_ranges"]
        _check_keys(entry, "workload.output_token_ranges", {c.value for c in WorkloadClass})
        for cls_name, pair in entry.items():
            lo, hi = _pair(entry, cls_name, "workload.output_token_ranges", pair)
            ranges[WorkloadClass(cls_name)] = (int(lo), int(hi))
    lo, hi = _pair(data, "prompt_token_range", "workload", list(defaults.prompt_token_range))
    try:
        return WorkloadConfig(
            duration_ms=float(_num(data, "duration_ms", "workload", defaults.duration_ms)),
            rate_per_sec=float(_num(data, "rate_per_sec", "workload", defaults.rate_per_sec)),
            class_mix=tuple(float(w) for w in mix),
            zipf_s=float(_num(data, "zipf_s", "workload", defaults.zipf_s)),
            n_prompts=_int(data, "n_prompts", "workload", defaults.n_prompts),
            n_clusters=_int(data, "n_clusters", "workload", defaults.n_clusters),
            cluster_noise_sigma=float(_num(data, "cluster_noise_sigma", "workload", defaults.cluster_noise_sigma)),
            dim_e=_int(data, "dim_e", "workload", defaults.dim_e),
            prompt_token_range=(int(lo), int(hi)),
            output_token_ranges=ranges,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"workload: {exc}") from None


def _parse_architecture(
    data: Dict[str, Any], topo: Topology, models: Dict[str, ModelProfile]
) -> Tuple[ArchitectureKind, Dict[ArchitectureKind, ArchitectureParams]]:
    sections = {k.value for k in ArchitectureKind}
    _check_keys(data, "architecture", sections | {"kind"}, {"kind"})
    kind_name = _str(data, "kind", "architecture")
    try:
        kind = ArchitectureKind.parse(kind_name)
    except ValueError as exc:
        raise ConfigError(f"architecture.kind: {exc}") from None

    def tier_ref(section: Dict[str, Any], key: str, path: str, default: TierKind) -> TierKind:
        if key not in section:
            return default
        return _tier_kind(section[key], f"{path}.{key}")

    params: Dict[ArchitectureKind, ArchitectureParams] = {}

    vco = data.get("vector_cache_only", {})
    path = "architecture.vector_cache_only"
    _check_keys(vco, path, {"edge_tier", "miss_mode", "use_prompt_cache", "insert_on_miss"})
    try:
        params[ArchitectureKind.VECTOR_CACHE_ONLY] = VectorCacheOnlyParams(
            edge_tier=tier_ref(vco, "edge_tier", path, TierKind.NEAR_RAN),
            miss_mode=_str(vco, "miss_mode", path, "cloud_generate"),
            use_prompt_cache=_bool(vco, "use_prompt_cache", path, False),
            insert_on_miss=_bool(vco, "insert_on_miss", path, True),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    spl = data.get("split_inference", {})
    path = "architecture.split_inference"
    _check_keys(spl, path, {
        "confidence_threshold", "edge_encoder_latency_ms", "edge_tier", "fallback_tier",
        "hybrid_cache", "encoder_mode", "encoder_layers", "decoder_layers",
    })
    try:
        params[ArchitectureKind.SPLIT_INFERENCE] = SplitInferenceParams(
            confidence_threshold=float(_num(spl, "confidence_threshold", path, 0.5)),
            edge_encoder_latency_ms=float(_num(spl, "edge_encoder_latency_ms", path, 25.0)),
            edge_tier=tier_ref(spl, "edge_tier", path, TierKind.MEC),
            fallback_tier=tier_ref(spl, "fallback_tier", path, TierKind.CLOUD),
            hybrid_cache=_bool(spl, "hybrid_cache", path, True),
            encoder_mode=_str(spl, "encoder_mode", path, "flat"),
            encoder_layers=_int(spl, "encoder_layers", path, 6),
            decoder_layers=_int(spl, "decoder_layers", path, 18),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    fue = data.get("full_edge", {})
    path = "architecture.full_edge"
    _check_keys(fue, path, {"edge_tier", "model"})
    params[ArchitectureKind.FULL_EDGE] = FullEdgeParams(
        edge_tier=tier_ref(fue, "edge_tier", path, TierKind.REGIONAL_DC),
        model=_str(fue, "model", path, "edge-7b"),
    )

    rag = data.get("rag_over_cdn", {})
    path = "architecture.rag_over_cdn"
    _check_keys(rag, path, {
        "k", "retrieval_tier", "generation_tier", "per_doc_tokens",
        "embed_latency_ms", "retrieval_latency_ms", "edge_tier", "n_docs",
    })
    try:
        params[ArchitectureKind.RAG_OVER_CDN] = RagParams(
            k=_int(rag, "k", path, 10),
            retrieval_tier=tier_ref(rag, "retrieval_tier", path, TierKind.REGIONAL_DC),
            generation_tier=tier_ref(rag, "generation_tier", path, TierKind.CORE_DC),
            per_doc_tokens=_int(rag, "per_doc_tokens", path, 64),
            embed_latency_ms=float(_num(rag, "embed_latency_ms", path, 3.0)),
            retrieval_latency_ms=float(_num(rag, "retrieval_latency_ms", path, 8.0)),
            edge_tier=tier_ref(rag, "edge_tier", path, TierKind.MEC),
            n_docs=_int(rag, "n_docs", path, 1000),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    # Tier references of the active architecture must exist in the topology.
    active = params[kind]
    refs: List[Tuple[str, TierKind]] = []
    if isinstance(active, VectorCacheOnlyParams):
        refs = [("architecture.vector_cache_only.edge_tier", active.edge_tier)]
    elif isinstance(active, SplitInferenceParams):
        refs = [
            ("architecture.split_inference.edge_tier", active.edge_tier),
            ("architecture.split_inference.fallback_tier", active.fallback_tier),
        ]
    elif isinstance(active, FullEdgeParams):
        refs = [("architecture.full_edge.edge_tier", active.edge_tier)]
        if active.model not in models:
            raise ConfigError(f"architecture.full_edge.model: undefined model {active.model!r}")
    elif isinstance(active, RagParams):
        refs = [
            ("architecture.rag_over_cdn.edge_tier", active.edge_tier),
            ("architecture.rag_over_cdn.retrieval_tier", active.retrieval_tier),
            ("architecture.rag_over_cdn.generation_tier", active.generation_tier),
        ]
    for key, tier in refs:
        if not topo.has(tier):
            raise ConfigError(f"{key}: tier {tier.label} not present in topology.tiers")
    return kind, params


def _parse_cache(data: Dict[str, Any]) -> CacheSettings:
    allowed = {
        "enabled", "similarity_threshold", "ann_mode", "ann_m", "ann_ef",
        "vector_lookup_ms", "prompt_lookup_ms", "per_tier_lookup_ms",
        "sync_period_ms", "sync_top_n",
    }
    _check_keys(data, "cache", allowed)
    defaults = CacheSettings()
    tau = float(_num(data, "similarity_threshold", "cache", defaults.similarity_threshold))
    if not -1.0 <= tau <= 1.0:
        raise ConfigError(f"cache.similarity_threshold: must be within [-1, 1], got {tau}")
    ann_mode = _str(data, "ann_mode", "cache", defaults.ann_mode)
    if ann_mode not in ("exact", "approximate"):
        raise ConfigError(f"cache.ann_mode: must be 'exact' or 'approximate', got {ann_mode!r}")
    per_tier: Dict[TierKind, Dict[str, float]] = {}
    for tier_name, entry in data.get("per_tier_lookup_ms", {}).items():
        kind = _tier_kind(tier_name, "cache.per_tier_lookup_ms")
        _check_keys(entry, f"cache.per_tier_lookup_ms.{tier_name}", {"vector", "prompt"})
        per_tier[kind] = {k: float(v) for k, v in entry.items()}
    sync_period = float(_num(data, "sync_period_ms", "cache", defaults.sync_period_ms))
    if sync_period < 0:
        raise ConfigError(f"cache.sync_period_ms: must be >= 0, got {sync_period}")
    sync_top_n = _int(data, "sync_top_n", "cache", defaults.sync_top_n)
    if sync_top_n < 1:
        raise ConfigError(f"cache.sync_top_n: must be >= 1, got {sync_top_n}")
    ann_m = _int(data, "ann_m", "cache", defaults.ann_m)
    ann_ef = _int(data, "ann_ef", "cache", defaults.ann_ef)
    if ann_m < 2 or ann_ef < 1:
        raise ConfigError("cache.ann_m must be >= 2 and cache.ann_ef >= 1")
    vector_ms = float(_num(data, "vector_lookup_ms", "cache", defaults.vector_lookup_ms))
    prompt_ms = float(_num(data, "prompt_lookup_ms", "cache", defaults.prompt_lookup_ms))
    if vector_ms < 0 or prompt_ms < 0:
        raise ConfigError("cache lookup costs must be >= 0")
    return CacheSettings(
        enabled=_bool(data, "enabled", "cache", True),
        similarity_threshold=tau,
        ann_mode=ann_mode,
        ann_m=ann_m,
        ann_ef=ann_ef,
        vector_lookup_ms=vector_ms,
        prompt_lookup_ms=prompt_ms,
        per_tier_lookup_ms=per_tier,
        sync_period_ms=sync_period,
        sync_top_n=sync_top_n,
    )


TOP_LEVEL_KEYS = {
    "seed", "topology", "hardware", "models", "generation_model", "workload",
    "architecture", "cache", "queue_cap", "quantization_multipliers", "output",
}


def parse_scenario_dict(data: Dict[str, Any]) -> Scenario:
    _check_keys(data, "", TOP_LEVEL_KEYS, {"seed", "architecture"})
    seed = _int(data, "seed", "config")
    if not 0 <= seed < (1 << 64):
        raise ConfigError(f"seed: must be within [0, 2^64), got {seed}")

    hardware = dict(DEFAULT_HARDWARE)
    hardware.update(data.get("hardware", {}))
    hw_profiles = _parse_hardware(hardware)

    model_dicts = dict(DEFAULT_MODELS)
    model_dicts.update(data.get("models", {}))
    models = _parse_models(model_dicts)

    generation_model = _str(data, "generation_model", "config", "cloud-llm")
    if generation_model not in models:
        raise ConfigError(f"generation_model: undefined model {generation_model!r}")

    topo = _parse_topology(data.get("topology", {}), hw_profiles)
    workload = _parse_workload(data.get("workload", {}))
    architecture, arch_params = _parse_architecture(data.get("architecture", {}), topo, models)
    cache = _parse_cache(data.get("cache", {}))

    queue_cap = data.get("queue_cap")
    if queue_cap is not None:
        queue_cap = _int(data, "queue_cap", "config")
        if queue_cap < 1:
            raise ConfigError(f"queue_cap: must be >= 1 or null, got {queue_cap}")

    multipliers: Optional[Dict[Precision, float]] = None
    if data.get("quantization_multipliers") is not None:
        entry = data["quantization_multipliers"]
        _check_keys(entry, "quantization_multipliers", {p.value for p in Precision})
        multipliers = {}
        for prec_name, value in entry.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"quantization_multipliers.{prec_name}: must be a positive number")
            multipliers[Precision(prec_name)] = float(value)

    out = data.get("output", {})
    _check_keys(out, "output", {"dir"})
    output = OutputSettings(dir=_str(out, "dir", "output", "out"))

    return Scenario(
        seed=seed,
        topology=topo,
        hardware=hw_profiles,
        models=models,
        generation_model=generation_model,
        workload=workload,
        architecture=architecture,
        arch_params=arch_params,
        cache=cache,
        queue_cap=queue_cap,
        quantization_multipliers=multipliers,
        output=output,
    )


def parse_scenario(path: str) -> Scenario:
    """Load and validate a scenario file; diagnostics name key and line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario_dict(data)


def scenario_to_dict(sc: Scenario) -> Dict[str, Any]:
    """Canonical dict form with every default materialized; parsing it back
    yields an equal Scenario."""
    data: Dict[str, Any] = {
        "seed": sc.seed,
        "hardware": {
            name: {
                "flops_per_sec": hw.flops_per_sec,
                "mem_bandwidth_bytes_per_sec": hw.mem_bandwidth_bytes_per_sec,
            }
            for name, hw in sorted(sc.hardware.items())
        },
        "models": {
            name: {
                "heads": m.heads,
                "embed_dim": m.embed_dim,
                "layers": m.layers,
                "param_count": m.param_count,
                "precision": m.precision.value,
                "base_per_token_ms": m.base_per_token_ms,
            }
            for name, m in sorted(sc.models.items())
        },
        "generation_model": sc.generation_model,
        "topology": {
            "rtt_mode": sc.topology.rtt_mode,
            "tiers": [
                {
                    "kind": t.kind.label,
                    "rtt_ms_range": list(t.rtt_ms_range),
                    "hardware": t.hardware.name,
                    "vector_cache_capacity": t.vector_cache_capacity,
                    "prompt_cache_capacity": t.prompt_cache_capacity,
                    "max_concurrent": t.max_concurrent,
                }
                for t in sc.topology.tiers
            ],
        },
        "workload": {
            "duration_ms": sc.workload.duration_ms,
            "rate_per_sec": sc.workload.rate_per_sec,
            "class_mix": list(sc.workload.class_mix),
            "zipf_s": sc.workload.zipf_s,
            "n_prompts": sc.workload.n_prompts,
            "n_clusters": sc.workload.n_clusters,
            "cluster_noise_sigma": sc.workload.cluster_noise_sigma,
            "dim_e": sc.workload.dim_e,
            "prompt_token_range": list(sc.workload.prompt_token_range),
            "output_token_ranges": {
                cls.value: list(rng) for cls, rng in sorted(
                    sc.workload.output_token_ranges.items(), key=lambda kv: kv[0].value
                )
            },
        },
        "architecture": _arch_to_dict(sc),
        "cache": {
            "enabled": sc.cache.enabled,
            "similarity_threshold": sc.cache.similarity_threshold,
            "ann_mode": sc.cache.ann_mode,
            "ann_m": sc.cache.ann_m,
            "ann_ef": sc.cache.ann_ef,
            "vector_lookup_ms": sc.cache.vector_lookup_ms,
            "prompt_lookup_ms": sc.cache.prompt_lookup_ms,
            "per_tier_lookup_ms": {
                kind.label: dict(costs) for kind, costs in sorted(sc.cache.per_tier_lookup_ms.items())
            },
            "sync_period_ms": sc.cache.sync_period_ms,
            "sync_top_n": sc.cache.sync_top_n,
        },
        "queue_cap": sc.queue_cap,
        "output": {"dir": sc.output.dir},
    }
    if sc.quantization_multipliers is not None:
        data["quantization_multipliers"] = {
            p.value: v for p, v in sorted(sc.quantization_multipliers.items(), key=lambda kv: kv[0].value)
        }
    return data


def _arch_to_dict(sc: Scenario) -> Dict[str, Any]:
    vco = sc.arch_params[ArchitectureKind.VECTOR_CACHE_ONLY]
    spl = sc.arch_params[ArchitectureKind.SPLIT_INFERENCE]
    fue = sc.arch_params[ArchitectureKind.FULL_EDGE]
    rag = sc.arch_params[ArchitectureKind.RAG_OVER_CDN]
    return {
        "kind": sc.architecture.value,
        "vector_cache_only": {
            "edge_tier": vco.edge_tier.label,
            "miss_mode": vco.miss_mode,
            "use_prompt_cache": vco.use_prompt_cache,
            "insert_on_miss": vco.insert_on_miss,
        },
        "split_inference": {
            "confidence_threshold": spl.confidence_threshold,
            "edge_encoder_latency_ms": spl.edge_encoder_latency_ms,
            "edge_tier": spl.edge_tier.label,
            "fallback_tier": spl.fallback_tier.label,
            "hybrid_cache": spl.hybrid_cache,
            "encoder_mode": spl.encoder_mode,
            "encoder_layers": spl.encoder_layers,
            "decoder_layers": spl.decoder_layers,
        },
        "full_edge": {"edge_tier": fue.edge_tier.label, "model": fue.model},
        "rag_over_cdn": {
            "k": rag.k,
            "retrieval_tier": rag.retrieval_tier.label,
            "generation_tier": rag.generation_tier.label,
            "per_doc_tokens": rag.per_doc_tokens,
            "embed_latency_ms": rag.embed_latency_ms,
            "retrieval_latency_ms": rag.retrieval_latency_ms,
            "edge_tier": rag.edge_tier.label,
            "n_docs": rag.n_docs,
        },
    }


def serialize_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=False) + "\n"


def get_by_path(data: Dict[str, Any], dotted: str) -> Any:
    node: Any = data
    for part in dotted.split("."):
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise ConfigError(f"sweep parameter {dotted!r} not found (bad list index {part!r})") from None
        elif isinstance(node, dict):
            if part not in node:
                raise ConfigError(f"sweep parameter {dotted!r} not found (missing key {part!r})")
            node = node[part]
        else:
            raise ConfigError(f"sweep parameter {dotted!r} not found (cannot descend into {_type_name(node)})")
    return node


def set_by_path(data: Dict[str, Any], dotted: str, value: Any) -> Dict[str, Any]:
    """Return a deep copy of ``data`` with the dotted path replaced."""
    result = copy.deepcopy(data)
    parts = dotted.split(".")
    node: Any = result
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
    return result
