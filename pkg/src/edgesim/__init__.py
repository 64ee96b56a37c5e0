"""edgesim: deterministic simulator of tiered edge inference serving.

Feeds synthetic foundational-model workloads through one of four deployment
architectures (edge vector cache, split inference, full edge inference,
RAG over the CDN hierarchy) and reports latency, hit-ratio and upstream
traffic metrics.
"""

from .engine import Engine, MetricsReport, RunResult, percentile, run
from .latency import (
    HardwareProfile,
    LatencyBreakdown,
    ModelProfile,
    Precision,
    attention_flops_per_head,
    generation_latency_ms,
    memory_bound_per_token_ms,
    model_forward_flops,
    multihead_flops,
    per_token_latency_ms,
    quantization_multiplier,
)
from .policies import ArchitectureKind, ExecutionPlan, Outcome, dispatch
from .scenario import ConfigError, Scenario, parse_scenario, parse_scenario_dict, scenario_to_dict
from .topology import TierKind, TierSpec, Topology, build_topology, path_between, sample_rtt_ms
from .workload import (
    Request,
    WorkloadClass,
    WorkloadConfig,
    WorkloadKind,
    class_of,
    default_tier_for,
    generate_stream,
)

__version__ = "0.1.0"

__all__ = [
    "ArchitectureKind",
    "ConfigError",
    "Engine",
    "ExecutionPlan",
    "HardwareProfile",
    "LatencyBreakdown",
    "MetricsReport",
    "ModelProfile",
    "Outcome",
    "Precision",
    "Request",
    "RunResult",
    "Scenario",
    "TierKind",
    "TierSpec",
    "Topology",
    "WorkloadClass",
    "WorkloadConfig",
    "WorkloadKind",
    "attention_flops_per_head",
    "build_topology",
    "class_of",
    "default_tier_for",
    "dispatch",
    "generate_stream",
    "generation_latency_ms",
    "memory_bound_per_token_ms",
    "model_forward_flops",
    "multihead_flops",
    "parse_scenario",
    "parse_scenario_dict",
    "path_between",
    "per_token_latency_ms",
    "percentile",
    "quantization_multiplier",
    "run",
    "sample_rtt_ms",
    "scenario_to_dict",
]
