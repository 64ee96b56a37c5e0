"""Compute-side latency primitives for simulated foundational models.

Attention cost grows quadratically with sequence length, so forward FLOPs
are derived from the attention terms alone (2*n^2*d per head, times heads,
times layers). Weight streaming is modelled as a memory-bandwidth bound.
The per-token latency is the larger of the two bounds, scaled by the
precision's latency-retention multiplier; a profile calibrated with a
measured per-token figure bypasses the derivation entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional


class Precision(str, Enum):
    FP32 = "fp32"
    FP16 = "fp16"
    INT8 = "int8"
    INT4 = "int4"


#: Storage cost of one parameter at each precision.
BYTES_PER_PARAM = {
    Precision.FP32: 4.0,
    Precision.FP16: 2.0,
    Precision.INT8: 1.0,
    Precision.INT4: 0.5,
}

#: Latency retained after quantization, midpoints of published reduction
#: ranges (FP16 30-50% faster, INT8 60-75%, INT4 75-80%). Overridable per
#: scenario.
DEFAULT_QUANT_MULTIPLIERS = {
    Precision.FP32: 1.0,
    Precision.FP16: 0.6,
    Precision.INT8: 0.325,
    Precision.INT4: 0.225,
}


@dataclass(frozen=True)
class ModelProfile:
    """Parameters of a simulated foundational model.

    ``base_per_token_ms``, when set, is a calibrated per-token latency on
    reference hardware and takes precedence over the derived bounds (it
    absorbs compute the attention-only FLOP count does not model).
    ``bytes_per_param`` is derived from ``precision`` unless given
    explicitly, in which case it must agree with it.
    """

    name: str
    heads: int
    embed_dim: int
    layers: int
    param_count: int
    precision: Precision = Precision.FP32
    base_per_token_ms: Optional[float] = None
    bytes_per_param: Optional[float] = None

    def __post_init__(self) -> None:
        for field_name in ("heads", "embed_dim", "layers", "param_count"):
            value = getattr(self, field_name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{field_name} must be a positive integer, got {value!r}")
        expected = BYTES_PER_PARAM[Precision(self.precision)]
        if self.bytes_per_param is None:
            object.__setattr__(self, "bytes_per_param", expected)
        elif self.bytes_per_param != expected:
            raise ValueError(
                f"bytes_per_param {self.bytes_per_param} inconsistent with "
                f"precision {self.precision.value} (expected {expected})"
            )
        if self.base_per_token_ms is not None and self.base_per_token_ms <= 0:
            raise ValueError(f"base_per_token_ms must be positive, got {self.base_per_token_ms}")


@dataclass(frozen=True)
class HardwareProfile:
    """Sustained accelerator throughput and memory bandwidth."""

    name: str
    flops_per_sec: float
    mem_bandwidth_bytes_per_sec: float

    def __post_init__(self) -> None:
        if self.flops_per_sec <= 0:
            raise ValueError(f"flops_per_sec must be positive, got {self.flops_per_sec}")
        if self.mem_bandwidth_bytes_per_sec <= 0:
            raise ValueError(
                f"mem_bandwidth_bytes_per_sec must be positive, got {self.mem_bandwidth_bytes_per_sec}"
            )


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-request latency split into compute, network and cache-lookup time."""

    compute_ms: float
    network_ms: float
    cache_lookup_ms: float

    def __post_init__(self) -> None:
        for field_name in ("compute_ms", "network_ms", "cache_lookup_ms"):
            if getattr(self, field_name) < 0:
                raise ValueError(f"{field_name} must be non-negative")

    @property
    def total_ms(self) -> float:
        return self.compute_ms + self.network_ms + self.cache_lookup_ms


# Reference profiles used by the bundled scenarios.
GPT3_LIKE = ModelProfile(
    name="gpt3-175b",
    heads=96,
    embed_dim=128,
    layers=96,
    param_count=175_000_000_000,
    precision=Precision.FP32,
    base_per_token_ms=350.0,
)
A100_LIKE = HardwareProfile(
    name="a100",
    flops_per_sec=312e12,
    mem_bandwidth_bytes_per_sec=1.6e12,
)


def attention_flops_per_head(n: int, d: int) -> int:
    """FLOPs of one attention head over a sequence.

    Parameters
    ----------
    n : int
        Sequence length in tokens (n >= 0).
    d : int
        Embedding dimension (d >= 1).

    Returns
    -------
    int
        Exactly 2 * n^2 * d, computed in arbitrary-precision integers.
    """
    if n < 0:
        raise ValueError(f"sequence length must be >= 0, got {n}")
    if d < 1:
        raise ValueError(f"embedding dimension must be >= 1, got {d}")
    return 2 * n * n * d


def multihead_flops(n: int, d: int, h: int) -> int:
    """FLOPs of multi-head attention: h heads, each 2 * n^2 * d.

    Parameters
    ----------
    n : int
        Sequence length in tokens.
    d : int
        Embedding dimension.
    h : int
        Number of attention heads (h >= 1).

    Returns
    -------
    int
        Exactly 2 * h * n^2 * d.
    """
    if h < 1:
        raise ValueError(f"head count must be >= 1, got {h}")
    return h * attention_flops_per_head(n, d)


def model_forward_flops(profile: ModelProfile, n: int) -> int:
    """Attention-only forward FLOPs for a full model over ``n`` tokens.

    MLP-block cost is intentionally not modelled; calibrated profiles cover
    whatever the attention terms miss.
    """
    return profile.layers * multihead_flops(n, profile.embed_dim, profile.heads)


def memory_bound_per_token_ms(profile: ModelProfile, hw: HardwareProfile) -> float:
    """Per-token floor from streaming all weights over the memory bus.

    Returns ``param_count * bytes_per_param / mem_bandwidth`` in milliseconds.
    """
    assert profile.bytes_per_param is not None
    return profile.param_count * profile.bytes_per_param / hw.mem_bandwidth_bytes_per_sec * 1000.0


def quantization_multiplier(
    precision: Precision,
    overrides: Optional[Mapping[Precision, float]] = None,
) -> float:
    """Latency retention factor for a precision, honouring config overrides."""
    precision = Precision(precision)
    if overrides is not None and precision in overrides:
        return overrides[precision]
    return DEFAULT_QUANT_MULTIPLIERS[precision]


def per_token_latency_ms(
    profile: ModelProfile,
    hw: HardwareProfile,
    n_ctx: int,
    multipliers: Optional[Mapping[Precision, float]] = None,
) -> float:
    """Latency to produce one token with ``n_ctx`` tokens of context.

    Uncalibrated profiles take the larger of the compute-bound term
    (forward FLOPs over sustained throughput) and the memory-bound term,
    then apply the precision multiplier. A calibrated ``base_per_token_ms``
    replaces the max() but is still scaled by the multiplier.
    """
    if n_ctx < 0:
        raise ValueError(f"context length must be >= 0, got {n_ctx}")
    mult = quantization_multiplier(profile.precision, multipliers)
    if profile.base_per_token_ms is not None:
        return profile.base_per_token_ms * mult
    compute_ms = model_forward_flops(profile, n_ctx) / hw.flops_per_sec * 1000.0
    return max(compute_ms, memory_bound_per_token_ms(profile, hw)) * mult


def generation_latency_ms(
    profile: ModelProfile,
    hw: HardwareProfile,
    n_out: int,
    n_ctx: int = 0,
    multipliers: Optional[Mapping[Precision, float]] = None,
) -> float:
    """Latency to generate ``n_out`` tokens; linear in the token count."""
    if n_out < 0:
        raise ValueError(f"output token count must be >= 0, got {n_out}")
    return n_out * per_token_latency_ms(profile, hw, n_ctx, multipliers)
