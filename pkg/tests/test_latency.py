import numpy as np
import pytest

from edgesim.latency import (
    A100_LIKE,
    GPT3_LIKE,
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


def make_profile(**kw):
    base = dict(name="m", heads=4, embed_dim=32, layers=8, param_count=1_000_000)
    base.update(kw)
    return ModelProfile(**base)


class TestFlops:
    def test_per_head_reference_point(self):
        assert attention_flops_per_head(2048, 128) == 1_073_741_824

    def test_per_head_trivial(self):
        assert attention_flops_per_head(0, 64) == 0
        assert attention_flops_per_head(1, 1) == 2

    def test_multihead_reference_point(self):
        assert multihead_flops(2048, 128, 96) == 103_079_215_104

    def test_multihead_single_head_reduces(self):
        assert multihead_flops(2048, 128, 1) == attention_flops_per_head(2048, 128)

    def test_multihead_direct(self):
        assert multihead_flops(512, 64, 8) == 268_435_456

    def test_forward_gpt3_point(self):
        assert model_forward_flops(GPT3_LIKE, 2048) == 9_895_604_649_984

    def test_forward_small(self):
        profile = make_profile(layers=2, heads=2, embed_dim=4)
        assert model_forward_flops(profile, 3) == 288

    def test_forward_zero_tokens(self):
        assert model_forward_flops(GPT3_LIKE, 0) == 0

    def test_identities_random(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(0, 5000))
            d = int(rng.integers(1, 512))
            h = int(rng.integers(1, 128))
            layers = int(rng.integers(1, 100))
            per_head = attention_flops_per_head(n, d)
            assert multihead_flops(n, d, h) == h * per_head
            profile = make_profile(heads=h, embed_dim=d, layers=layers)
            assert model_forward_flops(profile, n) == layers * multihead_flops(n, d, h)

    def test_quadratic_scaling(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            n = int(rng.integers(1, 4096))
            d = int(rng.integers(1, 512))
            assert attention_flops_per_head(2 * n, d) == 4 * attention_flops_per_head(n, d)
            assert attention_flops_per_head(n + 1, d) > attention_flops_per_head(n, d)
            assert attention_flops_per_head(n, d + 1) > attention_flops_per_head(n, d)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            attention_flops_per_head(10, 0)
        with pytest.raises(ValueError):
            attention_flops_per_head(-1, 8)
        with pytest.raises(ValueError):
            multihead_flops(10, 8, 0)


class TestMemoryBound:
    def test_a100_int8_anchor(self):
        profile = make_profile(param_count=175_000_000_000, precision=Precision.INT8)
        assert memory_bound_per_token_ms(profile, A100_LIKE) == 109.375

    def test_fp32_anchor(self):
        profile = make_profile(param_count=175_000_000_000, precision=Precision.FP32)
        assert memory_bound_per_token_ms(profile, A100_LIKE) == 437.5

    def test_tiny(self):
        profile = make_profile(param_count=1, precision=Precision.FP32)
        hw = HardwareProfile("toy", flops_per_sec=1.0, mem_bandwidth_bytes_per_sec=4000.0)
        assert memory_bound_per_token_ms(profile, hw) == 1.0


class TestQuantization:
    @pytest.mark.parametrize(
        "precision,expected",
        [
            (Precision.FP32, 1.0),
            (Precision.FP16, 0.6),
            (Precision.INT8, 0.325),
            (Precision.INT4, 0.225),
        ],
    )
    def test_defaults(self, precision, expected):
        assert quantization_multiplier(precision) == expected

    def test_override(self):
        assert quantization_multiplier(Precision.INT4, {Precision.INT4: 0.25}) == 0.25
        assert quantization_multiplier(Precision.FP32, {Precision.INT4: 0.25}) == 1.0

    def test_unknown_precision_rejected(self):
        with pytest.raises(ValueError):
            quantization_multiplier("int2")


class TestPerTokenLatency:
    def test_calibrated_fp32(self):
        assert per_token_latency_ms(GPT3_LIKE, A100_LIKE, 2048) == 350.0

    def test_calibrated_int8(self):
        profile = make_profile(
            param_count=175_000_000_000, precision=Precision.INT8, base_per_token_ms=350.0
        )
        assert per_token_latency_ms(profile, A100_LIKE, 2048) == pytest.approx(113.75)

    def test_uncalibrated_memory_bound_dominates(self):
        profile = make_profile(param_count=1000, precision=Precision.FP32)
        hw = HardwareProfile("toy", flops_per_sec=1e12, mem_bandwidth_bytes_per_sec=1e6)
        assert per_token_latency_ms(profile, hw, 0) == memory_bound_per_token_ms(profile, hw)

    def test_never_below_bounds_times_multiplier(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            profile = make_profile(
                heads=int(rng.integers(1, 64)),
                embed_dim=int(rng.integers(1, 256)),
                layers=int(rng.integers(1, 64)),
                param_count=int(rng.integers(1, 10**12)),
                precision=list(Precision)[int(rng.integers(0, 4))],
            )
            hw = HardwareProfile(
                "h",
                flops_per_sec=float(rng.uniform(1e9, 1e15)),
                mem_bandwidth_bytes_per_sec=float(rng.uniform(1e6, 1e13)),
            )
            n_ctx = int(rng.integers(0, 4096))
            mult = quantization_multiplier(profile.precision)
            value = per_token_latency_ms(profile, hw, n_ctx)
            compute = model_forward_flops(profile, n_ctx) / hw.flops_per_sec * 1000.0
            bound = max(compute, memory_bound_per_token_ms(profile, hw)) * mult
            assert value >= bound
            assert np.isfinite(value) and value >= 0


class TestGeneration:
    def test_linear_in_tokens(self):
        assert generation_latency_ms(GPT3_LIKE, A100_LIKE, 10) == 3500.0

    def test_zero_tokens(self):
        assert generation_latency_ms(GPT3_LIKE, A100_LIKE, 0) == 0.0

    def test_int8_four_tokens(self):
        profile = make_profile(
            param_count=175_000_000_000, precision=Precision.INT8, base_per_token_ms=350.0
        )
        assert generation_latency_ms(profile, A100_LIKE, 4) == pytest.approx(455.0)


class TestProfiles:
    def test_bytes_per_param_derived(self):
        assert make_profile(precision=Precision.INT4).bytes_per_param == 0.5
        assert make_profile(precision=Precision.FP16).bytes_per_param == 2.0

    def test_bytes_per_param_mismatch_rejected(self):
        with pytest.raises(ValueError):
            make_profile(precision=Precision.INT8, bytes_per_param=4.0)

    def test_positive_fields_enforced(self):
        with pytest.raises(ValueError):
            make_profile(heads=0)
        with pytest.raises(ValueError):
            HardwareProfile("h", flops_per_sec=0.0, mem_bandwidth_bytes_per_sec=1.0)


class TestBreakdown:
    def test_total_is_sum(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            parts = rng.uniform(0, 100, 3)
            b = LatencyBreakdown(*[float(p) for p in parts])
            assert b.total_ms == b.compute_ms + b.network_ms + b.cache_lookup_ms

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            LatencyBreakdown(-1.0, 0.0, 0.0)
