import numpy as np
import pytest

from edgesim.topology import TierKind
from edgesim.workload import (
    Request,
    WorkloadClass,
    WorkloadConfig,
    WorkloadKind,
    class_of,
    default_tier_for,
    dump_stream,
    generate_stream,
    load_stream,
    zipf_pmf,
)

# Critical chi-square value, df=2, alpha=0.01.
CHI2_DF2_P01 = 9.21034


class TestClassOf:
    def test_ultra_low(self):
        assert class_of(5.0) == WorkloadClass.ULTRA_LOW

    def test_boundary_100_is_moderate(self):
        assert class_of(100.0) == WorkloadClass.MODERATE

    def test_boundary_10_is_ultra_low(self):
        assert class_of(10.0) == WorkloadClass.ULTRA_LOW

    def test_latency_tolerant(self):
        assert class_of(350.0) == WorkloadClass.LATENCY_TOLERANT

    def test_non_positive_rejected(self):
        with pytest.raises(ValueError):
            class_of(0.0)
        with pytest.raises(ValueError):
            class_of(-5.0)


class TestDefaultTier:
    def test_conversational_to_mec(self):
        assert default_tier_for(WorkloadClass.ULTRA_LOW, WorkloadKind.CONVERSATIONAL) == TierKind.MEC

    def test_semantic_search_to_regional(self):
        assert (
            default_tier_for(WorkloadClass.MODERATE, WorkloadKind.SEMANTIC_SEARCH)
            == TierKind.REGIONAL_DC
        )

    def test_batch_to_core(self):
        assert (
            default_tier_for(WorkloadClass.LATENCY_TOLERANT, WorkloadKind.BATCH_EMBEDDING)
            == TierKind.CORE_DC
        )

    def test_class_fallback(self):
        assert default_tier_for(WorkloadClass.ULTRA_LOW) == TierKind.MEC
        assert default_tier_for(WorkloadClass.MODERATE) == TierKind.REGIONAL_DC
        assert default_tier_for(WorkloadClass.LATENCY_TOLERANT) == TierKind.CORE_DC


def small_config(**kw):
    base = dict(duration_ms=5000.0, rate_per_sec=50.0, n_prompts=40, n_clusters=8)
    base.update(kw)
    return WorkloadConfig(**base)


class TestGenerateStream:
    def test_deterministic(self):
        cfg = small_config()
        a = generate_stream(123, cfg)
        b = generate_stream(123, cfg)
        assert len(a) == len(b) > 0
        for ra, rb in zip(a, b):
            assert ra.id == rb.id
            assert ra.arrival_ms == rb.arrival_ms
            assert ra.cls == rb.cls
            assert ra.prompt_tokens == rb.prompt_tokens
            assert ra.output_tokens == rb.output_tokens
            assert ra.population_rank == rb.population_rank
            assert ra.prompt_key == rb.prompt_key
            assert np.array_equal(ra.embedding, rb.embedding)

    def test_different_seeds_differ(self):
        cfg = small_config()
        a = generate_stream(123, cfg)
        b = generate_stream(124, cfg)
        assert [r.population_rank for r in a] != [r.population_rank for r in b]

    def test_zero_duration_empty(self):
        assert generate_stream(1, small_config(duration_ms=0.0)) == []

    def test_arrivals_non_decreasing(self):
        requests = generate_stream(5, small_config(duration_ms=20_000.0))
        arrivals = [r.arrival_ms for r in requests]
        assert arrivals == sorted(arrivals)
        assert all(a >= 0 for a in arrivals)

    def test_unit_norm_embeddings(self):
        requests = generate_stream(7, small_config())
        for r in requests:
            assert r.embedding.shape == (64,)
            assert abs(np.linalg.norm(r.embedding) - 1.0) < 1e-6

    def test_equal_rank_equal_key(self):
        requests = generate_stream(11, small_config(duration_ms=20_000.0, n_prompts=10))
        by_rank = {}
        for r in requests:
            by_rank.setdefault(r.population_rank, set()).add(r.prompt_key)
        assert all(len(keys) == 1 for keys in by_rank.values())

    def test_same_rank_same_cluster(self):
        # Zero noise means equal ranks produce identical embeddings.
        requests = generate_stream(3, small_config(cluster_noise_sigma=0.0, duration_ms=20_000.0))
        by_rank = {}
        for r in requests:
            by_rank.setdefault(r.population_rank, []).append(r.embedding)
        for vecs in by_rank.values():
            for v in vecs[1:]:
                assert np.array_equal(vecs[0], v)

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            small_config(class_mix=(0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            small_config(n_prompts=0)
        with pytest.raises(ValueError):
            small_config(rate_per_sec=0.0)
        with pytest.raises(ValueError):
            small_config(n_clusters=0)


@pytest.fixture(scope="module")
def big_stream():
    cfg = WorkloadConfig(
        duration_ms=50_000.0,
        rate_per_sec=2000.0,
        class_mix=(0.5, 0.3, 0.2),
        zipf_s=1.1,
        n_prompts=1000,
        n_clusters=50,
    )
    return generate_stream(7, cfg)


class TestDistributions:
    def test_stream_size(self, big_stream):
        assert len(big_stream) > 90_000

    def test_zipf_top_rank_mass(self, big_stream):
        pmf = zipf_pmf(1000, 1.1)
        counts = np.bincount([r.population_rank for r in big_stream], minlength=1001)
        top1 = counts[1] / len(big_stream)
        assert abs(top1 - pmf[0]) / pmf[0] < 0.10

    def test_class_mix_chi_square(self, big_stream):
        n = len(big_stream)
        observed = np.array(
            [
                sum(1 for r in big_stream if r.cls == WorkloadClass.ULTRA_LOW),
                sum(1 for r in big_stream if r.cls == WorkloadClass.MODERATE),
                sum(1 for r in big_stream if r.cls == WorkloadClass.LATENCY_TOLERANT),
            ]
        )
        expected = np.array([0.5, 0.3, 0.2]) * n
        chi2 = float(np.sum((observed - expected) ** 2 / expected))
        assert chi2 < CHI2_DF2_P01

    def test_uniform_when_s_zero(self):
        cfg = small_config(zipf_s=0.0, n_prompts=20, duration_ms=20_000.0, rate_per_sec=1000.0)
        requests = generate_stream(21, cfg)
        n = len(requests)
        counts = np.bincount([r.population_rank for r in requests], minlength=21)[1:]
        p = 1.0 / 20
        sigma = np.sqrt(n * p * (1 - p))
        assert np.all(np.abs(counts - n * p) <= 3 * sigma)

    def test_zipf_pmf_normalized(self):
        for s in (0.0, 0.7, 1.1, 2.0):
            pmf = zipf_pmf(500, s)
            assert pmf.shape == (500,)
            assert abs(pmf.sum() - 1.0) < 1e-12
            assert np.all(np.diff(pmf) <= 0)


class TestDumpLoad:
    def test_round_trip(self, tmp_path):
        requests = generate_stream(9, small_config())
        path = str(tmp_path / "stream.tsv")
        dump_stream(requests, path)
        loaded = load_stream(path)
        assert len(loaded) == len(requests)
        for orig, back in zip(requests, loaded):
            assert back.id == orig.id
            assert back.arrival_ms == orig.arrival_ms
            assert back.cls == orig.cls
            assert back.prompt_tokens == orig.prompt_tokens
            assert back.output_tokens == orig.output_tokens
            assert back.population_rank == orig.population_rank
            assert back.prompt_key == orig.prompt_key
            assert np.array_equal(back.embedding, orig.embedding)

    def test_request_validation(self):
        with pytest.raises(ValueError):
            Request(
                id=0,
                arrival_ms=0.0,
                cls=WorkloadClass.MODERATE,
                prompt_tokens=0,
                output_tokens=1,
                embedding=np.ones(4),
                prompt_key=1,
                population_rank=1,
            )
