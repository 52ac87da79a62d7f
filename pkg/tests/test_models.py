import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from hwroute.errors import GenerationError, ParameterError
from hwroute.metric import GridMetric, GridTopology
from hwroute.models import (ModelParams, generate, generate_kh,
                            generate_kleinberg, generate_on_metric,
                            generate_rh, generate_wnpa)
from hwroute.roadnet import RoadGraph, RoadMetric


def edge_sources(g):
    return np.repeat(np.arange(g.num_nodes), np.diff(g.indptr))


class TestParams:
    def test_kh_requires_square_k(self):
        with pytest.raises(ParameterError, match="square k"):
            ModelParams(model="kh", n=9, k=8).validated()

    def test_kh_requires_divisibility(self):
        with pytest.raises(ParameterError, match="multiple"):
            ModelParams(model="kh", n=9, k=16).validated()

    def test_rh_k_range(self):
        with pytest.raises(ParameterError):
            ModelParams(model="rh", n=8, k=0).validated()
        with pytest.raises(ParameterError):
            ModelParams(model="rh", n=8, k=64).validated()  # > n^2/log2 n

    def test_wnpa_param_checks(self):
        with pytest.raises(ParameterError):
            ModelParams(model="wnpa", n=8, eps=0.0, A=1.01).validated()
        with pytest.raises(ParameterError):
            ModelParams(model="wnpa", n=8, eps=0.5, A=0.9).validated()


class TestKleinberg:
    def test_q0_no_edges(self):
        g = generate(ModelParams(model="kleinberg", n=16, q=0.0), 1)
        assert g.edge_count == 0

    def test_q1_exact_degree(self):
        g = generate(ModelParams(model="kleinberg", n=16, q=1.0), 1)
        assert np.all(g.out_degrees() == 1)

    def test_local_neighborhood_size(self):
        m = GridMetric(GridTopology(9))
        assert all(len(m.ball(u, 1)) == 5 for u in range(81))

    def test_edge_length_distribution(self):
        # pooled edge lengths match d^-2 ring weights exactly normalized
        n, seed = 17, 3
        g = generate(ModelParams(model="kleinberg", n=n, q=1.0), seed)
        src = edge_sources(g)
        d = np.array([g.metric.distance(int(s), int(t))
                      for s, t in zip(src, g.targets)])
        m = GridMetric(GridTopology(n))
        ring_d = m.distances_from(0, np.arange(1, n * n))
        sizes = np.bincount(ring_d)
        radii = np.flatnonzero(sizes)
        w = sizes[radii] * radii.astype(float) ** -2.0
        probs = w / w.sum()
        counts = np.bincount(d, minlength=radii.max() + 1)[radii]
        assert stats.chisquare(counts, probs * len(d)).pvalue > 0.01

    def test_deterministic(self):
        a = generate(ModelParams(model="kleinberg", n=32, q=1.5), 9)
        b = generate(ModelParams(model="kleinberg", n=32, q=1.5), 9)
        assert np.array_equal(a.targets, b.targets)
        c = generate(ModelParams(model="kleinberg", n=32, q=1.5), 10)
        assert not np.array_equal(a.targets, c.targets)


class TestKH:
    def test_fig2_configuration(self):
        g = generate_kh(9, 9, 1.0 / 9.0, seed=4)
        assert int(g.is_highway.sum()) == 9
        assert g.edge_count == 9
        assert np.all(g.out_degrees()[g.is_highway] == 1)
        # highway anchored at coordinates divisible by sqrt(k)
        hw = g.highway_nodes()
        assert np.all(hw // 9 % 3 == 0) and np.all(hw % 9 % 3 == 0)

    def test_k1_reduces_to_kleinberg(self):
        a = generate_kleinberg(ModelParams(model="kleinberg", n=24, q=0.75), 6)
        b = generate_kh(24, 1, 0.75, seed=6)
        assert np.array_equal(a.indptr, b.indptr)
        assert np.array_equal(a.targets, b.targets)

    def test_highway_count_16(self):
        g = generate_kh(16, 16, 1.0, seed=2)
        assert int(g.is_highway.sum()) == 16  # n_H = 4

    def test_edges_highway_to_highway(self):
        g = generate_kh(32, 16, 1.0, seed=5)
        src = edge_sources(g)
        assert g.is_highway[src].all() and g.is_highway[g.targets].all()

    def test_total_edges_exact_for_integer_rate(self):
        g = generate_kh(32, 16, 1.0, seed=7)
        assert g.edge_count == 32 * 32  # (n^2/k) * Qk = n^2 Q


class TestRH:
    def test_k1_all_highway(self):
        g = generate_rh(16, 1, 1.0, seed=3)
        assert g.is_highway.all()

    def test_k1_identical_to_kleinberg(self):
        a = generate(ModelParams(model="kleinberg", n=32, q=1.0), 11)
        b = generate_rh(32, 1, 1.0, seed=11)
        assert np.array_equal(a.targets, b.targets)

    def test_highway_count_binomial(self):
        n, k, seeds = 64, 16, 200
        counts = [int(generate_rh(n, k, 1.0, seed=s).is_highway.sum())
                  for s in range(seeds)]
        mu = n * n / k
        sigma_mean = math.sqrt(n * n * (1 / k) * (1 - 1 / k) / seeds)
        assert abs(np.mean(counts) - mu) < 3 * sigma_mean

    def test_fig3_configuration(self):
        g = generate_rh(9, 9, 1.0 / 9.0, seed=1)
        deg = g.out_degrees()[g.is_highway]
        assert np.all(deg == 1)

    def test_edges_highway_to_highway(self):
        g = generate_rh(64, 4, 1.0, seed=9)
        src = edge_sources(g)
        assert g.is_highway[src].all() and g.is_highway[g.targets].all()

    def test_zero_highway_raises(self):
        # n=4, k=8 (cap n^2/log2 n = 8): P(no highway) = (7/8)^16 ~ 0.12
        raised = False
        for seed in range(60):
            try:
                generate_rh(4, 8, 1.0, seed=seed)
            except GenerationError:
                raised = True
                break
        assert raised

    def test_total_edges_mean(self):
        totals = [generate_rh(64, 4, 1.0, seed=s).edge_count for s in range(50)]
        mu = 64 * 64
        # total = 4 * H with H ~ Binomial(n^2, 1/4)
        sigma_mean = 4 * math.sqrt(64 * 64 * 0.25 * 0.75 / 50)
        assert abs(np.mean(totals) - mu) < 3 * sigma_mean

    def test_variant_local_adds_edges(self):
        base = generate_rh(64, 16, 1.0, seed=2)
        var = generate_rh(64, 16, 1.0, seed=2, variant_local=True)
        extra = var.edge_count - base.edge_count
        hcount = int(base.is_highway.sum())
        assert 0 < extra <= 8 * hcount
        # variant edges still join highway nodes
        src = edge_sources(var)
        assert var.is_highway[src].all() and var.is_highway[var.targets].all()


class TestWNPA:
    def test_window_invariant_exhaustive(self):
        g = generate_wnpa(64, 1.0, 0.5, 1.2, seed=8)
        src = edge_sources(g)
        ks, kt = g.popularity[src], g.popularity[g.targets]
        assert np.all(kt >= ks / 1.2 - 1e-12)
        assert np.all(kt <= ks * 1.2 + 1e-12)

    def test_mean_degree_large_window(self):
        # A large enough that windows never bind: mean out-degree = Q +- 2%
        g = generate_wnpa(1000, 1.0, 0.5, 1e9, seed=5)
        assert g.num_nodes == 1_000_000
        assert abs(g.edge_count / g.num_nodes - 1.0) < 0.02

    def test_highway_band_fraction(self):
        n, eps, A = 256, 0.5, 1.01
        g = generate_wnpa(n, 1.0, eps, A, seed=3)
        L = math.log2(n)
        frac = ((g.popularity >= L) & (g.popularity <= A * L)).mean()
        p, _ = quad(lambda k: (1 + eps) * k ** -(2 + eps), L, A * L)
        sigma = math.sqrt(p * (1 - p) / g.num_nodes)
        assert abs(frac - p) < 3 * sigma

    def test_highway_overlap_bound(self):
        # targets of band nodes land at popularity >= log2 n at least at the
        # window-overlap rate [1 + A^(1+eps)]^-1
        n, eps, A = 256, 0.5, 2.0
        g = generate_wnpa(n, 4.0, eps, A, seed=6)
        L = math.log2(n)
        src = edge_sources(g)
        band = (g.popularity[src] >= L) & (g.popularity[src] <= A * L)
        kt = g.popularity[g.targets[band]]
        assert band.sum() > 100
        bound = 1.0 / (1.0 + A ** (1 + eps))
        frac = (kt >= L).mean()
        sigma = math.sqrt(bound * (1 - bound) / band.sum())
        assert frac >= bound - 3 * sigma

    def test_uniform_window_weighting_mode(self):
        g = generate(ModelParams(model="wnpa", n=64, q=1.0, eps=0.5, A=1.2,
                                 window_weighting="uniform"), 4)
        src = edge_sources(g)
        ks, kt = g.popularity[src], g.popularity[g.targets]
        assert np.all(kt >= ks / 1.2 - 1e-12)
        d = np.array([g.metric.distance(int(s), int(t))
                      for s, t in zip(src, g.targets)])
        g2 = generate(ModelParams(model="wnpa", n=64, q=1.0, eps=0.5, A=1.2), 4)
        src2 = edge_sources(g2)
        d2 = np.array([g2.metric.distance(int(s), int(t))
                       for s, t in zip(src2, g2.targets)])
        # uniform weighting produces much longer edges than d^-2 weighting
        assert np.mean(d) > 2 * np.mean(d2)


class TestGenerateOnMetric:
    def test_two_node_metric(self):
        road = RoadGraph(num_nodes=2, edges=np.array([[0, 1]]),
                         weights=np.array([1]))
        m = RoadMetric(road)
        g = generate_on_metric(ModelParams(model="kleinberg", n=2, q=1.0,
                                           topology="road"), m, 5)
        assert g.edge_count == 2
        assert set(zip(edge_sources(g), g.targets)) == {(0, 1), (1, 0)}

    def test_grid_metric_identical_to_fast_path(self):
        params = ModelParams(model="kleinberg", n=24, q=1.0)
        a = generate_kleinberg(params, 9)
        b = generate_on_metric(params, GridMetric(GridTopology(24)), 9)
        assert np.array_equal(a.indptr, b.indptr)
        assert np.array_equal(a.targets, b.targets)

    def test_road_frequencies_match_normalization(self):
        # ~100-node road: pooled target picks from one source follow the
        # exact d^-2 normalization (brute-force oracle)
        rng = np.random.default_rng(0)
        n = 100
        extra = np.stack([rng.integers(0, n, 60), rng.integers(0, n, 60)], 1)
        chain = np.stack([np.arange(n - 1), np.arange(1, n)], 1)
        edges = np.concatenate([chain, extra])
        edges = edges[edges[:, 0] != edges[:, 1]]
        weights = rng.integers(1, 10, len(edges))
        road = RoadGraph(num_nodes=n, edges=edges.astype(np.int64),
                         weights=weights.astype(np.int64))
        m = RoadMetric(road)
        d = m.distances_from(0, np.arange(1, n)).astype(float)
        w = d ** -2.0
        probs = w / w.sum()
        from hwroute.sampling import Channel, ExplicitWeightSampler, uniforms
        sampler = ExplicitWeightSampler(np.arange(1, n), w)
        draws = sampler.sample(uniforms(3, Channel.EDGES, 0, np.arange(100_000)))
        counts = np.bincount(draws, minlength=n)[1:]
        assert stats.chisquare(counts, probs * len(draws)).pvalue > 0.01

    def test_component_restriction(self):
        # two disconnected 2-cliques: targets stay within the component
        road = RoadGraph(num_nodes=4,
                         edges=np.array([[0, 1], [2, 3]]),
                         weights=np.array([1, 1]))
        m = RoadMetric(road)
        g = generate_on_metric(ModelParams(model="kleinberg", n=2, q=1.0,
                                           topology="road"), m, 7)
        src = edge_sources(g)
        assert np.all(m.component_labels[src] == m.component_labels[g.targets])
