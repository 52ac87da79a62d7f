import math

import numpy as np
import pytest
from scipy import stats

from hwroute.errors import ParameterError
from hwroute.metric import GridMetric, GridTopology
from hwroute.sampling import (Channel, ExplicitWeightSampler, RngStream,
                              TorusRingSampler, connection_count,
                              connection_counts, popularity_cdf,
                              sample_inverse_square_target, sample_popularity,
                              torus_ring_table, uniforms)


class _FixedStream:
    """Stub stream yielding a fixed uniform sequence."""

    def __init__(self, values):
        self._values = list(values)

    def uniform(self):
        return self._values.pop(0)


class TestStreams:
    def test_same_key_same_sequence(self):
        a = RngStream(seed=42, node=7)
        b = RngStream(seed=42, node=7)
        assert [a.uniform() for _ in range(20)] == [b.uniform() for _ in range(20)]

    def test_distinct_nodes_differ(self):
        a = RngStream(seed=42, node=7)
        b = RngStream(seed=42, node=8)
        assert [a.uniform() for _ in range(8)] != [b.uniform() for _ in range(8)]

    def test_array_matches_scalar(self):
        a = RngStream(seed=1, node=3)
        b = RngStream(seed=1, node=3)
        assert np.allclose(a.uniform_array(16), [b.uniform() for _ in range(16)])

    def test_uniformity(self):
        u = uniforms(99, Channel.EDGES, np.arange(200_000), 0)
        assert abs(u.mean() - 0.5) < 0.005
        p = stats.chisquare(np.histogram(u, bins=200, range=(0, 1))[0]).pvalue
        assert p > 0.001

    def test_cross_stream_independence(self):
        nodes = np.arange(100_000)
        a = uniforms(5, Channel.EDGES, nodes, 0)
        b = uniforms(5, Channel.EDGES, nodes, 1)
        c = uniforms(5, Channel.ROLE, nodes, 0)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.01
        assert abs(np.corrcoef(a, c)[0, 1]) < 0.01


class TestPopularity:
    def test_distribution_minimum(self):
        # U = 1 maps to the support minimum k = 1
        assert sample_popularity(_FixedStream([0.0]), eps=0.5) == 1.0

    def test_median_inverts_tail(self):
        # tail x^-1.5 = 0.5  =>  median = 2^(2/3)
        med = sample_popularity(_FixedStream([0.5]), eps=0.5)
        assert med == pytest.approx(2 ** (2 / 3), rel=1e-12)
        draws = 1.0 - uniforms(3, Channel.ROLE, np.arange(100_000), 0)
        ks = draws ** (-1 / 1.5)
        assert np.median(ks) == pytest.approx(2 ** (2 / 3), rel=0.01)

    def test_tail_probability(self):
        stream_vals = 1.0 - uniforms(11, Channel.ROLE, np.arange(1_000_000), 0)
        ks = stream_vals ** (-1 / 1.5)
        assert abs((ks >= 4).mean() - 0.125) < 0.001  # 4^-1.5

    def test_dkw_band(self):
        # sup |F_hat - F| within the DKW band at 1e6 samples
        n = 1_000_000
        ks = np.sort((1.0 - uniforms(17, Channel.ROLE, np.arange(n), 0)) ** (-1 / 1.5))
        F = popularity_cdf(ks, 0.5)
        emp_hi = np.arange(1, n + 1) / n
        emp_lo = np.arange(0, n) / n
        sup = max(np.abs(emp_hi - F).max(), np.abs(F - emp_lo).max())
        band = math.sqrt(math.log(2 / 1e-6) / (2 * n))
        assert sup <= band

    def test_bad_eps(self):
        with pytest.raises(ParameterError):
            sample_popularity(_FixedStream([0.5]), eps=0.0)


class TestConnectionCount:
    def test_integer_rate_exact(self):
        s = RngStream(seed=1, node=1)
        assert all(connection_count(3.0, s) == 3 for _ in range(10))

    def test_fig2_rate_one(self):
        # Q*k = (1/9)*9 = 1: every highway node gets exactly one connection
        s = RngStream(seed=2, node=5)
        assert all(connection_count(1.0, s) == 1 for _ in range(10))

    def test_fractional_mean(self):
        nodes = np.arange(100_000)
        m = connection_counts(np.full(len(nodes), 2.25), 7, nodes)
        assert abs(m.mean() - 2.25) < 0.01
        assert set(np.unique(m)) == {2, 3}

    def test_negative_rate(self):
        with pytest.raises(ParameterError):
            connection_count(-0.1, RngStream(seed=1))
        with pytest.raises(ParameterError):
            connection_counts(np.array([-1.0]), 1, np.array([0]))


class TestInverseSquareTarget:
    def test_equidistant_symmetry(self):
        m = GridMetric(GridTopology(9))
        u = m.topology.node_id(4, 4)
        cands = np.array([m.topology.node_id(3, 4), m.topology.node_id(5, 4)])
        picks = np.array([sample_inverse_square_target(u, cands, m,
                                                       RngStream(1, i))
                          for i in range(100_000)])
        assert abs((picks == cands[0]).mean() - 0.5) < 0.01

    def test_distance_one_vs_two(self):
        m = GridMetric(GridTopology(9))
        u = m.topology.node_id(4, 4)
        cands = np.array([m.topology.node_id(4, 5), m.topology.node_id(4, 6)])
        picks = np.array([sample_inverse_square_target(u, cands, m,
                                                       RngStream(2, i))
                          for i in range(100_000)])
        # weights 1 and 1/4 normalize to 0.8 / 0.2
        assert abs((picks == cands[0]).mean() - 0.8) < 0.01

    def test_empty_candidates_signals_none(self):
        m = GridMetric(GridTopology(9))
        assert sample_inverse_square_target(0, np.array([0]), m,
                                            RngStream(1, 0)) is None

    def test_full_torus_chi2(self):
        # full Kleinberg candidate set on n=17: frequencies match the exact
        # normalized weights
        n = 17
        m = GridMetric(GridTopology(n))
        u = 0
        cands = np.arange(1, n * n)
        d = m.distances_from(u, cands).astype(float)
        w = d ** -2.0
        probs = w / w.sum()
        sampler = ExplicitWeightSampler(cands, w)
        draws = sampler.sample(uniforms(21, Channel.EDGES, 0, np.arange(200_000)))
        counts = np.bincount(draws, minlength=n * n)[1:]
        p = stats.chisquare(counts, probs * len(draws)).pvalue
        assert p > 0.01


class TestTorusRingSampler:
    def test_normalization_matches_naive(self):
        n = 17
        m = GridMetric(GridTopology(n))
        naive = sum(m.distance(0, v) ** -2.0 for v in range(1, n * n))
        assert TorusRingSampler(n).normalization == pytest.approx(naive, rel=1e-12)

    def test_draws_match_exact_weights(self):
        n = 9
        s = TorusRingSampler(n)
        m = GridMetric(GridTopology(n))
        u1 = uniforms(5, Channel.EDGES, 1, np.arange(200_000))
        u2 = uniforms(5, Channel.EDGES, 2, np.arange(200_000))
        tg = s.sample_targets(np.zeros(200_000, dtype=np.int64), u1, u2)
        counts = np.bincount(tg, minlength=n * n)
        assert counts[0] == 0  # never the source itself
        d = m.distances_from(0, np.arange(1, n * n)).astype(float)
        probs = d ** -2.0 / (d ** -2.0).sum()
        p = stats.chisquare(counts[1:], probs * len(tg)).pvalue
        assert p > 0.01

    def test_table_cached(self):
        assert torus_ring_table(13) is torus_ring_table(13)
