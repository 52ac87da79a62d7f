import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hwroute.errors import InputError, ParameterError
from hwroute.metric import (GridMetric, GridTopology, ball_nodes,
                            lattice_distance, sphere_nodes)


def brute_ball(u, d, topo):
    return {v for v in range(topo.num_nodes)
            if lattice_distance(u, v, topo) <= d}


def brute_sphere(u, j, topo):
    return {v for v in range(topo.num_nodes)
            if lattice_distance(u, v, topo) == j}


class TestLatticeDistance:
    def test_identity(self):
        topo = GridTopology(9)
        assert lattice_distance(topo.node_id(0, 0), topo.node_id(0, 0), topo) == 0

    def test_wraparound_corner(self):
        topo = GridTopology(9)
        assert lattice_distance(topo.node_id(0, 0), topo.node_id(8, 8), topo) == 2

    def test_no_wrap_corner(self):
        topo = GridTopology(9, wraparound=False)
        assert lattice_distance(topo.node_id(0, 0), topo.node_id(8, 8), topo) == 16

    def test_out_of_range(self):
        topo = GridTopology(9)
        with pytest.raises(InputError):
            lattice_distance((0, 0), (9, 0), topo)
        with pytest.raises(InputError):
            topo.node_id(-1, 3)

    @given(st.integers(2, 21), st.integers(0, 440), st.integers(0, 440))
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_bound(self, n, a, b):
        topo = GridTopology(n)
        u, v = a % topo.num_nodes, b % topo.num_nodes
        d = lattice_distance(u, v, topo)
        assert d == lattice_distance(v, u, topo)
        assert 0 <= d <= 2 * (n // 2)


class TestBallsAndSpheres:
    def test_ball_zero(self):
        topo = GridTopology(9)
        assert set(ball_nodes(40, 0, topo)) == {40}

    def test_ball_one(self):
        topo = GridTopology(9)
        assert len(ball_nodes(0, 1, topo)) == 5

    def test_ball_33_5(self):
        topo = GridTopology(33)
        b = ball_nodes(17, 5, topo)
        assert len(b) == 61  # 2d^2 + 2d + 1 for d < n/2
        assert set(b) == brute_ball(17, 5, topo)

    def test_sphere_zero(self):
        topo = GridTopology(9)
        assert set(sphere_nodes(7, 0, topo)) == {7}

    def test_sphere_33_5(self):
        topo = GridTopology(33)
        s = sphere_nodes(100, 5, topo)
        assert len(s) == 20  # 4j for 0 < j < n/2
        assert set(s) == brute_sphere(100, 5, topo)

    def test_sphere_beyond_max_radius_empty(self):
        topo = GridTopology(9)
        assert len(sphere_nodes(0, 9, topo)) == 0  # max useful radius is 8

    def test_negative_radius(self):
        topo = GridTopology(9)
        with pytest.raises(ParameterError):
            sphere_nodes(0, -1, topo)

    @given(st.integers(2, 15), st.integers(0, 30), st.integers(0, 230))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, n, d, unode):
        topo = GridTopology(n)
        u = unode % topo.num_nodes
        d = d % (topo.max_distance + 2)
        assert set(ball_nodes(u, d, topo)) == brute_ball(u, d, topo)
        assert set(sphere_nodes(u, d, topo)) == brute_sphere(u, d, topo)

    @given(st.integers(3, 15), st.integers(0, 230))
    @settings(max_examples=25, deadline=None)
    def test_ball_is_disjoint_union_of_spheres(self, n, unode):
        topo = GridTopology(n)
        u = unode % topo.num_nodes
        d = n // 2
        spheres = [set(sphere_nodes(u, j, topo)) for j in range(d + 1)]
        union = set().union(*spheres)
        assert union == set(ball_nodes(u, d, topo))
        assert sum(len(s) for s in spheres) == len(union)

    def test_sphere_size_4j(self):
        for n in (9, 16, 33):
            topo = GridTopology(n)
            for j in range(1, (n + 1) // 2):
                assert len(sphere_nodes(3, j, topo)) == 4 * j

    def test_no_wrap_clipping(self):
        topo = GridTopology(9, wraparound=False)
        assert set(sphere_nodes(0, 1, topo)) == {topo.node_id(1, 0),
                                                 topo.node_id(0, 1)}


class TestGridMetric:
    def test_distances_from_matches_scalar(self):
        topo = GridTopology(17)
        m = GridMetric(topo)
        targets = np.arange(topo.num_nodes)
        rows = m.distances_from(60, targets)
        for v in (0, 7, 100, 288):
            assert rows[v] == lattice_distance(60, v, topo)

    def test_metric_handle_surface(self):
        m = GridMetric(GridTopology(9))
        assert m.num_nodes == 81
        assert m.distance(0, 80) == 2
        assert len(m.ball(0, 1)) == 5
        assert len(m.sphere(0, 2)) == 8
