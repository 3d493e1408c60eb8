import math

import numpy as np
import pytest

from oracles import maxmin, naive_hybrid
from whale.cloud import PointCloud, gen_torus
from whale.density import DensityEstimate, estimate_density
from whale.errors import InvalidArgument
from whale.landmarks import (
    FAST_AUTO_M,
    FULL_AUTO_M,
    AutoMParams,
    CycleAwareParams,
    HybridParams,
    LandmarkSet,
    auto_m,
    candidate_pool_size,
    select_cycle_aware,
    select_density,
    select_hybrid,
    select_random,
)
from whale.persistence import Feature, PersistenceDiagram


def flat_density(n, value=1.0):
    return DensityEstimate(0.1, np.full(n, value), n)


def random_cloud(n, seed):
    return PointCloud(np.random.default_rng(seed).uniform(size=(n, 3)), np.ones(n))


class TestAutoM:
    def test_table_values(self):
        assert auto_m(1_000_000, FULL_AUTO_M) == 1709
        assert auto_m(1_000_000, FAST_AUTO_M) == 1561
        assert auto_m(133493, FAST_AUTO_M) == 925

    def test_clamps(self):
        assert auto_m(10, FULL_AUTO_M) == 400
        assert auto_m(10**12, FULL_AUTO_M) == 2400

    def test_monotone(self):
        vals = [auto_m(n, FAST_AUTO_M) for n in range(1, 2_000_000, 9973)]
        assert vals == sorted(vals)
        assert min(vals) >= 500 and max(vals) <= 2200

    def test_half_away_rounding(self):
        # beta * 1 ** gamma = 2.5 rounds up, not to even
        assert auto_m(1, AutoMParams(2.5, 0.5, 0, 100)) == 3

    def test_params_validated(self):
        with pytest.raises(InvalidArgument):
            AutoMParams(1.0, 0.5, 10, 5)
        with pytest.raises(InvalidArgument):
            AutoMParams(1.0, 1.0, 1, 5)


class TestRandom:
    def test_exhaustion(self):
        ls = select_random(random_cloud(5, 0), 5, seed=9)
        assert sorted(ls.indices.tolist()) == [0, 1, 2, 3, 4]
        assert sorted(select_random(random_cloud(5, 0), 8).indices.tolist()) == [0, 1, 2, 3, 4]

    def test_distinct(self):
        ls = select_random(gen_torus(5000, seed=0), 400, seed=2)
        assert len(set(ls.indices.tolist())) == 400
        assert ls.indices.max() < 5000

    def test_deterministic(self):
        c = random_cloud(100, 1)
        np.testing.assert_array_equal(select_random(c, 10, 4).indices, select_random(c, 10, 4).indices)

    def test_bad_m(self):
        with pytest.raises(InvalidArgument):
            select_random(random_cloud(5, 0), 0)


class TestDensity:
    def test_dense_cluster_preferred(self):
        rng = np.random.default_rng(0)
        pts = np.vstack([rng.uniform(0, 0.1, (50, 3)), rng.uniform(0.9, 1.0, (50, 3))])
        dens = np.r_[np.full(50, 10.0), np.full(50, 1.0)]
        c = PointCloud(pts, np.ones(100))
        est = DensityEstimate(0.1, dens, 100)
        frac = np.mean([np.mean(select_density(c, est, 10, s).indices < 50) for s in range(100)])
        assert frac > 0.5

    def test_uniform_matches_random_distribution(self):
        c = random_cloud(20, 0)
        est = flat_density(20)
        counts = np.zeros(20)
        for s in range(400):
            counts[select_density(c, est, 5, s).indices] += 1
        # each index expected 100 times; a loose binomial band
        assert counts.min() > 60 and counts.max() < 140

    def test_exhaustion_and_determinism(self):
        c = random_cloud(6, 2)
        assert sorted(select_density(c, flat_density(6), 10).indices.tolist()) == list(range(6))
        a = select_density(c, flat_density(6), 3, 5).indices
        np.testing.assert_array_equal(a, select_density(c, flat_density(6), 3, 5).indices)

    def test_misaligned(self):
        with pytest.raises(InvalidArgument):
            select_density(random_cloud(6, 2), flat_density(5), 2)


class TestHybrid:
    def test_alpha_zero_is_maxmin(self):
        c = random_cloud(60, 3)
        dens = estimate_density(c)
        params = HybridParams(alpha=0.0, pool_constant=100.0)
        got = select_hybrid(c, dens, 15, params).indices.tolist()
        # first pick with a constant factor is the lowest index
        assert got == maxmin(c.points.tolist(), 15, start=0)

    def test_planar_ten_points(self):
        rng = np.random.default_rng(8)
        pts = np.c_[rng.uniform(size=(10, 2)), np.zeros(10)]
        c = PointCloud(pts, np.ones(10))
        dens = estimate_density(c)
        got = select_hybrid(c, dens, 3, HybridParams(0.5, 1e-9, 10.0)).indices.tolist()
        assert got == naive_hybrid(pts.tolist(), dens.densities.tolist(), 3, 0.5, 1e-9, range(10))

    def test_pool_matches_oracle(self):
        # pool smaller than n: reproduce the documented pool draw, then run the naive greedy
        c = random_cloud(400, 4)
        dens = estimate_density(c)
        params = HybridParams(0.5, 1e-9, 0.5, seed=7)
        size = candidate_pool_size(400, 10, 0.5)
        assert size == math.ceil(0.5 * 10 * math.log(400)) < 400
        inv = 1.0 / (dens.densities + 1e-9)
        pool = np.random.default_rng(7).choice(400, size=size, replace=False, p=inv / inv.sum())
        got = select_hybrid(c, dens, 10, params)
        assert got.pool_size == size
        expect = naive_hybrid(c.points.tolist(), dens.densities.tolist(), 10, 0.5, 1e-9, pool)
        assert got.indices.tolist() == expect

    def test_pool_extends_when_small(self):
        assert candidate_pool_size(100, 90, 0.01) == 100
        assert candidate_pool_size(10, 3, 100.0) == 10

    def test_ties_lowest_index(self):
        pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]])
        c = PointCloud(pts, np.ones(4))
        got = select_hybrid(c, flat_density(4), 3, HybridParams(pool_constant=10.0)).indices
        # 0 first; 3 is farthest; then 1 and 2 tie, 1 wins
        assert got.tolist() == [0, 3, 1]

    def test_maxmin_radius_non_increasing(self):
        c = random_cloud(200, 5)
        idx = select_hybrid(c, estimate_density(c), 40, HybridParams(0.0, pool_constant=50)).indices
        d = np.linalg.norm(c.points[:, None] - c.points[idx][None], axis=-1)
        radii = [d[:, : k + 1].min(axis=1).max() for k in range(40)]
        assert all(a >= b for a, b in zip(radii, radii[1:]))

    def test_density_scaling_invariance(self):
        c = random_cloud(120, 6)
        dens = estimate_density(c)
        scaled = DensityEstimate(dens.bandwidth, dens.densities * 8.0, dens.reference_size)
        a = select_hybrid(c, dens, 20, HybridParams(0.7, 1e-6, 100.0)).indices
        b = select_hybrid(c, scaled, 20, HybridParams(0.7, 8e-6, 100.0)).indices
        np.testing.assert_array_equal(a, b)

    def test_m_at_least_n(self):
        c = random_cloud(7, 0)
        assert sorted(select_hybrid(c, flat_density(7), 9).indices.tolist()) == list(range(7))

    def test_distinct_and_deterministic(self):
        c = gen_torus(2000, seed=3)
        dens = estimate_density(c)
        a = select_hybrid(c, dens, 150, HybridParams(seed=2))
        b = select_hybrid(c, dens, 150, HybridParams(seed=2))
        assert len(set(a.indices.tolist())) == 150
        np.testing.assert_array_equal(a.indices, b.indices)

    def test_params_validated(self):
        with pytest.raises(InvalidArgument):
            HybridParams(alpha=1.5)
        with pytest.raises(InvalidArgument):
            HybridParams(epsilon=0.0)
        with pytest.raises(InvalidArgument):
            HybridParams(pool_constant=-1.0)


def loop_prior(coords, lifetime):
    feats = [Feature(1, 0.1, 0.1 + lifetime, (0, 1))]
    return PersistenceDiagram(feats, 0, np.asarray(coords, dtype=float))


class TestCycleAware:
    def setup_method(self):
        self.cloud = gen_torus(800, seed=1)
        self.dens = estimate_density(self.cloud)
        self.params = HybridParams(seed=3)
        self.prior = loop_prior(self.cloud.points[[10, 20]], 0.3)

    def test_zero_reserve_equals_hybrid(self):
        got = select_cycle_aware(self.cloud, self.dens, 60, self.params, self.prior,
                                 CycleAwareParams(0.0, 0.0, 0.05))
        base = select_hybrid(self.cloud, self.dens, 60, self.params)
        np.testing.assert_array_equal(got.indices, base.indices)
        assert got.method == "cycle_aware"

    def test_high_tau_equals_hybrid(self):
        got = select_cycle_aware(self.cloud, self.dens, 60, self.params, self.prior,
                                 CycleAwareParams(10.0, 0.2, 0.05))
        base = select_hybrid(self.cloud, self.dens, 60, self.params)
        np.testing.assert_array_equal(got.indices, base.indices)

    def test_reserve_near_loop(self):
        cp = CycleAwareParams(0.1, 0.1, 0.08)
        got = select_cycle_aware(self.cloud, self.dens, 60, self.params, self.prior, cp)
        assert got.m == 60 and len(set(got.indices.tolist())) == 60
        anchors = self.cloud.points[[10, 20]]
        first = self.cloud.points[got.indices[:6]]
        d = np.linalg.norm(first[:, None] - anchors[None], axis=-1).min(axis=1)
        assert np.all(d <= 0.08)


def test_landmark_set_validation():
    with pytest.raises(InvalidArgument):
        LandmarkSet(np.array([1, 1]), "random")
    with pytest.raises(InvalidArgument):
        LandmarkSet(np.array([1]), "bogus")
    ls = LandmarkSet(np.array([3, 0]), "random")
    assert ls.witnesses(5).tolist() == [1, 2, 4]
