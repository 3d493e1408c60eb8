import math

import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix

from oracles import betti_by_rank, random_filtration_dict
from whale.cloud import PointCloud, gen_circle, gen_torus
from whale.errors import FormatError, InvalidFiltration, SampleSizeError
from whale.filtration import SimplicialFiltration
from whale.persistence import (
    RIPS_SAMPLE_LIMIT,
    compute_persistence,
    read_diagram_csv,
    rips_filtration,
    rips_reference,
    write_diagram_csv,
)


def filt(mapping, n=None):
    n = n if n is not None else sum(1 for s in mapping if len(s) == 1)
    return SimplicialFiltration.from_mapping(mapping, n)


def multiset(diagram, dim):
    return sorted((b, d) for b, d in diagram.pairs(dim).tolist())


class TestSmallComplexes:
    def test_isolated_vertices(self):
        dg = compute_persistence(filt({(0,): 0.0, (1,): 0.0, (2,): 0.0}))
        assert multiset(dg, 0) == [(0.0, math.inf)] * 3
        assert dg.count(1) == 0

    def test_triangle_boundary(self):
        dg = compute_persistence(
            filt({(0,): 0.0, (1,): 0.0, (2,): 0.0, (0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
        )
        assert multiset(dg, 0) == [(0.0, 1.0), (0.0, 1.0), (0.0, math.inf)]
        assert multiset(dg, 1) == [(1.0, math.inf)]

    def test_filled_triangle_zero_lifetime(self):
        dg = compute_persistence(
            filt({(0,): 0.0, (1,): 0.0, (2,): 0.0, (0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0,
                  (0, 1, 2): 1.0})
        )
        assert dg.count(1) == 0
        assert dg.zero_lifetime == {1: 1}

    def test_square_loop(self):
        dg = compute_persistence(
            filt({(0,): 0.0, (1,): 0.0, (2,): 0.0, (3,): 0.0, (0, 1): 1.0, (1, 2): 1.0,
                  (2, 3): 1.0, (0, 3): 1.0, (0, 2): 2.0, (0, 1, 2): 2.0, (0, 2, 3): 2.5})
        )
        assert multiset(dg, 1) == [(1.0, 2.5)]
        feat = dg.in_dim(1)[0]
        assert len(feat.birth_vertices) == 2

    def test_missing_face(self):
        with pytest.raises(InvalidFiltration):
            compute_persistence(filt({(0,): 0.0, (1,): 0.0, (0, 1, 2): 1.0, (0, 1): 1.0}, 3))

    def test_hollow_tetrahedron_h2(self):
        m = {(i,): 0.0 for i in range(4)}
        for a in range(4):
            for b in range(a + 1, 4):
                m[(a, b)] = 1.0
        for t in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
            m[t] = 2.0
        dg = compute_persistence(filt(m))
        assert multiset(dg, 2) == [(2.0, math.inf)]
        # the three independent loops appear with the edges and are filled by triangles
        assert multiset(dg, 1) == [(1.0, 2.0)] * 3


class TestRandomOracle:
    @pytest.mark.parametrize("seed", range(10))
    def test_betti_matches_rank(self, seed):
        rng = np.random.default_rng(seed)
        mapping = random_filtration_dict(rng, int(rng.integers(5, 25)), 3)
        f = filt(mapping)
        f.validate()
        dg = compute_persistence(f, max_dim=2)
        for t in np.linspace(0, 6, 13):
            expect = betti_by_rank(mapping, t, 2)
            assert [dg.betti(d, t) for d in range(3)] == expect

    @pytest.mark.parametrize("seed", range(5))
    def test_pairing_and_euler(self, seed):
        rng = np.random.default_rng(100 + seed)
        mapping = random_filtration_dict(rng, 15, 2)
        dg = compute_persistence(filt(mapping), max_dim=1)
        for f in dg.features:
            assert f.death > f.birth
        for t in (0.0, 1.0, 2.5, 10.0):
            chi = sum((-1) ** (len(s) - 1) for s, v in mapping.items() if v <= t)
            # H2 of a 2-complex is never killed; count its rank from the oracle
            b2 = betti_by_rank(mapping, t, 2)[2]
            betti = [dg.betti(0, t), dg.betti(1, t), b2]
            assert sum((-1) ** d * b for d, b in enumerate(betti)) == chi

    def test_components_union_find(self):
        rng = np.random.default_rng(3)
        mapping = random_filtration_dict(rng, 30, 1, p_edge=0.05)
        dg = compute_persistence(filt(mapping), max_dim=1)
        edges = np.array([s for s in mapping if len(s) == 2])
        g = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(30, 30))
        ncomp, _ = connected_components(g, directed=False)
        assert dg.essential_count(0) == ncomp

    def test_equal_value_permutation(self):
        # relabelling vertices changes tie order but not the diagram multiset
        rng = np.random.default_rng(4)
        mapping = random_filtration_dict(rng, 12, 2)
        perm = rng.permutation(12)
        relabel = {tuple(sorted(int(perm[v]) for v in s)): val for s, val in mapping.items()}
        a = compute_persistence(filt(mapping))
        b = compute_persistence(filt(relabel))
        for d in range(2):
            assert multiset(a, d) == multiset(b, d)


class TestRips:
    def test_two_points(self):
        dg = compute_persistence(rips_filtration(np.array([[0, 0, 0], [0.3, 0.4, 0]]), cap=1.0))
        assert multiset(dg, 0) == [(0.0, pytest.approx(0.5)), (0.0, math.inf)]

    def test_circle_death(self):
        # 120 points (a multiple of 3) keeps the test fast; the death radius is exact
        t = 2 * np.pi * np.arange(120) / 120
        pts = np.c_[np.cos(t), np.sin(t), np.zeros(120)]
        dg = compute_persistence(rips_filtration(pts, max_dim=1, cap=2.0))
        long = [f for f in dg.in_dim(1) if f.lifetime > 0.5]
        assert len(long) == 1
        assert long[0].death == pytest.approx(math.sqrt(3), abs=0.02)

    def test_values_are_diameters(self):
        pts = np.random.default_rng(0).uniform(size=(12, 3))
        f = rips_filtration(pts, max_dim=1, cap=10.0)
        f.validate()
        for s, v in zip(f.simplices, f.values):
            diam = max((math.dist(pts[a], pts[b]) for a in s for b in s), default=0.0)
            assert v == pytest.approx(diam, rel=1e-14)
        assert f.count_by_dim()[2] == math.comb(12, 3)

    def test_cap_drops_long_edges(self):
        pts = np.array([[0, 0, 0], [1, 0, 0], [5, 0, 0.0]])
        f = rips_filtration(pts, cap=2.0)
        assert (0, 2) not in f.simplices and (0, 1) in f.simplices

    def test_reference_guard(self):
        cloud = gen_torus(2000, seed=0)
        with pytest.raises(SampleSizeError):
            rips_reference(cloud, RIPS_SAMPLE_LIMIT + 1)

    def test_reference_small(self):
        cloud = gen_circle(400, seed=1)
        a = rips_reference(cloud, 80, seed=2)
        b = rips_reference(cloud, 80, seed=2)
        assert multiset(a, 1) == multiset(b, 1)
        assert a.essential_count(0) >= 1


class TestDiagramFiles:
    def test_roundtrip(self, tmp_path):
        dg = compute_persistence(
            filt({(0,): 0.0, (1,): 0.0, (2,): 0.0, (0, 1): 1.0, (0, 2): 1.5, (1, 2): 2.0})
        )
        path = tmp_path / "d.csv"
        write_diagram_csv(dg, path)
        text = path.read_text().splitlines()
        assert text[0] == "dim,birth,death"
        assert any(line.endswith(",inf") for line in text)
        back = read_diagram_csv(path)
        for d in range(2):
            assert multiset(back, d) == multiset(dg, d)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("dim,birth,death\n1,0.1,0.2\n1,oops,0.3\n")
        with pytest.raises(FormatError, match=":3:"):
            read_diagram_csv(path)
