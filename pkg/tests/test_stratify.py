import numpy as np
import pytest

from stratnet.econ import partition_equal_wealth
from stratnet.graph import SocialGraph
from stratnet.nullmodels import ShuffleConfig
from stratnet.stratify import (ResidualDensityCurve, StratifyError,
                               class_link_matrix, equal_wealth_thresholds,
                               normalize_rows, null_density_curve,
                               residual_density_curve, rich_club,
                               stratification_matrix)

from conftest import random_simple_graph


class TestClassLinkMatrix:
    def test_hand_built(self):
        # classes by wealth: nodes 0-2 class 1, node 3 class 2
        g = SocialGraph.from_edge_list(4, [(0, 1), (1, 2), (0, 3), (2, 3)])
        part = partition_equal_wealth([1.0, 1.0, 1.0, 3.0], n_classes=2)
        counts = class_link_matrix(g, part)
        assert counts.tolist() == [[2, 2], [2, 0]]

    def test_symmetric_and_totals_to_edge_count(self):
        g = random_simple_graph(120, 500, seed=17)
        rng = np.random.default_rng(18)
        part = partition_equal_wealth(rng.pareto(3, 120) + 1, n_classes=5)
        counts = class_link_matrix(g, part)
        assert (counts == counts.T).all()
        # diagonal counted once, off-diagonals mirrored
        assert np.triu(counts).sum() == g.n_edges

    def test_matches_brute_force(self):
        g = random_simple_graph(80, 300, seed=19)
        rng = np.random.default_rng(20)
        part = partition_equal_wealth(rng.pareto(2, 80) + 1, n_classes=4)
        expected = np.zeros((4, 4), dtype=int)
        for u, v in g.edges:
            i, j = part.labels[u] - 1, part.labels[v] - 1
            expected[i, j] += 1
            if i != j:
                expected[j, i] += 1
        assert (class_link_matrix(g, part) == expected).all()

    def test_size_mismatch_raises(self):
        g = random_simple_graph(10, 15, seed=1)
        part = partition_equal_wealth([1.0] * 9, n_classes=3)
        with pytest.raises(StratifyError):
            class_link_matrix(g, part)


class TestStratificationMatrix:
    def test_identical_counts_give_ones(self):
        c = np.array([[4.0, 2.0], [2.0, 6.0]])
        sm = stratification_matrix(c, c)
        assert np.allclose(sm.ratio, 1.0)
        assert sm.reliable.all()

    def test_cells_below_floor_flagged(self):
        counts = np.array([[3.0, 1.0], [1.0, 0.0]])
        null = np.array([[2.0, 0.5], [0.5, 4.0]])
        sm = stratification_matrix(counts, null, null_floor=1.0)
        assert sm.ratio[0, 0] == pytest.approx(1.5)
        assert np.isnan(sm.ratio[0, 1]) and np.isnan(sm.ratio[1, 0])
        assert not sm.reliable[0, 1]
        assert sm.ratio[1, 1] == 0.0

    def test_shape_mismatch_raises(self):
        with pytest.raises(StratifyError):
            stratification_matrix(np.zeros((2, 2)), np.zeros((3, 3)))


class TestNormalizeRows:
    def test_rows_sum_to_one(self):
        m = np.array([[1.0, 3.0], [2.0, 2.0]])
        out = normalize_rows(m)
        assert np.allclose(out.sum(axis=1), 1.0)
        assert out[0, 0] == pytest.approx(0.25)

    def test_zero_row_raises(self):
        with pytest.raises(StratifyError):
            normalize_rows(np.array([[1.0, 1.0], [0.0, 0.0]]))


class TestResidualDensityCurve:
    def test_thresholds_cover_wealth_range(self):
        w = [1.0, 2.0, 3.0, 4.0]
        t = equal_wealth_thresholds(np.array(w), 5)
        assert t.tolist() == [0.0, 2.0, 4.0, 6.0, 8.0]

    def test_complete_graph_stays_at_one(self):
        k4 = SocialGraph.from_edge_list(
            4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        curve = residual_density_curve(k4, [1.0, 1.0, 1.0, 1.0], segments=4)
        finite = np.isfinite(curve.phi)
        assert np.allclose(curve.phi[finite], 1.0)

    def test_threshold_zero_is_full_graph(self):
        g = random_simple_graph(40, 100, seed=21)
        curve = residual_density_curve(g, np.arange(1.0, 41.0), segments=10)
        assert curve.n_remaining[0] == 40
        assert curve.e_remaining[0] == 100
        assert curve.phi[0] == pytest.approx(2 * 100 / (40 * 39))

    def test_matches_full_rebuild_oracle(self):
        from stratnet.graph import induce_subgraph
        g = random_simple_graph(60, 180, seed=22)
        rng = np.random.default_rng(23)
        wealth = rng.pareto(2, 60) + 1
        segments = 25
        curve = residual_density_curve(g, wealth, segments=segments)
        order = np.lexsort((np.arange(60), wealth))
        cum = np.cumsum(wealth[order])
        thresholds = equal_wealth_thresholds(wealth, segments)
        for k in range(segments):
            removed = int(np.searchsorted(cum, thresholds[k], side="right"))
            keep = order[removed:]
            if keep.size < 2:
                assert np.isnan(curve.phi[k])
                continue
            sub = induce_subgraph(g, keep)
            n = sub.n_nodes
            assert curve.n_remaining[k] == n
            assert curve.e_remaining[k] == sub.n_edges
            assert curve.phi[k] == pytest.approx(
                2.0 * sub.n_edges / (n * (n - 1)), abs=1e-12)

    def test_wealth_size_mismatch_raises(self):
        g = random_simple_graph(10, 15, seed=1)
        with pytest.raises(StratifyError):
            residual_density_curve(g, [1.0] * 9)


class TestRichClub:
    def test_identical_curves_give_unity(self):
        phi = np.array([0.1, 0.2, 0.4])
        assert np.allclose(rich_club(phi, phi), 1.0)

    def test_nan_and_zero_null_propagate(self):
        phi = np.array([0.2, 0.4, np.nan])
        null = np.array([0.1, 0.0, 0.3])
        rho = rich_club(phi, null)
        assert rho[0] == pytest.approx(2.0)
        assert np.isnan(rho[1]) and np.isnan(rho[2])

    def test_length_mismatch_raises(self):
        with pytest.raises(StratifyError):
            rich_club(np.zeros(3), np.zeros(4))


class TestNullCurveWrappers:
    def test_null_density_mean_is_finite_and_reproducible(self):
        g = random_simple_graph(80, 240, seed=25)
        rng = np.random.default_rng(26)
        wealth = rng.pareto(2, 80) + 1
        cfg = ShuffleConfig(seed=99)
        a = null_density_curve(g, wealth, cfg, realizations=3, segments=10)
        b = null_density_curve(g, wealth, cfg, realizations=3, segments=10)
        assert np.array_equal(a.mean, b.mean, equal_nan=True)
        # shuffles preserve degrees, so the full-graph density is unchanged
        assert a.mean[0] == pytest.approx(2 * 240 / (80 * 79))
