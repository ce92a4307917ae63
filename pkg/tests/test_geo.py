import numpy as np
import pytest

from stratnet.econ import partition_equal_wealth
from stratnet.geo import (ActivityWindows, GeoError, GeoPoint, commute_delta,
                          class_distance_matrix, haversine, infer_home_work,
                          located_link_counts, log_bin_edges,
                          relative_distance_matrix, wrap_longitude)
from stratnet.graph import EventRecord, SocialGraph

from conftest import random_simple_graph

# Monday 2021-01-04 00:00 UTC
MONDAY = 1609718400.0
HOUR = 3600.0


def ev(ts, lat, lon):
    return EventRecord(caller="u", callee="v", timestamp=ts,
                       cell_lat=lat, cell_lon=lon)


class TestHaversine:
    def test_zero_distance(self):
        p = GeoPoint(19.4326, -99.1332)
        assert haversine(p, p) == 0.0

    def test_antipodal(self):
        d = haversine(GeoPoint(0.0, 0.0), GeoPoint(0.0, 180.0))
        assert d == pytest.approx(np.pi * 6371.0, abs=0.1)

    def test_known_city_pair(self):
        mex = GeoPoint(19.4326, -99.1332)
        gdl = GeoPoint(20.6597, -103.3496)
        assert haversine(mex, gdl) == pytest.approx(461.0, abs=3.0)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(30)
        pts = [GeoPoint(float(la), float(lo))
               for la, lo in zip(rng.uniform(-89, 89, 20),
                                 rng.uniform(-179, 179, 20))]
        for a, b, c in zip(pts, pts[1:], pts[2:]):
            assert haversine(a, b) == pytest.approx(haversine(b, a))
            assert haversine(a, c) <= haversine(a, b) + haversine(b, c) + 1e-9

    def test_wrap_longitude(self):
        assert wrap_longitude(190.0) == pytest.approx(-170.0)
        assert wrap_longitude(-190.0) == pytest.approx(170.0)
        assert wrap_longitude(0.0) == 0.0
        assert wrap_longitude(180.0) == 180.0
        assert wrap_longitude(-180.0) == 180.0

    def test_point_validation(self):
        with pytest.raises(GeoError):
            GeoPoint(95.0, 0.0)
        with pytest.raises(GeoError):
            GeoPoint(0.0, 200.0)


class TestActivityWindows:
    def test_weekday_night_is_home(self):
        w = ActivityWindows()
        assert w.is_home_time(MONDAY + 23 * HOUR)
        assert w.is_home_time(MONDAY + 3 * HOUR)
        assert not w.is_home_time(MONDAY + 12 * HOUR)

    def test_weekend_is_home_not_work(self):
        w = ActivityWindows()
        saturday_noon = MONDAY + 5 * 24 * HOUR + 12 * HOUR
        assert w.is_home_time(saturday_noon)
        assert not w.is_work_time(saturday_noon)

    def test_weekday_office_hours_are_work(self):
        w = ActivityWindows()
        assert w.is_work_time(MONDAY + 10 * HOUR)
        assert not w.is_work_time(MONDAY + 8 * HOUR)
        assert not w.is_work_time(MONDAY + 17 * HOUR)


class TestInferHomeWork:
    def test_modal_cells_recovered(self):
        events = []
        # 12 night events at the home cell, spread over nights
        for i in range(12):
            events.append(ev(MONDAY + i * 24 * HOUR + 23 * HOUR, 19.0, -99.0))
        # 11 office-hour weekday events at the work cell (skip weekends)
        day = 0
        added = 0
        while added < 11:
            if (day % 7) not in (5, 6):
                events.append(ev(MONDAY + day * 24 * HOUR + 10 * HOUR,
                                 19.5, -99.5))
                added += 1
            day += 1
        home, work = infer_home_work(events, min_appearances=10)
        assert home == GeoPoint(19.0, -99.0)
        assert work == GeoPoint(19.5, -99.5)

    def test_below_threshold_gives_none(self):
        events = [ev(MONDAY + i * 24 * HOUR + 23 * HOUR, 19.0, -99.0)
                  for i in range(9)]
        home, work = infer_home_work(events, min_appearances=10)
        assert home is None and work is None

    def test_tie_goes_to_earlier_seen_cell(self):
        events = []
        for i in range(10):
            events.append(ev(MONDAY + i * 24 * HOUR + 23 * HOUR, 20.0, -100.0))
        for i in range(10):
            events.append(ev(MONDAY + i * 24 * HOUR + 23.5 * HOUR, 21.0, -101.0))
        home, _ = infer_home_work(events, min_appearances=10)
        assert home == GeoPoint(20.0, -100.0)

    def test_unlocated_events_ignored(self):
        events = [EventRecord(caller="u", callee="v",
                              timestamp=MONDAY + 23 * HOUR)]
        assert infer_home_work(events, min_appearances=1) == (None, None)


class TestClassDistanceMatrix:
    def test_two_node_hand_case(self):
        g = SocialGraph.from_edge_list(2, [(0, 1)])
        part = partition_equal_wealth([1.0, 1.0], n_classes=2)
        locs = {0: GeoPoint(19.4326, -99.1332), 1: GeoPoint(20.6597, -103.3496)}
        d = class_distance_matrix(g, part, locs)
        expected = haversine(locs[0], locs[1])
        assert d[0, 1] == pytest.approx(expected)
        assert d[1, 0] == pytest.approx(expected)
        assert np.isnan(d[0, 0]) and np.isnan(d[1, 1])

    def test_missing_location_excluded(self):
        g = SocialGraph.from_edge_list(3, [(0, 1), (1, 2)])
        part = partition_equal_wealth([1.0, 1.0, 2.0], n_classes=2)
        locs = {0: GeoPoint(10.0, 10.0), 1: GeoPoint(10.0, 11.0)}  # node 2 missing
        d = class_distance_matrix(g, part, locs)
        assert np.isfinite(d[0, 0])
        assert np.isnan(d[0, 1]) and np.isnan(d[1, 1])

    def test_matches_brute_force(self):
        g = random_simple_graph(60, 200, seed=31)
        rng = np.random.default_rng(32)
        part = partition_equal_wealth(rng.pareto(2, 60) + 1, n_classes=3)
        locs = {i: GeoPoint(float(la), float(lo))
                for i, (la, lo) in enumerate(zip(rng.uniform(18, 25, 60),
                                                 rng.uniform(-105, -98, 60)))}
        d = class_distance_matrix(g, part, locs)
        cnt = located_link_counts(g, part, locs)
        sums = np.zeros((3, 3))
        counts = np.zeros((3, 3))
        for u, v in g.edges:
            i, j = part.labels[u] - 1, part.labels[v] - 1
            dist = haversine(locs[int(u)], locs[int(v)])
            sums[i, j] += dist
            counts[i, j] += 1
            if i != j:
                sums[j, i] += dist
                counts[j, i] += 1
        assert (cnt == counts).all()
        for i in range(3):
            for j in range(3):
                if counts[i, j]:
                    assert d[i, j] == pytest.approx(sums[i, j] / counts[i, j])
                else:
                    assert np.isnan(d[i, j])


class TestRelativeDistanceMatrix:
    def test_uniform_distances_give_zero(self):
        d = np.full((3, 3), 7.5)
        cnt = np.ones((3, 3))
        assert np.allclose(relative_distance_matrix(d, cnt), 0.0)

    def test_row_weighted_identity(self):
        rng = np.random.default_rng(33)
        d = rng.uniform(1, 100, size=(5, 5))
        cnt = rng.integers(1, 20, size=(5, 5)).astype(float)
        rel = relative_distance_matrix(d, cnt)
        # by construction the count-weighted row mean of d_r is zero
        for i in range(5):
            assert float(np.dot(cnt[i], rel[i])) == pytest.approx(0.0, abs=1e-9)

    def test_zero_count_rows_are_nan(self):
        d = np.array([[1.0, 2.0], [3.0, 4.0]])
        cnt = np.array([[1.0, 1.0], [0.0, 0.0]])
        rel = relative_distance_matrix(d, cnt)
        assert np.isnan(rel[1]).all()
        assert np.isfinite(rel[0]).all()

    def test_shape_mismatch_raises(self):
        with pytest.raises(GeoError):
            relative_distance_matrix(np.zeros((2, 2)), np.zeros((3, 3)))


class TestCommuteDelta:
    def test_single_class_delta_is_zero(self):
        part = partition_equal_wealth([1.0, 1.0, 1.0], n_classes=1)
        hw = {i: (GeoPoint(19.0, -99.0), GeoPoint(19.0 + 0.05 * (i + 1), -99.0))
              for i in range(3)}
        table = commute_delta(hw, part)
        assert np.allclose(table.delta, 0.0, atol=1e-15)
        assert table.commuters_per_class.tolist() == [3]

    def test_same_distance_lands_in_one_bin(self):
        part = partition_equal_wealth([1.0] * 4, n_classes=1)
        hw = {i: (GeoPoint(19.0, -99.0), GeoPoint(19.1, -99.0)) for i in range(4)}
        table = commute_delta(hw, part)
        assert np.count_nonzero(table.p_all) == 1
        assert table.p_all.sum() == pytest.approx(1.0)

    def test_zero_commute_goes_to_zero_bin(self):
        part = partition_equal_wealth([1.0, 2.0], n_classes=1)
        p = GeoPoint(19.0, -99.0)
        table = commute_delta({0: (p, p), 1: (p, GeoPoint(20.0, -99.0))}, part)
        assert table.p_all[0] == pytest.approx(0.5)

    def test_distance_beyond_top_edge_clamped(self):
        part = partition_equal_wealth([1.0], n_classes=1)
        hw = {0: (GeoPoint(0.0, 0.0), GeoPoint(0.0, 90.0))}   # ~10000 km
        table = commute_delta(hw, part)
        assert table.p_all[-1] == 1.0

    def test_missing_class_row_is_nan(self):
        part = partition_equal_wealth([1.0, 1.0], n_classes=2)
        p = GeoPoint(19.0, -99.0)
        table = commute_delta({1: (p, GeoPoint(19.2, -99.0))}, part)
        assert np.isnan(table.p_class[0]).all()
        assert np.isfinite(table.p_class[1]).all()

    def test_histogram_rows_sum_to_one(self):
        rng = np.random.default_rng(34)
        part = partition_equal_wealth(rng.pareto(2, 100) + 1, n_classes=4)
        hw = {i: (GeoPoint(19.0, -99.0),
                  GeoPoint(19.0 + float(rng.uniform(0, 2)), -99.0))
              for i in range(100)}
        table = commute_delta(hw, part)
        assert table.p_all.sum() == pytest.approx(1.0)
        for k in range(4):
            assert np.nansum(table.p_class[k]) == pytest.approx(1.0)
            assert table.delta[k].sum() == pytest.approx(0.0, abs=1e-12)

    def test_empty_input_raises(self):
        part = partition_equal_wealth([1.0], n_classes=1)
        with pytest.raises(GeoError):
            commute_delta({}, part)

    def test_log_bin_edges_span(self):
        edges = log_bin_edges()
        assert edges[0] == pytest.approx(0.1)
        assert edges[-1] == pytest.approx(1000.0)
        assert edges.size == 31
