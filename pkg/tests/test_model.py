import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crancache.model import (
    FileLibrary,
    PlacementMatrix,
    RrhLayout,
    fronthaul_usage,
    fronthaul_vector,
    lb_lcd_placement,
    mpc_placement,
    probabilistic_placement,
    random_placement,
    service_set,
    zipf_popularity,
)


def layout_of(radii, cache_sizes, cell_radius=1.0):
    radii = np.asarray(radii, float)
    return RrhLayout(
        radii=radii,
        angles=np.linspace(0.0, 2 * np.pi, len(radii), endpoint=False),
        cache_sizes=np.asarray(cache_sizes, int),
        cell_radius=cell_radius,
    )


class TestZipf:
    def test_uniform_when_skew_zero(self):
        assert np.allclose(zipf_popularity(4, 0.0), 0.25, atol=1e-12)

    def test_two_files_unit_skew(self):
        p = zipf_popularity(2, 1.0)
        assert np.allclose(p, [2 / 3, 1 / 3], atol=1e-12)

    @pytest.mark.parametrize("skew,head", [(2.0, 0.90), (2.5, 0.96), (3.0, 0.99)])
    def test_head_mass_of_fifty_file_library(self, skew, head):
        p = zipf_popularity(50, skew)
        assert p[:5].sum() == pytest.approx(head, abs=0.005)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            zipf_popularity(0, 1.0)
        with pytest.raises(ValueError):
            zipf_popularity(10, -0.5)
        with pytest.raises(ValueError):
            zipf_popularity(10, float("inf"))

    @given(n=st.integers(1, 10_000), skew=st.floats(0.0, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_normalized_and_sorted(self, n, skew):
        p = zipf_popularity(n, skew)
        assert abs(p.sum() - 1.0) < 1e-12
        assert np.all(np.diff(p) <= 1e-15)


class TestLibraryAndLayout:
    def test_library_rejects_increasing_popularity(self):
        with pytest.raises(ValueError):
            FileLibrary(2, 0.0, np.array([0.4, 0.6]))

    def test_library_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            FileLibrary(2, 0.0, np.array([0.6, 0.5]))

    def test_layout_rejects_rrh_outside_cell(self):
        with pytest.raises(ValueError):
            layout_of([0.5, 1.5], [1, 1])

    def test_distances_from_centre(self):
        lay = layout_of([0.25, 0.5], [1, 1])
        assert np.allclose(lay.distances_from(0.0, 1.23), [0.25, 0.5])

    def test_distance_law_of_cosines(self):
        lay = RrhLayout(np.array([0.5]), np.array([0.0]), np.array([1]))
        d = lay.distances_from(0.5, np.pi / 2)
        assert d[0] == pytest.approx(np.hypot(0.5, 0.5))


class TestServiceSet:
    @pytest.fixture()
    def placement(self):
        # ranks x RRHs, N=4: rank 0 cached nowhere, rank 1 at RRHs {1, 2},
        # rank 2 at RRH {2} only
        lay = layout_of([0.2, 0.4, 0.6, 0.8], [1, 2, 2, 1])
        entries = np.zeros((6, 4), dtype=np.uint8)
        entries[1, 1] = entries[1, 2] = 1
        entries[2, 2] = 1
        entries[3, 0] = 1
        entries[4, 1] = 1
        entries[5, 3] = 1
        return PlacementMatrix(entries, lay)

    def test_cached_file_served_by_cachers(self, placement):
        s = service_set(placement, 1)
        assert s.members == {1, 2}
        assert not s.uses_fronthaul

    def test_uncached_file_served_by_all(self, placement):
        s = service_set(placement, 0)
        assert s.members == {0, 1, 2, 3}
        assert s.uses_fronthaul

    def test_single_cacher(self, placement):
        assert service_set(placement, 2).members == {2}

    def test_members_never_empty(self, placement):
        for rank in range(placement.n_files):
            assert service_set(placement, rank).members

    def test_out_of_range_rank(self, placement):
        with pytest.raises(IndexError):
            service_set(placement, 6)
        with pytest.raises(IndexError):
            fronthaul_usage(placement, -1)

    def test_fronthaul_indicator(self, placement):
        assert fronthaul_usage(placement, 0) == 1
        assert fronthaul_usage(placement, 1) == 0
        assert np.array_equal(fronthaul_vector(placement), [1, 0, 0, 0, 0, 0])


class TestPlacementMatrix:
    def test_rejects_wrong_column_sum_with_column_identified(self):
        lay = layout_of([0.2, 0.4], [1, 2])
        entries = np.zeros((4, 2), dtype=np.uint8)
        entries[0, 0] = 1
        entries[0, 1] = 1  # column 1 should hold 2
        with pytest.raises(ValueError, match="column 1"):
            PlacementMatrix(entries, lay)

    def test_rejects_non_binary(self):
        lay = layout_of([0.2], [1])
        with pytest.raises(ValueError, match="0 or 1"):
            PlacementMatrix(np.array([[2], [0]]), lay)

    def test_entries_frozen(self):
        lay = layout_of([0.2], [1])
        p = PlacementMatrix(np.array([[1], [0]]), lay)
        with pytest.raises(ValueError):
            p.entries[0, 0] = 0

    def test_equality_by_content(self):
        lay = layout_of([0.2], [1])
        a = PlacementMatrix(np.array([[1], [0]]), lay)
        b = PlacementMatrix(np.array([[1], [0]]), lay)
        c = PlacementMatrix(np.array([[0], [1]]), lay)
        assert a == b and hash(a) == hash(b) and a != c


class TestMpc:
    def test_every_column_caches_the_head(self):
        lib = FileLibrary.zipf(9, 1.5)
        p = mpc_placement(lib, layout_of([0.25, 1 / 3, 0.5], [2, 2, 2]))
        assert p.rank_table() == [[1, 2], [1, 2], [1, 2]]

    def test_single_rrh_single_slot(self):
        p = mpc_placement(FileLibrary.zipf(3, 1.0), layout_of([0.5], [1]))
        assert p.rank_table() == [[1]]

    def test_fronthaul_pattern_many_rrh(self):
        lib = FileLibrary.zipf(50, 1.5)
        p = mpc_placement(lib, layout_of([0.1 * (n + 1) for n in range(7)], [5] * 7))
        usage = [fronthaul_usage(p, rank) for rank in range(50)]
        assert usage[:5] == [0] * 5
        assert usage[5:] == [1] * 45


class TestLbLcd:
    def test_fills_by_distance_in_rank_order(self):
        lib = FileLibrary.zipf(12, 1.0)
        p = lb_lcd_placement(lib, layout_of([0.2, 0.4, 0.6], [3, 3, 3]))
        assert p.rank_table() == [[1, 2, 3], [4, 5, 6], [7, 8, 9]]

    def test_table_v_geometry(self, table_v):
        sc = table_v.scenario
        p = lb_lcd_placement(sc.library, sc.layout)
        assert p.rank_table() == [[1, 2], [3, 4], [5, 6]]

    def test_unsorted_layout_sorted_by_distance(self):
        lib = FileLibrary.zipf(12, 1.0)
        p = lb_lcd_placement(lib, layout_of([0.6, 0.2, 0.4], [2, 2, 2]))
        assert p.rank_table() == [[5, 6], [1, 2], [3, 4]]

    def test_distance_ties_broken_by_index(self):
        lib = FileLibrary.zipf(6, 1.0)
        p = lb_lcd_placement(lib, layout_of([0.5, 0.5], [2, 2]))
        assert p.rank_table() == [[1, 2], [3, 4]]

    def test_single_rrh_matches_mpc(self):
        lib = FileLibrary.zipf(5, 2.0)
        lay = layout_of([0.4], [2])
        assert lb_lcd_placement(lib, lay) == mpc_placement(lib, lay)

    def test_caches_each_head_rank_exactly_once(self):
        lib = FileLibrary.zipf(11, 1.0)
        lay = layout_of([0.1, 0.7, 0.4], [2, 3, 1])
        p = lb_lcd_placement(lib, lay)
        counts = p.entries.sum(axis=1)
        top = lay.total_cache
        assert np.array_equal(counts[:top], np.ones(top))
        assert counts[top:].sum() == 0

    def test_uncached_tail_uses_fronthaul(self):
        lib = FileLibrary.zipf(9, 1.5)
        p = lb_lcd_placement(lib, layout_of([0.25, 1 / 3, 0.5], [2, 2, 2]))
        assert fronthaul_usage(p, p.layout.total_cache) == 1


class TestStochasticPlacements:
    def test_random_feasible_and_reproducible(self):
        lib = FileLibrary.zipf(20, 1.5)
        lay = layout_of([0.2, 0.5, 0.8], [3, 2, 4])
        a = random_placement(lib, lay, np.random.default_rng(11))
        b = random_placement(lib, lay, np.random.default_rng(11))
        assert a == b
        assert np.array_equal(a.entries.sum(axis=0), lay.cache_sizes)

    def test_probabilistic_feasible_and_reproducible(self):
        lib = FileLibrary.zipf(20, 2.0)
        lay = layout_of([0.2, 0.5], [4, 4])
        a = probabilistic_placement(lib, lay, np.random.default_rng(3))
        b = probabilistic_placement(lib, lay, np.random.default_rng(3))
        assert a == b
        assert np.array_equal(a.entries.sum(axis=0), lay.cache_sizes)

    def test_probabilistic_prefers_popular_files(self):
        # Monte-Carlo frequency count: rank 0 must be cached far more often
        # than rank 19 under a steep popularity profile
        lib = FileLibrary.zipf(50, 3.0)
        lay = layout_of([0.5], [5])
        rng = np.random.default_rng(0)
        hits = np.zeros(50)
        for _ in range(3000):
            hits += probabilistic_placement(lib, lay, rng).entries[:, 0]
        assert hits[0] > hits[19] * 2

    def test_probabilistic_uniform_matches_random_rate(self):
        # skew 0 reduces to uniform sampling; compare rank-0 inclusion rates
        lib = FileLibrary.zipf(10, 0.0)
        lay = layout_of([0.5], [3])
        rng = np.random.default_rng(1)
        draws = 4000
        prob_hits = sum(
            int(probabilistic_placement(lib, lay, rng).entries[0, 0]) for _ in range(draws)
        )
        rand_hits = sum(
            int(random_placement(lib, lay, rng).entries[0, 0]) for _ in range(draws)
        )
        expected = draws * 3 / 10
        sigma = np.sqrt(draws * 0.3 * 0.7)
        assert abs(prob_hits - expected) < 4 * sigma
        assert abs(rand_hits - expected) < 4 * sigma
