import dataclasses

import numpy as np
import pytest

from conftest import ring_layout
from crancache.model import FileLibrary, RadioConfig, mpc_placement, lb_lcd_placement
from crancache.montecarlo import SimConfig, empirical_cell_outage
from crancache.quadrature import (
    build_grid,
    cell_average,
    cell_average_outage,
    cell_average_outage_for_members,
    displaced_node_distances,
)


class TestGridConstruction:
    def test_smallest_grid_weights(self):
        g = build_grid(1.0, 2, 2)
        w = g.weights
        assert w[0, 0] == 1 and w[1, 1] == 16 and w[0, 1] == 4 and w[2, 2] == 1

    def test_composite_row_pattern(self):
        g = build_grid(1.0, 4, 4)
        assert list(g.weights[0]) == [1, 4, 2, 4, 1]

    def test_default_lattice_shape(self):
        g = build_grid(1.0, 6, 6)
        assert g.radii.shape == (7,) and g.angles.shape == (7,)
        assert g.weights.shape == (7, 7)
        assert g.radii[-1] == pytest.approx(1.0)
        assert g.angles[-1] == pytest.approx(2 * np.pi)

    @pytest.mark.parametrize("u,v", [(0, 6), (6, 0), (3, 6), (6, 5), (-2, 4)])
    def test_rejects_odd_or_non_positive_panels(self, u, v):
        with pytest.raises(ValueError):
            build_grid(1.0, u, v)

    def test_offset_shifts_angles(self):
        g = build_grid(1.0, 2, 2, theta_offset=0.3)
        assert g.angles[0] == pytest.approx(0.3)


class TestCellAverage:
    def test_constant_field_normalizes_exactly(self):
        for panels in (6, 32):
            g = build_grid(2.5, panels, panels)
            ones = np.ones((panels + 1, panels + 1))
            assert cell_average(g, ones) == pytest.approx(1.0, abs=1e-12)

    def test_matches_known_polynomial_integral(self):
        # average of rho^2 over the unit disk w.r.t. the uniform density
        # is R^2/2; the radial integrand is cubic, so Simpson is exact
        g = build_grid(1.0, 6, 6)
        values = np.broadcast_to(g.radii[:, None] ** 2, (7, 7))
        assert cell_average(g, values) == pytest.approx(0.5, abs=1e-14)

    def test_custom_density_callable(self):
        g = build_grid(1.0, 8, 8)
        ones = np.ones((9, 9))
        # densities integrate against the Jacobian; a uniform callable must
        # reproduce the built-in default
        uniform = cell_average(g, ones, location_pdf=lambda r, t: np.full_like(r + t, 1 / np.pi))
        assert uniform == pytest.approx(1.0, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        g = build_grid(1.0, 4, 4)
        with pytest.raises(ValueError):
            cell_average(g, np.ones((3, 3)))


class TestNodeDisplacement:
    def test_collision_nodes_are_nudged(self, table_v):
        layout = table_v.scenario.layout
        grid = build_grid(layout.cell_radius, 6, 6)
        d = displaced_node_distances(grid, layout)
        assert d[1:].min() > 0  # no zero distance anywhere off the centre ring
        # RRH 1 sits exactly on node (u=2, v=2): displaced by 1e-6 R
        assert d[2, 2, 1] == pytest.approx(1e-6, rel=1e-3)

    def test_central_rrh_needs_no_displacement(self, table_iv):
        layout = table_iv.scenario.layout
        grid = build_grid(layout.cell_radius, 6, 6)
        d = displaced_node_distances(grid, layout)
        # rho = 0 ring keeps its exact distances (Jacobian removes it anyway)
        assert d[0, 0, 0] == 0.0


class TestCellAverageOutage:
    def test_mpc_identical_across_files(self, table_v, radio):
        sc = table_v.scenario
        p = mpc_placement(sc.library, sc.layout)
        grid = sc.grid()
        a = cell_average_outage(p, 0, grid, radio)
        b = cell_average_outage(p, 5, grid, radio)
        assert a == b

    def test_output_within_unit_interval(self, table_v, radio):
        sc = table_v.scenario
        grid = sc.grid()
        for members in ({0}, {1}, {2}, {0, 1}, {0, 1, 2}):
            value = cell_average_outage_for_members(members, grid, sc.layout, radio)
            assert 0.0 <= value <= 1.0

    def test_rotation_invariance(self, radio):
        # rotating the layout and the grid by the same angle is a no-op
        lib = FileLibrary.zipf(5, 1.0)
        layout = ring_layout(3, 0.55, 1)
        shift = 0.7363
        rotated = dataclasses.replace(layout, angles=layout.angles + shift)
        base_grid = build_grid(1.0, 6, 6)
        shifted_grid = build_grid(1.0, 6, 6, theta_offset=shift)
        for members in ({0}, {0, 2}):
            a = cell_average_outage_for_members(members, base_grid, layout, radio)
            b = cell_average_outage_for_members(members, shifted_grid, rotated, radio)
            assert a == pytest.approx(b, abs=1e-9)

    def test_refinement_converges_for_lb_lcd(self, table_iv, radio):
        sc = table_iv.scenario
        lb = lb_lcd_placement(sc.library, sc.layout)
        pop = sc.library.popularity

        def objective_outage(panels):
            grid = build_grid(sc.layout.cell_radius, panels, panels)
            cache = {}
            total = 0.0
            for rank in range(sc.library.n_files):
                caching = np.flatnonzero(lb.entries[rank])
                members = frozenset(int(n) for n in caching) or frozenset(range(7))
                if members not in cache:
                    cache[members] = cell_average_outage_for_members(
                        members, grid, sc.layout, radio
                    )
                total += pop[rank] * cache[members]
            return total

        assert abs(objective_outage(6) - objective_outage(24)) < 5e-3

    def test_against_monte_carlo_full_set(self, table_iv):
        # paper geometry, full-diversity service set, threshold 3 dB:
        # quadrature at the working resolution stays within 0.01 of a
        # simulated cell average
        sc = table_iv.scenario
        p = mpc_placement(sc.library, sc.layout)
        grid = sc.grid()
        analytic = cell_average_outage(p, 0, grid, sc.radio)
        sim = SimConfig(n_fading_draws=400_000, n_location_draws=4000, seed=99)
        est = empirical_cell_outage(p, 0, sc, sim)
        assert analytic == pytest.approx(est.mean, abs=0.01)

    def test_empty_members_rejected(self, table_v, radio):
        sc = table_v.scenario
        with pytest.raises(ValueError):
            cell_average_outage_for_members(set(), sc.grid(), sc.layout, radio)
