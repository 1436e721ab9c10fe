"""Weighted-sum objective over a placement: cell-average outage traded
against expected fronthaul usage, plus the analytic crossover weight
between the two canonical schemes and Pareto utilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    FileLibrary,
    PlacementMatrix,
    fronthaul_vector,
    lb_lcd_placement,
    mpc_placement,
)
from .quadrature import cell_average_outage_for_members, displaced_node_distances
from .scenario import Scenario

__all__ = [
    "ObjectivePoint",
    "ObjectiveEvaluator",
    "NoCrossoverError",
    "evaluate",
    "fronthaul_expectation",
    "eta_crossover",
    "pareto_indices",
    "pareto_filter",
    "supported_indices",
    "supported_filter",
]


class NoCrossoverError(ValueError):
    """The two canonical schemes coincide; there is no crossover weight."""


@dataclass(frozen=True)
class ObjectivePoint:
    """One placement scored at one tradeoff weight ``eta``.

    ``value = eta * cell_outage + (1 - eta) * fronthaul`` and is linear in
    eta for fixed components; all three numbers live in [0, 1].
    """

    cell_outage: float
    fronthaul: float
    eta: float
    value: float

    @classmethod
    def from_components(cls, cell_outage: float, fronthaul: float, eta: float):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {eta}")
        return cls(cell_outage, fronthaul, eta,
                   eta * cell_outage + (1.0 - eta) * fronthaul)


class ObjectiveEvaluator:
    """Memoizing objective evaluator for one scenario.

    Two caches do the heavy lifting: cell-average outages are stored per
    serving RRH set (files sharing a service set share one quadrature
    pass), and (outage, fronthaul) component pairs are stored per placement
    so eta sweeps over the same matrix cost a single analytics pass.
    Values are deterministic, so concurrent duplicate inserts are harmless.
    """

    def __init__(self, scenario: Scenario, grid=None, location_pdf=None):
        self.scenario = scenario
        self.grid = grid if grid is not None else scenario.grid()
        self.location_pdf = location_pdf
        self._node_distances = displaced_node_distances(self.grid, scenario.layout)
        self._outage_by_members: dict[frozenset, float] = {}
        self._components_by_key: dict[bytes, tuple[float, float]] = {}
        self._full_set = frozenset(range(scenario.layout.n_rrh))

    @property
    def layout(self):
        return self.scenario.layout

    def outage_for_members(self, members) -> float:
        """Cell-average outage of one serving set, memoized."""
        key = frozenset(members)
        cached = self._outage_by_members.get(key)
        if cached is None:
            cached = cell_average_outage_for_members(
                key,
                self.grid,
                self.scenario.layout,
                self.scenario.radio,
                self.location_pdf,
                node_distances=self._node_distances,
            )
            self._outage_by_members[key] = cached
        return cached

    def _check(self, placement: PlacementMatrix):
        if placement.layout is not self.layout and placement.layout != self.layout:
            raise ValueError("placement was built for a different layout")
        if placement.n_files != self.scenario.library.n_files:
            raise ValueError(
                f"placement covers {placement.n_files} files, library has "
                f"{self.scenario.library.n_files}"
            )

    def per_file_outage(self, placement: PlacementMatrix) -> np.ndarray:
        """Cell-average outage of every file under a placement."""
        self._check(placement)
        entries = placement.entries
        out = np.empty(placement.n_files)
        for rank in range(placement.n_files):
            caching = np.flatnonzero(entries[rank])
            members = frozenset(int(n) for n in caching) if caching.size else self._full_set
            out[rank] = self.outage_for_members(members)
        return out

    def components(self, placement: PlacementMatrix) -> tuple[float, float]:
        """(cell-average outage, expected fronthaul usage) of a placement."""
        self._check(placement)
        key = placement.key()
        cached = self._components_by_key.get(key)
        if cached is None:
            pop = self.scenario.library.popularity
            outage = float(pop @ self.per_file_outage(placement))
            fronthaul = float(pop @ fronthaul_vector(placement))
            cached = (outage, fronthaul)
            self._components_by_key[key] = cached
        return cached

    def evaluate(self, placement: PlacementMatrix, eta: float) -> ObjectivePoint:
        outage, fronthaul = self.components(placement)
        return ObjectivePoint.from_components(outage, fronthaul, eta)


def evaluate(placement: PlacementMatrix, eta: float, scenario: Scenario) -> ObjectivePoint:
    """Score a placement at weight ``eta`` using the scenario's shared
    evaluator (so repeated calls amortize the analytics)."""
    return scenario.evaluator().evaluate(placement, eta)


def fronthaul_expectation(placement: PlacementMatrix, library: FileLibrary) -> float:
    """Request-weighted fronthaul usage; exact, no quadrature involved."""
    if placement.n_files != library.n_files:
        raise ValueError("placement and library sizes differ")
    return float(library.popularity @ fronthaul_vector(placement))


def _canonical_pair(scenario: Scenario) -> tuple[PlacementMatrix, PlacementMatrix]:
    mpc = mpc_placement(scenario.library, scenario.layout)
    lb = lb_lcd_placement(scenario.library, scenario.layout)
    if mpc == lb:
        raise NoCrossoverError(
            "MPC and LB-LCD coincide for this layout; no crossover exists"
        )
    return mpc, lb


def eta_crossover(scenario: Scenario, method: str = "general") -> float:
    """Tradeoff weight at which MPC and LB-LCD score identically.

    Both objectives are linear in eta, MPC wins at eta = 1 and LB-LCD at
    eta = 0, so the lines cross exactly once.  ``method="general"`` solves
    directly from the two (outage, fronthaul) component pairs and works for
    unequal cache sizes; ``method="equal_m"`` uses the reduced per-file form
    valid when every RRH has the same cache size, as a cross-check.
    """
    mpc, lb = _canonical_pair(scenario)
    ev = scenario.evaluator()
    if method == "general":
        o_mpc, f_mpc = ev.components(mpc)
        o_lb, f_lb = ev.components(lb)
        outage_gap = o_lb - o_mpc
        fronthaul_gap = f_mpc - f_lb
        if outage_gap <= 0 or fronthaul_gap <= 0:
            raise NoCrossoverError(
                "objective lines do not cross inside [0, 1] "
                f"(outage gap {outage_gap:.3g}, fronthaul gap {fronthaul_gap:.3g})"
            )
        return fronthaul_gap / (fronthaul_gap + outage_gap)
    if method == "equal_m":
        sizes = scenario.layout.cache_sizes
        if not np.all(sizes == sizes[0]):
            raise ValueError("equal_m form requires identical cache sizes")
        m = int(sizes[0])
        cached_count = scenario.top_rank_count  # N * M
        pop = scenario.library.popularity
        o_mpc = ev.per_file_outage(mpc)[:cached_count]
        o_lb = ev.per_file_outage(lb)[:cached_count]
        numerator = float(pop[:cached_count] @ (o_lb - o_mpc))
        denominator = float(pop[m:cached_count].sum())
        if numerator <= 0 or denominator <= 0:
            raise NoCrossoverError("objective lines do not cross inside [0, 1]")
        return 1.0 / (1.0 + numerator / denominator)
    raise ValueError(f"unknown method {method!r}")


def pareto_indices(points) -> list[int]:
    """Indices of the weakly nondominated points of (outage, fronthaul)
    pairs, exact duplicates reported once, in ascending coordinate order."""
    pts = [(float(x), float(y)) for x, y in points]
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    keep: list[int] = []
    best_y = np.inf
    for i in order:
        if pts[i][1] < best_y:
            keep.append(i)
            best_y = pts[i][1]
    return keep


def pareto_filter(points) -> list[tuple[float, float]]:
    """The nondominated subset itself (see ``pareto_indices``)."""
    pts = [(float(x), float(y)) for x, y in points]
    return [pts[i] for i in pareto_indices(points)]


def supported_indices(points) -> list[int]:
    """Indices of the nondominated points attainable by the weighted-sum
    scalarization for some eta in [0, 1].

    These are the vertices of the lower-left convex hull of the point
    cloud: exactly the solutions a weighted-sum optimizer can return, and a
    subset of the nondominated set (interior nondominated points are never
    minimizers of a linear combination).
    """
    nd = pareto_indices(points)
    if len(nd) <= 2:
        return nd
    pts = [(float(points[i][0]), float(points[i][1])) for i in nd]
    hull: list[int] = []
    for pos, p in enumerate(pts):
        while len(hull) >= 2:
            x1, y1 = pts[hull[-2]]
            x2, y2 = pts[hull[-1]]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(pos)
    return [nd[pos] for pos in hull]


def supported_filter(points) -> list[tuple[float, float]]:
    """The weighted-sum-supported subset itself (see ``supported_indices``)."""
    return [(float(points[i][0]), float(points[i][1])) for i in supported_indices(points)]
