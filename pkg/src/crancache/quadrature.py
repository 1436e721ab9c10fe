"""Cell averaging by 2-D composite Simpson quadrature in polar coordinates.

The average of a field f over the disk against a user-location density is

    (dh * dk / 9) * sum_{u,v} w[u,v] * rho_u * f(rho_u, theta_v) * pdf(rho_u, theta_v)

with ``dh = R/U``, ``dk = 2*pi/V`` and ``w`` the tensor product of the 1-D
composite Simpson patterns (1, 4, 2, 4, ..., 4, 1) along each axis.  The
angular rule deliberately evaluates both theta = 0 and theta = 2*pi; the
field is periodic so the duplicated column simply carries split weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PlacementMatrix, RadioConfig, RrhLayout, service_set
from .analytics import DEFAULT_GROUPING_TOL, group_poles, partial_fraction

__all__ = [
    "SimpsonGrid",
    "build_grid",
    "cell_average",
    "cell_average_outage",
    "cell_average_outage_for_members",
    "displaced_node_distances",
]

# Nodes within this fraction of the cell radius of an RRH are nudged
# radially by NODE_DISPLACEMENT (the path loss diverges at distance 0).
COLLISION_TOL = 1e-9
NODE_DISPLACEMENT = 1e-6


def _simpson_pattern(panels: int) -> np.ndarray:
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


@dataclass(frozen=True)
class SimpsonGrid:
    """Node lattice and weights of the polar composite Simpson rule."""

    cell_radius: float
    radial_panels: int
    angular_panels: int
    theta_offset: float = 0.0

    def __post_init__(self):
        for name, n in (("radial_panels", self.radial_panels),
                        ("angular_panels", self.angular_panels)):
            if n < 2 or n % 2 != 0:
                raise ValueError(f"{name} must be a positive even integer, got {n}")
        if self.cell_radius <= 0:
            raise ValueError("cell_radius must be positive")

    @property
    def radial_step(self) -> float:
        return self.cell_radius / self.radial_panels

    @property
    def angular_step(self) -> float:
        return 2.0 * np.pi / self.angular_panels

    @property
    def radii(self) -> np.ndarray:
        return self.radial_step * np.arange(self.radial_panels + 1)

    @property
    def angles(self) -> np.ndarray:
        return self.theta_offset + self.angular_step * np.arange(self.angular_panels + 1)

    @property
    def weights(self) -> np.ndarray:
        """Tensor-product coefficient lattice, shape (U+1, V+1)."""
        return np.outer(_simpson_pattern(self.radial_panels),
                        _simpson_pattern(self.angular_panels))

    @property
    def scale(self) -> float:
        return self.radial_step * self.angular_step / 9.0


def build_grid(
    cell_radius: float,
    radial_panels: int,
    angular_panels: int,
    theta_offset: float = 0.0,
) -> SimpsonGrid:
    """Polar Simpson grid with the given even panel counts."""
    return SimpsonGrid(cell_radius, radial_panels, angular_panels, theta_offset)


def _uniform_density(grid: SimpsonGrid) -> float:
    return 1.0 / (np.pi * grid.cell_radius**2)


def cell_average(grid: SimpsonGrid, values: np.ndarray, location_pdf=None) -> float:
    """Apply the polar Simpson rule to node values of a field.

    ``values`` has shape (U+1, V+1).  ``location_pdf`` is either None
    (uniform over the disk) or a callable of broadcastable (rho, theta)
    arrays returning the density at each node.
    """
    values = np.asarray(values, dtype=float)
    expected = (grid.radial_panels + 1, grid.angular_panels + 1)
    if values.shape != expected:
        raise ValueError(f"values must have shape {expected}, got {values.shape}")
    if location_pdf is None:
        dens = _uniform_density(grid)
    else:
        dens = np.asarray(location_pdf(grid.radii[:, None], grid.angles[None, :]), float)
    term = grid.weights * grid.radii[:, None] * values * dens
    return float(grid.scale * term.sum())


def displaced_node_distances(grid: SimpsonGrid, layout: RrhLayout) -> np.ndarray:
    """Node-to-RRH distances, shape (U+1, V+1, N), with collisions resolved.

    A node within COLLISION_TOL * R of any RRH is moved radially by
    NODE_DISPLACEMENT * R (outward, or inward at the rim) before distances
    are taken; the quadrature weights keep the nominal node radius.  The
    perturbation is negligible against the quadrature error and avoids the
    divergent path loss at zero distance.
    """
    rr = grid.radii[:, None]
    tt = grid.angles[None, :]
    d = np.sqrt(
        rr[..., None] ** 2
        + layout.radii**2
        - 2.0 * rr[..., None] * layout.radii * np.cos(tt[..., None] - layout.angles)
    )
    colliding = (d < COLLISION_TOL * layout.cell_radius).any(axis=-1)
    # the rho = 0 ring never enters the integral (zero Jacobian), so a
    # central RRH needs no displacement there
    colliding[0, :] = False
    if colliding.any():
        shift = NODE_DISPLACEMENT * layout.cell_radius
        rho = np.broadcast_to(rr, colliding.shape)[colliding]
        rho = np.where(rho + shift <= layout.cell_radius, rho + shift, rho - shift)
        theta = np.broadcast_to(tt, colliding.shape)[colliding]
        d[colliding] = np.sqrt(
            rho[:, None] ** 2
            + layout.radii**2
            - 2.0 * rho[:, None] * layout.radii * np.cos(theta[:, None] - layout.angles)
        )
    return d


def cell_average_outage_for_members(
    members,
    grid: SimpsonGrid,
    layout: RrhLayout,
    radio: RadioConfig,
    location_pdf=None,
    node_distances: np.ndarray | None = None,
) -> float:
    """Cell-average outage probability for a fixed serving RRH set.

    ``node_distances`` may carry a precomputed ``displaced_node_distances``
    array to share across service sets.  The rho = 0 ring is skipped: its
    Jacobian weight is identically zero.
    """
    members = sorted(members)
    if not members:
        raise ValueError("service set must not be empty")
    if node_distances is None:
        node_distances = displaced_node_distances(grid, layout)
    gamma0 = radio.per_rrh_snr(layout.n_rrh)
    k_gain = radio.gain_constant(layout.cell_radius)
    alpha = radio.path_loss_exponent
    threshold = radio.snr_threshold
    tol = DEFAULT_GROUPING_TOL * layout.cell_radius

    values = np.zeros((grid.radial_panels + 1, grid.angular_panels + 1))
    for u in range(1, grid.radial_panels + 1):
        for v in range(grid.angular_panels + 1):
            rates, mults = group_poles(
                node_distances[u, v, members], gamma0, k_gain, alpha, tol
            )
            values[u, v] = partial_fraction(rates, mults).cdf(threshold)
    return min(1.0, max(0.0, cell_average(grid, values, location_pdf)))


def cell_average_outage(
    placement: PlacementMatrix,
    rank: int,
    grid: SimpsonGrid,
    radio: RadioConfig,
    location_pdf=None,
) -> float:
    """Cell-average outage probability for one file under a placement."""
    members = service_set(placement, rank).members
    return cell_average_outage_for_members(
        members, grid, placement.layout, radio, location_pdf
    )
