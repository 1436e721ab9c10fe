"""Domain model for a cache-enabled radio cell.

A circular cell of radius ``cell_radius`` contains ``n_rrh`` remote radio
heads (RRHs), each able to cache a fixed number of equally sized content
files out of a ranked library.  Which file sits in which cache is a binary
placement matrix; everything downstream (service sets, fronthaul usage,
outage analytics) is a function of that matrix and the cell geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FileLibrary",
    "RrhLayout",
    "RadioConfig",
    "PlacementMatrix",
    "ServiceSet",
    "zipf_popularity",
    "service_set",
    "fronthaul_usage",
    "fronthaul_vector",
    "mpc_placement",
    "lb_lcd_placement",
    "random_placement",
    "probabilistic_placement",
]

_POPULARITY_SUM_TOL = 1e-12


def zipf_popularity(n_files: int, skew: float) -> np.ndarray:
    """Request probabilities of a ranked library under Zipf's law.

    Parameters
    ----------
    n_files : int
        Library size; must be at least 1.
    skew : float
        Zipf skewness.  0 gives a uniform distribution; larger values
        concentrate requests on the top-ranked files.

    Returns
    -------
    ndarray
        Probabilities ``rank**(-skew) / sum(r**(-skew))`` for ranks
        ``1..n_files``, non-increasing and summing to 1.
    """
    if n_files < 1:
        raise ValueError(f"library must hold at least one file, got {n_files}")
    if not np.isfinite(skew) or skew < 0:
        raise ValueError(f"skew must be finite and non-negative, got {skew}")
    weights = np.arange(1, n_files + 1, dtype=float) ** (-skew)
    return weights / weights.sum()


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FileLibrary:
    """Ranked content library with a Zipf request profile."""

    n_files: int
    skew: float
    popularity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "popularity", _readonly(np.asarray(self.popularity, float)))
        if self.popularity.shape != (self.n_files,):
            raise ValueError("popularity length must equal n_files")
        if abs(self.popularity.sum() - 1.0) > _POPULARITY_SUM_TOL:
            raise ValueError("popularity must sum to 1")
        if np.any(np.diff(self.popularity) > _POPULARITY_SUM_TOL):
            raise ValueError("popularity must be non-increasing in rank")

    @classmethod
    def zipf(cls, n_files: int, skew: float) -> "FileLibrary":
        return cls(n_files, skew, zipf_popularity(n_files, skew))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FileLibrary)
            and self.n_files == other.n_files
            and self.skew == other.skew
            and np.array_equal(self.popularity, other.popularity)
        )

    def __hash__(self) -> int:
        return hash((self.n_files, self.skew, self.popularity.tobytes()))


@dataclass(frozen=True, eq=False)
class RrhLayout:
    """Polar RRH positions and per-RRH cache capacities in a disk cell."""

    radii: np.ndarray        # distance of each RRH from the cell centre
    angles: np.ndarray       # polar angle of each RRH, radians
    cache_sizes: np.ndarray  # files each RRH can hold
    cell_radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "radii", _readonly(np.asarray(self.radii, float)))
        object.__setattr__(self, "angles", _readonly(np.asarray(self.angles, float)))
        object.__setattr__(self, "cache_sizes", _readonly(np.asarray(self.cache_sizes, int)))
        if not (len(self.radii) == len(self.angles) == len(self.cache_sizes)):
            raise ValueError("radii, angles and cache_sizes must have equal length")
        if len(self.radii) == 0:
            raise ValueError("layout needs at least one RRH")
        if self.cell_radius <= 0:
            raise ValueError("cell_radius must be positive")
        if np.any(self.radii < 0) or np.any(self.radii > self.cell_radius):
            raise ValueError("every RRH must sit inside the cell (0 <= radius <= cell_radius)")
        if np.any(self.cache_sizes < 1):
            raise ValueError("every cache size must be at least 1")

    @property
    def n_rrh(self) -> int:
        return len(self.radii)

    @property
    def total_cache(self) -> int:
        """Total number of distinct files the RRH tier can hold."""
        return int(self.cache_sizes.sum())

    def distances_from(self, rho: float, theta: float) -> np.ndarray:
        """Distance from a user at polar ``(rho, theta)`` to every RRH."""
        return np.sqrt(
            rho**2 + self.radii**2 - 2.0 * rho * self.radii * np.cos(theta - self.angles)
        )

    def by_distance_to_centre(self) -> np.ndarray:
        """RRH indices sorted by distance to the cell centre, ties by index."""
        return np.lexsort((np.arange(self.n_rrh), self.radii))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RrhLayout)
            and self.cell_radius == other.cell_radius
            and np.array_equal(self.radii, other.radii)
            and np.array_equal(self.angles, other.angles)
            and np.array_equal(self.cache_sizes, other.cache_sizes)
        )

    def __hash__(self) -> int:
        return hash((
            self.cell_radius,
            self.radii.tobytes(),
            self.angles.tobytes(),
            self.cache_sizes.tobytes(),
        ))


@dataclass(frozen=True)
class RadioConfig:
    """Link-budget constants shared by every transmission in the cell.

    The cell-wide transmit SNR budget ``total_snr_db`` is split evenly over
    the RRHs, and the path-gain constant is calibrated so the received power
    drops by ``attenuation_at_edge_db`` at distance ``cell_radius``.
    """

    total_snr_db: float = 23.0
    path_loss_exponent: float = 3.0
    snr_threshold_db: float = 3.0
    attenuation_at_edge_db: float = 20.0

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be positive")

    @property
    def snr_threshold(self) -> float:
        """Outage threshold in linear units."""
        return 10.0 ** (self.snr_threshold_db / 10.0)

    def per_rrh_snr(self, n_rrh: int) -> float:
        """Transmit SNR of one RRH when the power budget is split n_rrh ways."""
        if n_rrh < 1:
            raise ValueError("n_rrh must be at least 1")
        return 10.0 ** (self.total_snr_db / 10.0) / n_rrh

    def gain_constant(self, cell_radius: float) -> float:
        """Path-gain prefactor fixed by the attenuation-at-edge convention."""
        return 10.0 ** (-self.attenuation_at_edge_db / 10.0) * cell_radius**self.path_loss_exponent


@dataclass(frozen=True, eq=False)
class PlacementMatrix:
    """Binary file-by-RRH caching matrix bound to the layout it was built for.

    ``entries[l, n] == 1`` means RRH ``n`` caches the file of rank ``l``
    (0-based; rank 0 is the most popular file).  Column sums must match the
    layout's cache sizes exactly.
    """

    entries: np.ndarray
    layout: RrhLayout

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2 or entries.shape[1] != self.layout.n_rrh:
            raise ValueError(
                f"entries must be (n_files x {self.layout.n_rrh}), got {entries.shape}"
            )
        if not np.isin(entries, (0, 1)).all():
            raise ValueError("placement entries must be 0 or 1")
        entries = entries.astype(np.uint8)
        sums = entries.sum(axis=0)
        bad = np.nonzero(sums != self.layout.cache_sizes)[0]
        if bad.size:
            n = int(bad[0])
            raise ValueError(
                f"cache capacity violated: column {n} holds {int(sums[n])} files, "
                f"RRH {n} can cache exactly {int(self.layout.cache_sizes[n])}"
            )
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def n_files(self) -> int:
        return self.entries.shape[0]

    def key(self) -> bytes:
        """Canonical byte encoding, usable as a dict key."""
        return self.entries.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PlacementMatrix)
            and self.entries.shape == other.entries.shape
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def cached_ranks(self, rrh: int) -> np.ndarray:
        """0-based ranks cached by one RRH, ascending."""
        return np.flatnonzero(self.entries[:, rrh])

    def rank_table(self) -> list[list[int]]:
        """Per-RRH list of cached ranks, 1-based, for human-readable records."""
        return [(self.cached_ranks(n) + 1).tolist() for n in range(self.layout.n_rrh)]


@dataclass(frozen=True)
class ServiceSet:
    """RRHs that transmit one file: the caching RRHs, or every RRH when the
    file must first be fetched over the fronthaul."""

    file_rank: int
    members: frozenset[int]
    uses_fronthaul: bool


def service_set(placement: PlacementMatrix, rank: int) -> ServiceSet:
    """Serving RRH set for the file of 0-based ``rank``.

    Falls back to the full RRH set when nobody caches the file, which is
    also the only case that touches the fronthaul.
    """
    if not 0 <= rank < placement.n_files:
        raise IndexError(f"file rank {rank} outside library of {placement.n_files}")
    caching = np.flatnonzero(placement.entries[rank])
    if caching.size:
        return ServiceSet(rank, frozenset(int(n) for n in caching), False)
    return ServiceSet(rank, frozenset(range(placement.layout.n_rrh)), True)


def fronthaul_usage(placement: PlacementMatrix, rank: int) -> int:
    """1 when no RRH caches the file (a fronthaul transfer is needed), else 0."""
    if not 0 <= rank < placement.n_files:
        raise IndexError(f"file rank {rank} outside library of {placement.n_files}")
    return int(np.prod(1 - placement.entries[rank].astype(int)))


def fronthaul_vector(placement: PlacementMatrix) -> np.ndarray:
    """Fronthaul indicator for every file at once."""
    return (placement.entries.sum(axis=1) == 0).astype(float)


def mpc_placement(library: FileLibrary, layout: RrhLayout) -> PlacementMatrix:
    """Most-popular-content placement: RRH ``n`` caches the top ranks
    up to its capacity, maximizing transmit diversity for the head files."""
    entries = np.zeros((library.n_files, layout.n_rrh), dtype=np.uint8)
    for n, size in enumerate(layout.cache_sizes):
        entries[: int(size), n] = 1
    return PlacementMatrix(entries, layout)


def lb_lcd_placement(library: FileLibrary, layout: RrhLayout) -> PlacementMatrix:
    """Location-based largest-content-diversity placement.

    RRHs are visited in order of increasing distance to the cell centre
    (ties broken by index) and their caches filled with consecutive ranks,
    so the centre-most RRH carries the most requested files and the RRH
    tier as a whole caches the ``total_cache`` top-ranked files once each.
    """
    if layout.total_cache > library.n_files:
        raise ValueError("combined cache space exceeds the library size")
    entries = np.zeros((library.n_files, layout.n_rrh), dtype=np.uint8)
    rank = 0
    for n in layout.by_distance_to_centre():
        size = int(layout.cache_sizes[n])
        entries[rank : rank + size, n] = 1
        rank += size
    return PlacementMatrix(entries, layout)


def random_placement(
    library: FileLibrary, layout: RrhLayout, rng: np.random.Generator
) -> PlacementMatrix:
    """Each RRH caches a uniform random subset of the whole library,
    ignoring popularity."""
    entries = np.zeros((library.n_files, layout.n_rrh), dtype=np.uint8)
    for n, size in enumerate(layout.cache_sizes):
        rows = rng.choice(library.n_files, size=int(size), replace=False)
        entries[rows, n] = 1
    return PlacementMatrix(entries, layout)


def probabilistic_placement(
    library: FileLibrary, layout: RrhLayout, rng: np.random.Generator
) -> PlacementMatrix:
    """Each RRH caches a popularity-weighted random subset, independently.

    Sampling is without replacement with weights equal to the request
    probabilities (Efraimidis-Spirakis keys), so each column still holds
    exactly the RRH's capacity and high-ranked files show up more often.
    """
    entries = np.zeros((library.n_files, layout.n_rrh), dtype=np.uint8)
    for n, size in enumerate(layout.cache_sizes):
        keys = rng.random(library.n_files) ** (1.0 / library.popularity)
        rows = np.argsort(keys)[-int(size):]
        entries[rows, n] = 1
    return PlacementMatrix(entries, layout)
