import numpy as np
import pytest

from crancache import FileLibrary, RadioConfig, RrhLayout
from crancache.scenario import Scenario, load_scenario


@pytest.fixture(scope="session")
def table_v():
    """L=9, M=2, N=3 tradeoff scenario (RRHs at R/4, R/3, R/2)."""
    return load_scenario("fig5_pareto")


@pytest.fixture(scope="session")
def table_iv():
    """L=50, M=5, N=7 scenario (centre RRH plus ring at 2R/3)."""
    return load_scenario("fig6_9")


@pytest.fixture(scope="session")
def radio():
    return RadioConfig()


@pytest.fixture(scope="session")
def tiny_scenario():
    """Two RRHs, five files; cheap enough for exhaustive property checks."""
    return Scenario(
        library=FileLibrary.zipf(5, 1.0),
        layout=RrhLayout(
            radii=np.array([0.3, 0.6]),
            angles=np.array([0.0, np.pi]),
            cache_sizes=np.array([1, 1]),
        ),
        radio=RadioConfig(),
    )


def ring_layout(n_ring: int, ring_radius: float, cache: int, centre: bool = False,
                cell_radius: float = 1.0) -> RrhLayout:
    radii = [0.0] * centre + [ring_radius] * n_ring
    angles = [0.0] * centre + [2 * np.pi * k / n_ring for k in range(n_ring)]
    return RrhLayout(
        radii=np.array(radii),
        angles=np.array(angles),
        cache_sizes=np.full(len(radii), cache, dtype=int),
        cell_radius=cell_radius,
    )
