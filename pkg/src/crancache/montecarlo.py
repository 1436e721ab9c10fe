"""Independent simulation oracle for the analytic machinery.

Everything here samples the physical model directly: exponential channel
power gains (Rayleigh amplitude), area-uniform user locations via the
square-root radial transform, and Zipf-distributed file requests.  Draws
are partitioned over a fixed number of RNG substreams keyed by
``(seed, stream index)`` and merged by count-weighted averaging, so an
estimate depends only on the seed, never on how many workers ran the
streams.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import PlacementMatrix, RadioConfig, fronthaul_vector, service_set
from .scenario import Scenario

__all__ = [
    "SimConfig",
    "Estimate",
    "sample_received_snr",
    "uniform_disk_locations",
    "empirical_snr_cdf",
    "empirical_cell_outage",
    "empirical_objective",
]

N_STREAMS = 16


@dataclass(frozen=True)
class SimConfig:
    """Sample sizes for the Monte-Carlo estimators."""

    n_fading_draws: int = 1_000_000
    n_location_draws: int = 10_000
    n_request_draws: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if min(self.n_fading_draws, self.n_location_draws, self.n_request_draws) < 1:
            raise ValueError("all draw counts must be at least 1")


@dataclass(frozen=True)
class Estimate:
    """A Monte-Carlo mean with its standard error."""

    mean: float
    std_error: float
    draws: int


def _stream_rngs(seed: int) -> list[np.random.Generator]:
    return [np.random.default_rng([seed, i]) for i in range(N_STREAMS)]


def _split(total: int) -> list[int]:
    base, extra = divmod(total, N_STREAMS)
    return [base + (1 if i < extra else 0) for i in range(N_STREAMS)]


def _run_streams(jobs, threads: int | None):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def _mean_snrs(distances, radio: RadioConfig, n_rrh: int, cell_radius: float) -> np.ndarray:
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    return (
        radio.per_rrh_snr(n_rrh)
        * radio.gain_constant(cell_radius)
        * d ** (-radio.path_loss_exponent)
    )


def sample_received_snr(
    distances,
    radio: RadioConfig,
    n_rrh: int,
    cell_radius: float,
    rng: np.random.Generator,
    size: int = 1,
) -> np.ndarray:
    """Draws of the received SNR from RRHs at the given distances.

    Each serving RRH contributes an exponential with mean equal to its
    per-RRH SNR times the large-scale gain (the squared magnitude of a
    unit complex Gaussian fade is standard exponential).
    """
    gains = _mean_snrs(distances, radio, n_rrh, cell_radius)
    return rng.standard_exponential((size, gains.size)) @ gains


def uniform_disk_locations(
    cell_radius: float, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Area-uniform polar samples: radius via the square-root transform."""
    return (
        cell_radius * np.sqrt(rng.random(size)),
        2.0 * np.pi * rng.random(size),
    )


def empirical_snr_cdf(
    distances,
    radio: RadioConfig,
    n_rrh: int,
    cell_radius: float,
    snr_grid,
    n_draws: int,
    seed: int,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF of the received SNR on a grid of linear SNR values.

    Returns (cdf, binomial standard error) arrays matching ``snr_grid``.
    """
    gains = _mean_snrs(distances, radio, n_rrh, cell_radius)
    grid = np.asarray(snr_grid, dtype=float)
    counts = _split(n_draws)
    rngs = _stream_rngs(seed)

    def job(rng: np.random.Generator, count: int):
        def run():
            if count == 0:
                return np.zeros(grid.size)
            samples = rng.standard_exponential((count, gains.size)) @ gains
            return (samples[:, None] < grid[None, :]).sum(axis=0).astype(float)
        return run

    below = sum(_run_streams([job(r, c) for r, c in zip(rngs, counts)], threads))
    p = below / n_draws
    return p, np.sqrt(p * (1.0 - p) / n_draws)


def empirical_cell_outage(
    placement: PlacementMatrix,
    rank: int,
    scenario: Scenario,
    sim: SimConfig,
    threads: int | None = None,
) -> Estimate:
    """Simulated cell-average outage for one file under a placement.

    Averages the below-threshold indicator over user locations and fading
    draws; fading draws per location come from the fading/location budget
    ratio.  The standard error is taken across location means, because
    draws sharing a location are correlated.
    """
    members = sorted(service_set(placement, rank).members)
    layout = placement.layout
    radio = scenario.radio
    threshold = radio.snr_threshold
    per_location = max(1, round(sim.n_fading_draws / sim.n_location_draws))
    counts = _split(sim.n_location_draws)
    rngs = _stream_rngs(sim.seed)

    def job(rng: np.random.Generator, count: int):
        def run():
            if count == 0:
                return np.empty(0)
            rho, theta = uniform_disk_locations(layout.cell_radius, rng, count)
            d = np.sqrt(
                rho[:, None] ** 2
                + layout.radii[members] ** 2
                - 2.0 * rho[:, None] * layout.radii[members]
                * np.cos(theta[:, None] - layout.angles[members])
            )
            gains = (
                radio.per_rrh_snr(layout.n_rrh)
                * radio.gain_constant(layout.cell_radius)
                * d ** (-radio.path_loss_exponent)
            )
            fades = rng.standard_exponential((count, per_location, len(members)))
            snr = np.einsum("lfm,lm->lf", fades, gains)
            return (snr < threshold).mean(axis=1)
        return run

    location_means = np.concatenate(
        _run_streams([job(r, c) for r, c in zip(rngs, counts)], threads)
    )
    n = location_means.size
    return Estimate(
        mean=float(location_means.mean()),
        std_error=float(location_means.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
        draws=n * per_location,
    )


def empirical_objective(
    placement: PlacementMatrix,
    eta: float,
    scenario: Scenario,
    sim: SimConfig,
    threads: int | None = None,
) -> Estimate:
    """Simulated weighted objective under sampled requests, locations and
    fading: the per-draw score is eta times the outage indicator plus
    (1 - eta) times the fronthaul indicator of the requested file."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    layout = placement.layout
    radio = scenario.radio
    pop = scenario.library.popularity
    threshold = radio.snr_threshold
    fronthaul = fronthaul_vector(placement)
    member_arrays = [
        np.sort(np.fromiter(service_set(placement, rank).members, dtype=int))
        for rank in range(placement.n_files)
    ]
    counts = _split(sim.n_request_draws)
    rngs = _stream_rngs(sim.seed)

    def job(rng: np.random.Generator, count: int):
        def run():
            if count == 0:
                return np.empty(0)
            requests = rng.choice(placement.n_files, size=count, p=pop)
            rho, theta = uniform_disk_locations(layout.cell_radius, rng, count)
            score = np.empty(count)
            for rank in np.unique(requests):
                sel = requests == rank
                mem = member_arrays[rank]
                d = np.sqrt(
                    rho[sel, None] ** 2
                    + layout.radii[mem] ** 2
                    - 2.0 * rho[sel, None] * layout.radii[mem]
                    * np.cos(theta[sel, None] - layout.angles[mem])
                )
                gains = (
                    radio.per_rrh_snr(layout.n_rrh)
                    * radio.gain_constant(layout.cell_radius)
                    * d ** (-radio.path_loss_exponent)
                )
                snr = (rng.standard_exponential(d.shape) * gains).sum(axis=1)
                score[sel] = eta * (snr < threshold) + (1.0 - eta) * fronthaul[rank]
            return score
        return run

    scores = np.concatenate(_run_streams([job(r, c) for r, c in zip(rngs, counts)], threads))
    n = scores.size
    return Estimate(
        mean=float(scores.mean()),
        std_error=float(scores.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
        draws=n,
    )
