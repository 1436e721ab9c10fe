"""Exact distribution of a user's received SNR under joint RRH transmission.

With Rayleigh small-scale fading, the SNR received from a serving set of
RRHs is a sum of independent exponentials whose means are the per-RRH mean
SNRs ``gamma0 * K * d**(-alpha)``.  Its moment generating function is a
product of simple poles; RRHs equidistant from the user merge into a
repeated pole.  A partial-fraction expansion with residue coefficients
``A[i][j]`` turns the MGF into a mixture of Erlang terms, giving closed
forms for the PDF, the CDF, and hence the outage probability as the CDF at
the threshold SNR.

Residues for repeated poles are computed from derivatives of the deflated
MGF via the logarithmic-derivative recursion: the derivatives of
``log g`` are elementary power sums, and ``g``'s own derivatives follow
from the Leibniz rule.  This is exact to machine precision and O(J^2) per
pole group; no symbolic algebra or finite differencing is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.special import gammainc

from .model import RadioConfig, service_set

__all__ = [
    "IllConditionedPolesError",
    "UserLocation",
    "PoleSpectrum",
    "large_scale_fading",
    "group_poles",
    "partial_fraction",
    "snr_pdf",
    "snr_cdf",
    "cdf_distinct_distances",
    "pdf_distinct_distances",
    "mgf_from_rates",
    "outage_probability",
    "spectrum_for_distances",
]

# Distances closer than this fraction of the cell radius count as equal and
# their poles merge into one group of higher multiplicity.
DEFAULT_GROUPING_TOL = 1e-9

# Relative rate separation below which the expansion is refused: such poles
# should have been merged by the distance grouping upstream.
_RATE_SEPARATION_TOL = 1e-9


class IllConditionedPolesError(ArithmeticError):
    """Raised when two pole groups are too close to expand reliably."""


@dataclass(frozen=True)
class UserLocation:
    """Polar user coordinates inside the cell."""

    rho: float
    theta: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be non-negative")


def large_scale_fading(distance: float, radio: RadioConfig, cell_radius: float) -> float:
    """Distance-driven power gain ``K * d**(-alpha)``.

    ``K`` follows from the radio calibration (see ``RadioConfig``), so the
    gain equals the configured edge attenuation at ``distance == cell_radius``.
    A user exactly on top of an RRH has no finite gain and is rejected.
    """
    if distance <= 0:
        raise ValueError("distance must be positive (user colocated with an RRH?)")
    return radio.gain_constant(cell_radius) * distance ** (-radio.path_loss_exponent)


def group_poles(
    distances,
    per_rrh_snr: float,
    gain_constant: float,
    path_loss_exponent: float,
    tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Group serving distances into distinct MGF poles.

    Serving RRHs within ``tol`` of each other (absolute distance) collapse
    into one group whose multiplicity is the RRH count; the pole rate of a
    group is ``1 / (per_rrh_snr * gain_constant * d**(-alpha))`` evaluated
    at the group's mean distance.  Groups come back sorted by rate.

    Returns ``(rates, multiplicities)``.
    """
    d = np.sort(np.asarray(distances, dtype=float))
    if d.size == 0:
        raise ValueError("need at least one serving distance")
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    sums: list[float] = [d[0]]
    counts: list[int] = [1]
    for x in d[1:]:
        if x - sums[-1] / counts[-1] <= tol:
            sums[-1] += x
            counts[-1] += 1
        else:
            sums.append(x)
            counts.append(1)
    means = np.array(sums) / np.array(counts)
    rates = means**path_loss_exponent / (per_rrh_snr * gain_constant)
    order = np.argsort(rates)
    return rates[order], np.array(counts, dtype=int)[order]


@dataclass(frozen=True, eq=False)
class PoleSpectrum:
    """Partial-fraction description of a received-SNR distribution.

    ``rates[i]`` is the i-th pole with multiplicity ``multiplicities[i]``;
    ``residues[i][j-1]`` is the coefficient of the order-``j`` Erlang term
    for that pole.  The residues always sum to 1 (the MGF at 0), which is
    what makes the mixture a proper distribution.
    """

    rates: np.ndarray
    multiplicities: np.ndarray
    residues: tuple[np.ndarray, ...]

    @property
    def order(self) -> int:
        """Number of serving RRHs behind this spectrum."""
        return int(self.multiplicities.sum())

    def residue_sum(self) -> float:
        return float(sum(a.sum() for a in self.residues))

    def pdf(self, snr):
        """Density of the received SNR, evaluated termwise."""
        g = np.asarray(snr, dtype=float)
        if np.any(g < 0):
            raise ValueError("SNR must be non-negative")
        total = np.zeros_like(g)
        for rate, mult, res in zip(self.rates, self.multiplicities, self.residues):
            x = rate * g
            for j in range(1, int(mult) + 1):
                total += res[j - 1] * rate * x ** (j - 1) * np.exp(-x) / factorial(j - 1)
        return total if total.shape else float(total)

    def cdf(self, snr):
        """Distribution function of the received SNR, evaluated termwise.

        Each pole/order term is an Erlang distribution function, computed
        through the regularized lower incomplete gamma for stability.
        """
        g = np.asarray(snr, dtype=float)
        if np.any(g < 0):
            raise ValueError("SNR must be non-negative")
        total = np.zeros_like(g)
        for rate, mult, res in zip(self.rates, self.multiplicities, self.residues):
            x = rate * g
            for j in range(1, int(mult) + 1):
                total += res[j - 1] * gammainc(j, x)
        return total if total.shape else float(total)

    def mgf(self, s):
        """MGF reconstructed from the expansion; valid for s below min rate."""
        total = 0.0
        for rate, mult, res in zip(self.rates, self.multiplicities, self.residues):
            for j in range(1, int(mult) + 1):
                total += res[j - 1] / (1.0 - s / rate) ** j
        return total


def mgf_from_rates(rates, multiplicities, s):
    """Product-form MGF ``prod (1 - s/rate)**(-mult)`` (the ground truth the
    expansion must reproduce)."""
    total = 1.0
    for rate, mult in zip(rates, multiplicities):
        total *= (1.0 - s / rate) ** (-int(mult))
    return total


def _deflated_derivatives(rates, mults, i: int, order: int) -> list[float]:
    """Derivatives 0..order of g(s) = prod_{k != i} (1 - s/rate_k)^(-mult_k)
    at s = rates[i], via the log-derivative recursion."""
    li = rates[i]
    others = [(rates[k], int(mults[k])) for k in range(len(rates)) if k != i]
    g0 = 1.0
    for rk, jk in others:
        g0 *= (1.0 - li / rk) ** (-jk)
    g = [g0] + [0.0] * order
    if order == 0:
        return g
    # (log g)^{(m)}(li) = sum_k J_k (m-1)! / (rate_k - li)^m
    h = [0.0] * (order + 1)
    for m in range(1, order + 1):
        h[m] = sum(jk * factorial(m - 1) / (rk - li) ** m for rk, jk in others)
    for m in range(order):
        g[m + 1] = sum(comb(m, r) * g[r] * h[m + 1 - r] for r in range(m + 1))
    return g


def partial_fraction(rates, multiplicities) -> PoleSpectrum:
    """Residue coefficients of the received-SNR MGF.

    For pole ``i`` of multiplicity ``J``, the coefficient of the order-``j``
    term is ``(-rate_i)**(J-j) / (J-j)! * g^{(J-j)}(rate_i)`` with ``g`` the
    MGF deflated by that pole.  Raises ``IllConditionedPolesError`` when two
    rates are so close they should have been merged during grouping.
    """
    rates = np.asarray(rates, dtype=float)
    mults = np.asarray(multiplicities, dtype=int)
    if rates.ndim != 1 or rates.shape != mults.shape or rates.size == 0:
        raise ValueError("rates and multiplicities must be equal-length 1-D arrays")
    if np.any(rates <= 0):
        raise ValueError("pole rates must be positive")
    if np.any(mults < 1):
        raise ValueError("multiplicities must be at least 1")
    order = np.argsort(rates)
    rates, mults = rates[order], mults[order]
    gaps = np.diff(rates) / rates[:-1]
    if np.any(gaps < _RATE_SEPARATION_TOL):
        i = int(np.argmin(gaps))
        raise IllConditionedPolesError(
            f"pole rates {rates[i]:.6g} and {rates[i + 1]:.6g} differ by less than "
            f"the grouping tolerance; merge them into one group instead"
        )
    residues = []
    for i in range(len(rates)):
        ji = int(mults[i])
        g = _deflated_derivatives(rates, mults, i, ji - 1)
        coef = np.empty(ji)
        for j in range(1, ji + 1):
            m = ji - j
            coef[j - 1] = (-rates[i]) ** m / factorial(m) * g[m]
        residues.append(coef)
    return PoleSpectrum(rates, mults, tuple(residues))


def snr_pdf(spectrum: PoleSpectrum, snr):
    """Density of the received SNR at ``snr`` (linear units)."""
    return spectrum.pdf(snr)


def snr_cdf(spectrum: PoleSpectrum, snr):
    """Probability that the received SNR is below ``snr`` (linear units)."""
    return spectrum.cdf(snr)


def _distinct_coefficients(gains: np.ndarray) -> np.ndarray:
    # prod_{m != n} S_n / (S_n - S_m) for each n
    ratio = gains[:, None] / (gains[:, None] - gains[None, :] + np.eye(len(gains)))
    np.fill_diagonal(ratio, 1.0)
    return np.prod(ratio, axis=1)


def cdf_distinct_distances(
    distances, per_rrh_snr: float, gain_constant: float, path_loss_exponent: float, snr
):
    """Received-SNR CDF on the fast path for pairwise-distinct distances.

    Writes the distribution directly as a signed mixture of exponentials
    with weights ``prod_{m != n} S_n / (S_n - S_m)``; must agree with the
    general repeated-pole path whenever it applies.
    """
    d = np.asarray(distances, dtype=float)
    gains = gain_constant * d ** (-path_loss_exponent)
    coef = _distinct_coefficients(gains)
    g = np.asarray(snr, dtype=float)
    total = np.zeros_like(g)
    for c, s in zip(coef, gains):
        total += c * -np.expm1(-g / (per_rrh_snr * s))
    return total if total.shape else float(total)


def pdf_distinct_distances(
    distances, per_rrh_snr: float, gain_constant: float, path_loss_exponent: float, snr
):
    """Received-SNR PDF on the distinct-distance fast path."""
    d = np.asarray(distances, dtype=float)
    gains = gain_constant * d ** (-path_loss_exponent)
    coef = _distinct_coefficients(gains)
    g = np.asarray(snr, dtype=float)
    total = np.zeros_like(g)
    for c, s in zip(coef, gains):
        mean = per_rrh_snr * s
        total += c / mean * np.exp(-g / mean)
    return total if total.shape else float(total)


def spectrum_for_distances(
    distances,
    radio: RadioConfig,
    n_rrh: int,
    cell_radius: float,
    tol: float | None = None,
) -> PoleSpectrum:
    """Pole spectrum of the SNR received from RRHs at the given distances.

    ``n_rrh`` is the total RRH count in the cell (it fixes the per-RRH
    power split), not the size of the serving set.
    """
    if tol is None:
        tol = DEFAULT_GROUPING_TOL * cell_radius
    rates, mults = group_poles(
        distances,
        radio.per_rrh_snr(n_rrh),
        radio.gain_constant(cell_radius),
        radio.path_loss_exponent,
        tol,
    )
    return partial_fraction(rates, mults)


def outage_probability(
    placement,
    rank: int,
    location: UserLocation,
    radio: RadioConfig,
    tol: float | None = None,
) -> float:
    """Probability that the file of ``rank`` is received below threshold at
    one user location: the service-set SNR CDF at the threshold SNR."""
    layout = placement.layout
    members = sorted(service_set(placement, rank).members)
    d = layout.distances_from(location.rho, location.theta)[members]
    spectrum = spectrum_for_distances(d, radio, layout.n_rrh, layout.cell_radius, tol)
    return float(spectrum.cdf(radio.snr_threshold))
