"""Scenario assembly: one object tying library, geometry, radio constants
and quadrature resolution together, plus the JSON file schema and shipped
presets.

Scenario file layout (all angles in radians, dB only where noted)::

    {
      "library":    {"L": 50, "beta": 1.5},
      "layout":     {"R": 1.0,
                     "rrh": [[rho, theta], ...],
                     "cache_sizes": [5, 5, 5, 5, 5, 5, 5]},
      "radio":      {"total_snr_db": 23.0, "alpha": 3.0,
                     "gamma_th_db": 3.0, "attenuation_at_R_db": 20.0},
      "quadrature": {"U": 6, "V": 6},
      "ga":         {...GaConfig fields...},        # optional
      "sim":        {...SimConfig fields...},       # optional
      "eta_grid":   [0.0, 0.1, ..., 1.0]            # optional
    }

Files are parsed then validated; a violation reports the offending field
path.  ``load_scenario`` accepts either a filesystem path or the name of a
shipped preset (fig2, fig4_5, fig5_pareto, fig6_9).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .model import FileLibrary, RadioConfig, RrhLayout
from .quadrature import SimpsonGrid, build_grid

if TYPE_CHECKING:
    from .montecarlo import SimConfig
    from .solvers import GaConfig

__all__ = [
    "Scenario",
    "ScenarioError",
    "LoadedScenario",
    "load_scenario",
    "scenario_to_dict",
    "PRESET_NAMES",
]

PRESET_NAMES = ("fig2", "fig4_5", "fig5_pareto", "fig6_9")


class ScenarioError(ValueError):
    """Invalid scenario description; the message carries the field path."""


@dataclass(frozen=True)
class Scenario:
    """A fully specified experiment cell."""

    library: FileLibrary
    layout: RrhLayout
    radio: RadioConfig
    radial_panels: int = 6
    angular_panels: int = 6

    def __post_init__(self):
        if self.layout.total_cache >= self.library.n_files:
            raise ScenarioError(
                "layout.cache_sizes: combined RRH cache space "
                f"({self.layout.total_cache}) must stay below the library size "
                f"({self.library.n_files})"
            )

    @property
    def top_rank_count(self) -> int:
        """Number of head ranks worth caching (the combined cache space)."""
        return self.layout.total_cache

    def grid(self) -> SimpsonGrid:
        return build_grid(self.layout.cell_radius, self.radial_panels, self.angular_panels)

    @cached_property
    def _evaluator(self):
        from .objective import ObjectiveEvaluator

        return ObjectiveEvaluator(self)

    def evaluator(self):
        """Shared memoizing objective evaluator for this scenario."""
        return self._evaluator


@dataclass(frozen=True)
class LoadedScenario:
    """Scenario plus the optional run sections of a scenario file."""

    scenario: Scenario
    ga: "GaConfig"
    sim: "SimConfig"
    eta_grid: tuple[float, ...]
    raw: dict


def _section(raw: dict, key: str, required: bool = True) -> dict:
    if key not in raw:
        if required:
            raise ScenarioError(f"{key}: section missing")
        return {}
    if not isinstance(raw[key], dict):
        raise ScenarioError(f"{key}: expected an object")
    return raw[key]


def _number(section: dict, path: str, key: str, default=None):
    if key not in section:
        if default is None:
            raise ScenarioError(f"{path}.{key}: field missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {value!r}")
    return value


def scenario_from_dict(raw: dict) -> Scenario:
    lib = _section(raw, "library")
    lay = _section(raw, "layout")
    rad = _section(raw, "radio", required=False)
    quad = _section(raw, "quadrature", required=False)

    n_files = int(_number(lib, "library", "L"))
    skew = float(_number(lib, "library", "beta"))
    try:
        library = FileLibrary.zipf(n_files, skew)
    except ValueError as exc:
        raise ScenarioError(f"library: {exc}") from exc

    rrh = lay.get("rrh")
    if not isinstance(rrh, list) or not rrh:
        raise ScenarioError("layout.rrh: expected a non-empty list of [rho, theta] pairs")
    for i, pos in enumerate(rrh):
        if not (isinstance(pos, (list, tuple)) and len(pos) == 2):
            raise ScenarioError(f"layout.rrh[{i}]: expected a [rho, theta] pair")
    cache_sizes = lay.get("cache_sizes")
    if not isinstance(cache_sizes, list) or len(cache_sizes) != len(rrh):
        raise ScenarioError("layout.cache_sizes: expected one integer per RRH")
    try:
        layout = RrhLayout(
            radii=np.array([p[0] for p in rrh], float),
            angles=np.array([p[1] for p in rrh], float),
            cache_sizes=np.array(cache_sizes, int),
            cell_radius=float(_number(lay, "layout", "R", default=1.0)),
        )
    except ValueError as exc:
        raise ScenarioError(f"layout: {exc}") from exc

    radio = RadioConfig(
        total_snr_db=float(_number(rad, "radio", "total_snr_db", default=23.0)),
        path_loss_exponent=float(_number(rad, "radio", "alpha", default=3.0)),
        snr_threshold_db=float(_number(rad, "radio", "gamma_th_db", default=3.0)),
        attenuation_at_edge_db=float(_number(rad, "radio", "attenuation_at_R_db", default=20.0)),
    )

    radial = int(_number(quad, "quadrature", "U", default=6))
    angular = int(_number(quad, "quadrature", "V", default=6))
    try:
        return Scenario(library, layout, radio, radial, angular)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(source: str | Path) -> LoadedScenario:
    """Load a scenario file or a shipped preset by name."""
    from .montecarlo import SimConfig
    from .solvers import GaConfig

    name = str(source)
    if name in PRESET_NAMES:
        text = resources.files("crancache.presets").joinpath(f"{name}.json").read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise ScenarioError(f"scenario file not found: {path}")
        text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("top level: expected an object")

    scenario = scenario_from_dict(raw)

    ga_raw = _section(raw, "ga", required=False)
    try:
        ga = GaConfig(**ga_raw)
    except TypeError as exc:
        raise ScenarioError(f"ga: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(f"ga: {exc}") from exc

    sim_raw = _section(raw, "sim", required=False)
    try:
        sim = SimConfig(**sim_raw)
    except TypeError as exc:
        raise ScenarioError(f"sim: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(f"sim: {exc}") from exc

    eta_grid = raw.get("eta_grid", [round(0.1 * k, 1) for k in range(11)])
    if not isinstance(eta_grid, list) or not eta_grid:
        raise ScenarioError("eta_grid: expected a non-empty list")
    for i, eta in enumerate(eta_grid):
        if isinstance(eta, bool) or not isinstance(eta, (int, float)) or not 0 <= eta <= 1:
            raise ScenarioError(f"eta_grid[{i}]: expected a number in [0, 1], got {eta!r}")

    return LoadedScenario(scenario, ga, sim, tuple(float(e) for e in eta_grid), raw)


def scenario_to_dict(loaded: LoadedScenario) -> dict:
    """Fully resolved configuration, embedded in every output file header."""
    sc = loaded.scenario
    return {
        "library": {"L": sc.library.n_files, "beta": sc.library.skew},
        "layout": {
            "R": sc.layout.cell_radius,
            "rrh": [[float(r), float(t)] for r, t in zip(sc.layout.radii, sc.layout.angles)],
            "cache_sizes": sc.layout.cache_sizes.tolist(),
        },
        "radio": {
            "total_snr_db": sc.radio.total_snr_db,
            "alpha": sc.radio.path_loss_exponent,
            "gamma_th_db": sc.radio.snr_threshold_db,
            "attenuation_at_R_db": sc.radio.attenuation_at_edge_db,
        },
        "quadrature": {"U": sc.radial_panels, "V": sc.angular_panels},
        "ga": asdict(loaded.ga),
        "sim": asdict(loaded.sim),
        "eta_grid": list(loaded.eta_grid),
    }
