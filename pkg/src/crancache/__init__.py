"""Tradeoff cache placement for a cache-enabled radio cell.

Public surface: domain types and canonical placements (``model``), exact
received-SNR analytics (``analytics``), polar Simpson cell averaging
(``quadrature``), the weighted-sum objective (``objective``), placement
optimizers (``solvers``), the Monte-Carlo oracle (``montecarlo``) and
scenario files (``scenario``).
"""

__version__ = "0.1.0"

from .model import (
    FileLibrary,
    PlacementMatrix,
    RadioConfig,
    RrhLayout,
    ServiceSet,
    fronthaul_usage,
    lb_lcd_placement,
    mpc_placement,
    probabilistic_placement,
    random_placement,
    service_set,
    zipf_popularity,
)
from .analytics import (
    IllConditionedPolesError,
    PoleSpectrum,
    UserLocation,
    group_poles,
    large_scale_fading,
    outage_probability,
    partial_fraction,
    snr_cdf,
    snr_pdf,
    spectrum_for_distances,
)
from .quadrature import SimpsonGrid, build_grid, cell_average, cell_average_outage
from .scenario import LoadedScenario, Scenario, ScenarioError, load_scenario
from .objective import (
    NoCrossoverError,
    ObjectiveEvaluator,
    ObjectivePoint,
    eta_crossover,
    evaluate,
    fronthaul_expectation,
    pareto_filter,
    supported_filter,
)
from .solvers import (
    BudgetExceededError,
    ExhaustiveResult,
    GaConfig,
    GaResult,
    baseline_expected_objective,
    exhaustive_search,
    ga_optimize,
    mode_select,
)
from .montecarlo import (
    SimConfig,
    empirical_cell_outage,
    empirical_objective,
    empirical_snr_cdf,
    sample_received_snr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
