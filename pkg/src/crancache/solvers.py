"""Placement optimizers: a genetic algorithm over binary placement
matrices, exact enumeration for small instances, the two-evaluation mode
selector, and expected objectives of the stochastic baselines.

The GA keeps every individual feasible by construction: crossover splices
a random row segment between parents column by column, mutation flips one
entry per column, and both finish with the same repair sweep (drop excess
cached files from the bottom rank up, refill missing slots from the top
rank down).  Selection is stochastic universal sampling over linear
rank weights, and the best individuals pass to the next generation
unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.stats import rankdata

from .model import (
    PlacementMatrix,
    lb_lcd_placement,
    mpc_placement,
    probabilistic_placement,
    random_placement,
)
from .objective import NoCrossoverError, ObjectivePoint, eta_crossover
from .scenario import Scenario

__all__ = [
    "GaConfig",
    "GaPopulation",
    "GaResult",
    "ExhaustiveResult",
    "BaselineResult",
    "BudgetExceededError",
    "ga_initial_population",
    "crossover",
    "mutate",
    "sus_select",
    "ga_optimize",
    "exhaustive_search",
    "enumerate_tradeoffs",
    "mode_select",
    "baseline_expected_objective",
]


class BudgetExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the evaluation budget."""

    def __init__(self, enumeration_count: int, full_count: int, budget: int):
        self.enumeration_count = enumeration_count
        self.full_count = full_count
        self.budget = budget
        super().__init__(
            f"exhaustive search needs {enumeration_count:.4g} objective evaluations "
            f"({full_count:.4g} over the unrestricted library), budget is {budget:.4g}"
        )


@dataclass(frozen=True)
class GaConfig:
    """GA knobs; the defaults mirror the reference simulation setup.

    The stall window default of 50 generations (not shorter) matters: the
    crossover/mutation repair can only move cached ranks toward the top of
    a column, so deep-rank cache patterns lost from the population never
    reappear and runs need headroom to exploit them before convergence.
    """

    population_size: int = 50
    elite_count: int = 10
    crossover_fraction: float = 0.85
    max_generations: int = 100
    stall_generations: int = 50
    stall_tolerance: float = 1e-9
    seed: int = 0
    seed_with_canonical: bool = True

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must lie in [0, population_size)")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must lie in [0, 1]")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValueError("generation limits must be positive")

    @property
    def crossover_count(self) -> int:
        return round(self.crossover_fraction * (self.population_size - self.elite_count))

    @property
    def mutation_count(self) -> int:
        return self.population_size - self.elite_count - self.crossover_count


@dataclass
class GaPopulation:
    """One generation of candidate placements.

    ``fitness`` is None until the generation has been scored (the weight
    eta is not known at construction time).
    """

    individuals: list[PlacementMatrix]
    fitness: np.ndarray | None
    generation: int


@dataclass(frozen=True)
class GaResult:
    placement: PlacementMatrix
    point: ObjectivePoint
    generations: int          # generations evaluated, initial one included
    evaluations: int          # population_size * generations
    converged_at: int         # generation of the last best-fitness improvement
    best_history: tuple[float, ...]
    mean_history: tuple[float, ...]


@dataclass(frozen=True)
class ExhaustiveResult:
    placement: PlacementMatrix
    point: ObjectivePoint
    enumerated: int


@dataclass(frozen=True)
class BaselineResult:
    strategy: str
    eta: float
    draws: int
    mean_value: float
    std_error: float
    mean_outage: float
    mean_fronthaul: float


def _repair_column(column: np.ndarray, capacity: int) -> None:
    """Enforce the cache capacity in place: drop surplus entries in
    descending rank order, then fill shortfalls in ascending rank order."""
    ones = np.flatnonzero(column)
    excess = ones.size - capacity
    if excess > 0:
        column[ones[-excess:]] = 0
    elif excess < 0:
        zeros = np.flatnonzero(column == 0)
        column[zeros[:-excess]] = 1


def _crossover_entries(
    a1: np.ndarray, a2: np.ndarray, top_ranks: int, cache_sizes: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    child = np.empty_like(a1)
    for n in range(a1.shape[1]):
        r1, r2 = rng.choice(top_ranks, size=2, replace=False)
        if r1 < r2:
            col = a1[:, n].copy()
            col[r1 : r2 + 1] = a2[r1 : r2 + 1, n]
        else:
            col = a2[:, n].copy()
            col[r2 : r1 + 1] = a1[r2 : r1 + 1, n]
        _repair_column(col, int(cache_sizes[n]))
        child[:, n] = col
    return child


def _mutate_entries(
    a: np.ndarray, top_ranks: int, cache_sizes: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    child = a.copy()
    for n in range(a.shape[1]):
        r = int(rng.integers(top_ranks))
        child[r, n] ^= 1
        _repair_column(child[:, n], int(cache_sizes[n]))
    return child


def crossover(
    parent1: PlacementMatrix, parent2: PlacementMatrix, rng: np.random.Generator
) -> PlacementMatrix:
    """Two-point column splice of the parents followed by capacity repair."""
    layout = parent1.layout
    top = int(layout.total_cache)
    entries = _crossover_entries(
        parent1.entries, parent2.entries, top, layout.cache_sizes, rng
    )
    return PlacementMatrix(entries, layout)


def mutate(individual: PlacementMatrix, rng: np.random.Generator) -> PlacementMatrix:
    """Flip one top-rank entry per column, then repair the capacity."""
    layout = individual.layout
    entries = _mutate_entries(
        individual.entries, int(layout.total_cache), layout.cache_sizes, rng
    )
    return PlacementMatrix(entries, layout)


def _random_entries(
    n_files: int, top_ranks: int, cache_sizes: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    entries = np.zeros((n_files, len(cache_sizes)), dtype=np.uint8)
    for n, size in enumerate(cache_sizes):
        rows = rng.choice(top_ranks, size=int(size), replace=False)
        entries[rows, n] = 1
    return entries


def ga_initial_population(
    config: GaConfig, scenario: Scenario, rng: np.random.Generator
) -> GaPopulation:
    """Random feasible individuals supported on the head ranks.

    Ranks beyond the combined cache space never help (swapping such a file
    for an uncached higher-ranked one cannot worsen either objective), so
    columns draw uniformly from the top ranks only.  With canonical
    seeding the first two individuals are replaced by the MPC and LB-LCD
    placements.
    """
    layout = scenario.layout
    top = scenario.top_rank_count
    if int(layout.cache_sizes.max()) > top:
        raise ValueError("a cache larger than the combined top-rank pool is infeasible")
    individuals = [
        PlacementMatrix(
            _random_entries(scenario.library.n_files, top, layout.cache_sizes, rng),
            layout,
        )
        for _ in range(config.population_size)
    ]
    if config.seed_with_canonical and config.population_size >= 2:
        individuals[0] = mpc_placement(scenario.library, layout)
        individuals[1] = lb_lcd_placement(scenario.library, layout)
    return GaPopulation(individuals, None, 0)


def sus_select(fitness: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stochastic universal sampling over linear rank weights.

    Individuals are ranked by objective value (ties share an averaged
    rank, so equal fitness means equal selection expectation) and weighted
    ``population_size - rank + 1``: the best individual's expected copy
    count approaches 2 while the worst stays positive.  One spin places
    ``count`` equally spaced pointers, so realized counts never drift more
    than one from their expectations.  The selected indices come back
    shuffled, the standard guard against positional bias when consumers
    pair them in order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    fitness = np.asarray(fitness, dtype=float)
    ranks = rankdata(fitness, method="average")
    weights = fitness.size - ranks + 1.0
    wheel = np.cumsum(weights)
    step = wheel[-1] / count
    pointers = rng.uniform(0.0, step) + step * np.arange(count)
    return rng.permutation(np.searchsorted(wheel, pointers, side="right"))


def _order_key(fit: float, point: tuple[float, float], key: bytes):
    # deterministic total order: objective, then outage, then fronthaul,
    # then the canonical byte encoding
    return (fit, point[0], point[1], key)


def ga_optimize(
    scenario: Scenario, eta: float, config: GaConfig | None = None
) -> GaResult:
    """Run the GA and return the best placement found.

    Per generation: the best distinct individuals survive unchanged
    (deduplicating the elite slots keeps the population from filling with
    copies, which matters because the repair sweep cannot re-create deep
    cache patterns once lost), stochastic universal sampling picks 2*Nc
    crossover parents (paired in draw order) and Nm mutation parents, and
    the offspring refill the population.  The run stops after
    ``max_generations`` or once the best objective has not improved by
    ``stall_tolerance`` for ``stall_generations`` generations.  The
    reported evaluation count is population size times generations, the
    standard complexity accounting for a GA.
    """
    if config is None:
        config = GaConfig()
    rng = np.random.default_rng(config.seed)
    evaluator = scenario.evaluator()

    population = ga_initial_population(config, scenario, rng).individuals

    def score(ind: PlacementMatrix) -> float:
        return evaluator.evaluate(ind, eta).value

    def sort_key(i: int):
        ind = population[i]
        return _order_key(fitness[i], evaluator.components(ind), ind.key())

    fitness = np.array([score(ind) for ind in population])
    generations = 1
    best_history = [float(fitness.min())]
    mean_history = [float(fitness.mean())]

    order = sorted(range(len(population)), key=sort_key)
    best_ind = population[order[0]]
    best_fit = fitness[order[0]]
    converged_at = 1
    stall = 0

    while generations < config.max_generations and stall < config.stall_generations:
        elites: list[PlacementMatrix] = []
        seen: set[bytes] = set()
        for i in order:
            key = population[i].key()
            if key not in seen:
                seen.add(key)
                elites.append(population[i])
            if len(elites) == config.elite_count:
                break
        n_offspring = config.population_size - len(elites)
        n_cross = round(config.crossover_fraction * n_offspring)
        n_mut = n_offspring - n_cross

        offspring: list[PlacementMatrix] = []
        if n_cross:
            parents = sus_select(fitness, 2 * n_cross, rng)
            for a, b in zip(parents[0::2], parents[1::2]):
                offspring.append(crossover(population[a], population[b], rng))
        if n_mut:
            for a in sus_select(fitness, n_mut, rng):
                offspring.append(mutate(population[a], rng))

        population = elites + offspring
        fitness = np.array([score(ind) for ind in population])
        generations += 1
        best_history.append(float(fitness.min()))
        mean_history.append(float(fitness.mean()))

        order = sorted(range(len(population)), key=sort_key)
        cand_ind, cand_fit = population[order[0]], fitness[order[0]]
        if cand_fit < best_fit - config.stall_tolerance:
            best_ind, best_fit = cand_ind, cand_fit
            converged_at = generations
            stall = 0
        else:
            if _order_key(cand_fit, evaluator.components(cand_ind), cand_ind.key()) < _order_key(
                best_fit, evaluator.components(best_ind), best_ind.key()
            ):
                best_ind, best_fit = cand_ind, cand_fit
            stall += 1

    return GaResult(
        placement=best_ind,
        point=evaluator.evaluate(best_ind, eta),
        generations=generations,
        evaluations=config.population_size * generations,
        converged_at=converged_at,
        best_history=tuple(best_history),
        mean_history=tuple(mean_history),
    )


def exhaustive_search(
    scenario: Scenario,
    eta: float,
    budget: int = 10_000_000,
    restrict_to_top_ranks: bool = True,
) -> ExhaustiveResult:
    """Exact optimum by enumerating every per-column cache combination.

    By default columns range over the head ranks only (the same dominance
    argument as the GA's initial population); ``restrict_to_top_ranks=False``
    forces the unrestricted space for verification on tiny instances.
    Refuses with ``BudgetExceededError`` when the enumeration would exceed
    ``budget`` evaluations; the error also reports the unrestricted count,
    the usual headline complexity of exhaustive placement search.
    """
    library, layout = scenario.library, scenario.layout
    pool = scenario.top_rank_count if restrict_to_top_ranks else library.n_files
    sizes = [int(m) for m in layout.cache_sizes]
    enumeration_count = 1
    full_count = 1
    for m in sizes:
        enumeration_count *= comb(pool, m)
        full_count *= comb(library.n_files, m)
    if enumeration_count > budget:
        raise BudgetExceededError(enumeration_count, full_count, budget)

    evaluator = scenario.evaluator()
    pop = library.popularity
    n_rrh = layout.n_rrh
    full_mask = (1 << n_rrh) - 1

    # cell-average outage per service-set bitmask, built lazily
    outage_by_mask: dict[int, float] = {}

    def outage(mask: int) -> float:
        val = outage_by_mask.get(mask)
        if val is None:
            members = frozenset(n for n in range(n_rrh) if mask >> n & 1)
            val = evaluator.outage_for_members(members)
            outage_by_mask[mask] = val
        return val

    column_choices = [list(itertools.combinations(range(pool), m)) for m in sizes]
    masks = np.zeros(library.n_files, dtype=np.int64)
    best: tuple | None = None
    best_entries: np.ndarray | None = None

    def visit(n: int):
        nonlocal best, best_entries
        if n == n_rrh:
            outage_total = 0.0
            fronthaul = 0.0
            for rank in range(library.n_files):
                mask = int(masks[rank])
                if mask == 0:
                    fronthaul += pop[rank]
                    mask = full_mask
                outage_total += pop[rank] * outage(mask)
            value = eta * outage_total + (1.0 - eta) * fronthaul
            key = (value, outage_total, fronthaul)
            if best is not None and key > best[:3]:
                return
            entries = np.zeros((library.n_files, n_rrh), dtype=np.uint8)
            for nn, combo in enumerate(current):
                entries[list(combo), nn] = 1
            encoded = entries.tobytes()
            # ties resolve to the lexicographically smallest matrix
            if best is None or key < best[:3] or encoded < best[3]:
                best = (*key, encoded)
                best_entries = entries
            return
        bit = 1 << n
        for combo in column_choices[n]:
            current.append(combo)
            masks[list(combo)] |= bit
            visit(n + 1)
            masks[list(combo)] &= ~bit
            current.pop()

    current: list[tuple[int, ...]] = []
    visit(0)
    assert best_entries is not None
    placement = PlacementMatrix(best_entries, layout)
    return ExhaustiveResult(
        placement=placement,
        point=evaluator.evaluate(placement, eta),
        enumerated=enumeration_count,
    )


def enumerate_tradeoffs(
    scenario: Scenario,
    budget: int = 10_000_000,
    restrict_to_top_ranks: bool = True,
) -> list[tuple[tuple[tuple[int, ...], ...], float, float]]:
    """Every feasible placement's (outage, fronthaul) pair.

    Returns one ``(per-column rank tuples, cell_outage, fronthaul)`` entry
    per placement in the enumerated space; the budget rule matches
    ``exhaustive_search``.
    """
    library, layout = scenario.library, scenario.layout
    pool = scenario.top_rank_count if restrict_to_top_ranks else library.n_files
    sizes = [int(m) for m in layout.cache_sizes]
    enumeration_count = 1
    full_count = 1
    for m in sizes:
        enumeration_count *= comb(pool, m)
        full_count *= comb(library.n_files, m)
    if enumeration_count > budget:
        raise BudgetExceededError(enumeration_count, full_count, budget)

    evaluator = scenario.evaluator()
    pop = library.popularity
    n_rrh = layout.n_rrh
    full_mask = (1 << n_rrh) - 1
    outage_by_mask: dict[int, float] = {}

    def outage(mask: int) -> float:
        val = outage_by_mask.get(mask)
        if val is None:
            members = frozenset(n for n in range(n_rrh) if mask >> n & 1)
            val = evaluator.outage_for_members(members)
            outage_by_mask[mask] = val
        return val

    column_choices = [list(itertools.combinations(range(pool), m)) for m in sizes]
    masks = np.zeros(library.n_files, dtype=np.int64)
    results: list[tuple[tuple[tuple[int, ...], ...], float, float]] = []

    def visit(n: int):
        if n == n_rrh:
            outage_total = 0.0
            fronthaul = 0.0
            for rank in range(library.n_files):
                mask = int(masks[rank])
                if mask == 0:
                    fronthaul += pop[rank]
                    mask = full_mask
                outage_total += pop[rank] * outage(mask)
            results.append((tuple(current), outage_total, fronthaul))
            return
        bit = 1 << n
        for combo in column_choices[n]:
            current.append(combo)
            masks[list(combo)] |= bit
            visit(n + 1)
            masks[list(combo)] &= ~bit
            current.pop()

    current: list[tuple[int, ...]] = []
    visit(0)
    return results


def mode_select(scenario: Scenario, eta: float) -> PlacementMatrix:
    """Pick MPC or LB-LCD from the analytic crossover weight.

    Costs two objective evaluations in total (both cached afterwards):
    LB-LCD wins at and below the crossover, MPC above it.  When the two
    schemes coincide (single RRH) there is no crossover and MPC is
    returned.
    """
    try:
        eta0 = eta_crossover(scenario)
    except NoCrossoverError:
        return mpc_placement(scenario.library, scenario.layout)
    if eta <= eta0:
        return lb_lcd_placement(scenario.library, scenario.layout)
    return mpc_placement(scenario.library, scenario.layout)


def baseline_expected_objective(
    strategy: str,
    scenario: Scenario,
    eta: float,
    draws: int,
    rng: np.random.Generator,
) -> BaselineResult:
    """Mean objective of a stochastic caching baseline over fresh draws."""
    if draws < 1:
        raise ValueError("draws must be at least 1")
    makers = {"random": random_placement, "probabilistic": probabilistic_placement}
    try:
        maker = makers[strategy]
    except KeyError:
        raise ValueError(f"unknown baseline strategy {strategy!r}") from None
    evaluator = scenario.evaluator()
    values = np.empty(draws)
    outages = np.empty(draws)
    fronthauls = np.empty(draws)
    for i in range(draws):
        placement = maker(scenario.library, scenario.layout, rng)
        point = evaluator.evaluate(placement, eta)
        values[i], outages[i], fronthauls[i] = point.value, point.cell_outage, point.fronthaul
    std_error = float(values.std(ddof=1) / np.sqrt(draws)) if draws > 1 else float("nan")
    return BaselineResult(
        strategy=strategy,
        eta=eta,
        draws=draws,
        mean_value=float(values.mean()),
        std_error=std_error,
        mean_outage=float(outages.mean()),
        mean_fronthaul=float(fronthauls.mean()),
    )
