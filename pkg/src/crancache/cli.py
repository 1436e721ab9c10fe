"""Batch command-line interface: each subcommand loads a scenario, runs one
experiment family and writes CSV result files plus a JSON run manifest.

Every output CSV starts with a ``#``-prefixed header line holding the fully
resolved configuration and seed as JSON, so a result file alone suffices to
reproduce itself bit for bit.  Exit codes: 0 success, 2 scenario/validation
error, 3 enumeration budget refusal, 4 numerical failure in the residue
machinery.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analytics import IllConditionedPolesError, spectrum_for_distances
from .model import lb_lcd_placement, mpc_placement
from .montecarlo import (
    SimConfig,
    empirical_cell_outage,
    empirical_snr_cdf,
)
from .objective import (
    NoCrossoverError,
    eta_crossover,
    fronthaul_expectation,
    pareto_indices,
    supported_indices,
)
from .scenario import (
    LoadedScenario,
    Scenario,
    ScenarioError,
    load_scenario,
    scenario_to_dict,
)
from .solvers import (
    BudgetExceededError,
    baseline_expected_objective,
    enumerate_tradeoffs,
    exhaustive_search,
    ga_optimize,
    mode_select,
)

EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4

# distance profiles (fractions of the cell radius) for the CDF validation:
# all equal, partially grouped, all distinct
CDF_PROFILES = {
    "d1": [0.8, 0.8, 0.8, 0.8, 0.8, 0.8],
    "d2": [0.6, 0.7, 0.7, 0.8, 0.8, 0.8],
    "d3": [0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
}


def _fail(code: int, error: Exception, **extra):
    record = {"error": type(error).__name__, "message": str(error), **extra}
    click.echo(json.dumps(record), err=True)
    sys.exit(code)


def _parse_eta_list(text: str | None, default):
    if text is None:
        return list(default)
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ScenarioError(f"--eta: {exc}") from exc
    if not values or any(not 0 <= v <= 1 for v in values):
        raise ScenarioError("--eta: expected comma-separated values in [0, 1]")
    return values


def _parse_quadrature(text: str | None):
    if text is None:
        return None
    try:
        u, v = (int(tok) for tok in text.lower().split("x"))
        return u, v
    except ValueError as exc:
        raise ScenarioError(f"--quadrature: expected UxV, got {text!r}") from exc


class Run:
    """Shared state of one CLI invocation."""

    def __init__(self, scenario_src, out, seed, threads, quadrature, draws, budget):
        loaded = load_scenario(scenario_src)
        scenario = loaded.scenario
        quad = _parse_quadrature(quadrature)
        if quad is not None:
            scenario = dataclasses.replace(
                scenario, radial_panels=quad[0], angular_panels=quad[1]
            )
        ga = loaded.ga
        sim = loaded.sim
        if seed is not None:
            ga = dataclasses.replace(ga, seed=seed)
            sim = dataclasses.replace(sim, seed=seed)
        if draws is not None:
            sim = dataclasses.replace(
                sim,
                n_fading_draws=max(1, draws),
                n_location_draws=max(1, min(sim.n_location_draws, draws)),
                n_request_draws=max(1, draws),
            )
        self.loaded = LoadedScenario(scenario, ga, sim, loaded.eta_grid, loaded.raw)
        self.scenario_src = str(scenario_src)
        self.out = Path(out)
        self.threads = threads
        self.budget = budget
        self.started = time.time()
        self.outputs: list[str] = []
        self.extra: dict = {}
        self.out.mkdir(parents=True, exist_ok=True)

    @property
    def scenario(self) -> Scenario:
        return self.loaded.scenario

    def meta(self) -> dict:
        return {
            "tool": f"crancache {__version__}",
            "scenario_source": self.scenario_src,
            "config": scenario_to_dict(self.loaded),
        }

    def write_csv(self, name: str, columns, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(self.meta(), sort_keys=True) + "\n")
            writer = csv.writer(fh)
            writer.writerow(columns)
            writer.writerows(rows)
        self.outputs.append(name)
        return path

    def finish(self, command: str):
        manifest = {
            "command": command,
            **self.meta(),
            "outputs": self.outputs,
            "elapsed_s": round(time.time() - self.started, 3),
            **self.extra,
        }
        with open(self.out / "run_manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        click.echo(f"{command}: wrote {', '.join(self.outputs)} to {self.out}")


def run_options(fn):
    fn = click.option("--scenario", "-s", "scenario_src", required=True,
                      help="Scenario file path or preset name (fig2, fig4_5, fig5_pareto, fig6_9).")(fn)
    fn = click.option("--out", "-o", default="results", show_default=True,
                      help="Output directory.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the GA and simulation seeds.")(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True,
                      help="Worker cap for Monte-Carlo streams (results are thread-count independent).")(fn)
    fn = click.option("--quadrature", default=None, metavar="UxV",
                      help="Override the Simpson panel counts, e.g. 12x12.")(fn)
    fn = click.option("--draws", type=int, default=None,
                      help="Override Monte-Carlo / baseline draw counts.")(fn)
    fn = click.option("--budget", type=int, default=10_000_000, show_default=True,
                      help="Exhaustive enumeration budget.")(fn)
    return fn


def guarded(fn):
    """Translate domain errors into the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ScenarioError as exc:
            _fail(EXIT_VALIDATION, exc)
        except BudgetExceededError as exc:
            _fail(
                EXIT_BUDGET,
                exc,
                enumeration_count=float(exc.enumeration_count),
                full_count=float(exc.full_count),
                budget=exc.budget,
            )
        except IllConditionedPolesError as exc:
            _fail(EXIT_NUMERICAL, exc)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Tradeoff caching toolkit: outage analytics, fronthaul accounting and
    placement optimization for a cache-enabled radio cell."""


@main.command("validate-analytics")
@run_options
@guarded
def validate_analytics(scenario_src, out, seed, threads, quadrature, draws, budget):
    """Analytic vs simulated received-SNR CDF for three distance profiles."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    sc = run.scenario
    sim = run.loaded.sim
    n_rrh = sc.layout.n_rrh
    gamma_db = np.linspace(-10.0, 25.0, 20)
    grid = 10.0 ** (gamma_db / 10.0)
    rows = []
    for tag, profile in CDF_PROFILES.items():
        distances = np.asarray(profile) * sc.layout.cell_radius
        spectrum = spectrum_for_distances(distances, sc.radio, n_rrh, sc.layout.cell_radius)
        analytic = spectrum.cdf(grid)
        empirical, stderr = empirical_snr_cdf(
            distances, sc.radio, n_rrh, sc.layout.cell_radius,
            grid, sim.n_fading_draws, sim.seed, threads=run.threads,
        )
        rows += [
            [f"{g:.6f}", f"{a:.9f}", f"{e:.9f}", f"{s:.3e}", tag]
            for g, a, e, s in zip(gamma_db, analytic, empirical, stderr)
        ]
    run.write_csv("cdf_validation.csv",
                  ["gamma_db", "analytic_cdf", "empirical_cdf", "std_err", "scenario_tag"],
                  rows)
    run.finish("validate-analytics")


@main.command("cell-metrics")
@run_options
@click.option("--betas", default="0,1.5,3", show_default=True,
              help="Comma-separated skew values for the outage sweep.")
@click.option("--simulate", is_flag=True,
              help="Add Monte-Carlo estimates next to the analytic values.")
@guarded
def cell_metrics(scenario_src, out, seed, threads, quadrature, draws, budget,
                 betas, simulate):
    """Cell-average outage vs threshold and fronthaul usage vs skew for the
    MPC and LB-LCD schemes."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    base = run.scenario
    beta_values = [float(b) for b in betas.split(",") if b.strip()]
    gamma_grid = np.arange(-5.0, 15.5, 1.0)

    outage_rows = []
    for beta in beta_values:
        for gamma_db in gamma_grid:
            sc = dataclasses.replace(
                base,
                library=base.library.zipf(base.library.n_files, beta),
                radio=dataclasses.replace(base.radio, snr_threshold_db=float(gamma_db)),
            )
            ev = sc.evaluator()
            for scheme, maker in (("mpc", mpc_placement), ("lb_lcd", lb_lcd_placement)):
                placement = maker(sc.library, sc.layout)
                outage, _ = ev.components(placement)
                row = [beta, f"{gamma_db:.1f}", scheme, f"{outage:.9f}"]
                if simulate:
                    est = _simulated_cell_outage(placement, sc, run)
                    row += [f"{est[0]:.9f}", f"{est[1]:.3e}"]
                else:
                    row += ["", ""]
                outage_rows.append(row)
    run.write_csv(
        "cell_outage.csv",
        ["beta", "gamma_th_db", "scheme", "analytic", "empirical", "std_err"],
        outage_rows,
    )

    fronthaul_rows = []
    for beta in np.arange(0.0, 3.01, 0.25):
        library = base.library.zipf(base.library.n_files, float(beta))
        sc = dataclasses.replace(base, library=library)
        for scheme, maker in (("mpc", mpc_placement), ("lb_lcd", lb_lcd_placement)):
            placement = maker(sc.library, sc.layout)
            fronthaul_rows.append(
                [f"{beta:.2f}", scheme, f"{fronthaul_expectation(placement, library):.12f}"]
            )
    run.write_csv("fronthaul.csv", ["beta", "scheme", "analytic"], fronthaul_rows)
    run.finish("cell-metrics")


def _simulated_cell_outage(placement, scenario, run):
    sim = run.loaded.sim
    pop = scenario.library.popularity
    total = 0.0
    var = 0.0
    seen = {}
    for rank in range(scenario.library.n_files):
        key = placement.entries[rank].tobytes()
        if key not in seen:
            seen[key] = empirical_cell_outage(placement, rank, scenario, sim, threads=run.threads)
        est = seen[key]
        total += pop[rank] * est.mean
        var += (pop[rank] * est.std_error) ** 2
    return total, var**0.5


@main.command("pareto")
@run_options
@guarded
def pareto(scenario_src, out, seed, threads, quadrature, draws, budget):
    """Enumerate the (outage, fronthaul) tradeoff region, flagging the
    nondominated points and the weighted-sum-supported subset."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    sc = run.scenario
    entries = enumerate_tradeoffs(sc, budget=run.budget)
    points = [(outage, fronthaul) for _, outage, fronthaul in entries]
    nondominated = set(pareto_indices(points))
    supported = set(supported_indices(points))
    rows = []
    for i, (columns, outage, fronthaul) in enumerate(entries):
        table = "|".join(",".join(str(r + 1) for r in combo) for combo in columns)
        rows.append([
            i, table, f"{outage:.9f}", f"{fronthaul:.9f}",
            int(i in nondominated), int(i in supported),
        ])
    run.write_csv(
        "tradeoff_region.csv",
        ["placement_id", "cached_ranks", "cell_outage", "fronthaul", "nondominated", "supported"],
        rows,
    )
    run.extra["n_placements"] = len(entries)
    run.extra["n_nondominated"] = len(nondominated)
    run.extra["n_supported"] = len(supported)
    run.finish("pareto")


@main.command("sweep-eta")
@run_options
@click.option("--eta", "eta_text", default=None,
              help="Comma-separated weights, default the scenario's eta grid.")
@click.option("--baseline-draws", type=int, default=100, show_default=True,
              help="Placement draws per stochastic baseline.")
@guarded
def sweep_eta(scenario_src, out, seed, threads, quadrature, draws, budget,
              eta_text, baseline_draws):
    """Objective vs weighting factor for the GA, mode selection, canonical
    schemes and stochastic baselines; also reports the crossover weight."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    sc = run.scenario
    etas = _parse_eta_list(eta_text, run.loaded.eta_grid)
    ev = sc.evaluator()
    try:
        eta0 = eta_crossover(sc)
    except NoCrossoverError:
        eta0 = None
    run.extra["crossover_eta"] = eta0

    rows = []
    for i, eta in enumerate(etas):
        ga_cfg = dataclasses.replace(run.loaded.ga, seed=run.loaded.ga.seed + i)
        result = ga_optimize(sc, eta, ga_cfg)
        rows.append(_strategy_row(eta, "ga", result.point,
                                  placement=result.placement, extra=""))
        point = ev.evaluate(mode_select(sc, eta), eta)
        rows.append(_strategy_row(eta, "mode_select", point))
        rows.append(_strategy_row(eta, "mpc", ev.evaluate(mpc_placement(sc.library, sc.layout), eta)))
        rows.append(_strategy_row(eta, "lb_lcd", ev.evaluate(lb_lcd_placement(sc.library, sc.layout), eta)))
        for strategy, stream in (("random", 1), ("probabilistic", 2)):
            rng = np.random.default_rng([run.loaded.sim.seed, stream, i])
            est = baseline_expected_objective(strategy, sc, eta, baseline_draws, rng)
            rows.append([f"{eta:.3f}", strategy, f"{est.mean_value:.9f}",
                         f"{est.mean_outage:.9f}", f"{est.mean_fronthaul:.9f}",
                         f"{est.std_error:.3e}", ""])
    run.write_csv(
        "objective_vs_eta.csv",
        ["eta", "strategy", "objective", "cell_outage", "fronthaul", "std_err", "placement"],
        rows,
    )
    run.finish("sweep-eta")


def _strategy_row(eta, name, point, placement=None, extra=""):
    table = ""
    if placement is not None:
        table = "|".join(",".join(str(r) for r in col) for col in placement.rank_table())
    return [f"{eta:.3f}", name, f"{point.value:.9f}", f"{point.cell_outage:.9f}",
            f"{point.fronthaul:.9f}", "", table or extra]


@main.command("ga-run")
@run_options
@click.option("--eta", type=float, required=True, help="Tradeoff weight in [0, 1].")
@guarded
def ga_run(scenario_src, out, seed, threads, quadrature, draws, budget, eta):
    """Single GA optimization with the per-generation fitness trace."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    if not 0 <= eta <= 1:
        raise ScenarioError("--eta: expected a value in [0, 1]")
    result = ga_optimize(run.scenario, eta, run.loaded.ga)
    table = "|".join(",".join(str(r) for r in col) for col in result.placement.rank_table())
    run.write_csv(
        "ga_best.csv",
        ["eta", "objective", "cell_outage", "fronthaul", "generations",
         "evaluations", "converged_at", "cached_ranks"],
        [[f"{eta:.3f}", f"{result.point.value:.9f}", f"{result.point.cell_outage:.9f}",
          f"{result.point.fronthaul:.9f}", result.generations, result.evaluations,
          result.converged_at, table]],
    )
    run.write_csv(
        "ga_history.csv",
        ["generation", "best_objective", "mean_objective"],
        [[g + 1, f"{b:.9f}", f"{m:.9f}"]
         for g, (b, m) in enumerate(zip(result.best_history, result.mean_history))],
    )
    run.finish("ga-run")


@main.command("table5")
@run_options
@click.option("--eta", "eta_text", default=None,
              help="Comma-separated weights, default the scenario's eta grid.")
@guarded
def table5(scenario_src, out, seed, threads, quadrature, draws, budget, eta_text):
    """Optimal placements over an eta grid in a compact per-weight record."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    sc = run.scenario
    etas = _parse_eta_list(eta_text, run.loaded.eta_grid)
    mpc = mpc_placement(sc.library, sc.layout)
    lb = lb_lcd_placement(sc.library, sc.layout)
    rows = []
    for i, eta in enumerate(etas):
        ga_cfg = dataclasses.replace(run.loaded.ga, seed=run.loaded.ga.seed + i)
        result = ga_optimize(sc, eta, ga_cfg)
        table = "|".join(",".join(str(r) for r in col) for col in result.placement.rank_table())
        rows.append([
            f"{eta:.3f}", f"{result.point.value:.9f}", f"{result.point.cell_outage:.9f}",
            f"{result.point.fronthaul:.9f}", table,
            int(result.placement == mpc), int(result.placement == lb),
        ])
    run.write_csv(
        "placements_vs_eta.csv",
        ["eta", "objective", "cell_outage", "fronthaul", "cached_ranks",
         "equals_mpc", "equals_lb_lcd"],
        rows,
    )
    run.finish("table5")


@main.command("exhaustive")
@run_options
@click.option("--eta", type=float, required=True, help="Tradeoff weight in [0, 1].")
@guarded
def exhaustive(scenario_src, out, seed, threads, quadrature, draws, budget, eta):
    """Exact optimum by enumeration (refuses when over budget, exit 3)."""
    run = Run(scenario_src, out, seed, threads, quadrature, draws, budget)
    if not 0 <= eta <= 1:
        raise ScenarioError("--eta: expected a value in [0, 1]")
    result = exhaustive_search(run.scenario, eta, budget=run.budget)
    table = "|".join(",".join(str(r) for r in col) for col in result.placement.rank_table())
    run.write_csv(
        "exhaustive_best.csv",
        ["eta", "objective", "cell_outage", "fronthaul", "enumerated", "cached_ranks"],
        [[f"{eta:.3f}", f"{result.point.value:.9f}", f"{result.point.cell_outage:.9f}",
          f"{result.point.fronthaul:.9f}", result.enumerated, table]],
    )
    run.finish("exhaustive")


if __name__ == "__main__":
    main()
