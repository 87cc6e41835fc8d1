"""
LIE Lab suites - Experiments that check the stability theory numerically.

This module provides the experiment suites behind the CLI: exact-arc
accuracy, conservation of the energies, the explicit stability bounds,
optimal growth of looped perturbations, reflection and mid-chord symmetry,
the Poincare constant and the ring experiments, plus ``run_verify`` which
runs all of them from their presets.

Suites never let library errors escape: a failing run becomes a failed
BoundCheck carrying the error message.
"""

import logging
import math
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from ..constants import (
    ADMISSIBILITY_TOLERANCE,
    ARC_ERROR_TOLERANCE,
    CONSERVATION_CHANNELS,
    DRIFT_TOLERANCE,
    ENDPOINT_TOLERANCE,
    ORDER_THRESHOLD,
    ROUNDOFF_FLOOR,
    SEGMENT_MISMATCH_TOLERANCE,
    SLOPE_TOLERANCE,
    SPEED_TOLERANCE,
    SPREAD_TOLERANCE,
    STABILITY_CHANNELS,
    SYMMETRY_TOLERANCE,
)
from ..errors import LieLabError
from ..numerics.geometry import (
    E1,
    ArcParams,
    Curve,
    Grid,
    VectorField,
    extend_by_reflection,
    join_residual,
    sample_exact_arc,
)
from ..numerics.invariants import (
    StabilityConstants,
    perturbation_observers,
    poincare_ratio,
    scalar_norm,
    stability_constants,
)
from ..numerics.perturbations import (
    PerturbationSpec,
    build_perturbation,
    check_assumptions,
    check_symmetry,
    looped_growth_rate,
)
from ..numerics.ring import ring_growth_rate, segment_and_solve
from ..numerics.solver import (
    BoundaryCondition,
    Trajectory,
    arc_boundary_condition,
    simulate,
    symmetric_boundary_condition,
)
from .config import RunConfig, SuiteConfig, preset
from .report import ExperimentReport, provenance

logger = logging.getLogger("lie-lab.suites")

# Initial ||phi0_ss|| below this makes the ratio bounds meaningless.
DEGENERATE_NORM = 1e-10

# Slack on the axial slope of a constant shift beyond the error rate of the unshifted run.
SHIFT_SLOPE_TOLERANCE = 1e-6


# =============================================================================
# Fitting
# =============================================================================


def fit_slope(times, values, fraction: float = 0.5) -> tuple[float, float]:
    """
    Least-squares affine fit over the last part of a time window.

    Args:
        times: Sample times
        values: Sampled values
        fraction: Share of the window, counted from its start, to discard

    Returns:
        Tuple (slope, intercept)
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2:
        raise ValueError("a slope needs at least two samples")
    cut = times[0] + fraction * (times[-1] - times[0])
    mask = times >= cut
    if np.count_nonzero(mask) < 2:
        mask = np.ones_like(times, dtype=bool)
    slope, intercept = np.polyfit(times[mask], values[mask], 1)
    return float(slope), float(intercept)


def convergence_orders(spacings, errors, floor: float = ROUNDOFF_FLOOR) -> np.ndarray:
    """
    Observed orders log(e_i / e_(i+1)) / log(h_i / h_(i+1)) between rungs.

    A finer error at or below ``floor`` counts as converged to round-off and
    yields an infinite order.
    """
    spacings = np.asarray(spacings, dtype=float)
    errors = np.asarray(errors, dtype=float)
    orders = []
    for i in range(errors.size - 1):
        coarse, fine = errors[i], errors[i + 1]
        if fine <= floor:
            orders.append(math.inf)
        elif coarse <= 0.0:
            orders.append(-math.inf)
        else:
            orders.append(math.log(coarse / fine) / math.log(spacings[i] / spacings[i + 1]))
    return np.asarray(orders)


def affine_envelope(times, values) -> tuple[float, float]:
    """Smallest a with values <= a + b t, where b is the non-negative fitted slope."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    slope = max(fit_slope(times, values)[0], 0.0) if times.size > 1 else 0.0
    return float(np.max(values - slope * times)), slope


def axial_error_rate(trajectory: Trajectory, radius: float) -> float:
    """
    Largest rate of change of ||x3 - t/R|| between consecutive snapshots.

    Bounds every pairwise slope, hence any least-squares slope, of the
    axial error of a run that differs from this one by a constant shift.
    """
    times = np.asarray(trajectory.snapshot_times, dtype=float)
    if times.size < 2:
        return 0.0
    errors = [curve.points[:, 2] - t / radius for t, curve in zip(times, trajectory.snapshots)]
    grid = trajectory.snapshots[0].grid
    rates = [
        scalar_norm(errors[k + 1] - errors[k], grid) / (times[k + 1] - times[k])
        for k in range(times.size - 1)
    ]
    return float(max(rates))


# =============================================================================
# Run plumbing
# =============================================================================


@dataclass
class RunState:
    """Initial data of one run, derived from its configuration."""

    config: RunConfig
    params: ArcParams | float
    grid: Grid
    phi0: VectorField
    initial: Curve
    bc: BoundaryCondition


def prepare_run(
    config: RunConfig, spec: PerturbationSpec | None = None, n_nodes: int | None = None
) -> RunState:
    """Sample the exact solution, add the perturbation and pick boundary data."""
    if n_nodes is not None:
        config = replace(config, n_nodes=n_nodes)
    spec = config.perturbation if spec is None else spec
    params, grid = config.params, config.grid
    phi0 = build_perturbation(spec, params, grid)
    initial = sample_exact_arc(params, 0.0, grid) + phi0
    if config.is_ring:
        bc = BoundaryCondition.periodic()
    else:
        bc = arc_boundary_condition(params)
    return RunState(config, params, grid, phi0, initial, bc)


def run_state(
    state: RunState, channels: Sequence[str], snapshot_stride: int | None = None
) -> Trajectory:
    """Simulate a prepared run with the named observer channels."""
    observers = perturbation_observers(
        state.params, state.grid, channels, initial=state.initial, bc=state.bc
    )
    solver = replace(state.config.solver, observers=tuple(observers))
    if snapshot_stride is not None:
        solver = replace(solver, snapshot_stride=snapshot_stride)
    return simulate(state.initial, state.bc, solver)


def seeded_spec(config: RunConfig, seed: int) -> PerturbationSpec:
    """The configured perturbation drawn with one seed of the corpus."""
    spec = config.perturbation
    amplitude = spec.amplitude or config.suite.amplitude
    reflex = not config.is_ring and config.angle >= math.pi
    if spec.family == "symmetrized" and spec.inner is not None:
        inner = spec.inner
        if inner.family in ("smooth_random", "reflective_random"):
            inner = replace(inner, seed=seed, amplitude=inner.amplitude or config.suite.amplitude)
        return replace(spec, inner=inner)
    if spec.family in ("smooth_random", "reflective_random"):
        return replace(spec, seed=seed, amplitude=amplitude, symmetric=spec.symmetric or reflex)
    return spec


def _new_report(suite: str, config: RunConfig) -> ExperimentReport:
    return ExperimentReport(
        suite, config=config.to_dict(), provenance=provenance(config.config_hash)
    )


@contextmanager
def _guarded(report: ExperimentReport, name: str, source: str) -> Iterator[None]:
    try:
        yield
    except LieLabError as exc:
        report.add_failure(name, source, str(exc))


def _map(function: Callable, jobs: list[tuple], workers: int) -> list[Any]:
    """Apply a picklable function to argument tuples, in order, on a process pool."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(function, *job) for job in jobs]
            return [future.result() for future in futures]
    return [function(*job) for job in jobs]


def _add_orders(
    report: ExperimentReport, label: str, source: str, ladder, spacings, errors
) -> np.ndarray:
    orders = convergence_orders(spacings, errors)
    report.orders[label] = orders.tolist()
    for (coarse, fine), order in zip(zip(ladder, ladder[1:]), orders):
        report.add_lower(f"{label}/order[{coarse}->{fine}]", source, order, ORDER_THRESHOLD)
    return orders


def _require_arc(report: ExperimentReport, config: RunConfig, source: str) -> bool:
    if config.is_ring:
        report.add_failure("problem", source, f"suite '{report.suite}' needs an arc problem")
        return False
    return True


# =============================================================================
# Simulation
# =============================================================================


def run_simulation(config: RunConfig) -> ExperimentReport:
    """
    Simulate one configured run and record its channels.

    Args:
        config: Run configuration

    Returns:
        ExperimentReport with the trajectory under "main"
    """
    report = _new_report("simulate", config)
    with _guarded(report, "simulation", "solver"):
        seed = config.perturbation.seed
        state = prepare_run(config, seeded_spec(config, config.seed if seed is None else seed))
        if not config.is_ring:
            assumptions = check_assumptions(state.phi0, state.params)
            report.metrics["assumptions"] = assumptions.to_dict()
            report.add_upper(
                "admissibility", "admissibility", assumptions.max_residual, ADMISSIBILITY_TOLERANCE
            )
        trajectory = run_state(state, config.observers)
        report.trajectories["main"] = trajectory
        report.add_upper(
            "finite_state", "solver", float(np.max(np.abs(trajectory.final.points))), math.inf
        )
        for name in ("endpoint_lower", "endpoint_upper"):
            if name in trajectory.channels:
                measured = float(np.max(trajectory.channel(name)))
                report.add_upper(name, "endpoint-planes", measured, ENDPOINT_TOLERANCE)
        report.metrics.update(
            {"steps": trajectory.steps, "dt": trajectory.dt, "wall_time": trajectory.wall_time}
        )
    return report


# =============================================================================
# Exact arc
# =============================================================================


def run_arc_accuracy(config: RunConfig) -> ExperimentReport:
    """
    Reproduce the translating arc and measure convergence under refinement.

    The unperturbed arc is simulated on every rung of the ladder and on the
    configured resolution; the sup error against the exact solution must
    fall below tolerance at the configured resolution and converge at
    second order, and the axial speed must equal 1/R.
    """
    report = _new_report("arc-accuracy", config)
    if not _require_arc(report, config, "exact-arc"):
        return report
    params = config.params
    t_final = config.solver.t_final
    zero = PerturbationSpec("zero")
    results: dict[int, tuple[float, float]] = {}

    for n in sorted(set(config.suite.ladder) | {config.n_nodes}):
        with _guarded(report, f"sup_error[N={n}]", "exact-arc"):
            state = prepare_run(config, zero, n)
            main = n == config.n_nodes
            trajectory = run_state(state, config.observers if main else ())
            exact = sample_exact_arc(params, t_final, state.grid)
            error = float(np.max(np.abs(trajectory.final.points - exact.points)))
            results[n] = (state.grid.spacing, error)
            logger.info(f"Arc accuracy N={n}: sup error {error:.3e}")
            if main:
                report.trajectories["main"] = trajectory
                report.add_upper(f"sup_error[N={n}]", "exact-arc", error, ARC_ERROR_TOLERANCE)
                speed = trajectory.final.points[:, 2] / t_final
                deviation = float(np.max(np.abs(speed - 1.0 / params.radius)))
                report.add_upper("speed", "exact-arc", deviation, SPEED_TOLERANCE)

    report.metrics["sup_error"] = {str(n): error for n, (_, error) in results.items()}
    ladder = [n for n in sorted(set(config.suite.ladder)) if n in results]
    if len(ladder) > 1:
        spacings = [results[n][0] for n in ladder]
        errors = [results[n][1] for n in ladder]
        _add_orders(report, "sup_error", "exact-arc", ladder, spacings, errors)
    return report


# =============================================================================
# Conservation
# =============================================================================


def _conservation_case(config: RunConfig, spec: PerturbationSpec, ladder: list[int]) -> dict:
    try:
        out: dict[str, Any] = {}
        for n in ladder:
            state = prepare_run(config, spec, n)
            trajectory = run_state(state, CONSERVATION_CHANNELS)
            initial = {q: float(trajectory.channel(q)[0]) for q in CONSERVATION_CHANNELS}
            absolute = {
                q: float(np.max(np.abs(trajectory.channel(q) - initial[q])))
                for q in CONSERVATION_CHANNELS
            }
            out[n] = {
                "spacing": state.grid.spacing,
                "initial": initial,
                "absolute": absolute,
                "relative": {q: absolute[q] / (1.0 + abs(initial[q])) for q in absolute},
            }
        return out
    except LieLabError as exc:
        return {"error": str(exc)}


def run_conservation(config: RunConfig) -> ExperimentReport:
    """
    Drift of E, E1 and E2 under refinement.

    The unperturbed arc and, unless the configured family is "zero", one
    run per corpus seed are simulated on every rung; relative drifts must
    decrease at second order and the finest drift of E must stay below
    DRIFT_TOLERANCE (1 + |E(phi0)|).
    """
    report = _new_report("conservation", config)
    if not _require_arc(report, config, "energy-conservation"):
        return report
    ladder = sorted(set(config.suite.ladder))
    cases: list[tuple[str, PerturbationSpec]] = [("arc", PerturbationSpec("zero"))]
    if config.perturbation.family != "zero":
        cases += [(f"seed{s}", seeded_spec(config, s)) for s in config.suite.seeds]

    jobs = [(config, spec, ladder) for _, spec in cases]
    results = _map(_conservation_case, jobs, config.suite.workers)
    for (label, _), result in zip(cases, results):
        if "error" in result:
            report.add_failure(label, "energy-conservation", result["error"])
            continue
        report.metrics[label] = {str(n): result[n]["relative"] for n in ladder}
        spacings = [result[n]["spacing"] for n in ladder]
        if len(ladder) > 1:
            for q in CONSERVATION_CHANNELS:
                drifts = [result[n]["relative"][q] for n in ladder]
                orders = convergence_orders(spacings, drifts)
                report.orders[f"{label}/{q}"] = orders.tolist()
                report.add_lower(
                    f"{label}/{q}/order",
                    "energy-conservation",
                    float(np.min(orders)),
                    ORDER_THRESHOLD,
                )
        finest = result[ladder[-1]]
        report.add_upper(
            f"{label}/E/drift[N={ladder[-1]}]",
            "energy-conservation",
            finest["absolute"]["E"],
            DRIFT_TOLERANCE * (1.0 + abs(finest["initial"]["E"])),
        )
    return report


# =============================================================================
# Stability
# =============================================================================

STABILITY_TRACE = (*STABILITY_CHANNELS, "x3_offset")


def _stability_case(config: RunConfig, spec: PerturbationSpec) -> dict:
    try:
        state = prepare_run(config, spec)
        assumptions = check_assumptions(state.phi0, state.params)
        result: dict[str, Any] = {
            "assumptions": assumptions.to_dict(),
            "symmetry": (
                check_symmetry(state.phi0, state.params) if state.grid.has_midpoint else None
            ),
        }
        if assumptions.max_residual > ADMISSIBILITY_TOLERANCE:
            result["error"] = f"inadmissible initial data (residual {assumptions.max_residual:.3e})"
            return result

        if spec.family != "constant_shift":
            result["trajectory"] = run_state(state, STABILITY_TRACE)
            return result

        # A constant shift is compared with the unperturbed discrete run as well.
        stride = config.solver.observe_stride
        trajectory = run_state(state, STABILITY_TRACE, snapshot_stride=stride)
        reference = run_state(prepare_run(config, PerturbationSpec("zero")), (), stride)
        t_final = trajectory.snapshot_times[-1]
        exact = sample_exact_arc(state.params, t_final, state.grid) + state.phi0
        drift = [
            scalar_norm(shifted.points[:, 2] - base.points[:, 2], state.grid)
            for shifted, base in zip(trajectory.snapshots, reference.snapshots)
        ]
        result["trajectory"] = trajectory
        result["shift_error"] = float(np.max(np.abs(trajectory.final.points - exact.points)))
        result["shift_series"] = (trajectory.snapshot_times, np.asarray(drift))
        result["baseline_rate"] = axial_error_rate(reference, state.params.radius)
        return result
    except LieLabError as exc:
        return {"error": str(exc)}


def _stability_checks(
    report: ExperimentReport,
    label: str,
    spec: PerturbationSpec,
    result: dict,
    constants: StabilityConstants,
    config: RunConfig,
):
    reflex = config.angle >= math.pi
    headroom = config.suite.headroom
    if "assumptions" in result:
        residual = result["assumptions"]["max_residual"]
        report.record_residual("admissibility", residual)
        report.add_upper(
            f"{label}/admissibility", "admissibility", residual, ADMISSIBILITY_TOLERANCE
        )
    if reflex:
        symmetry = result.get("symmetry")
        if symmetry is None:
            report.add_failure(
                f"{label}/symmetry", "symmetry-reduction", "symmetry needs an odd node count"
            )
        else:
            report.add_upper(
                f"{label}/symmetry", "symmetry-reduction", symmetry, ADMISSIBILITY_TOLERANCE
            )
    if "error" in result:
        report.add_failure(f"{label}/run", "solver", result["error"])
        return

    trajectory: Trajectory = result["trajectory"]
    report.trajectories.setdefault("main", trajectory)
    channels = trajectory.channels
    initial_ss = float(channels["phi_ss"][0])
    if initial_ss > DEGENERATE_NORM:
        report.add_upper(
            f"{label}/phi_s_h1",
            "basic-estimate",
            float(np.max(channels["phi_s_h1"])) / initial_ss,
            (1.0 + headroom) * constants.C0,
            "ratio to ||phi0_ss||",
        )
        report.add_lower(
            f"{label}/phi_ss",
            "nondecay",
            float(np.min(channels["phi_ss"])) / initial_ss,
            (1.0 - headroom) * constants.nondecay_factor,
            "ratio to ||phi0_ss||",
        )
        if not reflex:
            for name in ("phi_b", "phi2"):
                report.add_upper(
                    f"{label}/{name}",
                    "planar-poincare",
                    float(np.max(channels[name])) / initial_ss,
                    (1.0 + headroom) * constants.planar_bound,
                    "ratio to ||phi0_ss||",
                )
    report.add_upper(
        f"{label}/phi_sss_h1", "higher-order-bound", float(np.max(channels["phi_sss_h1"])), math.inf
    )
    for name in ("endpoint_lower", "endpoint_upper"):
        report.add_upper(
            f"{label}/{name}", "endpoint-planes", float(np.max(channels[name])), ENDPOINT_TOLERANCE
        )
    intercept, slope = affine_envelope(trajectory.times, channels["phi3"])
    report.add_upper(
        f"{label}/phi3_envelope",
        "axial-envelope",
        slope,
        math.inf,
        f"||phi3(t)|| <= {intercept:.3e} + {slope:.3e} t",
    )
    report.metrics[label] = {
        "phi0_ss": initial_ss,
        "phi3_envelope": [intercept, slope],
        "max_phi_s_h1": float(np.max(channels["phi_s_h1"])),
        "min_phi_ss": float(np.min(channels["phi_ss"])),
    }

    if spec.family == "constant_shift":
        times, drift = result["shift_series"]
        shift_slope, _ = fit_slope(times, drift)
        continuous_slope, _ = fit_slope(trajectory.times, channels["phi3"])
        report.record_slope(f"{label}/phi3", shift_slope, 0.0)
        report.metrics[label]["phi3_slope_vs_exact"] = continuous_slope
        report.metrics[label]["phi3_slope_vs_discrete"] = shift_slope
        report.add_upper(
            f"{label}/phi3_slope",
            "constant-shift",
            abs(continuous_slope),
            result["baseline_rate"] + SHIFT_SLOPE_TOLERANCE,
            "slope of ||phi3|| against the exact arc",
        )
        report.add_upper(
            f"{label}/shift_error", "constant-shift", result["shift_error"], ARC_ERROR_TOLERANCE
        )


def run_stability(config: RunConfig) -> ExperimentReport:
    """
    Check the explicit stability estimates on a corpus of perturbations.

    Random families are drawn once per corpus seed; deterministic families
    run once. For angles in [pi, 2 pi) perturbations must be symmetric about
    the mid-chord and the constants of the half-angle arc apply.

    Args:
        config: Run configuration with an arc problem

    Returns:
        ExperimentReport
    """
    report = _new_report("stability", config)
    if not _require_arc(report, config, "basic-estimate"):
        return report
    params = config.params
    reduced = ArcParams(params.radius, params.angle / 2.0) if params.angle >= math.pi else params
    constants = stability_constants(reduced)
    report.metrics["constants"] = constants.to_dict()

    if config.perturbation.family in ("smooth_random", "symmetrized", "reflective_random"):
        cases = [(f"seed{s}", seeded_spec(config, s)) for s in config.suite.seeds]
    else:
        cases = [(config.perturbation.family, config.perturbation)]
    jobs = [(config, spec) for _, spec in cases]
    results = _map(_stability_case, jobs, config.suite.workers)
    for (label, spec), result in zip(cases, results):
        _stability_checks(report, label, spec, result, constants, config)
    return report


# =============================================================================
# Optimality
# =============================================================================


def run_optimality(config: RunConfig, n_list: Sequence[int] | None = None) -> ExperimentReport:
    """
    Growth of looped perturbations against the rate 2 pi n / (R angle).

    For each n the slope of sup_s |x3 - x^R_3| is fitted over the second
    half of the run; the offset must stay uniform in s, and the rate must
    grow with n.
    """
    report = _new_report("optimality", config)
    if not _require_arc(report, config, "optimal-growth"):
        return report
    params = config.params
    measured: list[tuple[int, float]] = []
    for n in n_list or config.suite.n_list:
        label = f"n={n}"
        with _guarded(report, label, "optimal-growth"):
            state = prepare_run(config, PerturbationSpec("looped_arc", n=n))
            trajectory = run_state(state, ("x3_offset", "x3_spread"))
            slope, _ = fit_slope(trajectory.times, trajectory.channel("x3_offset"))
            target = looped_growth_rate(n, params)
            report.record_slope(label, slope, target)
            report.add_upper(
                f"{label}/slope", "optimal-growth", abs(slope - target) / target, SLOPE_TOLERANCE
            )
            report.add_upper(
                f"{label}/spread",
                "optimal-growth",
                float(np.max(trajectory.channel("x3_spread"))),
                SPREAD_TOLERANCE,
            )
            report.trajectories.setdefault("main", trajectory)
            report.trajectories[label] = trajectory
            measured.append((n, slope))

    if len(measured) > 1:
        slopes = [slope for _, slope in sorted(measured)]
        report.add_lower(
            "rate_increases", "optimal-growth", float(np.min(np.diff(slopes))), np.finfo(float).tiny
        )
    return report


# =============================================================================
# Symmetry
# =============================================================================


def run_symmetry(config: RunConfig) -> ExperimentReport:
    """
    Preservation of reflection and mid-chord symmetry.

    The configured perturbation is extended by reflection to (-L, L) and
    evolved under the mirrored boundary data; ||T x - x|| must stay at
    round-off. A symmetrized random perturbation of the arc itself must
    stay symmetric about s = L/2.
    """
    report = _new_report("symmetry", config)
    if not _require_arc(report, config, "reflection-symmetry"):
        return report
    params = config.params
    seed = config.perturbation.seed if config.perturbation.seed is not None else config.seed

    with _guarded(report, "reflection", "reflection-symmetry"):
        state = prepare_run(config, seeded_spec(config, seed))
        report.record_residual("join", join_residual(state.initial))
        extended = extend_by_reflection(state.initial)
        observers = perturbation_observers(params, extended.grid, ["symmetry"])
        solver = replace(config.solver, observers=tuple(observers))
        trajectory = simulate(extended, symmetric_boundary_condition(params), solver)
        report.trajectories["main"] = trajectory
        report.add_upper(
            "reflection",
            "reflection-symmetry",
            float(np.max(trajectory.channel("symmetry"))),
            SYMMETRY_TOLERANCE,
        )

    with _guarded(report, "mid_chord", "symmetry-reduction"):
        inner = PerturbationSpec(
            "smooth_random",
            seed=seed,
            amplitude=config.perturbation.amplitude or config.suite.amplitude,
            margin=config.perturbation.margin,
        )
        n_nodes = config.n_nodes if config.n_nodes % 2 else config.n_nodes + 1
        state = prepare_run(config, PerturbationSpec("symmetrized", inner=inner), n_nodes)
        _, n_steps = config.solver.time_step(state.grid.spacing)
        trajectory = run_state(state, (), snapshot_stride=max(1, n_steps // 10))
        residual = max(
            check_symmetry(snapshot - sample_exact_arc(params, t, state.grid), params)
            for t, snapshot in zip(trajectory.snapshot_times, trajectory.snapshots)
        )
        report.trajectories["mid_chord"] = trajectory
        report.add_upper("mid_chord", "symmetry-reduction", residual, SYMMETRY_TOLERANCE)
    return report


# =============================================================================
# Poincare constant
# =============================================================================


def run_poincare(config: RunConfig) -> ExperimentReport:
    """
    Rayleigh quotient of sin(pi s / L) against the sharp constant L / pi.

    The relative error must stay below (pi h / L)^2 on every rung and
    converge at second order.
    """
    report = _new_report("poincare", config)
    length = config.grid.length
    target = length / math.pi
    ladder = sorted(set(config.suite.ladder))
    spacings, errors = [], []
    for n in ladder:
        with _guarded(report, f"relative_error[N={n}]", "poincare"):
            grid = Grid.interval(length, n)
            mode = VectorField(grid, np.outer(np.sin(np.pi * grid.nodes / length), E1))
            error = abs(poincare_ratio(mode) - target) / target
            spacings.append(grid.spacing)
            errors.append(error)
            report.add_upper(
                f"relative_error[N={n}]", "poincare", error, (np.pi * grid.spacing / length) ** 2
            )
    report.metrics["target"] = target
    report.metrics["relative_error"] = dict(zip(map(str, ladder), errors))
    if len(errors) == len(ladder) > 1:
        _add_orders(report, "relative_error", "poincare", ladder, spacings, errors)
    return report


# =============================================================================
# Rings
# =============================================================================


def _ring_corpus(config: RunConfig) -> list[tuple[str, PerturbationSpec, int]]:
    suite = config.suite
    corpus = [("circle", PerturbationSpec("zero"), suite.k)]
    for n in suite.ring_n:
        k = n - 1
        if k >= 3 and all(rung % k == 0 for rung in suite.ladder):
            corpus.append((f"looped{n}", PerturbationSpec("ring_looped", n=n), k))
    for seed in suite.seeds:
        spec = PerturbationSpec(
            "reflective_random", seed=seed, amplitude=suite.amplitude, k=suite.k, symmetric=True
        )
        corpus.append((f"seed{seed}", spec, suite.k))
    return corpus


def run_ring(config: RunConfig) -> ExperimentReport:
    """
    Ring experiments: segmentation agreement, ring bounds and growth rates.

    * Segmentation: k-reflective data (the circle, looped rings whose n - 1
      admits a segmentation, the reflective random corpus) solved as k arc
      problems must agree with the periodic solve, converging at second
      order under the ladder.
    * Stability: the reflective corpus obeys the explicit bounds with the
      constants of one segment.
    * Optimality: ring_looped(n) separates at rate (n - 1) / R.
    """
    report = _new_report("ring", config)
    if not config.is_ring:
        report.add_failure("problem", "segmentation", "suite 'ring' needs a ring problem")
        return report
    suite = config.suite
    radius = config.radius
    ladder = sorted(set(suite.ladder))
    segmentation_solver = replace(config.solver, observers=())

    for label, spec, k in _ring_corpus(config):
        with _guarded(report, f"{label}/segmentation", "segmentation"):
            spacings, mismatches = [], []
            for n in ladder:
                state = prepare_run(config, spec, n)
                solution = segment_and_solve(
                    state.initial,
                    k,
                    segmentation_solver,
                    radius,
                    workers=suite.workers,
                    phi0=state.phi0,
                )
                spacings.append(state.grid.spacing)
                mismatches.append(solution.mismatch)
                report.record_residual("interface_gap", solution.interface_gap)
                report.warnings.extend(solution.warnings)
                report.metrics.setdefault("segmentation", {})[f"{label}/N={n}"] = solution.to_dict()
                if n == ladder[-1]:
                    report.trajectories[f"{label}-assembled"] = solution.assembled
                    report.trajectories[f"{label}-periodic"] = solution.periodic
            if len(ladder) > 1:
                orders = convergence_orders(spacings, mismatches)
                report.orders[f"{label}/mismatch"] = orders.tolist()
                report.add_lower(
                    f"{label}/mismatch_order",
                    "segmentation",
                    float(np.min(orders)),
                    ORDER_THRESHOLD,
                )
            report.add_upper(
                f"{label}/mismatch[N={ladder[-1]}]",
                "segmentation",
                mismatches[-1],
                SEGMENT_MISMATCH_TOLERANCE,
            )

    with _guarded(report, "constants", "ring-stability"):
        constants = stability_constants(ArcParams(radius, 2.0 * math.pi / suite.k))
        report.metrics["segment_constants"] = constants.to_dict()
        for seed in suite.seeds:
            label = f"seed{seed}"
            spec = PerturbationSpec(
                "reflective_random", seed=seed, amplitude=suite.amplitude, k=suite.k, symmetric=True
            )
            with _guarded(report, f"{label}/stability", "ring-stability"):
                state = prepare_run(config, spec)
                trajectory = run_state(
                    state, ("phi12", "phi_s_h1", "phi_ss", "phi_sss_h1", "phi3", "arclength")
                )
                report.trajectories.setdefault("main", trajectory)
                _ring_bounds(report, label, trajectory, constants, suite)

    for n in suite.ring_n:
        label = f"n={n}"
        with _guarded(report, label, "ring-optimal-growth"):
            state = prepare_run(config, PerturbationSpec("ring_looped", n=n))
            trajectory = run_state(state, ("x3_offset", "x3_spread"))
            slope, _ = fit_slope(trajectory.times, trajectory.channel("x3_offset"))
            target = ring_growth_rate(n, radius)
            report.record_slope(label, slope, target)
            report.add_upper(
                f"{label}/slope",
                "ring-optimal-growth",
                abs(slope - target) / target,
                SLOPE_TOLERANCE,
            )
            report.add_upper(
                f"{label}/spread",
                "ring-optimal-growth",
                float(np.max(trajectory.channel("x3_spread"))),
                SPREAD_TOLERANCE,
            )
            report.trajectories[label] = trajectory
    return report


def ring_planar_bound(constants: StabilityConstants, k: int) -> float:
    """
    Ratio bound on ||(phi1, phi2)|| / ||phi0_ss|| for a k-reflective ring.

    On each segment the in-plane vector is recovered from its components
    along b and e2, which meet at the segment angle 2 pi / k, so

        |p|^2 <= (|p.b|^2 + |p.e2|^2) / (1 - |cos(2 pi / k)|)

    and both components obey the planar bound of one segment.
    """
    spread = 1.0 - abs(math.cos(2.0 * math.pi / k))
    return math.sqrt(2.0 / spread) * constants.planar_bound


def _ring_bounds(
    report: ExperimentReport,
    label: str,
    trajectory: Trajectory,
    constants: StabilityConstants,
    suite: SuiteConfig,
):
    headroom = suite.headroom
    channels = trajectory.channels
    report.record_residual("arclength", float(np.max(channels["arclength"])))
    initial_ss = float(channels["phi_ss"][0])
    if initial_ss > DEGENERATE_NORM:
        report.add_upper(
            f"{label}/phi_s_h1",
            "ring-stability",
            float(np.max(channels["phi_s_h1"])) / initial_ss,
            (1.0 + headroom) * constants.C0,
            "ratio to ||phi0_ss||",
        )
        report.add_lower(
            f"{label}/phi_ss",
            "ring-stability",
            float(np.min(channels["phi_ss"])) / initial_ss,
            (1.0 - headroom) * constants.nondecay_factor,
            "ratio to ||phi0_ss||",
        )
        report.add_upper(
            f"{label}/phi12",
            "ring-stability",
            float(np.max(channels["phi12"])) / initial_ss,
            (1.0 + headroom) * ring_planar_bound(constants, suite.k),
            "ratio to ||phi0_ss||",
        )
    report.add_upper(
        f"{label}/phi_sss_h1", "ring-stability", float(np.max(channels["phi_sss_h1"])), math.inf
    )
    intercept, slope = affine_envelope(trajectory.times, channels["phi3"])
    report.add_upper(
        f"{label}/phi3_envelope",
        "axial-envelope",
        slope,
        math.inf,
        f"||phi3(t)|| <= {intercept:.3e} + {slope:.3e} t",
    )


# =============================================================================
# Verification
# =============================================================================

SUITES: dict[str, Callable[[RunConfig], ExperimentReport]] = {
    "simulate": run_simulation,
    "arc-accuracy": run_arc_accuracy,
    "conservation": run_conservation,
    "stability": run_stability,
    "optimality": run_optimality,
    "symmetry": run_symmetry,
    "poincare": run_poincare,
    "ring": run_ring,
}

# Preset name and the suite that runs it.
VERIFY_PLAN: tuple[tuple[str, str], ...] = (
    ("arc-accuracy", "arc-accuracy"),
    ("conservation", "conservation"),
    ("stability", "stability"),
    ("constant-shift", "stability"),
    ("optimality", "optimality"),
    ("symmetry", "symmetry"),
    ("ring", "ring"),
    ("poincare", "poincare"),
)


def run_verify(seed: int | None = None, workers: int = 1) -> ExperimentReport:
    """
    Run every acceptance suite from its preset and merge the reports.

    Args:
        seed: Override of the base seed of every preset
        workers: Process pool size for corpus runs and segment solves

    Returns:
        ExperimentReport named "verify"; trajectories are keyed "<preset>-<name>"
    """
    report = ExperimentReport("verify", provenance=provenance())
    for name, suite in VERIFY_PLAN:
        config = preset(name)
        config = replace(config, suite=replace(config.suite, workers=workers))
        if seed is not None:
            config = replace(config, seed=seed)
        logger.info(f"Running suite '{name}'")
        sub = SUITES[suite](config)
        report.merge(sub, prefix=name)
        report.config[name] = sub.config
        for key, trajectory in sub.trajectories.items():
            report.trajectories[f"{name}-{key}"] = trajectory
        logger.info(f"Suite '{name}': {'passed' if sub.passed else 'FAILED'}")
    return report
