"""Monte Carlo experiment engine: paired trials, sweeps, and curves.

Every trial draws one dataset and shows it to every configured method, so
method comparisons are paired.  Trial seeds derive deterministically from
the base seed, the cell index, and the trial index (see ``seeds``), which
makes runs reproducible bit-for-bit and independent of execution order;
parallel and serial runs produce identical results.  Test-vector labels
alternate X, Y, X, Y, ... so success rates are balanced averages of the two
conditional accuracies, and the reported standard error is the binomial
sqrt(rate * (1 - rate) / trials).

Provided studies:

* ``estimate_success_rate`` - per-method success rates on one scenario.
* ``sweep_beta_r`` - a grid over (beta, r) sparsity/signal exponents, with a
  per-cell dominance map (ties resolve toward a robust method and are
  flagged).  Degenerate cells are skipped, not failed.
* ``threshold_distribution`` - histogram of selected thresholds as a
  proportion of the shift amount, plus the defaulted fraction.
* ``success_vs_threshold`` / ``success_vs_c`` - success curves over a fixed
  threshold grid (selection bypassed) or over the critical-value slope c,
  sharing one dataset per trial across the whole grid and overlaying the
  standard nearest-neighbor rate measured on the same trials.
* ``sample_size_study`` - success rates across (m, n) training-size pairs.

Worker processes are capped by the ROBUSTNN_THREADS environment variable
(0 means one worker per CPU); the default is serial execution.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .classifier import (
    MethodSpec,
    RobustMethod,
    StandardNNMethod,
    _default_t0,
    _first_firing,
    _scan_grid,
    classify_nn_standard,
    evaluate_method,
    method_id,
    threshold_scan,
    zp_value,
)
from .datagen import DegenerateScenarioError, GeneratedData, Scenario, generate, shift_amount
from .errors import ConfigurationError, ParameterError
from .seeds import derive_seed

__all__ = [
    "TrialResult",
    "MethodRate",
    "SweepGrid",
    "ThresholdDistribution",
    "SuccessCurve",
    "SampleSizeRow",
    "run_trial",
    "estimate_success_rate",
    "sweep_beta_r",
    "threshold_distribution",
    "success_vs_threshold",
    "success_vs_c",
    "sample_size_study",
    "resolve_workers",
    "write_curve_csv",
    "write_histogram_csv",
    "write_sample_size_csv",
]

THREADS_ENV = "ROBUSTNN_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else ROBUSTNN_THREADS, else 1 (serial)."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigurationError(
                f"{THREADS_ENV} must be a nonnegative integer, got {raw!r}"
            ) from None
    workers = int(workers)
    if workers < 0:
        raise ConfigurationError(f"worker count must be nonnegative, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


@dataclass(frozen=True)
class TrialResult:
    """One method's verdict on one trial."""

    method: str
    correct: bool
    theta: float | None
    defaulted: bool | None
    z_true_label: str
    seed: int


def run_trial(
    scenario: Scenario,
    methods: Sequence[MethodSpec],
    seed: int,
    z_from: str | None = None,
) -> list[TrialResult]:
    """Draw one dataset from ``seed`` and score every method on it.

    ``z_from`` forces the test-vector label; when None it is a fair coin from
    the trial's own stream.  All methods see the identical dataset, and the
    seed recorded on each result regenerates it exactly.
    """
    rng = np.random.default_rng(seed)
    if z_from is None:
        z_from = "X" if rng.random() < 0.5 else "Y"
    data = generate(scenario, z_from, rng)
    results = []
    for method in methods:
        outcome = evaluate_method(data.x_samples, data.y_samples, data.z, method)
        results.append(
            TrialResult(
                method=method_id(method),
                correct=outcome.label == z_from,
                theta=outcome.theta,
                defaulted=outcome.defaulted,
                z_true_label=z_from,
                seed=seed,
            )
        )
    return results


@dataclass(frozen=True)
class MethodRate:
    """Aggregated success for one method over a common trial set."""

    method: str
    rate: float
    se: float
    trials: int
    defaulted_fraction: float | None = None


def _trial_args(scenario, methods, trials, base_seed, cell_index):
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    return [
        (scenario, methods, derive_seed(base_seed, cell_index, j), "X" if j % 2 == 0 else "Y")
        for j in range(trials)
    ]


def _run_trial_star(args) -> list[TrialResult]:
    return run_trial(*args)


def _run_cell(
    scenario: Scenario,
    methods: Sequence[MethodSpec],
    trials: int,
    base_seed: int,
    cell_index: int,
    workers: int | None,
) -> list[list[TrialResult]]:
    args = _trial_args(scenario, methods, trials, base_seed, cell_index)
    count = resolve_workers(workers)
    if count <= 1 or trials < 2 * count:
        return [run_trial(*a) for a in args]
    chunk = max(1, trials // (count * 4))
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(_run_trial_star, args, chunksize=chunk))


def _summarize(
    methods: Sequence[MethodSpec], per_trial: list[list[TrialResult]]
) -> dict[str, MethodRate]:
    trials = len(per_trial)
    out: dict[str, MethodRate] = {}
    for pos, method in enumerate(methods):
        rows = [trial[pos] for trial in per_trial]
        rate = sum(r.correct for r in rows) / trials
        se = math.sqrt(rate * (1.0 - rate) / trials)
        defaulted = None
        if rows and rows[0].defaulted is not None:
            defaulted = sum(bool(r.defaulted) for r in rows) / trials
        out[method_id(method)] = MethodRate(
            method=method_id(method),
            rate=rate,
            se=se,
            trials=trials,
            defaulted_fraction=defaulted,
        )
    return out


def estimate_success_rate(
    scenario: Scenario,
    methods: Sequence[MethodSpec],
    trials: int,
    base_seed: int,
    *,
    cell_index: int = 0,
    workers: int | None = None,
) -> dict[str, MethodRate]:
    """Balanced paired success rates for every method on one scenario."""
    per_trial = _run_cell(scenario, methods, trials, base_seed, cell_index, workers)
    return _summarize(methods, per_trial)


@dataclass(frozen=True)
class DominanceCell:
    method: str
    tied: bool


@dataclass
class SweepGrid:
    """Success rates over a (beta, r) grid with a per-cell dominance map."""

    beta_axis: tuple[float, ...]
    r_axis: tuple[float, ...]
    methods: tuple[str, ...]
    cells: dict[tuple[int, int, str], MethodRate]
    dominance: dict[tuple[int, int], DominanceCell]
    skipped: set[tuple[int, int]]
    trials: int

    def rate(self, bi: int, ri: int, method: str) -> MethodRate:
        return self.cells[(bi, ri, method)]

    def to_long_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["beta", "r", "method", "rate", "se", "trials"])
            for bi, beta in enumerate(self.beta_axis):
                for ri, r in enumerate(self.r_axis):
                    if (bi, ri) in self.skipped:
                        continue
                    for name in self.methods:
                        cell = self.cells[(bi, ri, name)]
                        writer.writerow(
                            [repr(beta), repr(r), name, repr(cell.rate), repr(cell.se), cell.trials]
                        )

    def to_dominance_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["beta"] + [repr(r) for r in self.r_axis])
            for bi, beta in enumerate(self.beta_axis):
                row: list[str] = [repr(beta)]
                for ri in range(len(self.r_axis)):
                    if (bi, ri) in self.skipped:
                        row.append("skipped")
                    else:
                        cell = self.dominance[(bi, ri)]
                        row.append(cell.method + ("*" if cell.tied else ""))
                writer.writerow(row)


def _dominant(
    methods: Sequence[MethodSpec], rates: dict[str, MethodRate]
) -> DominanceCell:
    best = max(rate.rate for rate in rates.values())
    tied_ids = [name for name, rate in rates.items() if rate.rate == best]
    if len(tied_ids) == 1:
        return DominanceCell(method=tied_ids[0], tied=False)
    # Break ties toward a robust method, then method order.
    for method in methods:
        if method_id(method) in tied_ids and isinstance(method, RobustMethod):
            return DominanceCell(method=method_id(method), tied=True)
    return DominanceCell(method=tied_ids[0], tied=True)


def sweep_beta_r(
    beta_grid: Sequence[float],
    r_grid: Sequence[float],
    template: Scenario,
    methods: Sequence[MethodSpec],
    trials_per_cell: int,
    base_seed: int,
    *,
    workers: int | None = None,
) -> SweepGrid:
    """Run every (beta, r) cell of the grid; degenerate cells are skipped."""
    beta_axis = tuple(float(b) for b in beta_grid)
    r_axis = tuple(float(r) for r in r_grid)
    if not beta_axis or not r_axis:
        raise ParameterError("beta_grid and r_grid must be nonempty")
    names = tuple(method_id(method) for method in methods)
    if len(set(names)) != len(names):
        raise ParameterError(f"method names must be distinct, got {names}")
    cells: dict[tuple[int, int, str], MethodRate] = {}
    dominance: dict[tuple[int, int], DominanceCell] = {}
    skipped: set[tuple[int, int]] = set()
    for bi, beta in enumerate(beta_axis):
        for ri, r in enumerate(r_axis):
            cell_index = bi * len(r_axis) + ri
            try:
                scenario = replace(template, beta=beta, r=r)
                rates = estimate_success_rate(
                    scenario,
                    methods,
                    trials_per_cell,
                    base_seed,
                    cell_index=cell_index,
                    workers=workers,
                )
            except DegenerateScenarioError:
                skipped.add((bi, ri))
                continue
            for name, rate in rates.items():
                cells[(bi, ri, name)] = rate
            dominance[(bi, ri)] = _dominant(methods, rates)
    return SweepGrid(
        beta_axis=beta_axis,
        r_axis=r_axis,
        methods=names,
        cells=cells,
        dominance=dominance,
        skipped=skipped,
        trials=trials_per_cell,
    )


@dataclass(frozen=True)
class ThresholdDistribution:
    """Histogram of selected thresholds, normalized by the shift amount."""

    bin_left: np.ndarray
    bin_right: np.ndarray
    proportion: np.ndarray
    defaulted_fraction: float
    thetas: np.ndarray
    shift: float


def threshold_distribution(
    scenario: Scenario,
    trials: int,
    c_value: float,
    base_seed: int,
    *,
    bins: int = 20,
    workers: int | None = None,
) -> ThresholdDistribution:
    """Distribution of theta / shift over trials for the robust classifier.

    The histogram covers non-defaulted selections (proportions sum to 1 when
    any exist); the defaulted fraction is reported separately.
    """
    method = RobustMethod(xi_or_c=c_value)
    per_trial = _run_cell(scenario, [method], trials, base_seed, 0, workers)
    shift = shift_amount(scenario)
    results = [trial[0] for trial in per_trial]
    defaulted = sum(bool(r.defaulted) for r in results) / trials
    thetas = np.array([r.theta for r in results if not r.defaulted]) / shift
    if thetas.size:
        counts, edges = np.histogram(thetas, bins=bins)
        proportion = counts / thetas.size
        bin_left, bin_right = edges[:-1], edges[1:]
    else:
        bin_left = bin_right = proportion = np.array([])
    return ThresholdDistribution(
        bin_left=bin_left,
        bin_right=bin_right,
        proportion=proportion,
        defaulted_fraction=defaulted,
        thetas=thetas,
        shift=shift,
    )


@dataclass(frozen=True)
class SuccessCurve:
    """Success rate across a parameter grid, with a paired NN reference."""

    xs: np.ndarray
    rates: np.ndarray
    ses: np.ndarray
    defaulted_fractions: np.ndarray | None
    nn_rate: float
    nn_se: float
    trials: int
    x_name: str


def _curve_trials(scenario: Scenario, trials: int, base_seed: int) -> Iterable[GeneratedData]:
    for j in range(trials):
        rng = np.random.default_rng(derive_seed(base_seed, 0, j))
        z_from = "X" if j % 2 == 0 else "Y"
        yield generate(scenario, z_from, rng)


def success_vs_threshold(
    scenario: Scenario,
    t_grid: Sequence[float],
    trials: int,
    base_seed: int,
) -> SuccessCurve:
    """Success of the fixed-threshold classifier over a grid of thresholds.

    Grid values are proportions of the shift amount.  Selection is bypassed:
    the label is simply 1(T(t) > 0).  Every grid point and the NN reference
    are scored on the same per-trial datasets.
    """
    props = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if props.size == 0 or trials < 1:
        raise ParameterError("t_grid must be nonempty and trials positive")
    shift = shift_amount(scenario)
    ts = props * shift
    correct = np.zeros(props.size, dtype=np.int64)
    nn_correct = 0
    for data in _curve_trials(scenario, trials, base_seed):
        T, _, _, _ = threshold_scan(data.x_samples, data.y_samples, data.z, ts)
        labels = np.where(T <= 0, "X", "Y")
        correct += labels == data.z_label
        nn_correct += classify_nn_standard(data.x_samples, data.y_samples, data.z) == data.z_label
    rates = correct / trials
    nn_rate = nn_correct / trials
    return SuccessCurve(
        xs=props,
        rates=rates,
        ses=np.sqrt(rates * (1.0 - rates) / trials),
        defaulted_fractions=None,
        nn_rate=nn_rate,
        nn_se=math.sqrt(nn_rate * (1.0 - nn_rate) / trials),
        trials=trials,
        x_name="t_over_shift",
    )


def success_vs_c(
    scenario: Scenario,
    c_grid: Sequence[float],
    trials: int,
    base_seed: int,
    *,
    rule: str = "independent_sqrt_logp",
    t0: float | None = None,
) -> SuccessCurve:
    """Success of the robust classifier as the critical-value slope varies.

    One dataset (and one breakpoint scan) per trial serves every c value;
    the NN reference uses the same trials.
    """
    cs = np.atleast_1d(np.asarray(c_grid, dtype=float))
    if cs.size == 0 or trials < 1:
        raise ParameterError("c_grid must be nonempty and trials positive")
    z_ps = np.array([zp_value(rule, scenario.p, c) for c in cs])
    correct = np.zeros(cs.size, dtype=np.int64)
    defaulted = np.zeros(cs.size, dtype=np.int64)
    nn_correct = 0
    for data in _curve_trials(scenario, trials, base_seed):
        X, Y, z = data.x_samples, data.y_samples, data.z
        start = _default_t0(X, Y) if t0 is None else float(t0)
        ts = _scan_grid(X, Y, z, start)
        T, S2, _, _ = threshold_scan(X, Y, z, ts)
        for ci, z_p in enumerate(z_ps):
            hit = _first_firing(T, S2, z_p)
            if hit is None:
                defaulted[ci] += 1
                hit = 0
            label = "X" if T[hit] <= 0 else "Y"
            correct[ci] += label == data.z_label
        nn_correct += classify_nn_standard(X, Y, z) == data.z_label
    rates = correct / trials
    nn_rate = nn_correct / trials
    return SuccessCurve(
        xs=cs,
        rates=rates,
        ses=np.sqrt(rates * (1.0 - rates) / trials),
        defaulted_fractions=defaulted / trials,
        nn_rate=nn_rate,
        nn_se=math.sqrt(nn_rate * (1.0 - nn_rate) / trials),
        trials=trials,
        x_name="c",
    )


@dataclass(frozen=True)
class SampleSizeRow:
    m: int
    n: int
    method: str
    rate: float
    se: float
    trials: int


def sample_size_study(
    template: Scenario,
    mn_pairs: Sequence[tuple[int, int]],
    trials: int,
    base_seed: int,
    *,
    methods: Sequence[MethodSpec] | None = None,
    workers: int | None = None,
) -> list[SampleSizeRow]:
    """Success rates across training-sample-size pairs (m, n)."""
    if methods is None:
        methods = [RobustMethod(), StandardNNMethod()]
    if not mn_pairs:
        raise ParameterError("mn_pairs must be nonempty")
    rows: list[SampleSizeRow] = []
    for pair_index, (m, n) in enumerate(mn_pairs):
        scenario = replace(template, m=int(m), n=int(n))
        rates = estimate_success_rate(
            scenario, methods, trials, base_seed, cell_index=pair_index, workers=workers
        )
        for name, rate in rates.items():
            rows.append(
                SampleSizeRow(
                    m=int(m), n=int(n), method=name, rate=rate.rate, se=rate.se, trials=trials
                )
            )
    return rows


def write_curve_csv(path, xs, values, x_name: str = "t") -> None:
    """Two-column CSV: grid value, curve value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_name, "value"])
        for x, v in zip(xs, values):
            writer.writerow([repr(float(x)), repr(float(v))])


def write_histogram_csv(path, dist: ThresholdDistribution) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "proportion"])
        for left, right, prop in zip(dist.bin_left, dist.bin_right, dist.proportion):
            writer.writerow([repr(float(left)), repr(float(right)), repr(float(prop))])


def write_sample_size_csv(path, rows: Sequence[SampleSizeRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "n", "method", "rate", "se", "trials"])
        for row in rows:
            writer.writerow([row.m, row.n, row.method, repr(row.rate), repr(row.se), row.trials])
