"""Command-line front door.

Subcommands: classify, cv, loo, gen, sweep, threshold-dist, curves, apriori,
sample-size.  Scenario and study settings come from a config file
(``--config``; see ``robustnn --print-config`` for the annotated template),
with a few common flags as overrides.  Every run writes its primary outputs
plus a ``<output stem>.manifest.json`` recording the resolved configuration,
the seed, the package version, and the argv needed to reproduce the run;
outputs contain no timestamps, so re-running an identical command yields
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    DEFAULT_C,
    DEFAULT_XI,
    DEPENDENT_RULE,
    ExtremaMethod,
    FixedThresholdMethod,
    MethodSpec,
    RobustMethod,
    StandardNNMethod,
    TruncatedNNMethod,
    evaluate_method,
    method_id,
)
from .config import (
    default_config,
    format_blocked_marginal,
    format_dependence,
    get_setting,
    load_config,
    methods_from_config,
    parse_mn_pairs,
    parse_number_list,
    scenario_from_config,
)
from .datagen import Scenario, generate
from .dataset import dataset_from_generated, load_dataset, loo_cross_validate, save_dataset
from .errors import ConfigurationError, RobustnnError
from .experiments import (
    estimate_success_rate,
    sample_size_study,
    success_vs_c,
    success_vs_threshold,
    sweep_beta_r,
    threshold_distribution,
    write_curve_csv,
    write_histogram_csv,
    write_sample_size_csv,
)
from .tuning import apriori_optimal_threshold, select_threshold_cv

__all__ = ["dispatch", "main"]

SCHEMA_VERSION = 1


def _scenario_dict(scenario: Scenario) -> dict:
    return {
        "p": scenario.p,
        "m": scenario.m,
        "n": scenario.n,
        "beta": scenario.beta,
        "r": scenario.r,
        "marginal": format_blocked_marginal(scenario.marginal),
        "dependence": format_dependence(scenario.dependence),
        "shift_placement": scenario.shift_placement,
        "seed": scenario.seed,
    }


def _write_json(path, payload: dict) -> None:
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_path, command: str, argv: list[str], config: dict, seed, outputs) -> None:
    manifest_path = Path(out_path).with_suffix("").as_posix() + ".manifest.json"
    _write_json(
        manifest_path,
        {
            "artifact_version": __version__,
            "command": command,
            "argv": list(argv),
            "config": config,
            "seed": seed,
            "outputs": [str(p) for p in outputs],
        },
    )


def _method_from_flags(args) -> MethodSpec:
    name = args.method
    rule = getattr(args, "rule", "independent")
    c = args.c
    if c is None:
        c = DEFAULT_XI if rule in ("dependent", DEPENDENT_RULE) else DEFAULT_C
    if name == "robust":
        return RobustMethod(rule=rule, xi_or_c=c)
    if name == "nn":
        return StandardNNMethod()
    if name == "nn_trunc":
        if args.t is None:
            raise ConfigurationError("nn_trunc needs --t")
        return TruncatedNNMethod(t=args.t)
    if name == "fixed_threshold":
        if args.t is None:
            raise ConfigurationError("fixed_threshold needs --t")
        return FixedThresholdMethod(t=args.t)
    if name == "extrema":
        return ExtremaMethod()
    raise ConfigurationError(f"unknown method {name!r}")


def _add_method_flags(sub) -> None:
    sub.add_argument(
        "--method",
        default="robust",
        choices=["robust", "nn", "nn_trunc", "fixed_threshold", "extrema"],
        help="classifier to run",
    )
    sub.add_argument("--c", type=float, default=None, help="critical-value slope (c or xi)")
    sub.add_argument(
        "--rule",
        default="independent",
        choices=["independent", "dependent"],
        help="critical-value rule for the robust method",
    )
    sub.add_argument("--t", type=float, default=None, help="threshold for nn_trunc/fixed_threshold")


def _load_scenario(args) -> Scenario:
    parser = load_config(args.config) if args.config else None
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    return scenario_from_config(parser, **overrides)


def _study_value(args, section: str, key: str, cast):
    parser = load_config(args.config) if args.config else None
    return cast(get_setting(parser, section, key))


def _base_seed(args, scenario: Scenario) -> int:
    return args.seed if args.seed is not None else scenario.seed


def _cmd_classify(args, argv) -> int:
    dataset = load_dataset(args.data)
    index = args.index if args.index is not None else len(dataset.labels) - 1
    if not 0 <= index < len(dataset.labels):
        raise ConfigurationError(
            f"--index must be in [0, {len(dataset.labels) - 1}], got {index}"
        )
    keep = np.ones(len(dataset.labels), dtype=bool)
    keep[index] = False
    first, second = dataset.class_labels
    labels = np.array(dataset.labels)[keep]
    train = dataset.samples[keep]
    train_x = train[labels == first]
    train_y = train[labels == second]
    if train_x.shape[0] < 1 or train_y.shape[0] < 1:
        raise ConfigurationError("training split leaves an empty class")
    method = _method_from_flags(args)
    outcome = evaluate_method(train_x, train_y, dataset.samples[index], method)
    predicted = first if outcome.label == "X" else second
    result = {
        "data": str(args.data),
        "row_index": index,
        "method": method_id(method),
        "predicted_label": predicted,
        "true_label": dataset.labels[index],
        "correct": predicted == dataset.labels[index],
        "theta": outcome.theta,
        "defaulted": outcome.defaulted,
        "x_role_label": first,
    }
    _write_json(args.out, result)
    print(f"row {index}: predicted {predicted}, true {dataset.labels[index]}")
    _write_manifest(args.out, "classify", argv, result, None, [args.out])
    return 0


def _cmd_cv(args, argv) -> int:
    dataset = load_dataset(args.data)
    first, second = dataset.class_labels
    curve = select_threshold_cv(dataset.rows_of(first), dataset.rows_of(second))
    result = {
        "data": str(args.data),
        "theta_cv": curve.theta_cv,
        "cv_minimum": float(curve.values.min()),
        "grid_size": int(curve.ts.size),
        "minimizer_count": int(curve.minimizers.size),
        "x_role_label": first,
    }
    _write_json(args.out, result)
    print(f"theta_cv = {curve.theta_cv!r} (CV = {float(curve.values.min())!r})")
    _write_manifest(args.out, "cv", argv, result, None, [args.out])
    return 0


def _cmd_loo(args, argv) -> int:
    dataset = load_dataset(args.data)
    method = _method_from_flags(args)
    result = loo_cross_validate(dataset, method)
    payload = {
        "data": str(args.data),
        "method": method_id(method),
        "accuracy": result.accuracy,
        "correct": result.correct,
        "total": result.total,
        "confusion": {f"{true}->{pred}": n for (true, pred), n in result.confusion.items()},
        "x_role_label": result.class_labels[0],
    }
    _write_json(args.out, payload)
    print(str(result))
    _write_manifest(args.out, "loo", argv, payload, None, [args.out])
    return 0


def _cmd_gen(args, argv) -> int:
    scenario = _load_scenario(args)
    data = generate(scenario, args.z_from)
    save_dataset(dataset_from_generated(data), args.out)
    config = {"scenario": _scenario_dict(scenario), "z_from": args.z_from}
    print(
        f"wrote {scenario.m + scenario.n + 1} rows x {scenario.p} features to {args.out} "
        f"(shifts: {data.shift_indices.size}, amount {data.shift_amount!r})"
    )
    _write_manifest(args.out, "gen", argv, config, scenario.seed, [args.out])
    return 0


def _cmd_sweep(args, argv) -> int:
    scenario = _load_scenario(args)
    parser = load_config(args.config) if args.config else None
    beta_grid = parse_number_list(_study_value(args, "sweep", "beta_grid", str))
    r_grid = parse_number_list(_study_value(args, "sweep", "r_grid", str))
    trials = args.trials if args.trials is not None else _study_value(args, "sweep", "trials", int)
    methods = methods_from_config(parser)
    base_seed = _base_seed(args, scenario)
    grid = sweep_beta_r(
        beta_grid, r_grid, scenario, methods, trials, base_seed, workers=args.workers
    )
    out = Path(args.out)
    dominance_path = out.with_name(out.stem + "_dominance" + out.suffix)
    grid.to_long_csv(out)
    grid.to_dominance_csv(dominance_path)
    config = {
        "scenario": _scenario_dict(scenario),
        "beta_grid": list(grid.beta_axis),
        "r_grid": list(grid.r_axis),
        "methods": list(grid.methods),
        "trials_per_cell": trials,
    }
    print(
        f"swept {len(grid.beta_axis)}x{len(grid.r_axis)} cells "
        f"({len(grid.skipped)} skipped), {trials} trials each -> {out}"
    )
    _write_manifest(out, "sweep", argv, config, base_seed, [out, dominance_path])
    return 0


def _cmd_threshold_dist(args, argv) -> int:
    scenario = _load_scenario(args)
    trials = (
        args.trials
        if args.trials is not None
        else _study_value(args, "threshold_dist", "trials", int)
    )
    c_value = args.c if args.c is not None else _study_value(args, "threshold_dist", "c", float)
    bins = _study_value(args, "threshold_dist", "bins", int)
    base_seed = _base_seed(args, scenario)
    dist = threshold_distribution(
        scenario, trials, c_value, base_seed, bins=bins, workers=args.workers
    )
    write_histogram_csv(args.out, dist)
    config = {
        "scenario": _scenario_dict(scenario),
        "trials": trials,
        "c": c_value,
        "bins": bins,
        "defaulted_fraction": dist.defaulted_fraction,
        "shift_amount": dist.shift,
    }
    print(
        f"threshold histogram -> {args.out} "
        f"(defaulted fraction {dist.defaulted_fraction!r}, shift {dist.shift!r})"
    )
    _write_manifest(args.out, "threshold-dist", argv, config, base_seed, [args.out])
    return 0


def _cmd_curves(args, argv) -> int:
    scenario = _load_scenario(args)
    trials = args.trials if args.trials is not None else _study_value(args, "curves", "trials", int)
    base_seed = _base_seed(args, scenario)
    if args.kind == "threshold":
        grid = parse_number_list(_study_value(args, "curves", "t_grid", str))
        curve = success_vs_threshold(scenario, grid, trials, base_seed)
    else:
        grid = parse_number_list(_study_value(args, "curves", "c_grid", str))
        curve = success_vs_c(scenario, grid, trials, base_seed)
    write_curve_csv(args.out, curve.xs, curve.rates, x_name=curve.x_name)
    out = Path(args.out)
    details_path = out.with_suffix("").as_posix() + ".json"
    payload = {
        "scenario": _scenario_dict(scenario),
        "kind": args.kind,
        "trials": trials,
        "x": [float(v) for v in curve.xs],
        "rate": [float(v) for v in curve.rates],
        "se": [float(v) for v in curve.ses],
        "defaulted_fraction": (
            None
            if curve.defaulted_fractions is None
            else [float(v) for v in curve.defaulted_fractions]
        ),
        "nn_rate": curve.nn_rate,
        "nn_se": curve.nn_se,
    }
    _write_json(details_path, payload)
    best = float(curve.xs[curve.rates.argmax()])
    print(
        f"{args.kind} curve over {curve.xs.size} points -> {args.out} "
        f"(best {curve.x_name} = {best!r}, nn reference {curve.nn_rate!r})"
    )
    _write_manifest(out, "curves", argv, payload, base_seed, [out, details_path])
    return 0


def _cmd_apriori(args, argv) -> int:
    scenario = _load_scenario(args)
    grid = parse_number_list(_study_value(args, "apriori", "t_grid", str))
    method = _study_value(args, "apriori", "method", str).strip()
    trials = (
        args.trials if args.trials is not None else _study_value(args, "apriori", "trials", int)
    )
    base_seed = _base_seed(args, scenario)
    curve = apriori_optimal_threshold(
        scenario, grid, method, trials=trials, base_seed=base_seed
    )
    write_curve_csv(args.out, curve.ts, curve.values, x_name="t")
    best = float(curve.values.max())
    config = {
        "scenario": _scenario_dict(scenario),
        "method": curve.method,
        "t_star": curve.t_star,
        "predicted_success_at_t_star": best,
        "trials": trials,
    }
    print(f"t_star = {curve.t_star!r} with predicted success {best!r} -> {args.out}")
    _write_manifest(args.out, "apriori", argv, config, base_seed, [args.out])
    return 0


def _cmd_sample_size(args, argv) -> int:
    scenario = _load_scenario(args)
    parser = load_config(args.config) if args.config else None
    pairs = parse_mn_pairs(_study_value(args, "sample_size", "pairs", str))
    trials = (
        args.trials if args.trials is not None else _study_value(args, "sample_size", "trials", int)
    )
    methods = methods_from_config(parser)
    base_seed = _base_seed(args, scenario)
    rows = sample_size_study(
        scenario, pairs, trials, base_seed, methods=methods, workers=args.workers
    )
    write_sample_size_csv(args.out, rows)
    config = {
        "scenario": _scenario_dict(scenario),
        "pairs": [[m, n] for m, n in pairs],
        "methods": [method_id(m) for m in methods],
        "trials": trials,
    }
    print(f"{len(rows)} (m, n, method) rows -> {args.out}")
    _write_manifest(args.out, "sample-size", argv, config, base_seed, [args.out])
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustnn",
        description=(
            "Thresholded zero-one nearest-neighbor classification: "
            "classify datasets, tune thresholds, and run Monte Carlo studies."
        ),
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the annotated default config and exit",
    )
    subs = parser.add_subparsers(dest="command")

    sub = subs.add_parser("classify", help="classify one held-out row of a CSV dataset")
    sub.add_argument("--data", required=True, help="labeled CSV dataset")
    sub.add_argument("--index", type=int, default=None, help="row to classify (default: last)")
    _add_method_flags(sub)
    sub.add_argument("--out", default="classify_result.json")
    sub.set_defaults(func=_cmd_classify)

    sub = subs.add_parser("cv", help="cross-validated truncation threshold for a dataset")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", default="cv_result.json")
    sub.set_defaults(func=_cmd_cv)

    sub = subs.add_parser("loo", help="leave-one-out accuracy of one method on a dataset")
    sub.add_argument("--data", required=True)
    _add_method_flags(sub)
    sub.add_argument("--out", default="loo_result.json")
    sub.set_defaults(func=_cmd_loo)

    def scenario_sub(name: str, help_text: str):
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--config", default=None, help="config file (defaults if omitted)")
        sub.add_argument("--seed", type=int, default=None, help="override the base seed")
        return sub

    sub = scenario_sub("gen", "draw one synthetic dataset and write it as CSV")
    sub.add_argument("--z-from", default="Y", choices=["X", "Y"], dest="z_from")
    sub.add_argument("--out", default="generated.csv")
    sub.set_defaults(func=_cmd_gen)

    sub = scenario_sub("sweep", "success rates over a (beta, r) grid")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--out", default="grid.csv")
    sub.set_defaults(func=_cmd_sweep)

    sub = scenario_sub("threshold-dist", "distribution of selected thresholds")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--c", type=float, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--out", default="threshold_hist.csv")
    sub.set_defaults(func=_cmd_threshold_dist)

    sub = scenario_sub("curves", "success vs fixed threshold or vs slope c")
    sub.add_argument("--kind", default="c", choices=["c", "threshold"])
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--out", default="curve.csv")
    sub.set_defaults(func=_cmd_curves)

    sub = scenario_sub("apriori", "predicted success curve and optimal threshold")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--out", default="apriori_curve.csv")
    sub.set_defaults(func=_cmd_apriori)

    sub = scenario_sub("sample-size", "success rates across (m, n) training sizes")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--out", default="sample_size.csv")
    sub.set_defaults(func=_cmd_sample_size)

    return parser


def dispatch(argv) -> int:
    """Parse argv (without the program name) and run; returns the exit code."""
    argv = list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.print_config:
        print(default_config(), end="")
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args, argv)
    except RobustnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
