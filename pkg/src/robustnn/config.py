"""Config-file parsing: scenarios, methods, and study settings.

Files are flat ``key = value`` text with one section per concern, read by
configparser.  Lines starting with ``#`` are comments.  Grammar for the
compound values:

* marginal: ``family name=value ...`` (``normal``, ``normal mean=0 sd=1``,
  ``student_t df=4``, ``exponential``, ``subbotin gamma=1.5``,
  ``pareto gamma=1``).  Blocked layouts join ``spec * count`` segments with
  ``;``: ``normal * 100; exponential * 9900``.
* dependence: ``independent``; ``moving_average w=5`` (equal weights) or
  ``moving_average weights=0.2,0.3,0.5``; ``ar1 alpha=0.5``;
  ``exp_ma decay=0.5 lead=1 alpha_range=0.5,2 offset_bound=0
  innovation=exponential`` (innovation parameters use ``;`` in place of
  spaces: ``innovation=subbotin;gamma=1.5``).
* number lists: ``0.1, 0.2, 0.3`` or the inclusive range ``0.1:0.9:0.2``.

``default_config()`` returns a complete annotated template; every key it
shows is optional in user files and defaults to the value shown.
"""

from __future__ import annotations

import configparser
import io
import math
from typing import Sequence

from .classifier import (
    DEFAULT_C,
    ExtremaMethod,
    FixedThresholdMethod,
    MethodSpec,
    RobustMethod,
    StandardNNMethod,
    TruncatedNNMethod,
)
from .datagen import (
    AR1,
    PLACEMENTS,
    ExponentiatedMA,
    Independent,
    MovingAverage,
    Scenario,
)
from .distributions import format_marginal, parse_marginal
from .errors import ConfigurationError

__all__ = [
    "parse_dependence",
    "format_dependence",
    "parse_number_list",
    "parse_blocked_marginal",
    "format_blocked_marginal",
    "load_config",
    "scenario_from_config",
    "methods_from_config",
    "scenario_to_config_text",
    "default_config",
    "get_setting",
    "parse_mn_pairs",
]


def parse_number_list(text: str) -> list[float]:
    """Parse ``a, b, c`` or the inclusive range ``start:stop:step``."""
    text = text.strip()
    if not text:
        raise ConfigurationError("empty number list")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(
                f"range must be start:stop:step, got {text!r}"
            )
        try:
            start, stop, step = (float(part) for part in parts)
        except ValueError:
            raise ConfigurationError(f"non-numeric range bound in {text!r}") from None
        if step <= 0 or stop < start:
            raise ConfigurationError(
                f"range needs step > 0 and stop >= start, got {text!r}"
            )
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"non-numeric entry in list {text!r}") from None


def _parse_kv_tokens(tokens: Sequence[str], what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for token in tokens:
        if "=" not in token:
            raise ConfigurationError(f"malformed {what} parameter {token!r}")
        key, _, value = token.partition("=")
        out[key.lower()] = value
    return out


def parse_dependence(text: str):
    """Parse a dependence expression (see the module docstring grammar)."""
    tokens = text.strip().split()
    if not tokens:
        raise ConfigurationError("empty dependence expression")
    kind = tokens[0].lower()
    params = _parse_kv_tokens(tokens[1:], kind)

    def _float(key: str, default: float | None = None) -> float:
        if key not in params:
            if default is None:
                raise ConfigurationError(f"{kind} requires {key}=")
            return default
        try:
            return float(params.pop(key))
        except ValueError:
            raise ConfigurationError(f"non-numeric {key} in {text!r}") from None

    def _done(model):
        if params:
            raise ConfigurationError(
                f"{kind} does not take parameter(s) {sorted(params)}"
            )
        return model

    if kind == "independent":
        return _done(Independent())
    if kind == "moving_average":
        if "weights" in params:
            weights = tuple(float(v) for v in params.pop("weights").split(","))
            return _done(MovingAverage(weights=weights))
        window = _float("w")
        if window != int(window) or window < 1:
            raise ConfigurationError("moving_average w must be a positive integer")
        return _done(MovingAverage.equal(int(window)))
    if kind == "ar1":
        return _done(AR1(alpha=_float("alpha")))
    if kind == "exp_ma":
        decay = _float("decay")
        lead = _float("lead", 1.0)
        alpha_range = (1.0, 1.0)
        if "alpha_range" in params:
            bounds = params.pop("alpha_range").split(",")
            if len(bounds) != 2:
                raise ConfigurationError("alpha_range must be min,max")
            alpha_range = (float(bounds[0]), float(bounds[1]))
        offset_bound = _float("offset_bound", 0.0)
        innovation = parse_marginal(params.pop("innovation", "exponential").replace(";", " "))
        return _done(
            ExponentiatedMA(
                decay=decay,
                lead=lead,
                alpha_range=alpha_range,
                offset_bound=offset_bound,
                innovation=innovation,
            )
        )
    raise ConfigurationError(
        f"unknown dependence kind {tokens[0]!r}; expected one of "
        "['independent', 'moving_average', 'ar1', 'exp_ma']"
    )


def format_dependence(model) -> str:
    """Canonical text form of a dependence model, inverse of parse_dependence."""
    if isinstance(model, Independent):
        return "independent"
    if isinstance(model, MovingAverage):
        return "moving_average weights=" + ",".join(repr(w) for w in model.weights)
    if isinstance(model, AR1):
        return f"ar1 alpha={model.alpha!r}"
    if isinstance(model, ExponentiatedMA):
        innovation = format_marginal(model.innovation).replace(" ", ";")
        return (
            f"exp_ma decay={model.decay!r} lead={model.lead!r} "
            f"alpha_range={model.alpha_range[0]!r},{model.alpha_range[1]!r} "
            f"offset_bound={model.offset_bound!r} innovation={innovation}"
        )
    raise ConfigurationError(f"unknown dependence model {model!r}")


def parse_blocked_marginal(text: str):
    """Parse either one marginal or ``spec * count`` blocks joined by ``;``."""
    segments = [segment.strip() for segment in text.split(";") if segment.strip()]
    if not segments:
        raise ConfigurationError("empty marginal expression")
    if len(segments) == 1 and "*" not in segments[0]:
        return parse_marginal(segments[0])
    blocks = []
    for segment in segments:
        spec_text, star, count_text = segment.rpartition("*")
        if not star:
            raise ConfigurationError(
                f"blocked marginal segment {segment!r} needs 'spec * count'"
            )
        try:
            count = int(count_text.strip())
        except ValueError:
            raise ConfigurationError(
                f"non-integer block count in {segment!r}"
            ) from None
        if count < 1:
            raise ConfigurationError(f"block count must be >= 1 in {segment!r}")
        blocks.append((parse_marginal(spec_text), count))
    return tuple(blocks)


def format_blocked_marginal(marginal) -> str:
    if isinstance(marginal, (tuple, list)):
        return "; ".join(f"{format_marginal(spec)} * {count}" for spec, count in marginal)
    return format_marginal(marginal)


_SCENARIO_DEFAULTS = {
    "p": "20000",
    "m": "1",
    "n": "1",
    "beta": "0.7",
    "r": "0.4",
    "marginal": "normal",
    "dependence": "independent",
    "shift_placement": "uniform_random",
    "seed": "0",
}

_DEFAULT_CONFIG_TEMPLATE = f"""\
# Scenario: the data-generating model.
[scenario]
# dimension (>= 2)
p = {_SCENARIO_DEFAULTS["p"]}
# training rows per population
m = {_SCENARIO_DEFAULTS["m"]}
n = {_SCENARIO_DEFAULTS["n"]}
# sparsity exponent: round(p^(1-beta)) components are shifted
beta = {_SCENARIO_DEFAULTS["beta"]}
# signal exponent: shift solves sum_k P(X_k > a) = p^(1-r)
r = {_SCENARIO_DEFAULTS["r"]}
# marginal family; blocks join "spec * count" with ";"
marginal = {_SCENARIO_DEFAULTS["marginal"]}
# independent | moving_average w=5 | ar1 alpha=0.5 | exp_ma decay=0.5 ...
dependence = {_SCENARIO_DEFAULTS["dependence"]}
# uniform_random | first_indices | heavy_block | light_block
shift_placement = {_SCENARIO_DEFAULTS["shift_placement"]}
seed = {_SCENARIO_DEFAULTS["seed"]}

# Methods scored in estimates and sweeps.
[methods]
# comma list from: robust, nn, nn_trunc, fixed_threshold, extrema
methods = robust, nn
# critical-value rule for the robust method: independent | dependent
robust_rule = independent
# slope of the critical value (c or xi depending on the rule)
robust_c = {DEFAULT_C}
# fixed t for nn_trunc / fixed_threshold (required if those methods appear)
# truncated_t = 0.0
# fixed_t = 0.0

[sweep]
beta_grid = 0.55:0.95:0.1
r_grid = 0.1:0.9:0.2
trials = 400

[curves]
# thresholds as proportions of the shift amount (success_vs_threshold)
t_grid = 0.0:1.2:0.1
# critical-value slopes (success_vs_c)
c_grid = 0.1:1.2:0.1
trials = 200

[threshold_dist]
trials = 400
c = 0.55
bins = 20

[apriori]
# absolute thresholds for the predicted-success curve
t_grid = 0.0:8.0:0.25
# normal_approx | monte_carlo
method = normal_approx
trials = 2000

[sample_size]
# semicolon-joined m,n pairs
pairs = 1,1; 2,2; 1,3; 3,1
trials = 200
"""


def default_config() -> str:
    """The full annotated template with every default value."""
    return _DEFAULT_CONFIG_TEMPLATE


def load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return parser


def _defaults_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_file(io.StringIO(_DEFAULT_CONFIG_TEMPLATE))
    return parser


def _section(parser: configparser.ConfigParser | None, name: str) -> dict[str, str]:
    defaults = _defaults_parser()
    merged = dict(defaults[name]) if defaults.has_section(name) else {}
    if parser is not None and parser.has_section(name):
        for key, value in parser[name].items():
            merged[key] = value
    return merged


def get_setting(parser: configparser.ConfigParser | None, section: str, key: str) -> str:
    """A section value with the built-in default as fallback."""
    values = _section(parser, section)
    if key not in values:
        raise ConfigurationError(f"no setting [{section}] {key}")
    return values[key]


def scenario_from_config(parser: configparser.ConfigParser | None, **overrides) -> Scenario:
    """Build a Scenario from the [scenario] section plus keyword overrides.

    Overrides use the section's string syntax for marginal and dependence, or
    already-built objects.
    """
    values = _section(parser, "scenario")
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    try:
        marginal = values["marginal"]
        if isinstance(marginal, str):
            marginal = parse_blocked_marginal(marginal)
        dependence = values["dependence"]
        if isinstance(dependence, str):
            dependence = parse_dependence(dependence)
        placement = str(values["shift_placement"]).strip().lower()
        if placement not in PLACEMENTS:
            raise ConfigurationError(
                f"shift_placement must be one of {list(PLACEMENTS)}, got {placement!r}"
            )
        return Scenario(
            p=int(values["p"]),
            m=int(values["m"]),
            n=int(values["n"]),
            beta=float(values["beta"]),
            r=float(values["r"]),
            marginal=marginal,
            dependence=dependence,
            shift_placement=placement,
            seed=int(values["seed"]),
        )
    except KeyError as exc:
        raise ConfigurationError(f"missing scenario key {exc}") from None
    except ValueError as exc:
        raise ConfigurationError(f"bad scenario value: {exc}") from None


def scenario_to_config_text(scenario: Scenario) -> str:
    """Serialize a Scenario as a [scenario] section; round-trips through
    scenario_from_config."""
    lines = [
        "[scenario]",
        f"p = {scenario.p}",
        f"m = {scenario.m}",
        f"n = {scenario.n}",
        f"beta = {scenario.beta!r}",
        f"r = {scenario.r!r}",
        f"marginal = {format_blocked_marginal(scenario.marginal)}",
        f"dependence = {format_dependence(scenario.dependence)}",
        f"shift_placement = {scenario.shift_placement}",
        f"seed = {scenario.seed}",
    ]
    return "\n".join(lines) + "\n"


_METHOD_NAMES = ("robust", "nn", "nn_trunc", "fixed_threshold", "extrema")


def methods_from_config(
    parser: configparser.ConfigParser | None,
    *,
    rule: str | None = None,
    c: float | None = None,
) -> list[MethodSpec]:
    """Build the method list from the [methods] section.

    ``rule`` and ``c`` override the robust method's configuration (CLI flags).
    """
    values = _section(parser, "methods")
    names = [name.strip().lower() for name in values.get("methods", "robust, nn").split(",")]
    names = [name for name in names if name]
    if not names:
        raise ConfigurationError("methods list is empty")
    robust_rule = rule if rule is not None else values.get("robust_rule", "independent")
    robust_c = float(c) if c is not None else float(values.get("robust_c", DEFAULT_C))
    methods: list[MethodSpec] = []
    for name in names:
        if name == "robust":
            methods.append(RobustMethod(rule=robust_rule, xi_or_c=robust_c))
        elif name == "nn":
            methods.append(StandardNNMethod())
        elif name == "nn_trunc":
            if "truncated_t" not in values:
                raise ConfigurationError("nn_trunc requires truncated_t in [methods]")
            methods.append(TruncatedNNMethod(t=float(values["truncated_t"])))
        elif name == "fixed_threshold":
            if "fixed_t" not in values:
                raise ConfigurationError("fixed_threshold requires fixed_t in [methods]")
            methods.append(FixedThresholdMethod(t=float(values["fixed_t"])))
        elif name == "extrema":
            methods.append(ExtremaMethod())
        else:
            raise ConfigurationError(
                f"unknown method {name!r}; expected one of {list(_METHOD_NAMES)}"
            )
    return methods


def parse_mn_pairs(text: str) -> list[tuple[int, int]]:
    """Parse ``m,n; m,n; ...`` sample-size pairs."""
    pairs: list[tuple[int, int]] = []
    for segment in text.split(";"):
        segment = segment.strip()
        if not segment:
            continue
        parts = segment.split(",")
        if len(parts) != 2:
            raise ConfigurationError(f"sample-size pair must be m,n, got {segment!r}")
        try:
            m, n = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigurationError(f"non-integer sample size in {segment!r}") from None
        if m < 1 or n < 1:
            raise ConfigurationError(f"sample sizes must be >= 1 in {segment!r}")
        pairs.append((m, n))
    if not pairs:
        raise ConfigurationError("no sample-size pairs given")
    return pairs
