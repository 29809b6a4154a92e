"""Thresholded zero-one nearest-neighbor classification and its competitors.

Given training rows X_1..X_m and Y_1..Y_n and a test vector Z in R^p, the
robust classifier replaces every component value v by the indicator 1(v > t)
and runs nearest-neighbor matching on the resulting 0-1 vectors.  With
I_i = 1(X_i > t), J_j = 1(Y_j > t), K = 1(Z > t) componentwise, and i_X, i_Y
the indices minimizing the indicator Hamming distances to K (lowest index on
ties), the decision statistic is

    T(t) = sum_k (I_{i_X}^(k) - J_{i_Y}^(k)) * (1 - 2 K^(k)),

which equals the signed difference of the two minimal indicator distances,
so "Z is closer to the X side" is exactly T(t) <= 0.  Its scale companion is

    S(t)^2 = sum_k (I_{i_X}^(k) + J_{i_Y}^(k)).

Both are piecewise constant in t, changing only where t crosses a data
value, so scanning the midpoints between consecutive distinct pooled values
visits every attainable configuration.  The working threshold is

    theta = first scanned t >= t0 with S(t) > 0 and |T(t)| / S(t) > z_p,

defaulting to t0 when no point fires.  The critical value z_p is
c * sqrt(log p) for data with independent components and xi * log p for
dependent data (natural logarithm).  Z is assigned to the X population
exactly when T(theta) <= 0.

The scan is evaluated for all breakpoints at once with sorted-array
searches: the indicator distance between a row v and z at level t counts
components with min(v,z) <= t < max(v,z), so each row's whole distance
profile is a difference of two searchsorted calls.

Competitors: plain nearest neighbor on squared Euclidean distance,
nearest neighbor on zeroed-below-threshold values v * 1(v > t), and a
baseline that compares the overall training maxima to the test maximum.
Ties always resolve to the X population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Literal, Union

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = [
    "Label",
    "IndicatorVector",
    "ThresholdStatistics",
    "ThresholdTrace",
    "ThresholdDecision",
    "indicator_transform",
    "compute_T_S",
    "zp_value",
    "threshold_scan",
    "select_threshold",
    "classify_robust",
    "classify_nn_standard",
    "classify_nn_truncated",
    "classify_extrema",
    "truncate_values",
    "RobustMethod",
    "StandardNNMethod",
    "TruncatedNNMethod",
    "FixedThresholdMethod",
    "ExtremaMethod",
    "MethodSpec",
    "MethodOutcome",
    "evaluate_method",
]

Label = Literal["X", "Y"]

INDEPENDENT_RULE = "independent_sqrt_logp"
DEPENDENT_RULE = "dependent_logp"
_RULE_ALIASES = {
    "independent": INDEPENDENT_RULE,
    INDEPENDENT_RULE: INDEPENDENT_RULE,
    "dependent": DEPENDENT_RULE,
    DEPENDENT_RULE: DEPENDENT_RULE,
}

DEFAULT_C = 0.5
# The dependent rule's slope, chosen so xi * log p matches the independent
# default 0.5 * sqrt(log p) near p = 2e4; any fixed slope satisfies the
# dependent-rate requirement, this one keeps the two rules comparable.
DEFAULT_XI = 0.16


def _as_training(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"{name} must be a (rows, p) array, got shape {a.shape}")
    return a


def _as_test(z, p: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ShapeError(f"test vector must be 1-dimensional, got shape {z.shape}")
    if z.size != p:
        raise ShapeError(f"test vector has {z.size} components, training has {p}")
    return z


def _check_inputs(train_x, train_y, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = _as_training(train_x, "train_x")
    Y = _as_training(train_y, "train_y")
    if X.shape[1] != Y.shape[1]:
        raise ShapeError(
            f"train_x has {X.shape[1]} components but train_y has {Y.shape[1]}"
        )
    return X, Y, _as_test(z, X.shape[1])


@dataclass(frozen=True)
class IndicatorVector:
    """0-1 exceedance pattern of a vector at a threshold."""

    bits: np.ndarray
    threshold_used: float


def indicator_transform(v, t: float) -> IndicatorVector:
    """Componentwise strict exceedance indicators 1(v > t)."""
    v = np.asarray(v, dtype=float)
    return IndicatorVector(bits=(v > t).astype(np.uint8), threshold_used=float(t))


@dataclass(frozen=True)
class ThresholdStatistics:
    """T and S^2 at one threshold, with the selected neighbor rows (0-based)."""

    t: float
    T: int
    S2: int
    i_x: int
    i_y: int


def compute_T_S(train_x, train_y, z, t: float) -> ThresholdStatistics:
    """Evaluate the decision statistic T(t) and scale S(t)^2 at one threshold."""
    X, Y, z = _check_inputs(train_x, train_y, z)
    I = X > t
    J = Y > t
    K = z > t
    i_x = int(np.argmin((I ^ K).sum(axis=1)))
    i_y = int(np.argmin((J ^ K).sum(axis=1)))
    ix_bits = I[i_x].astype(np.int64)
    iy_bits = J[i_y].astype(np.int64)
    T = int(((ix_bits - iy_bits) * (1 - 2 * K.astype(np.int64))).sum())
    S2 = int(ix_bits.sum() + iy_bits.sum())
    return ThresholdStatistics(t=float(t), T=T, S2=S2, i_x=i_x, i_y=i_y)


def zp_value(rule: str, p: int, xi_or_c: float) -> float:
    """Critical value for the threshold search: c*sqrt(log p) or xi*log p."""
    if rule not in _RULE_ALIASES:
        raise ParameterError(
            f"rule must be one of {sorted(set(_RULE_ALIASES))}, got {rule!r}"
        )
    p = int(p)
    if p < 2:
        raise ParameterError(f"p must be at least 2, got {p}")
    xi_or_c = float(xi_or_c)
    if xi_or_c < 0:
        raise ParameterError(f"xi_or_c must be nonnegative, got {xi_or_c!r}")
    logp = math.log(p)
    if _RULE_ALIASES[rule] == DEPENDENT_RULE:
        return xi_or_c * logp
    return xi_or_c * math.sqrt(logp)


def _distance_profile(row: np.ndarray, z: np.ndarray, ts: np.ndarray) -> np.ndarray:
    # Indicator disagreement count: components with min(row,z) <= t < max(row,z).
    lo = np.sort(np.minimum(row, z))
    hi = np.sort(np.maximum(row, z))
    return np.searchsorted(lo, ts, side="right") - np.searchsorted(hi, ts, side="right")


def _count_profile(row: np.ndarray, ts: np.ndarray) -> np.ndarray:
    # Number of components strictly above each t.
    s = np.sort(row)
    return row.size - np.searchsorted(s, ts, side="right")


def threshold_scan(
    train_x, train_y, z, ts
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized T, S^2, and neighbor indices over an array of thresholds.

    Returns ``(T, S2, i_x, i_y)`` as int64 arrays aligned with ``ts``.
    Agrees with ``compute_T_S`` evaluated pointwise (ties to lowest index).
    """
    X, Y, z = _check_inputs(train_x, train_y, z)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    dx = np.stack([_distance_profile(row, z, ts) for row in X])
    dy = np.stack([_distance_profile(row, z, ts) for row in Y])
    cx = np.stack([_count_profile(row, ts) for row in X])
    cy = np.stack([_count_profile(row, ts) for row in Y])
    i_x = dx.argmin(axis=0)
    i_y = dy.argmin(axis=0)
    cols = np.arange(ts.size)
    T = dx[i_x, cols] - dy[i_y, cols]
    S2 = cx[i_x, cols] + cy[i_y, cols]
    return T, S2, i_x, i_y


@dataclass(frozen=True)
class ThresholdTrace:
    """Scan record over the breakpoint grid, indexable as ThresholdStatistics."""

    ts: np.ndarray
    T: np.ndarray
    S2: np.ndarray
    i_x: np.ndarray
    i_y: np.ndarray

    def __len__(self) -> int:
        return self.ts.size

    def __getitem__(self, index: int) -> ThresholdStatistics:
        index = int(range(len(self))[index])
        return ThresholdStatistics(
            t=float(self.ts[index]),
            T=int(self.T[index]),
            S2=int(self.S2[index]),
            i_x=int(self.i_x[index]),
            i_y=int(self.i_y[index]),
        )


@dataclass(frozen=True)
class ThresholdDecision:
    """Outcome of the threshold search."""

    theta: float
    defaulted: bool
    z_p: float
    rule: str
    xi_or_c: float
    t0: float
    theta_index: int
    trace: ThresholdTrace = field(repr=False)


def _scan_grid(X: np.ndarray, Y: np.ndarray, z: np.ndarray, t0: float) -> np.ndarray:
    """t0 followed by midpoints between consecutive distinct pooled values >= t0."""
    pooled = np.unique(np.concatenate([X.ravel(), Y.ravel(), z]))
    upper = pooled[pooled >= t0]
    if upper.size < 2:
        return np.array([t0])
    return np.concatenate(([t0], 0.5 * (upper[:-1] + upper[1:])))


def _default_t0(X: np.ndarray, Y: np.ndarray) -> float:
    return float(np.median(np.concatenate([X.ravel(), Y.ravel()])))


def _first_firing(T: np.ndarray, S2: np.ndarray, z_p: float) -> int | None:
    fires = (S2 > 0) & (np.abs(T) > z_p * np.sqrt(S2))
    if not fires.any():
        return None
    return int(fires.argmax())


def select_threshold(
    train_x,
    train_y,
    z,
    rule: str = INDEPENDENT_RULE,
    xi_or_c: float = DEFAULT_C,
    t0: float | None = None,
) -> ThresholdDecision:
    """Scan thresholds upward from t0 and return the first that fires.

    The grid is t0 followed by the midpoints between consecutive distinct
    pooled component values (training rows and test vector) at or above t0;
    T and S^2 are constant between consecutive data values, so this visits
    every attainable configuration.  A point fires when S > 0 and
    |T|/S > z_p.  If none fires the decision is defaulted and theta = t0.
    """
    X, Y, z = _check_inputs(train_x, train_y, z)
    if t0 is None:
        t0 = _default_t0(X, Y)
    t0 = float(t0)
    if not math.isfinite(t0):
        raise ParameterError(f"t0 must be finite, got {t0!r}")
    z_p = zp_value(rule, z.size, xi_or_c)
    ts = _scan_grid(X, Y, z, t0)
    T, S2, i_x, i_y = threshold_scan(X, Y, z, ts)
    hit = _first_firing(T, S2, z_p)
    if hit is None:
        theta, defaulted, index = t0, True, 0
    else:
        theta, defaulted, index = float(ts[hit]), False, hit
    return ThresholdDecision(
        theta=theta,
        defaulted=defaulted,
        z_p=z_p,
        rule=_RULE_ALIASES[rule],
        xi_or_c=float(xi_or_c),
        t0=t0,
        theta_index=index,
        trace=ThresholdTrace(ts=ts, T=T, S2=S2, i_x=i_x, i_y=i_y),
    )


def classify_robust(
    train_x,
    train_y,
    z,
    rule: str = INDEPENDENT_RULE,
    xi_or_c: float = DEFAULT_C,
    t0: float | None = None,
) -> tuple[Label, ThresholdDecision]:
    """Select a threshold and assign z to X exactly when T(theta) <= 0."""
    decision = select_threshold(train_x, train_y, z, rule=rule, xi_or_c=xi_or_c, t0=t0)
    label: Label = "X" if decision.trace.T[decision.theta_index] <= 0 else "Y"
    return label, decision


def classify_nn_standard(train_x, train_y, z) -> Label:
    """Nearest neighbor on squared Euclidean distance; ties go to X."""
    X, Y, z = _check_inputs(train_x, train_y, z)
    dx = ((X - z) ** 2).sum(axis=1).min()
    dy = ((Y - z) ** 2).sum(axis=1).min()
    return "X" if dx <= dy else "Y"


def truncate_values(v: np.ndarray, t: float) -> np.ndarray:
    """Zero every component at or below t, keep the rest: v * 1(v > t)."""
    v = np.asarray(v, dtype=float)
    return np.where(v > t, v, 0.0)


def classify_nn_truncated(
    train_x, train_y, z, t: float, mode: str = "zeroed_values"
) -> Label:
    """Nearest neighbor after zeroing components at or below t.

    The two documented modes ("zeroed_values", "truncated_standard") describe
    the same rule, since zeroing is applied identically to training and test
    vectors; both names dispatch to this single implementation.
    """
    if mode not in ("zeroed_values", "truncated_standard"):
        raise ParameterError(f"unknown truncation mode {mode!r}")
    X, Y, z = _check_inputs(train_x, train_y, z)
    return classify_nn_standard(truncate_values(X, t), truncate_values(Y, t), truncate_values(z, t))


def classify_extrema(train_x, train_y, z) -> Label:
    """Assign z to the population whose training maximum is nearest max(z)."""
    X, Y, z = _check_inputs(train_x, train_y, z)
    mz = z.max()
    return "X" if abs(X.max() - mz) <= abs(Y.max() - mz) else "Y"


@dataclass(frozen=True)
class RobustMethod:
    """Thresholded indicator classifier with data-driven threshold selection."""

    rule: str = INDEPENDENT_RULE
    xi_or_c: float = DEFAULT_C
    t0: float | None = None
    name: str | None = None

    default_name: ClassVar[str] = "robust"


@dataclass(frozen=True)
class StandardNNMethod:
    name: str | None = None

    default_name: ClassVar[str] = "nn"


@dataclass(frozen=True)
class TruncatedNNMethod:
    t: float
    mode: str = "zeroed_values"
    name: str | None = None

    default_name: ClassVar[str] = "nn_trunc"


@dataclass(frozen=True)
class FixedThresholdMethod:
    """Indicator classifier at a fixed threshold, bypassing selection."""

    t: float
    name: str | None = None

    default_name: ClassVar[str] = "fixed_threshold"


@dataclass(frozen=True)
class ExtremaMethod:
    name: str | None = None

    default_name: ClassVar[str] = "extrema"


MethodSpec = Union[
    RobustMethod, StandardNNMethod, TruncatedNNMethod, FixedThresholdMethod, ExtremaMethod
]


def method_id(method: MethodSpec) -> str:
    return method.name if method.name is not None else method.default_name


@dataclass(frozen=True)
class MethodOutcome:
    """A method's verdict on one trial; theta fields only for RobustMethod."""

    label: Label
    theta: float | None = None
    defaulted: bool | None = None


def evaluate_method(train_x, train_y, z, method: MethodSpec) -> MethodOutcome:
    """Run one configured classifier on one training set and test vector."""
    if isinstance(method, RobustMethod):
        label, decision = classify_robust(
            train_x, train_y, z, rule=method.rule, xi_or_c=method.xi_or_c, t0=method.t0
        )
        return MethodOutcome(label=label, theta=decision.theta, defaulted=decision.defaulted)
    if isinstance(method, StandardNNMethod):
        return MethodOutcome(label=classify_nn_standard(train_x, train_y, z))
    if isinstance(method, TruncatedNNMethod):
        return MethodOutcome(
            label=classify_nn_truncated(train_x, train_y, z, method.t, mode=method.mode)
        )
    if isinstance(method, FixedThresholdMethod):
        stats = compute_T_S(train_x, train_y, z, method.t)
        return MethodOutcome(label="X" if stats.T <= 0 else "Y")
    if isinstance(method, ExtremaMethod):
        return MethodOutcome(label=classify_extrema(train_x, train_y, z))
    raise ParameterError(f"unknown method spec {method!r}")
