"""
Fixed points and fold bifurcations of one- and two-neuron tanh maps.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from esnena.exceptions import EsnUsageError

logger = logging.getLogger(__name__)

XTOL = 1e-12
TANGENCY_TOL = 1e-12
NEUTRAL_TOL = 1e-6
INITIAL_SAMPLES = 2048
MAX_SAMPLES = 65536

NOT_APPLICABLE = "not applicable"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Map1DParams:
    m: float
    w: float


def _critical_points(m: float, w: float) -> List[float]:
    if m <= 1.0:
        return []
    s = np.sqrt((m - 1.0) / m)
    return sorted([(-np.arctanh(s) - w) / m, (np.arctanh(s) - w) / m])


def _stability_1d(derivative: float) -> str:
    if abs(derivative - 1.0) <= NEUTRAL_TOL:
        return "fold"
    if abs(derivative + 1.0) <= NEUTRAL_TOL:
        return "flip"
    return "stable" if abs(derivative) < 1.0 else "unstable"


def fixed_points_1d(params: Map1DParams) -> List[Tuple[float, str]]:
    """
    All fixed points of x -> tanh(m x + w), sorted.

    For m > 1 the interval [-1, 1] is split at the critical points of Q(x) = tanh(m x + w) - x, which makes Q
    monotone on every piece; each sign change is bracketed and solved with Brent's method. A critical point where
    Q vanishes is a tangency and is reported once with the fold tag.

    :param params: Slope m and bias w.
    :type params: Map1DParams
    :return: Pairs (x*, stability) with stability stable, unstable, fold or flip.
    :rtype: List[Tuple[float, str]]
    """
    m, w = params.m, params.w

    def q(x):
        return np.tanh(m * x + w) - x

    breaks = [-1.0] + [c for c in _critical_points(m, w) if -1.0 < c < 1.0] + [1.0]
    roots = []
    zero_at = set()
    for i, c in enumerate(breaks[1:-1], start=1):
        if abs(q(c)) <= TANGENCY_TOL:
            roots.append(c)
            zero_at.add(i)
    for i in range(len(breaks) - 1):
        if i in zero_at or i + 1 in zero_at:
            continue
        left, right = breaks[i], breaks[i + 1]
        if q(left) * q(right) < 0:
            roots.append(brentq(q, left, right, xtol=XTOL))
    return [(float(x), _stability_1d(m * (1.0 - np.tanh(m * x + w) ** 2))) for x in sorted(roots)]


def fold_curve(m: float) -> Tuple[float, float]:
    """
    Fold curve w_pm(m) = pm [m s - atanh(s)] with s = sqrt((m - 1) / m).
    """
    if m < 1.0:
        raise EsnUsageError("fold_curve", f"m must be at least 1, got {m}.")
    s = np.sqrt((m - 1.0) / m)
    w_plus = float(m * s - np.arctanh(s))
    return w_plus, -w_plus


def nullcline(alpha: float, beta: float, eta) -> np.ndarray:
    """
    N_{alpha,beta}(eta) = (-alpha eta + atanh(eta)) / beta.
    """
    eta = np.asarray(eta, dtype=float)
    return (-alpha * eta + np.arctanh(eta)) / beta


@dataclass(frozen=True, eq=False)
class FixedPoint2D:
    location: np.ndarray
    eigenvalues: np.ndarray

    @property
    def unstable_count(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) > 1.0))

    @property
    def stability(self) -> str:
        return {0: "stable", 1: "saddle(1)", 2: "repeller"}[self.unstable_count]


@dataclass(frozen=True, eq=False)
class NullclineResult:
    fixed_points: List[FixedPoint2D]
    samples: int

    @property
    def count(self) -> int:
        return len(self.fixed_points)


def _classify_2d(a, b, c, d, x, y) -> FixedPoint2D:
    jacobian = np.diag([1.0 - x ** 2, 1.0 - y ** 2]) @ np.array([[a, b], [c, d]])
    return FixedPoint2D(location=np.array([x, y]), eigenvalues=np.linalg.eigvals(jacobian))


def _valid_interval(g, left: float, right: float, level: float,
                    sign_b: float) -> Optional[Tuple[float, float, float, float]]:
    # g is monotone on [left, right]; returns the sub-interval where |g| < level and the limit sign of
    # atanh(y) at each end, 0 for ends where y stays inside (-1, 1).
    g_left, g_right = g(left), g(right)
    increasing = g_right >= g_left
    low, high = (-level, level) if increasing else (level, -level)
    if (increasing and (g_right <= -level or g_left >= level)) or \
            (not increasing and (g_left <= -level or g_right >= level)):
        return None
    if abs(g_left) < level:
        start, start_sign = left, 0.0
    else:
        start, start_sign = brentq(lambda p: g(p) - low, left, right, xtol=XTOL), np.sign(low) * sign_b
    if abs(g_right) < level:
        end, end_sign = right, 0.0
    else:
        end, end_sign = brentq(lambda p: g(p) - high, left, right, xtol=XTOL), np.sign(high) * sign_b
    if end <= start:
        return None
    return start, end, start_sign, end_sign


def _saturated_root(h, edge: float, inner: float, limit_sign: float) -> Optional[float]:
    near = inner
    for _ in range(64):
        near = (edge + near) / 2
        value = h(near)
        if np.isfinite(value) and np.sign(value) == limit_sign:
            return brentq(h, near, inner, xtol=XTOL)
    return None


def _scan(a, b, c, d, samples: int) -> List[Tuple[float, float]]:
    bound = abs(a) + abs(b) + 1.0

    def g(p):
        return p - a * np.tanh(p)

    def y_of(p):
        return g(p) / b

    def h(p):
        y = y_of(p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.arctanh(y) - c * np.tanh(p) - d * y

    cuts = [-bound, bound]
    if a > 1.0:
        fold = float(np.arccosh(np.sqrt(a)))
        cuts = [-bound, -fold, fold, bound]
    nodes = (1.0 - np.cos(np.pi * (np.arange(samples) + 0.5) / samples)) / 2
    roots = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        interval = _valid_interval(g, left, right, abs(b), np.sign(b))
        if interval is None:
            continue
        start, end, start_sign, end_sign = interval
        p = start + (end - start) * nodes
        if start_sign == 0.0:
            p = np.concatenate([[start], p])
        if end_sign == 0.0:
            p = np.concatenate([p, [end]])
        values = h(p)
        finite = np.isfinite(values)
        p, values = p[finite], values[finite]
        if len(p) == 0:
            continue
        roots += [float(t) for t, v in zip(p, values) if v == 0.0]
        for i in np.flatnonzero(values[:-1] * values[1:] < 0):
            roots.append(brentq(h, p[i], p[i + 1], xtol=XTOL))
        if start_sign != 0.0 and values[0] != 0.0 and np.sign(values[0]) != start_sign:
            root = _saturated_root(h, start, p[0], start_sign)
            if root is not None:
                roots.append(root)
        if end_sign != 0.0 and values[-1] != 0.0 and np.sign(values[-1]) != end_sign:
            root = _saturated_root(h, end, p[-1], end_sign)
            if root is not None:
                roots.append(root)
    points = []
    for t in sorted(roots):
        point = (float(np.tanh(t)), float(y_of(t)))
        if not any(max(abs(point[0] - q[0]), abs(point[1] - q[1])) < 1e-9 for q in points):
            points.append(point)
    return points


def nullclines_2d(a: float, b: float, c: float, d: float) -> NullclineResult:
    """
    Fixed points of x -> tanh(a x + b y), y -> tanh(c x + d y) as intersections of the nullclines.

    The curve y = N_{a,b}(x) is parametrized by the pre-activation p = a x + b y, which stays finite where x
    saturates, and split at the folds of p - a tanh(p) into monotone pieces. Each piece is sampled on Chebyshev
    nodes of the interval where |y| < 1. Sign changes of atanh(y) - c x - d y along it are bracketed and polished
    with Brent's method, and ends where y saturates are searched towards the limit sign. The sampling doubles
    from 2048 points until two consecutive counts agree. With b = 0 or c = 0 the map is triangular and the fixed
    points are composed from one-dimensional solves.
    """
    if b == 0 or c == 0:
        logger.info("Degenerate coupling b=%s, c=%s: composing one-dimensional fixed points", b, c)
        points = []
        if b == 0:
            for x, _ in fixed_points_1d(Map1DParams(a, 0.0)):
                points += [(x, y) for y, _ in fixed_points_1d(Map1DParams(d, c * x))]
        else:
            for y, _ in fixed_points_1d(Map1DParams(d, 0.0)):
                points += [(x, y) for x, _ in fixed_points_1d(Map1DParams(a, b * y))]
        return NullclineResult([_classify_2d(a, b, c, d, x, y) for x, y in sorted(points)], samples=0)

    samples = INITIAL_SAMPLES
    points = _scan(a, b, c, d, samples)
    while samples < MAX_SAMPLES:
        refined = _scan(a, b, c, d, 2 * samples)
        samples *= 2
        if len(refined) == len(points):
            points = refined
            break
        points = refined
    return NullclineResult([_classify_2d(a, b, c, d, x, y) for x, y in sorted(points)], samples=samples)


def nullcline_polylines(a: float, b: float, c: float, d: float,
                        samples: int = 1000) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both nullclines clipped to the open square, as (points, 2) arrays of (x, y).
    """
    eta = np.linspace(-1.0, 1.0, samples + 2)[1:-1]
    first = np.empty((0, 2))
    second = np.empty((0, 2))
    if b != 0:
        y = nullcline(a, b, eta)
        first = np.column_stack([eta, y])[np.abs(y) < 1.0]
    if c != 0:
        x = nullcline(d, c, eta)
        second = np.column_stack([x, eta])[np.abs(x) < 1.0]
    return first, second


def _hump(alpha: float, beta: float) -> float:
    if beta == 0:
        return np.inf
    return float(abs(nullcline(alpha, beta, np.sqrt((alpha - 1.0) / alpha))))


def count_conditions(a: float, b: float, c: float, d: float) -> Union[int, str]:
    """
    Sufficient conditions on the fixed-point count of the two-neuron map when both nullclines fold (a, d > 1).

    With h_ab = |N_{a,b}(s_a)|, h_dc = |N_{d,c}(s_d)| the hump heights and s_a = sqrt((a - 1) / a) the critical
    points, the checks run in order:

    * bc >= 0 and (1 - a)(1 - d) < bc: 3
    * bc >= 0 and h_ab < s_d or h_dc < s_a: 5
    * bc < 0 and h_ab < s_d and h_dc < s_a: 1
    * bc < 0 and one hump below the other critical point while the other hump exceeds 1: 5
    * h_ab > 1 and h_dc > 1: 9

    :return: The implied count, "indeterminate" when no condition fires or "not applicable" unless a, d > 1.
    :rtype: Union[int, str]
    """
    if not (a > 1.0 and d > 1.0):
        return NOT_APPLICABLE
    s_a = np.sqrt((a - 1.0) / a)
    s_d = np.sqrt((d - 1.0) / d)
    h_ab = _hump(a, b)
    h_dc = _hump(d, c)
    if b * c >= 0:
        if (1.0 - a) * (1.0 - d) < b * c:
            return 3
        if h_ab < s_d or h_dc < s_a:
            return 5
    else:
        if h_ab < s_d and h_dc < s_a:
            return 1
        if (h_ab < s_d and h_dc > 1.0) or (h_dc < s_a and h_ab > 1.0):
            return 5
    if h_ab > 1.0 and h_dc > 1.0:
        return 9
    return INDETERMINATE
