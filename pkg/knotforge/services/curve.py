"""
Rational space curves and their planar projections.

Double points of a projection (f, g) are found by eliminating s from the
divided differences P(s, t) = [a(s)b(t) - a(t)b(s)] / (s - t) of f = a/b and
the matching Q(s, t) of g. The Sylvester resultant in s is evaluated on a
dense grid of t = tan(theta) with each polynomial row normalised, sign
changes are polished with brentq, partners s are back-substituted and every
pair is finished with a 2-D Newton step on (f(s) - f(t), g(s) - g(t)).
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq, minimize_scalar

from knotforge.errors import DegenerateError, InputError, NotCompactError, TriplePointError
from knotforge.services.ratfunc import (
    DEFAULT_ROOT_TOL,
    DegreeSequence,
    RationalFunction,
    degree_sequence,
    evaluate,
    is_positive,
    real_roots,
    sturm_count,
)

logger = logging.getLogger("knotforge.curve")

DEFAULT_SOLVER_TOL = 1e-9
TRANSVERSALITY_SINE = 1e-6
RESULTANT_SAMPLES = 16384
THETA_MARGIN = 1e-4
EXTENT_SAMPLES = 4097
# local minima of |Res| below DIP_CANDIDATE * peak are polished; kept if they reach DIP_ACCEPT * peak
DIP_CANDIDATE = 1e-3
DIP_ACCEPT = 1e-8
NEWTON_BOUND = 1e8
MIN_NEWTON_STEP = 1e-6
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class Parameterization:
    x: RationalFunction
    y: RationalFunction
    z: Optional[RationalFunction] = None
    name: str = "curve"

    def coordinate(self, axis: str) -> RationalFunction:
        if axis not in AXES:
            raise InputError(f"unknown axis '{axis}'")
        value = getattr(self, axis)
        if value is None:
            raise InputError(f"curve '{self.name}' has no {axis} coordinate")
        return value

    def coordinates(self) -> Dict[str, RationalFunction]:
        return {axis: getattr(self, axis) for axis in AXES if getattr(self, axis) is not None}

    def with_coordinate(self, axis: str, rf: RationalFunction) -> "Parameterization":
        if axis not in AXES:
            raise InputError(f"unknown axis '{axis}'")
        return replace(self, **{axis: rf})

    def projection(self, axes: Tuple[str, str]) -> Tuple[RationalFunction, RationalFunction]:
        return self.coordinate(axes[0]), self.coordinate(axes[1])

    def degree_sequence(self) -> DegreeSequence:
        return degree_sequence(self.x, self.y, self.coordinate("z"))

    def violations(self, root_tol: float = DEFAULT_ROOT_TOL) -> List[str]:
        """Human-readable list of broken compactness requirements."""
        problems = []
        for axis, rf in self.coordinates().items():
            p, q = rf.degree
            if p > q:
                problems.append(f"{axis} is unbounded (degree {p}/{q})")
            if not is_positive(rf.den):
                if rf.den.degree > 0 and sturm_count(rf.den) > 0:
                    roots = ", ".join(f"{r:.6g}" for r in real_roots(rf.den, root_tol))
                    problems.append(f"{axis} denominator has real roots at {roots}")
                else:
                    problems.append(f"{axis} denominator is not positive")
        return problems


@dataclass(frozen=True)
class DoublePoint:
    s: float
    t: float
    position: Tuple[float, float]
    index: int = 0
    tangent_s: Tuple[float, float] = (0.0, 0.0)
    tangent_t: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.s < self.t:
            raise InputError(f"double point parameters must satisfy s < t, got ({self.s}, {self.t})")


@dataclass(frozen=True)
class ClosurePoint:
    position: Tuple[float, ...]


def _difference_matrix(rf: RationalFunction) -> np.ndarray:
    """Coefficient matrix M with P(s, t) = sum M[i, j] s^i t^j."""
    size = max(rf.num.degree, rf.den.degree)
    matrix = np.zeros((max(size, 1), max(size, 1)))
    a, b = rf.num.coeffs, rf.den.coeffs
    for k, ak in enumerate(a):
        for l, bl in enumerate(b):
            weight = ak * bl
            if weight == 0.0 or k == l:
                continue
            if k > l:
                for i in range(k - l):
                    matrix[l + i, k - 1 - i] += weight
            else:
                for i in range(l - k):
                    matrix[k + i, l - 1 - i] -= weight
    scale = np.max(np.abs(matrix)) if matrix.size else 0.0
    if scale == 0.0:
        return np.zeros((0, 0))
    # P is symmetric in (s, t): drop vanishing top degrees from both sides
    while matrix.shape[0] > 1 and np.all(np.abs(matrix[-1]) <= 1e-14 * scale):
        matrix = matrix[:-1, :-1]
    return matrix


def _coefficients_in_s(matrix: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Row k holds the ascending s-coefficients of P(s, t[k])."""
    powers = np.vander(t, matrix.shape[1], increasing=True)
    return powers @ matrix.T


def _normalise_rows(coeffs: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(coeffs), axis=1, keepdims=True)
    scale[scale == 0.0] = 1.0
    return coeffs / scale


def _sylvester_values(mf: np.ndarray, mg: np.ndarray, t: np.ndarray) -> np.ndarray:
    p = _normalise_rows(_coefficients_in_s(mf, t))[:, ::-1]
    q = _normalise_rows(_coefficients_in_s(mg, t))[:, ::-1]
    m, n = p.shape[1] - 1, q.shape[1] - 1
    size = m + n
    if size == 0:
        return np.ones(len(t))
    sylvester = np.zeros((len(t), size, size))
    for row in range(n):
        sylvester[:, row, row:row + m + 1] = p
    for row in range(m):
        sylvester[:, n + row, row:row + n + 1] = q
    return np.linalg.det(sylvester)


def _resultant_roots(mf: np.ndarray, mg: np.ndarray, samples: int) -> List[float]:
    theta = np.linspace(-math.pi / 2 + THETA_MARGIN, math.pi / 2 - THETA_MARGIN, samples)
    values = _sylvester_values(mf, mg, np.tan(theta))

    def at(angle: float) -> float:
        return float(_sylvester_values(mf, mg, np.array([math.tan(angle)]))[0])

    roots = [float(np.tan(theta[k])) for k in np.flatnonzero(values == 0.0)]
    for k in np.flatnonzero(values[:-1] * values[1:] < 0):
        if at(theta[k]) * at(theta[k + 1]) > 0:
            roots.append(float(np.tan(0.5 * (theta[k] + theta[k + 1]))))
            continue
        angle = brentq(at, theta[k], theta[k + 1], xtol=1e-15)
        roots.append(math.tan(angle))
    return sorted(roots + _touching_roots(values, theta, at))


def _touching_roots(values: np.ndarray, theta: np.ndarray, at) -> List[float]:
    """Even-multiplicity roots: near-zero local minima of |Res| with no sign change."""
    magnitude = np.abs(values)
    peak = float(np.max(magnitude)) if len(magnitude) else 0.0
    if peak == 0.0 or len(values) < 3:
        return []
    mid = magnitude[1:-1]
    dips = (
        (mid <= magnitude[:-2]) & (mid <= magnitude[2:]) & (mid > 0.0)
        & (mid <= DIP_CANDIDATE * peak)
        & (values[:-2] * values[1:-1] > 0) & (values[1:-1] * values[2:] > 0)
    )
    roots = []
    for k in np.flatnonzero(dips) + 1:
        found = minimize_scalar(lambda a: abs(at(a)), bounds=(theta[k - 1], theta[k + 1]),
                                method="bounded", options={"xatol": 1e-14})
        if abs(at(found.x)) <= DIP_ACCEPT * peak:
            roots.append(math.tan(found.x))
    return roots


def _partners(mf: np.ndarray, mg: np.ndarray, tau: float) -> List[float]:
    p = _coefficients_in_s(mf, np.array([tau]))[0]
    q = _coefficients_in_s(mg, np.array([tau]))[0]
    p_scale = np.max(np.abs(p))
    if p_scale == 0.0:
        return []
    p = p[: int(np.max(np.flatnonzero(np.abs(p) > 1e-13 * p_scale))) + 1]
    if len(p) < 2:
        return []
    found = []
    for candidate in npoly.polyroots(p):
        if abs(candidate.imag) > 1e-6 * (1.0 + abs(candidate.real)):
            continue
        s = float(candidate.real)
        magnitude = np.sum(np.abs(q) * np.abs(s) ** np.arange(len(q)))
        if magnitude == 0.0 or abs(npoly.polyval(s, q)) > 1e-5 * magnitude:
            continue
        found.append(s)
    return found


def _residual(f: RationalFunction, g: RationalFunction, s: float, t: float) -> float:
    try:
        value = math.hypot(f(s) - f(t), g(s) - g(t))
    except (OverflowError, ZeroDivisionError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def _newton(f: RationalFunction, g: RationalFunction, s: float, t: float, iterations: int = 50) -> Tuple[float, float]:
    """Damped Newton on (f(s) - f(t), g(s) - g(t)); every accepted step lowers the residual."""
    best = _residual(f, g, s, t)
    for _ in range(iterations):
        if best == 0.0 or not math.isfinite(best):
            break
        try:
            r1, r2 = f(s) - f(t), g(s) - g(t)
            a, b = f.slope(s), -f.slope(t)
            c, d = g.slope(s), -g.slope(t)
        except (OverflowError, ZeroDivisionError):
            break
        det = a * d - b * c
        if det == 0.0 or not math.isfinite(det):
            break
        ds = (r1 * d - b * r2) / det
        dt = (a * r2 - c * r1) / det
        step = 1.0
        while step >= MIN_NEWTON_STEP:
            s_try, t_try = s - step * ds, t - step * dt
            if abs(s_try) < NEWTON_BOUND and abs(t_try) < NEWTON_BOUND:
                trial = _residual(f, g, s_try, t_try)
                if trial < best:
                    break
            step *= 0.5
        else:
            break
        s, t, best = s_try, t_try, trial
        if step * (abs(ds) + abs(dt)) <= 1e-15 * (1.0 + abs(s) + abs(t)):
            break
    return float(s), float(t)


def pair_check(f: RationalFunction, g: RationalFunction, dp: DoublePoint) -> float:
    return float(max(abs(f(dp.s) - f(dp.t)), abs(g(dp.s) - g(dp.t))))


def coordinate_extent(rf: RationalFunction) -> float:
    """max - min of a coordinate over the real line; 1.0 for a constant."""
    theta = np.linspace(-math.pi / 2 + THETA_MARGIN, math.pi / 2 - THETA_MARGIN, EXTENT_SAMPLES)
    with np.errstate(all="ignore"):
        values = np.asarray(rf(np.tan(theta)), dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return 1.0
    spread = float(np.max(values) - np.min(values))
    return spread if spread > 0.0 else 1.0


def _tangent(f: RationalFunction, g: RationalFunction, t: float) -> Tuple[float, float]:
    return float(f.slope(t)), float(g.slope(t))


def _crossing_sine(u: Tuple[float, float], v: Tuple[float, float]) -> float:
    norm = math.hypot(*u) * math.hypot(*v)
    if norm == 0.0:
        return 0.0
    return abs(u[0] * v[1] - u[1] * v[0]) / norm


def double_points(
    f: RationalFunction,
    g: RationalFunction,
    tol: float = DEFAULT_SOLVER_TOL,
    samples: int = RESULTANT_SAMPLES,
) -> List[DoublePoint]:
    """All parameter pairs s < t with f(s) = f(t) and g(s) = g(t), sorted by s."""
    if tol <= 0:
        raise InputError("solver tolerance must be positive")
    mf, mg = _difference_matrix(f), _difference_matrix(g)
    if mf.size == 0 or mg.size == 0:
        raise DegenerateError("a projection coordinate is constant; the projection is not a curve")
    # residuals, transversality and separation are measured with each coordinate scaled to unit extent
    fs, gs = f.scaled(1.0 / coordinate_extent(f)), g.scaled(1.0 / coordinate_extent(g))

    pairs: List[Tuple[float, float]] = []
    for tau in _resultant_roots(mf, mg, samples):
        for s in _partners(mf, mg, tau):
            s_new, t_new = _newton(fs, gs, s, tau)
            lo, hi = min(s_new, t_new), max(s_new, t_new)
            if hi - lo < 10 * tol:
                continue
            residual = max(abs(fs(lo) - fs(hi)), abs(gs(lo) - gs(hi)))
            if residual > tol:
                logger.warning(f"⚠ Dropping spurious resultant root t={tau:.6g} (residual {residual:.2e})")
                continue
            if any(abs(lo - a) + abs(hi - b) <= 1e-7 * (1.0 + abs(lo) + abs(hi)) for a, b in pairs):
                continue
            pairs.append((lo, hi))

    pairs.sort()
    points: List[DoublePoint] = []
    scaled: List[Tuple[float, float]] = []
    for index, (s, t) in enumerate(pairs, start=1):
        tangent_s, tangent_t = _tangent(f, g, s), _tangent(f, g, t)
        sine = _crossing_sine(_tangent(fs, gs, s), _tangent(fs, gs, t))
        if sine < TRANSVERSALITY_SINE:
            raise DegenerateError(f"degenerate double point at (s={s:.9g}, t={t:.9g}): tangent sine {sine:.2e}")
        position = (float(f(s)), float(g(s)))
        points.append(DoublePoint(s, t, position, index, tangent_s, tangent_t))
        scaled.append((float(fs(s)), float(gs(s))))

    separation = 1000 * tol
    for i, first in enumerate(points):
        for k, second in enumerate(points[i + 1:], start=i + 1):
            if max(abs(scaled[i][0] - scaled[k][0]), abs(scaled[i][1] - scaled[k][1])) <= separation:
                raise TriplePointError(f"triple point near {first.position} (double points {first.index} and {second.index})")

    logger.info(f"✓ Found {len(points)} double points")
    return points


def parameter_values(dps: Sequence[DoublePoint]) -> List[float]:
    """Sorted t_1 < ... < t_2n over every double point."""
    return sorted([dp.s for dp in dps] + [dp.t for dp in dps])


def is_regular(f: RationalFunction, g: RationalFunction, root_tol: float = DEFAULT_ROOT_TOL) -> bool:
    """True iff (f', g') never vanishes together on the real line."""
    nf, ng = f.derivative_numerator(), g.derivative_numerator()
    if nf.is_zero and ng.is_zero:
        return False
    if nf.is_zero:
        return sturm_count(ng) == 0
    if ng.is_zero:
        return sturm_count(nf) == 0
    for r in real_roots(nf, root_tol):
        magnitude = sum(abs(c) * abs(r) ** k for k, c in enumerate(ng.coeffs))
        if abs(evaluate(ng, r)) <= max(root_tol, 1e-7 * magnitude):
            return False
    return True


def _limit(rf: RationalFunction) -> float:
    p, q = rf.degree
    if rf.num.is_zero or p < q:
        return 0.0
    if p == q:
        return rf.num.leading / rf.den.leading
    raise NotCompactError(f"coordinate {rf} has no finite limit at infinity")


def closure_point(p: Parameterization) -> ClosurePoint:
    """Common limit of every coordinate as t goes to plus or minus infinity."""
    return ClosurePoint(tuple(_limit(rf) for rf in p.coordinates().values()))


def _passes_through(
    f: RationalFunction,
    g: RationalFunction,
    point: Tuple[float, float],
    tol: float,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> bool:
    level = f.num - f.den * point[0]
    if level.is_zero:
        return True
    for r in real_roots(level, root_tol):
        if abs(g(r) - point[1]) <= tol:
            return True
    return False


def is_compact_embedding(
    p: Parameterization,
    dps: Sequence[DoublePoint],
    tol: float = DEFAULT_SOLVER_TOL,
    separation_tol: Optional[float] = None,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> bool:
    """
    Bounded, positive denominators, and the 3-D curve is embedded at every crossing.
    Separations are compared with each coordinate scaled to unit extent.
    """
    if p.z is None:
        logger.info("Curve has no z coordinate; not an embedding")
        return False
    problems = p.violations(root_tol)
    if problems:
        logger.info(f"Not compact: {'; '.join(problems)}")
        return False
    separation = separation_tol if separation_tol is not None else tol
    ex, ey, ez = (coordinate_extent(rf) for rf in (p.x, p.y, p.z))
    closure = closure_point(p).position
    for dp in dps:
        if math.hypot((dp.position[0] - closure[0]) / ex, (dp.position[1] - closure[1]) / ey) <= separation:
            logger.info(f"Double point {dp.index} coincides with the closure point")
            return False
        if abs(p.z(dp.s) - p.z(dp.t)) / ez <= separation:
            logger.info(f"Curve meets itself at double point {dp.index}")
            return False
    if _passes_through(p.x, p.y, (closure[0], closure[1]), separation * ey, root_tol):
        logger.info("Projection passes through the closure point at a finite parameter")
        return False
    return True
