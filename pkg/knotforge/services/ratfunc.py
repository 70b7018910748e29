"""
Polynomial and rational-function arithmetic for compact rational knots.

Coefficients are stored in ascending power order as floats. Real roots are
estimated from companion-matrix eigenvalues, polished by bracketing, and
certified against an exact Sturm count of the float coefficients.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from knotforge.errors import InputError, NotCompactError, UnboundedError

logger = logging.getLogger("knotforge.ratfunc")

DEFAULT_ROOT_TOL = 1e-9

_T = sympy.Symbol("t")

Number = Union[int, float]


def _trim(coeffs: Sequence[float]) -> Tuple[float, ...]:
    values = [float(c) for c in coeffs]
    while len(values) > 1 and values[-1] == 0.0:
        values.pop()
    return tuple(values) if values else (0.0,)


@dataclass(frozen=True)
class Polynomial:
    """Real univariate polynomial, ascending coefficients."""
    coeffs: Tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def from_roots(cls, roots: Sequence[float]) -> "Polynomial":
        """Monic product of (t - r) over the given roots."""
        return cls(tuple(npoly.polyfromroots(list(roots))))

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls((float(value),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, t):
        return evaluate(self, t)

    def __add__(self, other) -> "Polynomial":
        return Polynomial(tuple(npoly.polyadd(self.coeffs, _coerce(other).coeffs)))

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        return Polynomial(tuple(npoly.polysub(self.coeffs, _coerce(other).coeffs)))

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial(tuple(c * other for c in self.coeffs))
        return Polynomial(tuple(npoly.polymul(self.coeffs, other.coeffs)))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self * -1.0

    def shift_constant(self, delta: float) -> "Polynomial":
        """Same polynomial with `delta` added to the constant term."""
        coeffs = list(self.coeffs)
        coeffs[0] += delta
        return Polynomial(tuple(coeffs))

    def __str__(self) -> str:
        return format_polynomial(self)


def _coerce(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial.constant(value)


def format_polynomial(p: Polynomial, var: str = "t") -> str:
    terms = []
    for power in range(p.degree, -1, -1):
        c = p.coeffs[power]
        if c == 0.0 and not p.is_zero:
            continue
        magnitude = abs(c)
        if power == 0:
            body = f"{magnitude:g}"
        else:
            factor = "" if magnitude == 1.0 else f"{magnitude:g}"
            body = f"{factor}{var}" + (f"^{power}" if power > 1 else "")
        if not terms:
            terms.append(("-" if c < 0 else "") + body)
        else:
            terms.append((" - " if c < 0 else " + ") + body)
    return "".join(terms)


def evaluate(p: Polynomial, t):
    """Horner evaluation; works elementwise on numpy arrays."""
    result = 0.0 * t if isinstance(t, np.ndarray) else 0.0
    for c in reversed(p.coeffs):
        result = result * t + c
    return result


def derivative(p: Polynomial) -> Polynomial:
    if p.degree == 0:
        return Polynomial()
    return Polynomial(tuple(k * p.coeffs[k] for k in range(1, len(p.coeffs))))


@lru_cache(maxsize=4096)
def _sturm_count(coeffs: Tuple[float, ...]) -> int:
    exact = sympy.Poly([sympy.Rational(c) for c in reversed(coeffs)], _T, domain=sympy.QQ)
    return int(exact.count_roots())


def sturm_count(p: Polynomial) -> int:
    """Exact number of distinct real roots of the stored float coefficients."""
    if p.is_zero:
        raise InputError("sturm_count of the zero polynomial")
    if p.degree == 0:
        return 0
    return _sturm_count(p.coeffs)


def _bracket_root(p: Polynomial, estimate: float, tol: float) -> float:
    width = max(tol, 1e-7 * (1.0 + abs(estimate)))
    limit = 1e-2 * (1.0 + abs(estimate))
    while width <= limit:
        a, b = estimate - width, estimate + width
        fa, fb = evaluate(p, a), evaluate(p, b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0:
            return float(brentq(lambda x: evaluate(p, x), a, b, xtol=tol / 4))
        width *= 10.0
    # even multiplicity: no sign change, settle on the derivative's root nearby
    slope = derivative(p)
    if not slope.is_zero and slope.degree > 0:
        near = [r for r in np.real(npoly.polyroots(slope.coeffs)) if abs(r - estimate) <= limit]
        if near:
            return float(min(near, key=lambda r: abs(r - estimate)))
    return float(estimate)


def _merge(roots: List[float], tol: float) -> List[float]:
    merged: List[float] = []
    for r in sorted(roots):
        if merged and r - merged[-1] <= tol:
            merged[-1] = 0.5 * (merged[-1] + r)
        else:
            merged.append(r)
    return merged


def _isolate_exactly(p: Polynomial, tol: float) -> List[float]:
    exact = sympy.Poly([sympy.Rational(c) for c in reversed(p.coeffs)], _T, domain=sympy.QQ)
    intervals = exact.intervals(eps=sympy.Rational(tol))
    return [float((a + b) / 2) for (a, b), _ in intervals]


def real_roots(p: Polynomial, tol: float = DEFAULT_ROOT_TOL) -> List[float]:
    """All distinct real roots, ascending, to absolute accuracy `tol`."""
    if tol <= 0:
        raise InputError("root tolerance must be positive")
    if p.is_zero:
        raise InputError("real_roots of the zero polynomial")
    if p.degree == 0:
        return []
    expected = sturm_count(p)
    if expected == 0:
        return []

    estimates = npoly.polyroots(p.coeffs)
    nearest_real = np.argsort(np.abs(estimates.imag), kind="stable")[:expected]
    candidates = sorted(float(estimates[k].real) for k in nearest_real)
    roots = _merge([_bracket_root(p, r, tol) for r in candidates], tol)

    if len(roots) != expected:
        logger.debug(f"Companion estimates gave {len(roots)} roots, Sturm count {expected}; isolating exactly")
        roots = _isolate_exactly(p, tol)
    return roots


def global_min(p: Polynomial) -> Tuple[float, float]:
    """Global minimizer and minimum of an even-degree, positive-leading polynomial."""
    if p.degree == 0:
        return 0.0, p.coeffs[0]
    if p.degree % 2 == 1 or p.leading < 0:
        raise UnboundedError(f"polynomial {p} is unbounded below")
    critical = real_roots(derivative(p))
    values = [(t, float(evaluate(p, t))) for t in critical]
    return min(values, key=lambda item: item[1])


def local_minima(p: Polynomial) -> List[Tuple[float, float]]:
    """Every strict local minimum (t, p(t)), ascending in t."""
    if p.degree < 2:
        return []
    slope = derivative(p)
    critical = real_roots(slope)
    minima = []
    for k, r in enumerate(critical):
        left = critical[k - 1] if k > 0 else r - 1.0
        right = critical[k + 1] if k + 1 < len(critical) else r + 1.0
        if evaluate(slope, (left + r) / 2) < 0 < evaluate(slope, (r + right) / 2):
            minima.append((r, float(evaluate(p, r))))
    return minima


def is_positive(p: Polynomial) -> bool:
    """True iff p(t) > 0 for every real t."""
    if p.is_zero:
        return False
    if p.degree == 0:
        return p.coeffs[0] > 0
    if p.degree % 2 == 1 or p.leading <= 0:
        return False
    return sturm_count(p) == 0 and evaluate(p, 0.0) > 0


@dataclass(frozen=True)
class RationalFunction:
    num: Polynomial
    den: Polynomial = Polynomial((1.0,))

    def __post_init__(self):
        if self.den.is_zero:
            raise InputError("denominator is identically zero")

    @classmethod
    def from_coeffs(cls, num: Sequence[float], den: Sequence[float] = (1.0,)) -> "RationalFunction":
        if len(num) == 0 or len(den) == 0:
            raise InputError("coefficient arrays must be non-empty")
        return cls(Polynomial(tuple(num)), Polynomial(tuple(den)))

    @property
    def degree(self) -> Tuple[int, int]:
        return self.num.degree, self.den.degree

    def __call__(self, t):
        return evaluate(self.num, t) / evaluate(self.den, t)

    def derivative_numerator(self) -> Polynomial:
        """Numerator of h' over den²."""
        return derivative(self.num) * self.den - self.num * derivative(self.den)

    def slope(self, t):
        return evaluate(self.derivative_numerator(), t) / evaluate(self.den, t) ** 2

    def scaled(self, factor: float) -> "RationalFunction":
        return RationalFunction(self.num * factor, self.den)

    def __str__(self) -> str:
        return f"({self.num})/({self.den})"


def count_monotonic_regions(h: RationalFunction, root_tol: float = DEFAULT_ROOT_TOL) -> int:
    if sturm_count(h.den) > 0:
        raise NotCompactError(f"{h} is not compactly defined: denominator has real roots")
    slope = h.derivative_numerator()
    if slope.is_zero:
        return 0
    critical = real_roots(slope, root_tol)
    turns = 0
    for k, r in enumerate(critical):
        left = critical[k - 1] if k > 0 else r - 1.0
        right = critical[k + 1] if k + 1 < len(critical) else r + 1.0
        if np.sign(evaluate(slope, (left + r) / 2)) != np.sign(evaluate(slope, (r + right) / 2)):
            turns += 1
    return turns + 1


@dataclass(frozen=True)
class DegreeSequence:
    entries: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.entries, key=lambda pq: (pq[1], pq[0])))
        object.__setattr__(self, "entries", ordered)

    @property
    def key(self) -> Tuple[int, ...]:
        """(q1, q2, q3, p1, p2, p3), compared lexicographically."""
        return tuple(q for _, q in self.entries) + tuple(p for p, _ in self.entries)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{p}/{q}" for p, q in self.entries) + ")"


def degree_sequence(f: RationalFunction, g: RationalFunction, h: RationalFunction) -> DegreeSequence:
    return DegreeSequence(tuple(fn.degree for fn in (f, g, h)))


def compare(a: DegreeSequence, b: DegreeSequence) -> int:
    """-1, 0 or 1 as a is less than, equal to or greater than b."""
    return (a.key > b.key) - (a.key < b.key)
