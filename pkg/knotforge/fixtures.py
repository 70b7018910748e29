"""
Embedded curves and crossing patterns: the trefoil and figure-eight
constructions, the unit circle, and the five-crossing target tables.
"""
from functools import reduce
from typing import Dict, List, Tuple

from numpy.polynomial import polynomial as npoly

from knotforge.errors import InputError
from knotforge.services.curve import Parameterization
from knotforge.services.diagram import SignPattern
from knotforge.services.ratfunc import Polynomial, RationalFunction


def _rf(num, den) -> RationalFunction:
    return RationalFunction.from_coeffs(num, den)


def _factored(roots, den) -> RationalFunction:
    return RationalFunction(Polynomial.from_roots(roots), Polynomial(tuple(den)))


# trefoil
F1 = _rf([1, 2, 5], [1, 0, 1, 1, 1])
G1 = _rf([1, 0, 4], [1, 0, 0.1, 0, 1])
H1 = _rf([3.2, 3.1, 1], [3.9685, -1.6, -0.1, 2.745, 0.981])
# seed (t+2)(t+1.1) / (t+.5)(t-.1)(t-.5)(t-1.5), before and after lifting by 2
H_R1 = _rf([2.2, 3.1, 1], [-0.0375, 0.4, -0.1, -1.6, 1])
H_R2 = _rf([2.2, 3.1, 1], [1.9625, 0.4, -0.1, -1.6, 1])

# figure-eight
F_ALPHA = _factored([-7, -4, -1, 1, 4, 7], [2392, 0, 5000, 0, 1, 0, 1])
G_ALPHA = _factored([-5, -3, 3, 5, 0.972656, 7.027344], [5096, 0, 1, 0, 23.514793, 0, 1])
H2 = _rf([-168.44, 67.0899, 73.8617], [-0.484305, 0, 0, 0, 1])
G2 = _rf([-1591.53, -455.993, -42.7391], [762.067, 0, -55.1785, 0, 1])
F2 = _rf([1.0516e-12, 4.72511e-13, 4.9738e-14], [785.103, 29.5158, -24.8465, 4.43299, 0.960959])

CIRCLE_X = _rf([0, 2], [1, 0, 1])
CIRCLE_Y = _rf([1, 0, -1], [1, 0, 1])


def _angle_parts(n: int) -> Tuple[Polynomial, Polynomial]:
    """cos and sin of n * 2 arctan(t), as numerators over (1 + t^2)^n."""
    coeffs = npoly.polypow([1.0, 1j], 2 * n)
    return Polynomial(tuple(float(c) for c in coeffs.real)), Polynomial(tuple(float(c) for c in coeffs.imag))


def _torus_projection(lobes: int) -> Tuple[RationalFunction, RationalFunction]:
    """(2 + cos(lobes u)) (cos 2u, sin 2u) with u = pi + 2 arctan(t); crossings pair t_k with t_(k+lobes)."""
    one_plus = Polynomial((1.0, 0.0, 1.0))
    power = lambda n: reduce(lambda a, b: a * b, [one_plus] * n, Polynomial((1.0,)))
    cos_n, _ = _angle_parts(lobes)
    cos_2, sin_2 = _angle_parts(2)
    sign = -1.0 if lobes % 2 else 1.0
    radius = power(lobes) * 2.0 + cos_n * sign
    den = power(lobes + 2)
    return RationalFunction(radius * cos_2, den), RationalFunction(radius * sin_2, den)


F5, G5 = _torus_projection(5)

CURVES: Dict[str, Parameterization] = {
    "trefoil_xy": Parameterization(F1, G1, name="trefoil_xy"),
    "trefoil_xyz": Parameterization(F1, G1, H1, name="trefoil_xyz"),
    "fig8_xy": Parameterization(F_ALPHA, G_ALPHA, name="fig8_xy"),
    "fig8_h2": Parameterization(F_ALPHA, G_ALPHA, H2, name="fig8_h2"),
    "fig8_g2": Parameterization(F_ALPHA, G2, H2, name="fig8_g2"),
    "fig8_xyz_printed": Parameterization(F2, G2, H2, name="fig8_xyz_printed"),
    "cinquefoil_xy": Parameterization(F5, G5, name="cinquefoil_xy"),
    "circle": Parameterization(CIRCLE_X, CIRCLE_Y, name="circle"),
}

# the printed triple under its published name
CURVES["fig8_xyz_paper"] = Parameterization(F2, G2, H2, name="fig8_xyz_paper")

PATTERN_ROWS: Dict[str, List[Tuple[int, int, str]]] = {
    "3_1": [(1, 4, ">"), (2, 5, "<"), (3, 6, ">")],
    "4_1": [
        (1, 8, ">"), (2, 9, ">"), (3, 16, "<"), (4, 17, ">"), (5, 12, ">"),
        (6, 13, ">"), (7, 20, ">"), (10, 15, "<"), (11, 18, "<"), (14, 19, ">"),
    ],
    "5_1": [(1, 6, ">"), (2, 7, "<"), (3, 8, ">"), (4, 9, "<"), (5, 10, ">")],
    "5_2": [(1, 6, ">"), (2, 5, "<"), (3, 8, ">"), (4, 9, "<"), (7, 10, ">")],
}

PATTERNS: Dict[str, SignPattern] = {name: SignPattern.from_tuples(rows) for name, rows in PATTERN_ROWS.items()}


def get_curve(name: str) -> Parameterization:
    if name not in CURVES:
        raise InputError(f"unknown fixture '{name}' (known: {', '.join(sorted(CURVES))})")
    return CURVES[name]


def get_pattern(name: str) -> SignPattern:
    if name not in PATTERNS:
        raise InputError(f"unknown pattern '{name}' (known: {', '.join(sorted(PATTERNS))})")
    return PATTERNS[name]
