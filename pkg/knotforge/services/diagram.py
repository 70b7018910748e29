"""
Knot diagrams read off a projection and a height function.

A diagram is stored as its signed Gauss sequence: one event per strand
passage, in traversal order from t = -inf to t = +inf (closing through the
point at infinity). Arcs are cut at undercrossings. Invariants are computed
exactly with sympy DomainMatrix: the Alexander polynomial over ZZ[t], the
determinant over ZZ and colourings over GF(3).
"""
import logging
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy
from sympy import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from knotforge.errors import AmbiguousCrossingError, InputError, NotAKnotError
from knotforge.services.curve import DoublePoint, double_points, parameter_values, Parameterization
from knotforge.services.ratfunc import RationalFunction

logger = logging.getLogger("knotforge.diagram")

AMBIGUITY_TOL = 1e-9
MAX_ENUMERATED_CROSSINGS = 16

_T = sympy.Symbol("t")

# (determinant, ascending normalized Alexander coefficients) -> name
KNOT_TABLE: Dict[Tuple[int, Tuple[int, ...]], str] = {
    (1, (1,)): "unknot",
    (3, (1, -1, 1)): "3_1",
    (5, (1, -3, 1)): "4_1",
    (5, (1, -1, 1, -1, 1)): "5_1",
    (7, (2, -3, 2)): "5_2",
}
KNOT_DETERMINANTS = {name: det for (det, _), name in KNOT_TABLE.items()}

STANDARD_PD: Dict[str, str] = {
    "3_1": "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]",
    "4_1": "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]",
    "5_1": "X[1,6,2,7] X[3,8,4,9] X[5,10,6,1] X[7,2,8,3] X[9,4,10,5]",
    "5_2": "X[1,4,2,5] X[3,8,4,9] X[5,10,6,1] X[9,6,10,7] X[7,2,8,3]",
}


@dataclass(frozen=True)
class Crossing:
    dp: DoublePoint
    over_at_s: bool
    sign: int


@dataclass(frozen=True)
class Constraint:
    i: int
    j: int
    rel: str

    def __post_init__(self):
        if self.rel not in (">", "<"):
            raise InputError(f"relation must be '>' or '<', got '{self.rel}'")
        if not 1 <= self.i < self.j:
            raise InputError(f"constraint indices must satisfy 1 <= i < j, got ({self.i}, {self.j})")

    @property
    def sigma(self) -> int:
        return 1 if self.rel == ">" else -1

    def __str__(self) -> str:
        return f"t{self.i} {self.rel} t{self.j}"


@dataclass(frozen=True)
class SignPattern:
    constraints: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        seen = [k for c in self.constraints for k in (c.i, c.j)]
        if len(seen) != len(set(seen)):
            raise InputError("each parameter index must appear in exactly one constraint")
        object.__setattr__(self, "constraints", tuple(sorted(self.constraints, key=lambda c: c.i)))

    @classmethod
    def from_tuples(cls, rows: Iterable[Tuple[int, int, str]]) -> "SignPattern":
        return cls(tuple(Constraint(int(i), int(j), rel) for i, j, rel in rows))

    def __len__(self) -> int:
        return len(self.constraints)

    def __str__(self) -> str:
        return ", ".join(str(c) for c in self.constraints)


Event = Tuple[int, bool, int]


def _next_edge(edge: int, edges: int) -> int:
    return edge % edges + 1


@dataclass(frozen=True)
class Diagram:
    """Signed Gauss sequence: (label, over?, sign) per passage."""
    events: Tuple[Event, ...] = ()
    crossings: Tuple[Crossing, ...] = ()

    def __post_init__(self):
        seen: Dict[int, List[Tuple[bool, int]]] = {}
        for label, over, sign in self.events:
            seen.setdefault(label, []).append((over, sign))
        for label, passes in seen.items():
            if len(passes) != 2 or passes[0][0] == passes[1][0]:
                raise NotAKnotError(f"crossing {label} must be passed once over and once under")
            if passes[0][1] != passes[1][1] or passes[0][1] not in (1, -1):
                raise NotAKnotError(f"crossing {label} has an inconsistent sign")

    @property
    def crossing_count(self) -> int:
        return len(self.events) // 2

    @property
    def arcs(self) -> int:
        return max(self.crossing_count, 1)

    @property
    def labels(self) -> List[int]:
        return sorted({label for label, _, _ in self.events})

    @property
    def gauss(self) -> str:
        return "".join(f"{'O' if over else 'U'}{label}{'+' if sign > 0 else '-'}" for label, over, sign in self.events)

    @property
    def pd(self) -> List[Tuple[int, int, int, int]]:
        """X[a, b, c, d] per crossing, a the incoming under edge, counter-clockwise."""
        edges = len(self.events)
        incoming: Dict[Tuple[int, bool], int] = {}
        for k, (label, over, _) in enumerate(self.events):
            incoming[(label, over)] = k + 1
        signs = {label: sign for label, _, sign in self.events}
        code = []
        for label in self.labels:
            under_in, over_in = incoming[(label, False)], incoming[(label, True)]
            under_out, over_out = _next_edge(under_in, edges), _next_edge(over_in, edges)
            if signs[label] > 0:
                code.append((under_in, over_out, under_out, over_in))
            else:
                code.append((under_in, over_in, under_out, over_out))
        return code

    @property
    def pd_code(self) -> str:
        return " ".join(f"X[{a},{b},{c},{d}]" for a, b, c, d in self.pd)

    @classmethod
    def from_gauss(cls, code: str) -> "Diagram":
        """Parse 'O1+U2-...'; every passage needs its crossing sign."""
        text = re.sub(r"[\s,]", "", code)
        tokens = re.findall(r"([OU])(\d+)([+-])", text)
        if "".join("".join(tok) for tok in tokens) != text:
            raise InputError(f"malformed Gauss code '{code}'")
        return cls(tuple((int(label), kind == "O", 1 if sign == "+" else -1) for kind, label, sign in tokens))

    @classmethod
    def from_pd(cls, code: str) -> "Diagram":
        quads = [tuple(int(v) for v in m) for m in re.findall(r"X\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]", code)]
        if not quads:
            return cls()
        edges = 2 * len(quads)
        slots: Dict[int, Event] = {}
        for label, (a, b, c, d) in enumerate(quads, start=1):
            if c != _next_edge(a, edges):
                raise InputError(f"X[{a},{b},{c},{d}]: under strand must run a -> a+1")
            if b == _next_edge(d, edges):
                sign, over_in = 1, d
            elif d == _next_edge(b, edges):
                sign, over_in = -1, b
            else:
                raise InputError(f"X[{a},{b},{c},{d}]: over strand edges are not consecutive")
            slots[a - 1] = (label, False, sign)
            slots[over_in - 1] = (label, True, sign)
        if sorted(slots) != list(range(edges)):
            raise NotAKnotError("PD code does not describe a single closed strand")
        return cls(tuple(slots[k] for k in range(edges)))

    def relabeled(self, mapping: Dict[int, int]) -> "Diagram":
        return Diagram(tuple((mapping[label], over, sign) for label, over, sign in self.events))

    def reversed(self) -> "Diagram":
        return Diagram(tuple(reversed(self.events)))


def standard_diagram(name: str) -> Diagram:
    if name == "unknot":
        return Diagram()
    if name not in STANDARD_PD:
        raise InputError(f"no standard diagram for '{name}'")
    return Diagram.from_pd(STANDARD_PD[name])


def canonical_gauss(d: Diagram) -> str:
    """Minimal rotation of the Gauss sequence, crossings relabeled by first appearance."""
    if not d.events:
        return ""
    best: Optional[Tuple] = None
    for shift in range(len(d.events)):
        rotated = d.events[shift:] + d.events[:shift]
        mapping: Dict[int, int] = {}
        for label, _, _ in rotated:
            mapping.setdefault(label, len(mapping) + 1)
        key = tuple((mapping[label], 0 if over else 1, sign) for label, over, sign in rotated)
        if best is None or key < best:
            best = key
    return "".join(f"{'O' if o == 0 else 'U'}{label}{'+' if sign > 0 else '-'}" for label, o, sign in best)


def arc_structure(d: Diagram) -> Tuple[Dict[int, Tuple[int, int, int]], List[int]]:
    """
    Per crossing label: (over arc, incoming under arc, outgoing under arc).
    Also the arc carrying the strand right after each event.
    """
    n = d.crossing_count
    current = 0
    roles: Dict[int, Dict[str, int]] = {}
    after: List[int] = []
    for label, over, _ in d.events:
        entry = roles.setdefault(label, {})
        if over:
            entry["over"] = current % n
        else:
            entry["in"] = current % n
            current += 1
            entry["out"] = current % n
        after.append(current % n)
    return {label: (r["over"], r["in"], r["out"]) for label, r in roles.items()}, after


def _alexander_rows(d: Diagram, t) -> List[List]:
    n = d.crossing_count
    roles, _ = arc_structure(d)
    signs = {label: sign for label, _, sign in d.events}
    rows = []
    for label in d.labels:
        row = [0] * n
        over, incoming, outgoing = roles[label]
        row[over] += 1 - t
        if signs[label] > 0:
            row[incoming] += t
            row[outgoing] += -1
        else:
            row[incoming] += -1
            row[outgoing] += t
        rows.append(row)
    return rows


def _normalize(coeffs: Sequence[int]) -> Tuple[int, ...]:
    values = [int(c) for c in coeffs]
    while values and values[-1] == 0:
        values.pop()
    while values and values[0] == 0:
        values.pop(0)
    if not values:
        return (0,)
    if values[0] < 0:
        values = [-c for c in values]
    return tuple(values)


def alexander(d: Diagram) -> Tuple[int, ...]:
    """Normalized Alexander polynomial, ascending integer coefficients."""
    n = d.crossing_count
    if n <= 1:
        return (1,)
    rows = [row[:-1] for row in _alexander_rows(d, _T)[:-1]]
    matrix = DomainMatrix.from_list_sympy(n - 1, n - 1, rows)
    value = matrix.domain.to_sympy(matrix.det())
    coeffs = sympy.Poly(sympy.expand(value), _T).all_coeffs()
    return _normalize(list(reversed(coeffs)))


def determinant(d: Diagram) -> int:
    """|Alexander(-1)|, computed directly over ZZ."""
    n = d.crossing_count
    if n <= 1:
        return 1
    rows = [row[:-1] for row in _alexander_rows(d, -1)[:-1]]
    return abs(int(DomainMatrix.from_list(rows, ZZ).det()))


def _coloring_matrix(d: Diagram) -> List[List[int]]:
    roles, _ = arc_structure(d)
    rows = []
    for label in d.labels:
        row = [0] * d.arcs
        over, incoming, outgoing = roles[label]
        row[over] += 2
        row[incoming] -= 1
        row[outgoing] -= 1
        rows.append(row)
    return rows


def tricolor_count(d: Diagram) -> int:
    """Number of GF(3) arc colourings, 3 ** nullity of the crossing relations."""
    rows = _coloring_matrix(d)
    if not rows:
        return 3 ** d.arcs
    rank = DomainMatrix.from_list(rows, GF(3)).rank()
    return 3 ** (d.arcs - rank)


def find_tricoloring(d: Diagram) -> Optional[List[int]]:
    """A colouring using more than one colour, or None when the diagram has none."""
    rows = _coloring_matrix(d)
    if not rows:
        return None
    basis = DomainMatrix.from_list(rows, GF(3)).nullspace().to_Matrix()
    for k in range(basis.rows):
        colors = [int(v) % 3 for v in basis.row(k)]
        if len(set(colors)) > 1:
            return colors
    return None


def identify(d: Diagram) -> str:
    det = determinant(d)
    if det not in KNOT_DETERMINANTS.values():
        return "unknown"
    return KNOT_TABLE.get((det, alexander(d)), "unknown")


def _ambiguity_threshold(a: float, b: float) -> float:
    return AMBIGUITY_TOL * max(1.0, abs(a), abs(b))


def _crossing_sign(dp: DoublePoint, over_at_s: bool) -> int:
    over, under = (dp.tangent_s, dp.tangent_t) if over_at_s else (dp.tangent_t, dp.tangent_s)
    return 1 if over[0] * under[1] - over[1] * under[0] > 0 else -1


def assign_over_under(h: RationalFunction, dps: Sequence[DoublePoint]) -> List[Crossing]:
    crossings = []
    for dp in dps:
        hs, ht = float(h(dp.s)), float(h(dp.t))
        if abs(hs - ht) < _ambiguity_threshold(hs, ht):
            raise AmbiguousCrossingError(f"height does not separate double point {dp.index}: h(s)={hs:.12g}, h(t)={ht:.12g}")
        over_at_s = hs > ht
        crossings.append(Crossing(dp, over_at_s, _crossing_sign(dp, over_at_s)))
    return crossings


def _index_of(params: List[float]) -> Dict[float, int]:
    return {value: k for k, value in enumerate(params, start=1)}


def pattern_pairs(dps: Sequence[DoublePoint]) -> List[Tuple[int, int]]:
    """1-based (i, j) parameter indices of each double point, in dp order."""
    index = _index_of(parameter_values(dps))
    return [(index[dp.s], index[dp.t]) for dp in dps]


def pattern_of(crossings: Sequence[Crossing]) -> SignPattern:
    pairs = pattern_pairs([c.dp for c in crossings])
    return SignPattern(tuple(Constraint(i, j, ">" if c.over_at_s else "<") for (i, j), c in zip(pairs, crossings)))


def pattern_from_bits(dps: Sequence[DoublePoint], over_at_s: Sequence[bool]) -> SignPattern:
    pairs = pattern_pairs(dps)
    return SignPattern(tuple(Constraint(i, j, ">" if bit else "<") for (i, j), bit in zip(pairs, over_at_s)))


def check_pattern(dps: Sequence[DoublePoint], pattern: SignPattern) -> None:
    """Raise InputError unless the pattern constrains exactly the double-point pairs."""
    expected = sorted(pattern_pairs(dps))
    given = sorted((c.i, c.j) for c in pattern.constraints)
    if expected != given:
        raise InputError(f"pattern pairs {given} do not match the double points {expected}")


def satisfies(h: RationalFunction, dps: Sequence[DoublePoint], pattern: SignPattern) -> Tuple[bool, List[float]]:
    """Margins sigma_k * gamma_k; positive exactly where the constraint holds."""
    params = parameter_values(dps) if pattern.constraints else []
    margins = [c.sigma * float(h(params[c.i - 1]) - h(params[c.j - 1])) for c in pattern.constraints]
    return all(m > 0 for m in margins), margins


def diagram_from_crossings(crossings: Sequence[Crossing]) -> Diagram:
    ordered = sorted(crossings, key=lambda c: c.dp.s)
    passages = []
    for label, c in enumerate(ordered, start=1):
        passages.append((c.dp.s, (label, c.over_at_s, c.sign)))
        passages.append((c.dp.t, (label, not c.over_at_s, c.sign)))
    passages.sort(key=lambda item: item[0])
    return Diagram(tuple(event for _, event in passages), tuple(ordered))


def diagram_from_pattern(dps: Sequence[DoublePoint], pattern: SignPattern) -> Diagram:
    check_pattern(dps, pattern)
    for dp in dps:
        if not any(dp.tangent_s) or not any(dp.tangent_t):
            raise InputError(f"double point {dp.index} carries no tangents; crossing signs are undefined")
    over = {(c.i, c.j): c.rel == ">" for c in pattern.constraints}
    crossings = [
        Crossing(dp, over[pair], _crossing_sign(dp, over[pair]))
        for dp, pair in zip(dps, pattern_pairs(dps))
    ]
    return diagram_from_crossings(crossings)


def _with_tangents(f: RationalFunction, g: RationalFunction, dp: DoublePoint) -> DoublePoint:
    if any(dp.tangent_s) and any(dp.tangent_t):
        return dp
    return DoublePoint(dp.s, dp.t, dp.position, dp.index,
                       (float(f.slope(dp.s)), float(g.slope(dp.s))),
                       (float(f.slope(dp.t)), float(g.slope(dp.t))))


def build_diagram(f: RationalFunction, g: RationalFunction, h: RationalFunction, dps: Sequence[DoublePoint]) -> Diagram:
    crossings = assign_over_under(h, [_with_tangents(f, g, dp) for dp in dps])
    return diagram_from_crossings(crossings)


def identify_parameterization(p: Parameterization, tol: float = 1e-9) -> Tuple[Diagram, str]:
    dps = double_points(p.x, p.y, tol)
    d = build_diagram(p.x, p.y, p.coordinate("z"), dps)
    name = identify(d)
    logger.info(f"✓ {p.name}: {d.crossing_count} crossings, identified as {name}")
    return d, name


def enumerate_patterns(dps: Sequence[DoublePoint], target: str, limit: Optional[int] = None) -> List[SignPattern]:
    """Over/under assignments whose diagram identifies as `target`, in mask order."""
    n = len(dps)
    if n > MAX_ENUMERATED_CROSSINGS:
        raise InputError(f"{n} crossings is too many to enumerate (max {MAX_ENUMERATED_CROSSINGS})")
    if target not in KNOT_DETERMINANTS:
        raise InputError(f"unknown target knot '{target}'")
    wanted_det = KNOT_DETERMINANTS[target]
    found: List[SignPattern] = []
    for mask in range(2 ** n):
        # bit k set means the later parameter of crossing k passes over
        bits = [not (mask >> k) & 1 for k in range(n)]
        pattern = pattern_from_bits(dps, bits)
        d = diagram_from_pattern(dps, pattern)
        if determinant(d) != wanted_det or identify(d) != target:
            continue
        found.append(pattern)
        if limit is not None and len(found) >= limit:
            break
    logger.info(f"✓ {len(found)} patterns identify as {target} over {n} crossings")
    return found
