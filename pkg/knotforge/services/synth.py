"""
Height synthesis: degree-2/4 rational functions realizing a crossing pattern,
and the coordinate-reduction pipeline built on it.

With the denominator d fixed and positive, every constraint
h(t_i) > h(t_j) is linear in the numerator coefficients, so the numerator is
chosen by a max-margin linear program. The denominator is improved by a
coordinate search when that LP alone cannot reach the required margin.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linprog

from knotforge.config import SynthOptions
from knotforge.errors import AmbiguousCrossingError, DegenerateError, InfeasibleError, InputError, NotCompactError
from knotforge.services.curve import (
    AXES,
    DoublePoint,
    Parameterization,
    double_points,
    is_compact_embedding,
    is_regular,
    parameter_values,
)
from knotforge.services.diagram import (
    SignPattern,
    assign_over_under,
    build_diagram,
    check_pattern,
    diagram_from_pattern,
    enumerate_patterns,
    identify,
    pattern_of,
    satisfies,
)
from knotforge.services.ratfunc import Polynomial, RationalFunction, global_min, is_positive

logger = logging.getLogger("knotforge.synth")

NUMERATOR_DEGREE = 2
DENOMINATOR_DEGREE = 4
SEED_SEPARATORS = NUMERATOR_DEGREE + DENOMINATOR_DEGREE
SEARCH_STEPS = (0.5, -0.5, 0.2, -0.2, 0.05, -0.05)
SPLITS = list(combinations(range(SEED_SEPARATORS), NUMERATOR_DEGREE))
# LP solutions are feasible to ~1e-7; accept only with room to spare
LP_SLACK = 1e-6


@dataclass(frozen=True)
class SeedAssignment:
    separators: Tuple[float, ...]
    numerator_picks: Tuple[int, ...]
    denominator_picks: Tuple[int, ...]

    def __post_init__(self):
        if len(self.numerator_picks) != NUMERATOR_DEGREE or len(self.denominator_picks) != DENOMINATOR_DEGREE:
            raise InputError(
                f"a seed needs {NUMERATOR_DEGREE} numerator and {DENOMINATOR_DEGREE} denominator factors, "
                f"got {len(self.numerator_picks)}/{len(self.denominator_picks)}"
            )
        picks = sorted(self.numerator_picks + self.denominator_picks)
        if picks != list(range(len(self.separators))):
            raise InputError("numerator and denominator picks must partition the separators")


@dataclass(frozen=True)
class SynthResult:
    h: RationalFunction
    margins: Tuple[float, ...]
    trace: Tuple[str, ...] = ()
    attempt: int = 0


def choose_separators(params: Sequence[float], count: Optional[int] = None) -> List[float]:
    """
    Midpoints of consecutive parameters, bracketed by one point a gap-width
    before the first parameter and one after the last.
    """
    values = sorted(float(p) for p in params)
    if not values:
        raise InputError("no parameters to separate")
    if len(values) == 1:
        candidates = [values[0] - 1.0, values[0] + 1.0]
    else:
        midpoints = [(a + b) / 2 for a, b in zip(values, values[1:])]
        candidates = [values[0] - (values[1] - values[0])] + midpoints + [values[-1] + (values[-1] - values[-2])]
    count = len(values) if count is None else count
    if count < 1:
        raise InputError("separator count must be positive")
    if count >= len(candidates):
        return candidates
    if count == len(values):
        return candidates[:count]
    picks = np.unique(np.round(np.linspace(0, len(candidates) - 1, count)).astype(int))
    return [candidates[k] for k in picks]


def seed_height(assignment: SeedAssignment) -> RationalFunction:
    """Product of monic linear factors (t - r) at the picked separators."""
    seps = assignment.separators
    num = Polynomial.from_roots([seps[k] for k in assignment.numerator_picks])
    den = Polynomial.from_roots([seps[k] for k in assignment.denominator_picks])
    return RationalFunction(num, den)


def lift_margin(den: Polynomial, opts: SynthOptions) -> float:
    """How much to add to a denominator's constant term; 0 when already positive."""
    _, minimum = global_min(den)
    if minimum > 0:
        return 0.0
    return opts.lift_factor * abs(minimum) + opts.lift_floor


def lift_denominator(h: RationalFunction, margin: float) -> RationalFunction:
    _, minimum = global_min(h.den)
    if margin <= -minimum:
        raise InputError(f"lift margin {margin:g} must exceed {-minimum:.6g}")
    return RationalFunction(h.num, h.den.shift_constant(margin))


def gap_vector(h: RationalFunction, dps: Sequence[DoublePoint], pattern: SignPattern) -> List[float]:
    """gamma_k = h(t_i) - h(t_j) per constraint."""
    params = parameter_values(dps)
    return [float(h(params[c.i - 1]) - h(params[c.j - 1])) for c in pattern.constraints]


def relative_margins(h: RationalFunction, dps: Sequence[DoublePoint], pattern: SignPattern) -> List[float]:
    """Signed margins divided by max |h(t_k)| over every crossing parameter."""
    _, margins = satisfies(h, dps, pattern)
    if not margins:
        return []
    scale = max(abs(float(h(t))) for t in parameter_values(dps))
    if scale == 0.0:
        return [0.0] * len(margins)
    return [m / scale for m in margins]


def constraint_matrix(den: Polynomial, params: Sequence[float], pattern: SignPattern) -> np.ndarray:
    """Row k maps numerator coefficients u to sigma_k (n(t_i) d(t_j) - n(t_j) d(t_i))."""
    rows = []
    for c in pattern.constraints:
        ti, tj = params[c.i - 1], params[c.j - 1]
        vi = np.array([ti ** k for k in range(NUMERATOR_DEGREE + 1)])
        vj = np.array([tj ** k for k in range(NUMERATOR_DEGREE + 1)])
        rows.append(c.sigma * (vi * den(tj) - vj * den(ti)))
    return np.array(rows)


def _numerator_lp(den: Polynomial, params: Sequence[float], pattern: SignPattern) -> Tuple[Optional[np.ndarray], float]:
    """
    Maximize r subject to every constraint value >= r and |h(t_p)| <= 1.
    With those bounds r is the relative margin of the resulting height.
    """
    values = np.array([[t ** k for k in range(NUMERATOR_DEGREE + 1)] for t in params])
    dens = np.array([den(t) for t in params])
    scaled = values / dens[:, None]
    rows = []
    for c in pattern.constraints:
        rows.append(c.sigma * (scaled[c.i - 1] - scaled[c.j - 1]))
    margin_rows = -np.array(rows)
    width = NUMERATOR_DEGREE + 1
    a_ub = np.vstack([
        np.hstack([margin_rows, np.ones((len(rows), 1))]),
        np.hstack([scaled, np.zeros((len(params), 1))]),
        np.hstack([-scaled, np.zeros((len(params), 1))]),
    ])
    b_ub = np.concatenate([np.zeros(len(rows)), np.ones(2 * len(params))])
    cost = np.zeros(width + 1)
    cost[-1] = -1.0
    bounds = [(-1e6, 1e6)] * width + [(None, 2.0)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0:
        return None, -np.inf
    return result.x[:width], float(result.x[-1])


def _numeric_min(den: Polynomial) -> float:
    slope = npoly.polyder(den.coeffs)
    critical = [r.real for r in npoly.polyroots(slope) if abs(r.imag) < 1e-9 * (1 + abs(r.real))]
    if not critical:
        return float(den(0.0))
    return float(min(den(t) for t in critical))


def _finish(num_coeffs: np.ndarray, den: Polynomial, dps, pattern, trace, attempt) -> SynthResult:
    h = RationalFunction(Polynomial(tuple(num_coeffs)), den)
    return SynthResult(h, tuple(relative_margins(h, dps, pattern)), tuple(trace), attempt)


def repair(
    h: RationalFunction,
    dps: Sequence[DoublePoint],
    pattern: SignPattern,
    opts: SynthOptions,
    attempt: int = 0,
) -> SynthResult:
    """Adjust a positive-denominator height until the pattern holds with margin."""
    if not is_positive(h.den):
        raise NotCompactError(f"repair needs a positive denominator, got {h.den}")
    if h.num.degree > NUMERATOR_DEGREE or h.den.degree > DENOMINATOR_DEGREE:
        raise InputError(f"height must have degree at most {NUMERATOR_DEGREE}/{DENOMINATOR_DEGREE}")
    margins = relative_margins(h, dps, pattern)
    if all(m >= opts.min_margin for m in margins):
        return SynthResult(h, tuple(margins), (), attempt)

    params = parameter_values(dps)
    trace: List[str] = []
    den = h.den
    coeffs, best = _numerator_lp(den, params, pattern)
    trace.append(f"numerator LP: margin {best:.4g}")
    if coeffs is not None and best >= opts.min_margin + LP_SLACK:
        return _finish(coeffs, den, dps, pattern, trace, attempt)

    dens = list(den.coeffs) + [0.0] * (DENOMINATOR_DEGREE + 1 - len(den.coeffs))
    for _ in range(opts.max_sweeps):
        improved = False
        for index in range(len(dens)):
            scale = max(abs(dens[index]), 0.1 * max(abs(c) for c in dens))
            for fraction in SEARCH_STEPS:
                trial = list(dens)
                trial[index] += fraction * scale
                candidate = Polynomial(tuple(trial))
                if candidate.degree == 0 or _numeric_min(candidate) <= 0 or candidate.leading <= 0:
                    continue
                trial_coeffs, value = _numerator_lp(candidate, params, pattern)
                if trial_coeffs is None or value <= best + 1e-12 or not is_positive(candidate):
                    continue
                dens, coeffs, best = trial, trial_coeffs, value
                trace.append(f"den[{index}] {fraction * scale:+.4g}: margin {best:.4g}")
                improved = True
                if best >= opts.min_margin + LP_SLACK:
                    return _finish(coeffs, candidate, dps, pattern, trace, attempt)
                break
        if not improved:
            break
    raise InfeasibleError(f"pattern infeasible at degree 2/4 within budget (best margin {best:.3g})")


def _jittered(separators: Sequence[float], attempt: int, seed: int) -> Tuple[float, ...]:
    if attempt < len(SPLITS):
        return tuple(separators)
    rng = np.random.default_rng([seed, attempt])
    spread = 0.3 * float(np.mean(np.diff(separators)))
    return tuple(sorted(float(s) for s in np.asarray(separators) + rng.normal(0.0, spread, len(separators))))


def _attempt(index: int, separators: Sequence[float], dps, pattern, opts: SynthOptions) -> Optional[SynthResult]:
    numerator = SPLITS[index % len(SPLITS)]
    denominator = tuple(k for k in range(SEED_SEPARATORS) if k not in numerator)
    assignment = SeedAssignment(_jittered(separators, index, opts.seed), numerator, denominator)
    try:
        h = seed_height(assignment)
        margin = lift_margin(h.den, opts)
        if margin > 0:
            h = lift_denominator(h, margin)
        return repair(h, dps, pattern, opts, attempt=index)
    except InfeasibleError as e:
        logger.debug(f"Restart {index} failed: {e}")
        return None


def synthesize_height(dps: Sequence[DoublePoint], pattern: SignPattern, opts: SynthOptions) -> SynthResult:
    """Seeded restarts over seed assignments; the lowest-index success wins."""
    if not dps:
        if pattern.constraints:
            raise InputError("pattern given for a projection without double points")
        return SynthResult(RationalFunction(Polynomial((1.0,)), Polynomial((1.0,))), (), ("no crossings",))
    check_pattern(dps, pattern)
    separators = choose_separators(parameter_values(dps), SEED_SEPARATORS)
    if len(separators) < SEED_SEPARATORS:
        # one crossing: pad with further bracketing points
        gap = separators[-1] - separators[-2]
        separators = separators + [separators[-1] + gap * (k + 1) for k in range(SEED_SEPARATORS - len(separators))]

    batch_size = opts.workers
    for start in range(0, opts.budget, batch_size):
        indices = range(start, min(start + batch_size, opts.budget))
        results: List[Tuple[int, Optional[SynthResult]]] = []
        with ThreadPoolExecutor(max_workers=opts.workers) as executor:
            futures = {executor.submit(_attempt, k, separators, dps, pattern, opts): k for k in indices}
            for future in as_completed(futures):
                results.append((futures[future], future.result()))
        results.sort(key=lambda x: x[0])
        for index, result in results:
            if result is not None:
                logger.info(f"✓ Height found on restart {index}: min relative margin {min(result.margins):.4g}")
                return result
        logger.warning(f"⚠ Restarts {start}-{indices[-1]} failed")
    raise InfeasibleError(f"pattern infeasible at degree 2/4 within budget ({opts.budget} restarts)")


def _identifies(p: Parameterization, target: str, opts: SynthOptions) -> bool:
    try:
        dps = double_points(p.x, p.y, opts.solver_tol)
        if not is_compact_embedding(p, dps, opts.solver_tol, root_tol=opts.root_tol):
            return False
        return identify(build_diagram(p.x, p.y, p.coordinate("z"), dps)) == target
    except (DegenerateError, InputError) as e:
        logger.warning(f"⚠ Candidate rejected: {e}")
        return False


def _candidate_patterns(dps, old: RationalFunction, target: str, opts: SynthOptions) -> List[SignPattern]:
    candidates: List[SignPattern] = []
    try:
        induced = pattern_of(assign_over_under(old, dps))
        if identify(diagram_from_pattern(dps, induced)) == target:
            candidates.append(induced)
    except AmbiguousCrossingError as e:
        logger.warning(f"⚠ Replaced coordinate does not induce a pattern: {e}")
    for pattern in enumerate_patterns(dps, target, limit=opts.pattern_budget):
        if pattern not in candidates:
            candidates.append(pattern)
    return candidates[:opts.pattern_budget]


def reduce_coordinate(p: Parameterization, axis: str, target: str, opts: SynthOptions) -> Parameterization:
    """Replace one coordinate by a synthesized degree-2/4 height over the other two."""
    kept = [a for a in AXES if a != axis]
    f, g = p.coordinate(kept[0]), p.coordinate(kept[1])
    old = p.coordinate(axis)
    if not is_regular(f, g, opts.root_tol):
        raise DegenerateError(f"the {kept[0]}-{kept[1]} projection is not regular; cannot replace {axis}")
    dps = double_points(f, g, opts.solver_tol)
    logger.info(f"Reducing {axis}: {kept[0]}-{kept[1]} projection has {len(dps)} crossings")

    for pattern in _candidate_patterns(dps, old, target, opts):
        try:
            result = synthesize_height(dps, pattern, opts)
        except InfeasibleError as e:
            logger.warning(f"⚠ Pattern {pattern} infeasible: {e}")
            continue
        candidate = p.with_coordinate(axis, result.h)
        if _identifies(candidate, target, opts):
            logger.info(f"✓ Replaced {axis} with degree {result.h.degree[0]}/{result.h.degree[1]}")
            return candidate
        logger.warning(f"⚠ Replacement for {axis} did not verify as {target}")
    raise InfeasibleError(f"no degree-2/4 replacement for {axis} realizes {target} within budget")


def _exceeds_target(rf: RationalFunction) -> bool:
    p, q = rf.degree
    return p > NUMERATOR_DEGREE or q > DENOMINATOR_DEGREE


def reduce_to_minimal(
    p: Parameterization,
    target: str,
    opts: SynthOptions,
    pattern: Optional[SignPattern] = None,
) -> Parameterization:
    """Synthesize z if missing, then reduce every coordinate above 2/4, largest degree first."""
    if p.z is None:
        if pattern is None:
            raise InputError("a pattern is required to synthesize the missing z coordinate")
        dps = double_points(p.x, p.y, opts.solver_tol)
        result = synthesize_height(dps, pattern, opts)
        p = p.with_coordinate("z", result.h)
        logger.info(f"✓ Synthesized z of degree {result.h.degree[0]}/{result.h.degree[1]}")
    if not _identifies(p, target, opts):
        raise InputError(f"curve '{p.name}' does not identify as {target}")

    order = sorted(
        (axis for axis in AXES if _exceeds_target(p.coordinate(axis))),
        key=lambda axis: (p.coordinate(axis).degree[1], p.coordinate(axis).degree[0], AXES.index(axis)),
        reverse=True,
    )
    for axis in order:
        p = reduce_coordinate(p, axis, target, opts)
    logger.info(f"✓ Reduced to {p.degree_sequence()}")
    return p
