import numpy as np
import pytest

from knotforge.config import SynthOptions
from knotforge.errors import DegenerateError, InfeasibleError, InputError, NotCompactError
from knotforge.fixtures import CURVES, F1, F_ALPHA, G1, G_ALPHA, H1, H_R1, H_R2, PATTERNS
from knotforge.services.curve import DoublePoint, Parameterization, is_compact_embedding, parameter_values
from knotforge.services.diagram import (
    SignPattern,
    build_diagram,
    canonical_gauss,
    determinant,
    diagram_from_pattern,
    identify,
    satisfies,
)
from knotforge.services.ratfunc import Polynomial, RationalFunction, is_positive
from knotforge.services.synth import (
    SeedAssignment,
    choose_separators,
    constraint_matrix,
    gap_vector,
    lift_denominator,
    lift_margin,
    reduce_coordinate,
    reduce_to_minimal,
    relative_margins,
    repair,
    seed_height,
    synthesize_height,
)


def _check_height(h, f, g, dps, pattern, opts, target):
    assert h.degree[0] <= 2 and h.degree[1] <= 4
    assert is_positive(h.den)
    margins = relative_margins(h, dps, pattern)
    assert min(margins) >= opts.min_margin
    assert identify(build_diagram(f, g, h, dps)) == target


def test_separators_of_two_points():
    assert choose_separators([0.0, 1.0]) == pytest.approx([-1.0, 0.5])


def test_separators_shift_with_parameters():
    base = [-2.0, -0.5, 0.3, 1.7]
    shifted = [t + 3.0 for t in base]
    assert choose_separators(shifted) == pytest.approx([s + 3.0 for s in choose_separators(base)])


def test_separators_interleave_trefoil_parameters(trefoil_dps):
    params = parameter_values(trefoil_dps)
    seps = choose_separators(params, 6)
    assert len(seps) == 6
    assert seps == sorted(seps)
    assert seps[0] < params[0]
    for k in range(1, 6):
        assert params[k - 1] < seps[k] < params[k]


def test_separators_reject_empty_input():
    with pytest.raises(InputError):
        choose_separators([])


def test_seed_expansion():
    assignment = SeedAssignment((-2.0, -1.1, -0.5, 0.1, 0.5, 1.5), (0, 1), (2, 3, 4, 5))
    h = seed_height(assignment)
    assert h.num.coeffs == pytest.approx((2.2, 3.1, 1.0))
    assert h.den.coeffs == pytest.approx(H_R1.den.coeffs, abs=1e-12)


def test_seed_assignment_must_be_two_and_four():
    seps = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    with pytest.raises(InputError):
        SeedAssignment(seps, (0, 1, 2, 3), (4, 5))
    with pytest.raises(InputError):
        SeedAssignment(seps, (0, 0), (2, 3, 4, 5))


def test_lift_margin_rule():
    opts = SynthOptions()
    assert lift_margin(H_R1.den, opts) == pytest.approx(2 * 0.39508 + 1.0, abs=1e-4)
    assert lift_margin(H_R2.den, opts) == 0.0


def test_lift_by_two():
    lifted = lift_denominator(H_R1, 2.0)
    assert lifted.den.coeffs == pytest.approx((1.9625, 0.4, -0.1, -1.6, 1.0))
    assert lifted.num == H_R1.num
    assert lifted.den.coeffs[1:] == H_R1.den.coeffs[1:]
    assert is_positive(lifted.den)


def test_lift_makes_unit_quartic_positive():
    h = RationalFunction.from_coeffs([0.0, 0.0, 1.0], [-1.0, 0.0, 0.0, 0.0, 1.0])
    lifted = lift_denominator(h, 2.0)
    assert lifted.den.coeffs == pytest.approx((1.0, 0.0, 0.0, 0.0, 1.0))
    assert is_positive(lifted.den)


def test_lift_must_exceed_the_minimum():
    from knotforge.services.ratfunc import global_min

    _, minimum = global_min(H_R1.den)
    with pytest.raises(InputError):
        lift_denominator(H_R1, -minimum)


def test_gap_vectors(trefoil_dps):
    assert gap_vector(H_R2, trefoil_dps, PATTERNS["3_1"]) == pytest.approx([-1.3896, -3.7649, -1.3586], abs=1e-3)
    assert gap_vector(H1, trefoil_dps, PATTERNS["3_1"]) == pytest.approx([0.2251, -0.9208, 0.3703], abs=1e-3)
    assert gap_vector(H1, trefoil_dps, SignPattern()) == []


def test_constraints_are_linear_in_the_numerator(trefoil_dps):
    params = parameter_values(trefoil_dps)
    pattern = PATTERNS["3_1"]
    den = H_R2.den
    a = constraint_matrix(den, params, pattern)
    rng = np.random.default_rng(12)
    for _ in range(20):
        u, v = rng.normal(size=3), rng.normal(size=3)
        lam = rng.uniform()
        np.testing.assert_allclose(a @ (lam * u + (1 - lam) * v), lam * (a @ u) + (1 - lam) * (a @ v), atol=1e-9)
        num = Polynomial(tuple(u))
        direct = [
            c.sigma * (num(params[c.i - 1]) * den(params[c.j - 1]) - num(params[c.j - 1]) * den(params[c.i - 1]))
            for c in pattern.constraints
        ]
        np.testing.assert_allclose(a @ u, direct, atol=1e-9)


def test_repair_leaves_a_valid_height_alone(trefoil_dps, opts):
    result = repair(H1, trefoil_dps, PATTERNS["3_1"], opts)
    assert result.h == H1
    assert result.trace == ()


def test_repair_fixes_the_lifted_seed(trefoil_dps, opts):
    result = repair(H_R2, trefoil_dps, PATTERNS["3_1"], opts)
    assert result.trace
    _check_height(result.h, F1, G1, trefoil_dps, PATTERNS["3_1"], opts, "3_1")


def test_repair_needs_positive_denominator(trefoil_dps, opts):
    with pytest.raises(NotCompactError):
        repair(H_R1, trefoil_dps, PATTERNS["3_1"], opts)


def test_repair_single_constraint(opts):
    dps = [DoublePoint(0.0, 1.0, (0.0, 0.0), 1)]
    pattern = SignPattern.from_tuples([(1, 2, ">")])
    h = RationalFunction.from_coeffs([0.0], [1.0, 0.0, 0.0, 0.0, 1.0])
    result = repair(h, dps, pattern, opts)
    assert result.h(0.0) > result.h(1.0)
    ok, _ = satisfies(result.h, dps, pattern)
    assert ok


def test_synthesize_trefoil(trefoil_dps, opts):
    result = synthesize_height(trefoil_dps, PATTERNS["3_1"], opts)
    _check_height(result.h, F1, G1, trefoil_dps, PATTERNS["3_1"], opts, "3_1")
    p = CURVES["trefoil_xy"].with_coordinate("z", result.h)
    assert is_compact_embedding(p, trefoil_dps)


def test_synthesis_is_deterministic(trefoil_dps, opts):
    first = synthesize_height(trefoil_dps, PATTERNS["3_1"], opts)
    second = synthesize_height(trefoil_dps, PATTERNS["3_1"], opts)
    assert first.h == second.h
    assert first.margins == second.margins


def _check_invariants(result, dps, pattern, opts):
    h = result.h
    assert h.degree[0] <= 2 and h.degree[1] <= 4
    assert is_positive(h.den)
    assert min(relative_margins(h, dps, pattern)) >= opts.min_margin


def test_synthesis_invariants_across_options(trefoil_dps):
    for run in range(250):
        opts = SynthOptions(seed=run, lift_factor=(1.5, 2.0, 3.0)[run % 3], workers=2)
        result = synthesize_height(trefoil_dps, PATTERNS["3_1"], opts)
        _check_invariants(result, trefoil_dps, PATTERNS["3_1"], opts)
        if run < 10:
            _check_height(result.h, F1, G1, trefoil_dps, PATTERNS["3_1"], opts, "3_1")


def test_figure_eight_synthesis_invariants(fig8_dps):
    for run in range(250):
        opts = SynthOptions(seed=run, min_margin=(1e-3, 5e-4, 2e-4)[run % 3], workers=2)
        _check_invariants(synthesize_height(fig8_dps, PATTERNS["4_1"], opts), fig8_dps, PATTERNS["4_1"], opts)


def test_synthesize_figure_eight(fig8_dps, opts):
    result = synthesize_height(fig8_dps, PATTERNS["4_1"], opts)
    _check_height(result.h, F_ALPHA, G_ALPHA, fig8_dps, PATTERNS["4_1"], opts, "4_1")
    assert determinant(build_diagram(F_ALPHA, G_ALPHA, result.h, fig8_dps)) == 5


def test_positive_scaling_keeps_the_diagram(trefoil_dps):
    base = canonical_gauss(build_diagram(F1, G1, H1, trefoil_dps))
    for factor in (0.01, 0.5, 7.0, 100.0):
        assert canonical_gauss(build_diagram(F1, G1, H1.scaled(factor), trefoil_dps)) == base


def test_synthesis_without_crossings(opts):
    result = synthesize_height([], SignPattern(), opts)
    assert result.h(0.3) == 1.0
    assert result.trace == ("no crossings",)


def test_synthesis_rejects_mismatched_pattern(trefoil_dps, opts):
    with pytest.raises(InputError):
        synthesize_height(trefoil_dps, PATTERNS["4_1"], opts)


def test_synthesis_reports_infeasible_budget(trefoil_dps):
    opts = SynthOptions(min_margin=5.0, budget=2, workers=1, max_sweeps=2)
    with pytest.raises(InfeasibleError):
        synthesize_height(trefoil_dps, PATTERNS["3_1"], opts)


def test_minimal_trefoil_is_left_alone(opts):
    p = CURVES["trefoil_xyz"]
    assert reduce_to_minimal(p, "3_1", opts) == p


def test_reduce_trefoil_projection(opts):
    out = reduce_to_minimal(CURVES["trefoil_xy"], "3_1", opts, PATTERNS["3_1"])
    assert str(out.degree_sequence()) == "(2/4, 2/4, 2/4)"
    assert out.x == F1 and out.y == G1


def test_reduce_needs_a_pattern_without_height(opts):
    with pytest.raises(InputError):
        reduce_to_minimal(CURVES["trefoil_xy"], "3_1", opts)


def test_reduce_rejects_wrong_target(opts):
    with pytest.raises(InputError):
        reduce_to_minimal(CURVES["trefoil_xyz"], "4_1", opts)


def test_reduce_single_coordinate(opts):
    out = reduce_coordinate(CURVES["trefoil_xyz"], "z", "3_1", opts)
    assert out.z.degree[0] <= 2 and out.z.degree[1] <= 4
    assert out.x == F1 and out.y == G1


def test_reduce_figure_eight_to_minimal_degree(opts):
    out = reduce_to_minimal(CURVES["fig8_xy"], "4_1", opts, PATTERNS["4_1"])
    assert str(out.degree_sequence()) == "(2/4, 2/4, 2/4)"
    assert out.violations() == []


def test_five_crossing_search_succeeds_or_exhausts_budget(cinquefoil_dps):
    assert identify(diagram_from_pattern(cinquefoil_dps, PATTERNS["5_1"])) == "5_1"
    opts = SynthOptions(budget=4, workers=2, max_sweeps=5)
    try:
        result = synthesize_height(cinquefoil_dps, PATTERNS["5_1"], opts)
    except InfeasibleError:
        return
    _check_invariants(result, cinquefoil_dps, PATTERNS["5_1"], opts)


def test_reduce_needs_a_regular_projection(opts):
    cusp = Parameterization(
        RationalFunction.from_coeffs([0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0, 1.0]),
        RationalFunction.from_coeffs([0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0, 1.0]),
        H1,
    )
    with pytest.raises(DegenerateError):
        reduce_coordinate(cusp, "z", "3_1", opts)
