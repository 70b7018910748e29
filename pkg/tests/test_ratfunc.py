import numpy as np
import pytest

from knotforge.errors import InputError, NotCompactError, UnboundedError
from knotforge.fixtures import H1, H_R1, H_R2
from knotforge.services.ratfunc import (
    DegreeSequence,
    Polynomial,
    RationalFunction,
    compare,
    count_monotonic_regions,
    degree_sequence,
    derivative,
    evaluate,
    global_min,
    is_positive,
    local_minima,
    real_roots,
    sturm_count,
)

QUARTIC = Polynomial((-0.0375, 0.4, -0.1, -1.6, 1.0))


def test_trailing_zeros_are_trimmed():
    p = Polynomial((1.0, 2.0, 0.0, 0.0))
    assert p.coeffs == (1.0, 2.0)
    assert p.degree == 1
    assert Polynomial((0.0, 0.0)).is_zero


def test_evaluate_scalar_and_array():
    p = Polynomial((1.0, -3.0, 2.0))
    assert evaluate(p, 2.0) == pytest.approx(3.0)
    np.testing.assert_allclose(p(np.array([0.0, 1.0, 2.0])), [1.0, 0.0, 3.0])


def test_derivative():
    assert derivative(QUARTIC).coeffs == pytest.approx((0.4, -0.2, -4.8, 4.0))
    assert derivative(Polynomial.constant(5)).is_zero


def test_arithmetic_and_format():
    p = Polynomial((1.0, 1.0))
    assert (p * p).coeffs == (1.0, 2.0, 1.0)
    assert (p - p).is_zero
    assert str(Polynomial((2.2, 3.1, 1.0))) == "t^2 + 3.1t + 2.2"
    assert str(Polynomial((-1.0, 0.0, 1.0))) == "t^2 - 1"


def test_from_roots_expands_seed_factors():
    num = Polynomial.from_roots([-2.0, -1.1])
    den = Polynomial.from_roots([-0.5, 0.1, 0.5, 1.5])
    assert num.coeffs == pytest.approx((2.2, 3.1, 1.0))
    assert den.coeffs == pytest.approx(QUARTIC.coeffs, abs=1e-12)


def test_real_roots_simple():
    assert real_roots(Polynomial((-1.0, 0.0, 1.0))) == pytest.approx([-1.0, 1.0], abs=1e-9)
    assert real_roots(Polynomial((1.0, 0.0, 0.0, 0.0, 1.0))) == []
    assert real_roots(Polynomial.constant(3)) == []


def test_real_roots_quartic():
    assert real_roots(QUARTIC) == pytest.approx([-0.5, 0.1, 0.5, 1.5], abs=1e-9)
    assert sturm_count(QUARTIC) == 4


def test_real_roots_rejects_bad_input():
    with pytest.raises(InputError):
        real_roots(Polynomial())
    with pytest.raises(InputError):
        real_roots(QUARTIC, tol=0.0)


def test_real_roots_planted():
    rng = np.random.default_rng(7)
    for _ in range(200):
        k = int(rng.integers(1, 6))
        roots = np.sort(rng.uniform(-3.0, 3.0, k))
        if k > 1 and np.min(np.diff(roots)) < 0.1:
            continue
        p = Polynomial.from_roots(roots) * Polynomial((1.0, 0.0, 1.0))
        assert real_roots(p) == pytest.approx(list(roots), abs=1e-7)


def test_global_min_of_seed_denominator():
    t, value = global_min(QUARTIC)
    assert value == pytest.approx(-0.39508, abs=1e-4)
    assert t == pytest.approx(1.16965, abs=1e-3)


def test_local_minima_of_seed_denominator():
    minima = local_minima(QUARTIC)
    assert len(minima) == 2
    assert minima[0][0] == pytest.approx(-0.27761, abs=1e-3)
    assert minima[0][1] == pytest.approx(-0.11608, abs=1e-4)
    assert minima[1][1] == pytest.approx(-0.39508, abs=1e-4)


def test_global_min_simple_cases():
    assert global_min(Polynomial((0.0, 0.0, 1.0))) == pytest.approx((0.0, 0.0))
    t, value = global_min(Polynomial((0.0, 0.0, -2.0, 0.0, 1.0)))
    assert value == pytest.approx(-1.0)
    assert abs(t) == pytest.approx(1.0)
    assert global_min(Polynomial.constant(4)) == (0.0, 4.0)


def test_global_min_unbounded():
    with pytest.raises(UnboundedError):
        global_min(Polynomial((0.0, 0.0, 0.0, 1.0)))
    with pytest.raises(UnboundedError):
        global_min(Polynomial((1.0, 0.0, -1.0)))


def test_global_min_below_dense_samples():
    rng = np.random.default_rng(11)
    grid = np.linspace(-5.0, 5.0, 10_001)
    for _ in range(50):
        coeffs = list(rng.uniform(-2.0, 2.0, 4)) + [float(rng.uniform(0.5, 2.0))]
        p = Polynomial(tuple(coeffs))
        _, value = global_min(p)
        assert value <= float(np.min(p(grid))) + 1e-9


def test_is_positive():
    assert is_positive(H_R2.den)
    assert is_positive(H1.den)
    assert not is_positive(H_R1.den)
    assert not is_positive(Polynomial((-1.0, 0.0, 1.0)))
    assert not is_positive(Polynomial())
    assert not is_positive(Polynomial((1.0, 1.0)))
    assert is_positive(Polynomial.constant(2))


def test_is_positive_agrees_with_samples_and_roots():
    rng = np.random.default_rng(3)
    grid = np.linspace(-10.0, 10.0, 4001)
    for _ in range(1000):
        coeffs = list(rng.uniform(-1.0, 1.0, 4)) + [float(rng.uniform(0.1, 1.0))]
        p = Polynomial(tuple(coeffs))
        if is_positive(p):
            assert np.all(p(grid) > 0)
        else:
            roots = real_roots(p)
            assert roots
            for r in roots:
                assert abs(p(r)) <= 1e-6


def test_rational_function_requires_nonzero_denominator():
    with pytest.raises(InputError):
        RationalFunction.from_coeffs([1.0], [0.0, 0.0])


def test_rational_function_evaluation_and_slope():
    h = RationalFunction.from_coeffs([0.0, 1.0], [1.0, 0.0, 1.0])
    assert h(1.0) == pytest.approx(0.5)
    assert h.slope(0.0) == pytest.approx(1.0)
    assert h.slope(1.0) == pytest.approx(0.0)
    assert h.scaled(3.0)(1.0) == pytest.approx(1.5)
    assert h.degree == (1, 2)


def test_monotonic_regions_examples():
    assert count_monotonic_regions(RationalFunction.from_coeffs([0.0, 1.0], [1.0, 0.0, 1.0])) == 3
    assert count_monotonic_regions(RationalFunction.from_coeffs([1.0], [1.0, 0.0, 1.0])) == 2
    assert count_monotonic_regions(H1) == 4
    assert count_monotonic_regions(H_R2) == 4


def test_monotonic_regions_needs_compact_function():
    with pytest.raises(NotCompactError):
        count_monotonic_regions(RationalFunction.from_coeffs([0.0, 1.0], [-1.0, 0.0, 1.0]))


def _sampled_regions(h: RationalFunction) -> int:
    theta = np.linspace(-np.pi / 2 + 1e-6, np.pi / 2 - 1e-6, 100_001)
    values = h(np.tan(theta))
    steps = np.diff(values)
    steps = steps[np.abs(steps) > 1e-13 * np.max(np.abs(values))]
    signs = np.sign(steps)
    return 1 + int(np.count_nonzero(signs[1:] != signs[:-1]))


def test_monotonic_regions_match_sampling():
    rng = np.random.default_rng(5)
    for _ in range(100):
        lead = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)
        num = Polynomial((rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), lead))
        first = Polynomial((rng.uniform(-1, 1) ** 2 + rng.uniform(0.5, 2) ** 2, 0.0, 1.0))
        shift = rng.uniform(-1.0, 1.0)
        second = Polynomial((shift ** 2 + rng.uniform(0.5, 2) ** 2, -2 * shift, 1.0))
        h = RationalFunction(num, first * second)
        assert count_monotonic_regions(h) == _sampled_regions(h)


def test_degree_sequence_sorts_by_denominator_then_numerator():
    seq = DegreeSequence(((2, 4), (1, 2), (0, 4)))
    assert str(seq) == "(1/2, 0/4, 2/4)"
    assert seq.key == (2, 4, 4, 1, 0, 2)


def test_degree_sequence_of_trefoil_height():
    seq = degree_sequence(H1, H_R2, H1)
    assert str(seq) == "(2/4, 2/4, 2/4)"


def test_compare():
    minimal = DegreeSequence(((2, 4), (2, 4), (2, 4)))
    bigger = DegreeSequence(((2, 4), (2, 4), (6, 6)))
    lower_num = DegreeSequence(((1, 4), (2, 4), (2, 4)))
    assert compare(minimal, bigger) == -1
    assert compare(bigger, minimal) == 1
    assert compare(minimal, minimal) == 0
    assert compare(lower_num, minimal) == -1


def test_compare_is_a_total_preorder():
    rng = np.random.default_rng(9)
    seqs = [
        DegreeSequence(tuple((int(rng.integers(0, 5)), int(rng.integers(0, 7))) for _ in range(3)))
        for _ in range(40)
    ]
    for a in seqs:
        for b in seqs:
            assert compare(a, b) == -compare(b, a)
            for c in seqs[:10]:
                if compare(a, b) <= 0 and compare(b, c) <= 0:
                    assert compare(a, c) <= 0
