from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from orbitile import config
from orbitile.errors import IndeterminateComparison
from orbitile.polynomials import poly
from orbitile.precision import (AdaptiveReal, AlgebraicNumber, NumberField,
                                compare_affine_exp, exp_enclosure)


def sqrt2_field():
    root = AlgebraicNumber(poly([-2, 0, 1]), Fraction(1), Fraction(2))
    return NumberField(root)


def test_algebraic_interval_contains_root_and_shrinks():
    root = AlgebraicNumber(poly([-2, 0, 1]), Fraction(1), Fraction(2))
    lo, hi = root.interval(100)
    assert lo * lo <= 2 <= hi * hi
    assert hi - lo <= Fraction(1, 2 ** 100)


def test_field_arithmetic_is_exact():
    field = sqrt2_field()
    sqrt2 = AdaptiveReal.from_field(field, (0, 1))
    value = (1 + sqrt2) * (1 + sqrt2)
    expected = 3 + 2 * sqrt2
    assert value.compare(expected) == 0
    assert (sqrt2 * sqrt2).exact_rational() == 2


def test_field_division_and_powers():
    field = sqrt2_field()
    sqrt2 = AdaptiveReal.from_field(field, (0, 1))
    assert (1 / sqrt2).compare(sqrt2 / 2) == 0
    assert (sqrt2 ** 4).exact_rational() == 4
    assert (sqrt2 ** -2).exact_rational() == Fraction(1, 2)


def test_compare_separates_close_rationals():
    field = sqrt2_field()
    sqrt2 = AdaptiveReal.from_field(field, (0, 1))
    close = AdaptiveReal.from_rational(Fraction(665857, 470832))  # Pell convergent
    assert sqrt2.compare(close) != 0


def test_cross_field_zero_certificate():
    # two structurally distinct sqrt(2) objects force the generic path
    a = AdaptiveReal.from_field(sqrt2_field(), (0, 1))
    b = AdaptiveReal.from_field(sqrt2_field(), (0, 1))
    assert a.compare(b) == 0


def test_budget_exhaustion_raises():
    field = sqrt2_field()
    sqrt2 = AdaptiveReal.from_field(field, (0, 1))
    other = AdaptiveReal.from_field(sqrt2_field(), (0, 1))
    # (sqrt2 - other) + 2^-200 is nonzero but unresolvable at 64 bits,
    # and has no zero certificate, so the comparison must raise.
    tiny = AdaptiveReal.from_rational(Fraction(1, 2 ** 200))
    with pytest.raises(IndeterminateComparison):
        (sqrt2 + tiny).compare(other, budget=64)


def test_exp_enclosure_brackets_e():
    lo, hi = exp_enclosure(Fraction(1), 80)
    # e truncated at 30 digits sits inside any enclosure wider than ~1e-30
    e30 = Fraction(2718281828459045235360287471352, 10 ** 30)
    assert lo < e30 < hi
    assert hi - lo < Fraction(1, 2 ** 40)


def test_compare_affine_exp_signs():
    # e^(1/2) = 1.64872127...
    one = AdaptiveReal.from_rational(1)
    assert compare_affine_exp(one, Fraction(1, 2), AdaptiveReal.from_rational(Fraction(-16487, 10000))) == 1
    assert compare_affine_exp(one, Fraction(1, 2), AdaptiveReal.from_rational(Fraction(-16488, 10000))) == -1
    # q = 0 reduces to an exact comparison
    assert compare_affine_exp(one, Fraction(0), AdaptiveReal.from_rational(-1)) == 0
    # zero coefficient reduces to the constant's sign
    zero = AdaptiveReal.from_rational(0)
    assert compare_affine_exp(zero, Fraction(3), AdaptiveReal.from_rational(-5)) == -1


def test_env_budget_override(monkeypatch):
    monkeypatch.setenv("ORBITILE_BITS", "128")
    assert config.bit_budget() == 128
    monkeypatch.setenv("ORBITILE_BITS", "oops")
    with pytest.raises(ValueError):
        config.bit_budget()


def test_concurrent_comparisons_match_sequential():
    field = sqrt2_field()
    sqrt2 = AdaptiveReal.from_field(field, (0, 1))
    targets = [AdaptiveReal.from_rational(Fraction(k, 1000)) for k in range(1300, 1550, 7)]
    sequential = [sqrt2.compare(t) for t in targets]
    fresh = AdaptiveReal.from_field(sqrt2_field(), (0, 1))
    with ThreadPoolExecutor(max_workers=8) as pool:
        concurrent = list(pool.map(fresh.compare, targets))
    assert concurrent == sequential
