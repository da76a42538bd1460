from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ivmeasure.novikov import (
    F2, INF, QQ, BasedModule, GroundField, IndeterminateError, IntervalModule, NovikovError,
    NovikovField, NovikovScalar, arithmetic, completed_colimit, completed_image, constant_ray,
    multiplication_ray, steps_to_vanish, truncate, valuation,
)


def S(field, *pairs, precision=INF):
    return NovikovScalar(field, pairs, precision)


exponents = st.fractions(min_value=0, max_value=4, max_denominator=3)
coeffs_q = st.integers(min_value=-3, max_value=3)


@st.composite
def scalars(draw, field=QQ):
    pairs = draw(st.lists(st.tuples(coeffs_q, exponents), max_size=4))
    return NovikovScalar(field, pairs)


def reference_mul(x, y):
    """Term-by-term product on plain dicts, independent of the scalar class."""
    out = {}
    for e1, c1 in x.terms:
        for e2, c2 in y.terms:
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def test_valuation_basic():
    assert valuation(S(QQ)) == INF
    assert valuation(S(F2, (1, Fraction(1, 2)), (1, 2))) == Fraction(1, 2)


def test_valuation_product_over_q():
    x = S(QQ, (1, 0), (1, 1))
    y = S(QQ, (2, 0), (1, Fraction(1, 3)))
    prod = x * y
    assert valuation(prod) == 0 == valuation(x) + valuation(y)
    assert dict(prod.terms) == reference_mul(x, y)


def test_unresolved_leading_term():
    x = S(QQ, (1, 3), precision=2)
    with pytest.raises(IndeterminateError):
        x.valuation()
    with pytest.raises(NovikovError):
        x.inverse()


def test_arithmetic_examples():
    x = S(QQ, (3, Fraction(1, 2)), (-1, 2))
    assert arithmetic(S(QQ, (1, 0)), x, "mul") == x
    inv = S(F2, (1, 0), (1, 1), precision=3).inverse()
    assert inv == S(F2, (1, 0), (1, 1), (1, 2), precision=3)
    assert arithmetic(S(F2, (1, 0), (1, 1)), inv, "mul").equal_mod(1, 3)
    t = S(F2, (1, 1))
    assert t * t == S(F2, (1, 2))
    with pytest.raises(ZeroDivisionError):
        S(QQ).inverse()
    with pytest.raises(NovikovError):
        arithmetic(x, x, "pow")


def test_truncate_examples():
    assert truncate(S(QQ, (1, Fraction(6, 5))), 1).is_zero()
    x = S(QQ, (1, 0), (1, Fraction(1, 2)))
    assert truncate(x, 1).terms == x.terms
    assert truncate(x, 1).precision == 1
    with pytest.raises(NovikovError):
        truncate(x, 0)


def test_fp_ground_field():
    f5 = GroundField("Fp", 5)
    x = S(f5, (2, 0), (1, 1), precision=4)
    assert (x * x.inverse()).equal_mod(1, 4)
    with pytest.raises(Exception):
        GroundField("Fp", 6)


@settings(max_examples=80, deadline=None)
@given(scalars(), scalars())
def test_ultrametric(x, y):
    s = x + y
    if x.is_zero() or y.is_zero():
        return
    if s.is_zero():
        assert x.valuation() == y.valuation()
        return
    assert s.valuation() >= min(x.valuation(), y.valuation())
    if x.valuation() != y.valuation():
        assert s.valuation() == min(x.valuation(), y.valuation())


@settings(max_examples=80, deadline=None)
@given(scalars(), scalars())
def test_multiplication_matches_reference(x, y):
    assert dict((x * y).terms) == reference_mul(x, y)
    if not x.is_zero() and not y.is_zero():
        assert (x * y).valuation() == x.valuation() + y.valuation()


@settings(max_examples=80, deadline=None)
@given(scalars(), scalars(), st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=3))
def test_truncation_is_algebra_map(x, y, r):
    assert truncate(truncate(x, 2), 1) == truncate(x, 1)
    lhs = truncate(x * y, r)
    rhs = truncate(truncate(x, r) * truncate(y, r), r)
    assert lhs.terms == rhs.terms


@settings(max_examples=60, deadline=None)
@given(scalars(), st.integers(min_value=1, max_value=6))
def test_inverse_round_trip(x, prec):
    if x.is_zero():
        return
    unit = x.shift(-x.valuation())
    y = NovikovScalar(QQ, unit.terms_as_pairs(), prec)
    product = y * y.inverse()
    assert product.precision == prec
    assert product.equal_mod(1, prec)


def test_json_round_trip():
    x = S(QQ, (Fraction(2, 3), Fraction(1, 2)), (-1, 3), precision=5)
    assert NovikovScalar.from_json(QQ, x.to_json()) == x


def test_interval_module():
    m = IntervalModule(Fraction(1), 3)
    assert m.is_zero_element(S(F2, (1, 3)))
    assert not m.is_zero_element(S(F2, (1, 2)))
    with pytest.raises(NovikovError):
        m.reduce(S(F2, (1, 0)))
    with pytest.raises(NovikovError):
        IntervalModule(2, 1)


def test_constant_ray_colimit_is_module():
    mod = BasedModule(NovikovField(F2), ["x", "y"], [0, 1])
    out = completed_colimit(constant_ray(mod, 4), 10)
    assert out.module is mod and not out.is_zero


@pytest.mark.parametrize("precision", [5, 10, 20])
def test_multiplication_ray_vanishes(precision):
    ray = multiplication_ray(F2, 1)
    assert completed_colimit(ray, precision).is_zero
    stage, img = completed_image(ray, 1, [NovikovScalar.monomial(F2)], precision)
    assert img is None and stage - 1 == steps_to_vanish(1, precision)


def test_contracting_ray_element_dies():
    ray = multiplication_ray(QQ, Fraction(1, 2))
    x = S(QQ, (5, 0), (1, Fraction(1, 3)))
    stage, img = completed_image(ray, 1, [x], 10)
    assert img is None and stage - 1 == 20
