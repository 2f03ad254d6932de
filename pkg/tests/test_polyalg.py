from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qes.polyalg import (I, ONE, ZERO, CRational, DegenerateLeadingCoefficient, EpsPolynomial,
                         NotDivisible, expand_roots, poly_divide_exact, poly_divmod, poly_roots)

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)
crats = st.builds(CRational, fracs, fracs)
polys = st.lists(crats, min_size=1, max_size=6).map(EpsPolynomial)


@given(crats, crats, crats)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    if not y.is_zero():
        assert (x / y) * y == x


def test_imaginary_unit_and_coercion():
    assert I * I == CRational(-1)
    assert CRational.coerce(2) + Fraction(1, 2) == CRational(Fraction(5, 2))
    assert 3 - CRational(1, 1) == CRational(2, -1)
    assert complex(CRational(Fraction(1, 4), -2)) == 0.25 - 2j
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO
    with pytest.raises(AttributeError):
        ONE.re = Fraction(3)


@given(crats)
def test_crational_json_roundtrip(x):
    assert CRational.from_json(x.to_json()) == x
    assert hash(CRational.from_json(x.to_json())) == hash(x)


@settings(max_examples=60)
@given(polys, polys)
def test_divmod_identity(p, d):
    if d.is_zero():
        return
    q, r = poly_divmod(p, d)
    assert q * d + r == p
    assert r.is_zero() or r.degree < d.degree


@settings(max_examples=40)
@given(polys, polys)
def test_divide_exact_on_products(p, d):
    if d.is_zero() or p.is_zero():
        return
    assert poly_divide_exact(p * d, d) == p


def test_not_divisible():
    p = EpsPolynomial([1, 0, 1])      # eps^2 + 1
    d = EpsPolynomial([-1, 1])        # eps - 1
    with pytest.raises(NotDivisible):
        poly_divide_exact(p, d)


def test_exact_evaluation_and_json():
    p = EpsPolynomial([Fraction(1, 3), CRational(0, 2), 1])
    # 1/3 + 2i(1+i) + (1+i)^2
    assert p(CRational(1, 1)) == CRational(Fraction(-5, 3), 4)
    assert EpsPolynomial.from_json(p.to_json()) == p
    assert p.degree == 2 and p.leading == ONE
    assert EpsPolynomial([0, 0]).is_zero()


def test_linear_root_is_exact():
    rs = poly_roots(EpsPolynomial([Fraction(-3, 7), 1]))
    assert rs.exact == (CRational(Fraction(3, 7)),)
    assert rs.ok


@pytest.mark.parametrize("roots", [
    [1.0, -2.0, 3.5],
    [2 + 1j, 2 - 1j, -0.5],
    [10.0, 20.0, 30.0, 40.0],
])
def test_companion_roots_recover_known(roots):
    c = expand_roots(roots)
    rs = poly_roots(EpsPolynomial([complex(x) for x in c]))
    got = sorted(rs.roots, key=lambda z: (z.real, z.imag))
    want = sorted(roots, key=lambda z: (complex(z).real, complex(z).imag))
    assert np.allclose(got, want, atol=1e-9)
    assert rs.ok


def test_double_root_merged():
    rs = poly_roots(EpsPolynomial([4, -4, 1]))   # (eps - 2)^2
    assert rs.has_multiple
    assert rs.multiplicity == (2, 2)
    assert abs(rs.roots[0] - 2) < 1e-7


def test_constant_has_no_roots():
    with pytest.raises(DegenerateLeadingCoefficient):
        poly_roots(EpsPolynomial([5]))
