from fractions import Fraction as F

import pytest

from qes.models import Family, ModelSpec
from qes.polyalg import ZERO, CRational
from qes.sl2 import (build_generators, commutation_table, compare, commutator, hg_direct,
                     hg_sl2, mat_scale)

# computed once from the generator definitions and frozen
TABLE = {"[J0,J+]": {"J+": "1"}, "[J0,J-]": {"J-": "-1"}, "[J+,J-]": {"J0": "-2"}}


def spec(a, l, M):
    return ModelSpec(Family.ComplexDSHG, a, M, l)


def test_n1_generator_action():
    g = build_generators(1)
    # column k is the image of t^k
    assert g.Jm[0][1] == CRational(1) and g.Jm[0][0] == ZERO
    assert g.Jp[1][0] == CRational(-1) and g.Jp[0][1] == ZERO and g.Jp[1][1] == ZERO


@pytest.mark.parametrize("n", range(0, 6))
def test_diagonal_and_annihilation(n):
    g = build_generators(n)
    assert [g.J0[k][k] for k in range(n + 1)] == [CRational(F(2 * k - n, 2)) for k in range(n + 1)]
    assert all(g.Jp[i][n] == ZERO for i in range(n + 1))


@pytest.mark.parametrize("n", range(1, 6))
def test_commutation_table_frozen(n):
    assert commutation_table(build_generators(n)) == TABLE
    g = build_generators(n)
    assert commutator(g.J0, g.Jp) == g.Jp
    assert commutator(g.Jp, g.Jm) == mat_scale(g.J0, -2)


@pytest.mark.parametrize("n,a,l", [(0, F(1, 2), F(-1, 4)), (1, F(1, 2), F(-1, 4)),
                                   (2, F(1, 2), F(-1, 4)), (2, F(3, 2), F(-1, 3)),
                                   (3, F(1, 3), F(-2, 3))])
def test_constructions_agree_at_qes_point(n, a, l):
    s = spec(a, l, 2 * n + 2 * l + 3)
    rep = compare(s, n)
    assert rep.verdict == "Match" and rep.invariant
    assert rep.max_eigen_error < 1e-8


def test_invariance_fails_off_condition():
    a, l = F(1, 2), F(-1, 4)
    for n in range(0, 4):
        M = 2 * n + 2 * l + 4
        d = hg_direct(spec(a, l, M), n)
        assert not d.invariant
        # top-degree leak: -4iak + 2ia(M - 2l - 3) at k = n
        assert d.leak == CRational(0, -4 * a * n + 2 * a * (M - 2 * l - 3))
        rep = compare(spec(a, l, M), n)
        assert rep.verdict == "Mismatch" and not rep.invariant


def test_serialization_is_rational_strings():
    H = hg_sl2(spec(F(1, 2), F(-1, 4), F(9, 2)), 1)
    d = H.to_dict()
    for i, row in enumerate(d["matrix"]):
        for j, (re, im) in enumerate(row):
            assert isinstance(re, str) and isinstance(im, str)
            assert CRational.parse(re, im) == H.matrix[i][j]


def test_negative_n():
    with pytest.raises(ValueError):
        build_generators(-1)
