import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from qes.models import (Family, ModelSpec, PoleError, QESConditionError, branch_reflect,
                        check_qes, exponents, potential_at, pt_transform_check,
                        snap_to_condition, to_fraction)

from matrix import POINTS


def test_family_names():
    assert Family.parse("complex-dshg") is Family.ComplexDSHG
    assert Family.parse("RealDSHG_V2") is Family.RealDSHG_V2
    with pytest.raises(ValueError):
        Family.parse("quartic")


def test_validation():
    with pytest.raises(ValueError):
        ModelSpec(Family.ComplexDSHG, 0, 2, F(-1, 2))
    with pytest.raises(ValueError):
        ModelSpec(Family.RealDSHG_V1, 1, 2, F(-1, 2), branch="iii")
    with pytest.raises(ValueError):
        ModelSpec(Family.RealDSHG_V1, 1, 2, F(-1, 2), sector=2)
    with pytest.warns(UserWarning):
        ModelSpec(Family.ComplexDSHG, 1, 2, F(1, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ModelSpec(Family.RealDSHG_V2, 1, 2, F(3, 2))   # any l allowed for V2


def test_float_parameters_go_through_repr():
    assert to_fraction(0.1) == F(1, 10)
    assert ModelSpec(Family.ComplexDSHG, 0.5, 4.5, -0.25).M == F(9, 2)
    with pytest.raises(TypeError):
        ModelSpec(Family.ComplexDSHG, 0.5, 4.5, -0.25, strict=True)


@pytest.mark.parametrize("label,spec,p", POINTS, ids=[p[0] for p in POINTS])
def test_roundtrip_and_condition(label, spec, p):
    assert ModelSpec.from_json(spec.to_json()) == spec
    cond = check_qes(spec)
    assert cond.satisfied and cond.p == p


def test_unknown_keys_rejected():
    d = ModelSpec(Family.ComplexDSHG, 1, 2, F(-1, 2)).to_dict()
    d["colour"] = "red"
    with pytest.raises(ValueError):
        ModelSpec.from_dict(d)


def test_condition_failure_names_nearest_M():
    spec = ModelSpec(Family.ComplexDSHG, 1, 3, F(-1, 2))
    cond = check_qes(spec)
    assert not cond.satisfied
    assert cond.nearest_M == 4
    with pytest.raises(QESConditionError) as err:
        cond.require()
    assert err.value.nearest_M == 4


def test_snap_within_tolerance_and_strict():
    near = ModelSpec(Family.ComplexDSHG, 1, 2.0000000001, -0.5)
    assert check_qes(near).satisfied
    assert snap_to_condition(near).M == 2
    exact = ModelSpec(Family.ComplexDSHG, 1, "2.0000000001", "-0.5", strict=True)
    assert not check_qes(exact).satisfied


def test_branch_reflection_preserves_potential():
    spec = ModelSpec(Family.RealDSHG_V3, 1, F(61, 20), F(-1, 4), g=F(1, 5), branch="ii")
    base = branch_reflect(spec)
    assert base.branch == "i" and base.l == F(-3, 4) and base.g == F(-6, 5)
    assert exponents(base) == exponents(spec)
    x = np.array([0.3, 0.9, 1.7])
    assert np.allclose(potential_at(base, x), potential_at(spec, x))


def test_potential_values_and_poles():
    spec = ModelSpec(Family.ComplexDSHG, 1, 2, F(-1, 2))
    x = 0.7
    want = -(np.cosh(2 * x) - 2j) ** 2 - 0.25 / np.sinh(x) ** 2 + 0.25 / np.cosh(x) ** 2
    assert abs(potential_at(spec, x) - want) < 1e-12
    with pytest.raises(PoleError):
        potential_at(ModelSpec(Family.RealDSHG_V1, 1, F(3, 2), F(-1, 2)), 0.0)
    with pytest.raises(PoleError):
        potential_at(spec, 1j * np.pi / 2)


@pytest.mark.parametrize("label,spec,p", POINTS, ids=[p[0] for p in POINTS])
def test_pt_symmetry(label, spec, p):
    assert pt_transform_check(spec)


def test_pt_check_detects_wrong_parity():
    spec = ModelSpec(Family.ComplexDSHG, 1, 2, F(-1, 2))
    assert not pt_transform_check(spec, parity=lambda x: -x + 0.3)
