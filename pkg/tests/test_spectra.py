import json
from fractions import Fraction as F

import numpy as np
import pytest

from qes.models import Family, ModelSpec
from qes.polyalg import CRational
from qes.spectra import (QESSpectrum, Unavailable, closed_form_energies, qes_spectrum,
                         reality_classify, wavefunction)

from matrix import POINTS


def exact(spec):
    (lv,) = qes_spectrum(spec).levels
    return lv.E_exact


def test_p1_closed_forms_exact():
    a, l, g = F(2, 3), F(-2, 5), F(1, 7)
    C = CRational
    assert exact(ModelSpec(Family.ComplexDSHG, a, 2 * l + 3, l)) == C(-a * a + 4 * l + 5)
    assert exact(ModelSpec(Family.RealDSHG_V1, a, l + 2, l)) == C(a * a + 2 * a * (l + 1) + 2 * l + 3)
    assert exact(ModelSpec(Family.RealDSHG_V1, a, l + 3, l, sector=1)) == C(a * a + 2 * a * l + 2 * l + 5)
    assert exact(ModelSpec(Family.RealDSHG_V2, a, l + 2, l)) == C(a * a - 2 * a * (l + 1) + 2 * l + 3)
    assert exact(ModelSpec(Family.RealDSHG_V2, a, l + 3, l, sector=1)) == C(a * a - 2 * a * l + 2 * l + 5)
    assert exact(ModelSpec(Family.ComplexDSHG, a, 2, l, branch="iii")) == \
        C(3 - a * a, -2 * a * (1 + 2 * l))
    # constant-eta level of V3 from its own gauged equation (y = 0, z = 0)
    assert exact(ModelSpec(Family.RealDSHG_V3, a, l + g + 3, l, g=g)) == \
        C(a * a + 2 * a * (l - g) + 2 * l + 2 * g + 5)


def test_p2_complex_energies_and_variants():
    spec = ModelSpec(Family.ComplexDSHG, F(1, 2), F(9, 2), F(-1, 4))
    E = qes_spectrum(spec).energies
    d = np.sqrt(2.5 ** 2 - 1)
    assert np.allclose(sorted(e.real for e in E), [12.75 - 2 * d, 12.75 + 2 * d])
    cf = closed_form_energies(spec)
    assert np.allclose(sorted(cf.variants["recursion"], key=lambda z: z.real), E)
    assert not np.allclose(sorted(cf.variants["as_printed"], key=lambda z: z.real), E)


def test_p2_branch_iii_root_term():
    spec = ModelSpec(Family.ComplexDSHG, F(1, 2), 4, F(-1, 4), branch="iii")
    E = sorted(qes_spectrum(spec).energies, key=lambda z: z.real)
    cf = closed_form_energies(spec)
    assert np.allclose(sorted(cf.variants["recursion"], key=lambda z: z.real), E)
    assert not np.allclose(sorted(cf.variants["as_printed"], key=lambda z: z.real), E)


@pytest.mark.parametrize("key,spec", [
    ("v1-s0", ModelSpec(Family.RealDSHG_V1, F(1, 2), F(7, 2), F(-1, 2))),
    ("v1-s1", ModelSpec(Family.RealDSHG_V1, F(1, 2), F(9, 2), F(-1, 2), sector=1)),
    ("v2-s0", ModelSpec(Family.RealDSHG_V2, F(1, 2), F(7, 2), F(-1, 2))),
    ("v2-s1", ModelSpec(Family.RealDSHG_V2, F(1, 2), F(9, 2), F(-1, 2), sector=1)),
    ("v3", ModelSpec(Family.RealDSHG_V3, F(1, 2), F(21, 4), F(-1, 4), g=F(1, 2))),
])
def test_p2_real_tables_are_reported(key, spec):
    cf = closed_form_energies(spec)
    assert set(cf.variants) == {"as_printed"}
    assert len(cf.variants["as_printed"]) == 2


def test_missing_closed_form():
    with pytest.raises(Unavailable):
        closed_form_energies(ModelSpec(Family.ComplexDSHG, 1, F(19, 3), F(-1, 3)))


def test_reality_classes():
    real = qes_spectrum(ModelSpec(Family.ComplexDSHG, F(1, 2), F(9, 2), F(-1, 4)))
    assert reality_classify(real) == ["Real", "Real"]
    pair = qes_spectrum(ModelSpec(Family.ComplexDSHG, 2, F(9, 2), F(-1, 4)))
    assert reality_classify(pair) == ["ComplexConjugatePair"] * 2
    assert pair.levels[0].E.imag < 0 < pair.levels[1].E.imag
    broken = qes_spectrum(ModelSpec(Family.ComplexDSHG, F(1, 2), 4, F(-1, 4), branch="iii"))
    assert reality_classify(broken) == ["Complex", "Complex"]
    # alpha = beta = 1/2 restores real energies on branch iii
    sym = qes_spectrum(ModelSpec(Family.ComplexDSHG, F(1, 2), 4, F(-1, 2), branch="iii"))
    assert all(c == "Real" for c in reality_classify(sym))


@pytest.mark.parametrize("label,spec,p", POINTS, ids=[p[0] for p in POINTS])
def test_spectrum_json_roundtrip(label, spec, p):
    sp = qes_spectrum(spec)
    assert len(sp.levels) == p
    back = QESSpectrum.from_dict(json.loads(sp.to_json()))
    assert back == sp


def test_wavefunction_log_magnitude():
    spec = ModelSpec(Family.ComplexDSHG, F(1, 2), F(9, 2), F(-1, 4))
    psi = wavefunction(spec, 1)
    x = np.array([0.4, 0.9 + 0.2j, 1.3])
    assert np.allclose(np.log(np.abs(psi(x))), psi.log_abs(x))
    with pytest.raises(IndexError):
        wavefunction(spec, 2)
