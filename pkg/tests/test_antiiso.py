from fractions import Fraction as F

import numpy as np
import pytest

from qes.antiiso import (anti_iso_map, hyperbolic_at_imaginary, map_spectrum,
                         periodic_potential_at, periodic_spec)
from qes.models import Family, ModelSpec, PoleError, pt_transform_check
from qes.spectra import qes_spectrum
from qes.verify import residual

SRC = ModelSpec(Family.ComplexDSHG, F(1, 2), F(9, 2), F(-1, 4))


def test_p1_example():
    sp = qes_spectrum(ModelSpec(Family.ComplexDSHG, 1, 2, F(-1, 2)))
    assert map_spectrum(sp).energies == [-2]


def test_order_reversal_and_involution():
    sp = qes_spectrum(SRC)
    img = map_spectrum(sp)
    assert img.spec.family is Family.PeriodicDSG
    assert img.energies == [-sp.energies[1], -sp.energies[0]]
    assert map_spectrum(img) == sp


def test_native_periodic_spectrum_equals_mapped():
    assert qes_spectrum(periodic_spec(SRC)) == map_spectrum(qes_spectrum(SRC))
    m = anti_iso_map(SRC, 2)
    assert m.target.family is Family.PeriodicDSG and m.target.a == SRC.a


def test_periodic_levels_pass_residual():
    img = map_spectrum(qes_spectrum(SRC))
    for k in range(2):
        assert residual(img.spec, k, spectrum=img).max_residual < 1e-7


def test_periodicity_and_imaginary_rotation():
    spec = periodic_spec(SRC)
    rng = np.random.default_rng(7)
    theta = rng.uniform(0.05, 1.5, 50)
    v = periodic_potential_at(spec, theta)
    assert np.allclose(periodic_potential_at(spec, theta + np.pi), v, rtol=1e-12, atol=1e-12)
    assert np.allclose(hyperbolic_at_imaginary(spec, theta), v, rtol=1e-12, atol=1e-12)
    with pytest.raises(PoleError):
        periodic_potential_at(spec, np.pi / 2)


def test_periodic_pt_symmetry():
    assert pt_transform_check(periodic_spec(SRC))
