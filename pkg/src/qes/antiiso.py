"""Anti-isospectral transport x -> i*theta between the hyperbolic and periodic models.

Substituting x = i*theta into -psi'' + V(x) psi = E psi gives
-psi_theta'' - V(i theta) psi = -E psi, so the periodic partner has potential
-V(i theta) and energies -E, listed in reverse order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .models import Family, ModelSpec, potential_at
from .spectra import Level, QESSpectrum


@dataclass(frozen=True)
class AntiIsoMap:
    source: ModelSpec
    target: ModelSpec
    m: int


def source_spec(spec: ModelSpec) -> ModelSpec:
    if spec.family is not Family.PeriodicDSG:
        raise ValueError("expected a PeriodicDSG spec")
    return replace(spec, family=Family.ComplexDSHG)


def periodic_spec(spec: ModelSpec) -> ModelSpec:
    if spec.family is not Family.ComplexDSHG:
        raise ValueError("expected a ComplexDSHG spec")
    return replace(spec, family=Family.PeriodicDSG)


def anti_iso_map(spec: ModelSpec, m: int) -> AntiIsoMap:
    return AntiIsoMap(spec, periodic_spec(spec), m)


def map_spectrum(src: QESSpectrum) -> QESSpectrum:
    """E_k -> -E_{m-1-k}. Applied to a periodic spectrum it is the inverse map."""
    fam = src.spec.family
    if fam is Family.ComplexDSHG:
        target = periodic_spec(src.spec)
    elif fam is Family.PeriodicDSG:
        target = source_spec(src.spec)
    else:
        raise ValueError("anti-isospectral map needs a ComplexDSHG or PeriodicDSG spectrum")
    m = len(src.levels)
    levels = []
    for k in range(m):
        lv = src.levels[m - 1 - k]
        levels.append(replace(lv, E=-lv.E,
                              E_exact=None if lv.E_exact is None else -lv.E_exact))
    return QESSpectrum(target, src.p, tuple(levels), src.variable)


def periodic_potential_at(spec: ModelSpec, theta):
    if spec.family is not Family.PeriodicDSG:
        raise ValueError("expected a PeriodicDSG spec")
    return potential_at(spec, theta)


def hyperbolic_at_imaginary(spec: ModelSpec, theta):
    """-V_hyperbolic(i theta), which must equal the periodic potential at theta."""
    return -potential_at(source_spec(spec), 1j * np.asarray(theta, dtype=complex))
