"""Hamiltonian families, their QES conditions and pointwise potentials.

Every hyperbolic family is handled through one gauge ansatz

    psi = exp(kappa * cosh 2x) * cosh(x)**alpha * sinh(x)**beta * eta

with ``kappa = i a/2`` for the complex PT-invariant potential and
``kappa = -a/2`` for the Hermitian ones. Branches only change the exponent
pair; the level count is ``p = (M - alpha - beta + 1) / 2``.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .polyalg import CRational, I

INT_TOL = 1e-9


class PoleError(ValueError):
    """Raised when a potential is evaluated on its singular set."""


class QESConditionError(ValueError):
    """Raised when a spectrum is requested for a non-QES parameter point."""

    def __init__(self, message: str, nearest_M: Fraction | None = None):
        super().__init__(message)
        self.nearest_M = nearest_M


class Family(str, enum.Enum):
    ComplexDSHG = "ComplexDSHG"
    PeriodicDSG = "PeriodicDSG"
    RealDSHG_V1 = "RealDSHG_V1"
    RealDSHG_V2 = "RealDSHG_V2"
    RealDSHG_V3 = "RealDSHG_V3"

    @property
    def is_real(self) -> bool:
        return self in (Family.RealDSHG_V1, Family.RealDSHG_V2, Family.RealDSHG_V3)

    @property
    def cli_name(self) -> str:
        return _CLI_NAMES[self]

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip()
        for fam in cls:
            if key in (fam.value, fam.cli_name) or key.lower() == fam.value.lower():
                return fam
        raise ValueError(f"unknown family {name!r}; expected one of "
                         f"{', '.join(f.cli_name for f in cls)}")


_CLI_NAMES = {
    Family.ComplexDSHG: "complex-dshg",
    Family.PeriodicDSG: "periodic-dsg",
    Family.RealDSHG_V1: "real-v1",
    Family.RealDSHG_V2: "real-v2",
    Family.RealDSHG_V3: "real-v3",
}

BRANCHES = {
    Family.ComplexDSHG: ("i", "ii", "iii", "iv"),
    Family.PeriodicDSG: ("i", "ii", "iii", "iv"),
    Family.RealDSHG_V1: ("i", "ii"),
    Family.RealDSHG_V2: ("i", "ii"),
    Family.RealDSHG_V3: ("i", "ii", "iii", "iv"),
}

# Branches that are computed directly; the rest are parameter reflections of these.
BASE_BRANCHES = {
    Family.ComplexDSHG: ("i", "iii"),
    Family.PeriodicDSG: ("i", "iii"),
    Family.RealDSHG_V1: ("i",),
    Family.RealDSHG_V2: ("i",),
    Family.RealDSHG_V3: ("i",),
}


def to_fraction(x, strict: bool = False) -> Fraction:
    """Exact rational from a model parameter.

    Floats go through their shortest decimal repr, so ``0.1`` becomes 1/10.
    ``strict`` refuses floats altogether.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a model parameter")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if strict:
            raise TypeError("strict mode requires rational (string/int/Fraction) parameters")
        if not math.isfinite(x):
            raise ValueError("model parameters must be finite")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as a model parameter")


@dataclass(frozen=True)
class ModelSpec:
    """One Hamiltonian instance: family, parameters, branch and sector."""

    family: Family
    a: Fraction
    M: Fraction
    l: Fraction
    g: Fraction = Fraction(0)
    branch: str = "i"
    sector: int = 0
    strict: bool = False

    def __post_init__(self):
        fam = self.family if isinstance(self.family, Family) else Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        for name in ("a", "M", "l", "g"):
            object.__setattr__(self, name, to_fraction(getattr(self, name), self.strict))
        if self.a <= 0:
            raise ValueError("a must be positive")
        if self.branch not in BRANCHES[fam]:
            raise ValueError(f"branch {self.branch!r} not admissible for {fam.value}; "
                             f"choose from {BRANCHES[fam]}")
        if self.sector not in (0, 1):
            raise ValueError("sector must be 0 or 1")
        if fam in (Family.ComplexDSHG, Family.PeriodicDSG, Family.RealDSHG_V1,
                   Family.RealDSHG_V3) and not (-1 < self.l < 0):
            warnings.warn(f"l={self.l} outside (-1, 0) for {fam.value}: the 1/sinh^2 term is "
                          "more singular than the model assumes; results carry no guarantee",
                          stacklevel=3)

    @property
    def uses_sector(self) -> bool:
        return self.family in (Family.RealDSHG_V1, Family.RealDSHG_V2)

    def with_params(self, **kw) -> "ModelSpec":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "a": str(self.a),
            "M": str(self.M),
            "l": str(self.l),
            "g": str(self.g),
            "branch": self.branch,
            "sector": self.sector,
        }

    @classmethod
    def from_dict(cls, d: dict, strict: bool = False) -> "ModelSpec":
        unknown = set(d) - {"family", "a", "M", "l", "g", "branch", "sector"}
        if unknown:
            raise ValueError(f"unknown ModelSpec keys: {sorted(unknown)}")
        return cls(Family.parse(d["family"]), d["a"], d["M"], d["l"], d.get("g", "0"),
                   d.get("branch", "i"), int(d.get("sector", 0)), strict)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, strict: bool = False) -> "ModelSpec":
        return cls.from_dict(json.loads(text), strict)


def exponents(spec: ModelSpec) -> tuple[Fraction, Fraction]:
    """(alpha, beta): powers of cosh(x) and sinh(x) peeled off psi."""
    l, g, s = spec.l, spec.g, Fraction(spec.sector)
    fam, br = spec.family, spec.branch
    if fam in (Family.ComplexDSHG, Family.PeriodicDSG):
        return {"i": (l + 1, l + 1), "ii": (-l, -l), "iii": (-l, l + 1), "iv": (l + 1, -l)}[br]
    if fam is Family.RealDSHG_V1:
        return (s, l + 1) if br == "i" else (s, -l)
    if fam is Family.RealDSHG_V2:
        return (l + 1, s) if br == "i" else (-l, s)
    return {"i": (g + 1, l + 1), "ii": (-g, -l), "iii": (g + 1, -l), "iv": (-g, l + 1)}[br]


_CONDITION_KIND = {
    (Family.ComplexDSHG, "i"): "M-2l-1 = 2p",
    (Family.ComplexDSHG, "ii"): "M+2l+1 = 2p",
    (Family.ComplexDSHG, "iii"): "M = 2p",
    (Family.ComplexDSHG, "iv"): "M = 2p",
    (Family.RealDSHG_V1, "i"): "M = l+2p+s",
    (Family.RealDSHG_V1, "ii"): "M = -l+2p+s-1",
    (Family.RealDSHG_V2, "i"): "M = l+2p+s",
    (Family.RealDSHG_V2, "ii"): "M = -l+2p+s-1",
    (Family.RealDSHG_V3, "i"): "M = l+g+2p+1",
    (Family.RealDSHG_V3, "ii"): "M = -l-g+2p-1",
    (Family.RealDSHG_V3, "iii"): "M = -l+g+2p",
    (Family.RealDSHG_V3, "iv"): "M = l-g+2p",
}


@dataclass(frozen=True)
class QESCondition:
    p: int
    condition_kind: str
    satisfied: bool
    p_exact: Fraction
    nearest_M: Fraction

    def require(self) -> "QESCondition":
        if not self.satisfied:
            raise QESConditionError(
                f"QES condition {self.condition_kind} not satisfied "
                f"(p = {float(self.p_exact):g}); nearest valid M = {self.nearest_M}",
                self.nearest_M)
        return self


def _qes_M(spec: ModelSpec, p: int) -> Fraction:
    al, be = exponents(spec)
    return al + be + 2 * p - 1


def check_qes(spec: ModelSpec) -> QESCondition:
    """Number of QES levels and which integer condition holds for this branch."""
    al, be = exponents(spec)
    fam = Family.ComplexDSHG if spec.family is Family.PeriodicDSG else spec.family
    kind = _CONDITION_KIND[(fam, spec.branch)]
    p_exact = (spec.M - al - be + 1) / 2
    k = round(p_exact)
    if spec.strict:
        ok = p_exact.denominator == 1 and p_exact >= 1
    else:
        ok = abs(float(p_exact) - k) <= INT_TOL and k >= 1
    p = int(k) if ok else 0
    nearest = _qes_M(spec, max(1, int(k)))
    return QESCondition(p, kind, ok, p_exact, nearest)


def snap_to_condition(spec: ModelSpec, cond: QESCondition | None = None) -> ModelSpec:
    """Return spec with M moved onto the exact QES value (no-op when already exact)."""
    cond = cond or check_qes(spec)
    cond.require()
    M = _qes_M(spec, cond.p)
    return spec if M == spec.M else replace(spec, M=M)


def branch_reflect(spec: ModelSpec) -> ModelSpec:
    """Map a branch onto its base branch with reflected parameters.

    Uses l -> -l-1 (and g -> -g-1 for V3); the Hamiltonian is unchanged
    because l(l+1) and g(g+1) are invariant.
    """
    l2, g2 = -spec.l - 1, -spec.g - 1
    fam, br = spec.family, spec.branch
    if br in BASE_BRANCHES[fam]:
        return spec
    if fam in (Family.ComplexDSHG, Family.PeriodicDSG):
        return replace(spec, l=l2, branch="i" if br == "ii" else "iii")
    if fam in (Family.RealDSHG_V1, Family.RealDSHG_V2):
        return replace(spec, l=l2, branch="i")
    new = {"ii": (l2, g2), "iii": (l2, spec.g), "iv": (spec.l, g2)}[br]
    return replace(spec, l=new[0], g=new[1], branch="i")


class GaugeConstants(NamedTuple):
    """Constants of the gauged equation eta'' + 2F'eta' + (E + K0 + K1 cosh 2x) eta = 0."""

    kappa: CRational
    alpha: Fraction
    beta: Fraction
    K0: CRational
    K1: CRational


def gauge_constants(spec: ModelSpec) -> GaugeConstants:
    if spec.family is Family.PeriodicDSG:
        raise ValueError("periodic family is transported from the hyperbolic one; "
                         "use its ComplexDSHG source spec")
    al, be = exponents(spec)
    a = CRational(spec.a)
    if spec.family is Family.ComplexDSHG:
        kappa, c, m = I * a / 2, CRational(-1), I * spec.M
    else:
        kappa, c, m = -a / 2, CRational(1), CRational(spec.M)
    K0 = -4 * kappa * kappa + 4 * kappa * (be - al) + (al + be) ** 2 - c * m * m
    K1 = 4 * kappa * (1 + al + be) + 2 * a * c * m
    return GaugeConstants(kappa, al, be, K0, K1)


def series_variable(spec: ModelSpec) -> str:
    """'cosh2' for t = cosh^2 x, 'neg_sinh2' for t = -sinh^2 x (the V2 expansion)."""
    return "neg_sinh2" if spec.family is Family.RealDSHG_V2 else "cosh2"


@dataclass(frozen=True)
class EpsEnergyMap:
    """Affine map E = slope * eps + offset (exact)."""

    offset: CRational
    slope: int = 1

    def to_energy(self, eps):
        if isinstance(eps, CRational):
            return eps * self.slope + self.offset
        return self.slope * eps + complex(self.offset)

    def to_eps(self, E):
        if isinstance(E, CRational):
            return (E - self.offset) * self.slope
        return self.slope * (E - complex(self.offset))


def eps_energy_map(spec: ModelSpec) -> EpsEnergyMap:
    if spec.family is Family.PeriodicDSG:
        src = eps_energy_map(replace(spec, family=Family.ComplexDSHG))
        return EpsEnergyMap(-src.offset, -1)
    gc = gauge_constants(spec)
    if series_variable(spec) == "cosh2":
        return EpsEnergyMap(gc.K1 - gc.K0)
    return EpsEnergyMap(-gc.K0 - gc.K1)


def singular_distance(spec: ModelSpec, x) -> np.ndarray:
    """Distance from x to the nearest pole/branch point of the potential and psi."""
    x = np.asarray(x, dtype=complex)
    if spec.family is Family.PeriodicDSG:
        re = np.real(x)
        k = np.round(re / (np.pi / 2))
        return np.abs(x - k * np.pi / 2)
    im = np.imag(x)
    if spec.family is Family.RealDSHG_V2:
        k = np.round(im / np.pi - 0.5)
        return np.abs(x - 1j * (k + 0.5) * np.pi)
    k = np.round(im / (np.pi / 2))
    return np.abs(x - 1j * k * np.pi / 2)


def potential_at(spec: ModelSpec, x):
    """Complex potential value(s); works on scalars and numpy arrays."""
    xa = np.asarray(x, dtype=complex)
    a, M = float(spec.a), float(spec.M)
    L = float(spec.l * (spec.l + 1))
    G = float(spec.g * (spec.g + 1))
    fam = spec.family
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam is Family.PeriodicDSG:
            s, c = np.sin(xa), np.cos(xa)
            _check_pole(s, c)
            v = (a * np.cos(2 * xa) - 1j * M) ** 2 + L / s ** 2 + L / c ** 2
        else:
            sh, ch = np.sinh(xa), np.cosh(xa)
            c2 = np.cosh(2 * xa)
            if fam is Family.ComplexDSHG:
                _check_pole(sh, ch)
                v = -(a * c2 - 1j * M) ** 2 + L / sh ** 2 - L / ch ** 2
            elif fam is Family.RealDSHG_V1:
                _check_pole(sh)
                v = (a * c2 - M) ** 2 + L / sh ** 2
            elif fam is Family.RealDSHG_V2:
                _check_pole(ch)
                v = (a * c2 - M) ** 2 - L / ch ** 2
            else:
                _check_pole(sh, ch)
                v = (a * c2 - M) ** 2 + L / sh ** 2 - G / ch ** 2
    return v[()] if v.ndim == 0 else v


def _check_pole(*factors, tol: float = 1e-12):
    for f in factors:
        if np.any(np.abs(f) < tol):
            raise PoleError("potential evaluated at a pole")


def parity_map(spec: ModelSpec):
    if spec.family is Family.ComplexDSHG:
        return lambda x: 1j * np.pi / 2 - x
    if spec.family is Family.PeriodicDSG:
        return lambda x: np.pi / 2 - x
    return lambda x: -x


PT_SAMPLES = np.concatenate([
    np.linspace(0.15, 2.0, 16),
    np.array([0.3 + 0.2j, 0.8 - 0.3j, 1.2 + 0.4j, 0.5 + 0.6j]),
])


def pt_transform_check(spec: ModelSpec, parity=None, tol: float = 1e-10) -> bool:
    """True iff V(P x) == conj(V(conj x)) on a sample grid (real x: V(Px) == conj V(x))."""
    P = parity or parity_map(spec)
    x = PT_SAMPLES
    lhs = potential_at(spec, P(x))
    rhs = np.conj(potential_at(spec, np.conj(x)))
    err = np.abs(lhs - rhs) / (1.0 + np.abs(rhs))
    return bool(np.all(err < tol))
