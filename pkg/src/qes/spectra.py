"""QES energy levels, eigenfunctions and the literal closed-form reference table."""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .bdengine import Recursion, SeriesODE, build_series_ode, ode_to_recursion
from .models import (Family, ModelSpec, branch_reflect, check_qes, eps_energy_map,
                     snap_to_condition)
from .polyalg import CRational, poly_roots

REAL_TOL = 1e-9


class Unavailable(LookupError):
    """No tabulated closed form for this (family, branch, M) pattern."""


@dataclass(frozen=True)
class Level:
    eps: complex
    E: complex
    eta: tuple[complex, ...]
    reality_class: str = "Real"
    E_exact: CRational | None = None
    multiplicity: int = 1

    def to_dict(self) -> dict:
        d = {
            "eps": [self.eps.real, self.eps.imag],
            "E": [self.E.real, self.E.imag],
            "eta": [[c.real, c.imag] for c in self.eta],
            "class": self.reality_class,
        }
        if self.E_exact is not None:
            d["E_exact"] = self.E_exact.to_json()
        if self.multiplicity != 1:
            d["multiplicity"] = self.multiplicity
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Level":
        return cls(
            complex(*d["eps"]), complex(*d["E"]),
            tuple(complex(x, y) for x, y in d["eta"]), d["class"],
            CRational.from_json(d["E_exact"]) if "E_exact" in d else None,
            d.get("multiplicity", 1),
        )


@dataclass(frozen=True)
class QESSpectrum:
    spec: ModelSpec
    p: int
    levels: tuple[Level, ...]
    variable: str = "cosh2"

    @property
    def energies(self) -> list[complex]:
        return [lv.E for lv in self.levels]

    def to_dict(self) -> dict:
        return {
            "model": self.spec.to_dict(),
            "p": self.p,
            "variable": self.variable,
            "levels": [lv.to_dict() for lv in self.levels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QESSpectrum":
        return cls(ModelSpec.from_dict(d["model"]), d["p"],
                   tuple(Level.from_dict(x) for x in d["levels"]), d.get("variable", "cosh2"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _sort_key(lv: Level):
    # rounding keeps conjugate pairs ordered by Im instead of by float noise in Re
    return (round(lv.E.real, 9), lv.E.imag)


def classify_energies(E: list[complex], tol: float = REAL_TOL) -> list[str]:
    out = []
    for k, e in enumerate(E):
        if abs(e.imag) < tol:
            out.append("Real")
        elif any(j != k and abs(E[j] - e.conjugate()) < tol for j in range(len(E))):
            out.append("ComplexConjugatePair")
        else:
            out.append("Complex")
    return out


def reality_classify(spectrum: QESSpectrum, tol: float = REAL_TOL) -> list[str]:
    return classify_energies(spectrum.energies, tol)


def series_coefficients(rec: Recursion, p: int, eps) -> tuple[complex, ...]:
    """eta coefficients c_0..c_{p-1} at a critical root (c_0 = 1)."""
    polys = rec.polynomials(max(p - 1, 0))
    return tuple(complex(polys[n](complex(eps))) * complex(rec.series_scale(n))
                 for n in range(p))


def qes_spectrum(spec: ModelSpec, root_tol: float = 1e-10) -> QESSpectrum:
    """Critical-polynomial roots mapped to energies, with eigenfunction coefficients."""
    if spec.family is Family.PeriodicDSG:
        from .antiiso import map_spectrum, source_spec
        return map_spectrum(qes_spectrum(source_spec(spec), root_tol))
    cond = check_qes(spec).require()
    spec = snap_to_condition(spec, cond)
    ode = build_series_ode(spec)
    rec = ode_to_recursion(ode)
    P = rec.polynomials(cond.p)
    rs = poly_roots(P[cond.p], root_tol=root_tol)
    emap = eps_energy_map(spec)
    levels = []
    for k, r in enumerate(rs.roots):
        exact = emap.to_energy(rs.exact[k]) if rs.exact else None
        E = complex(exact) if exact is not None else emap.to_energy(r)
        levels.append(Level(r, E, series_coefficients(rec, cond.p, r), "Real", exact,
                            rs.multiplicity[k]))
    levels.sort(key=_sort_key)
    classes = classify_energies([lv.E for lv in levels])
    levels = tuple(replace(lv, reality_class=c) for lv, c in zip(levels, classes))
    return QESSpectrum(spec, cond.p, levels, ode.variable)


def _t_of_x(variable: str, x):
    ch = np.cosh(x)
    return ch * ch if variable == "cosh2" else 1.0 - ch * ch


@dataclass(frozen=True)
class WaveFunction:
    """psi(x) = exp(kappa cosh 2x) cosh^alpha sinh^beta sum_n c_n t(x)^n.

    For the periodic family the hyperbolic function is evaluated at i*theta.
    """

    spec: ModelSpec
    index: int
    E: complex
    eta: tuple[complex, ...]
    kappa: complex
    alpha: float
    beta: float
    variable: str
    rotate: bool = False

    def _x(self, x):
        x = np.asarray(x, dtype=complex)
        return 1j * x if self.rotate else x

    def eta_at(self, x):
        t = _t_of_x(self.variable, self._x(x))
        return np.polynomial.polynomial.polyval(t, np.asarray(self.eta, dtype=complex))

    def log_prefactor(self, x):
        x = self._x(x)
        return (self.kappa * np.cosh(2 * x) + self.alpha * np.log(np.cosh(x))
                + self.beta * np.log(np.sinh(x)))

    def log_abs(self, x):
        """log|psi(x)|, finite far beyond the range where psi itself over/underflows."""
        with np.errstate(divide="ignore"):
            return np.real(self.log_prefactor(x)) + np.log(np.abs(self.eta_at(x)))

    def __call__(self, x):
        out = np.exp(self.log_prefactor(x)) * self.eta_at(x)
        return out[()] if np.ndim(out) == 0 else out


def wavefunction(spec: ModelSpec, level: int, spectrum: QESSpectrum | None = None,
                 eta: tuple[complex, ...] | None = None, E: complex | None = None) -> WaveFunction:
    """Eigenfunction of a QES level; ``eta``/``E`` override the spectrum's values."""
    spectrum = spectrum or qes_spectrum(spec)
    if not 0 <= level < len(spectrum.levels):
        raise IndexError(f"level {level} outside 0..{len(spectrum.levels) - 1}")
    lv = spectrum.levels[level]
    hyp = spectrum.spec
    rotate = False
    if hyp.family is Family.PeriodicDSG:
        from .antiiso import source_spec
        hyp = source_spec(hyp)
        rotate = True
    ode = build_series_ode(hyp)
    return WaveFunction(spectrum.spec, level, lv.E if E is None else E,
                        lv.eta if eta is None else tuple(eta), complex(ode.kappa),
                        float(ode.alpha), float(ode.beta), ode.variable, rotate)


# Literal closed forms, keyed by (family, base branch, p, sector). Each returns
# named variants; every variant is a list of E values in the hyperbolic frame.

def _sq(z):
    return cmath.sqrt(complex(z))


def _complex_i(a, l, M, g, p, s):
    if p == 1:
        return {"as_printed": [-a * a + 4 * l + 5]}
    d = (2 * l + 3) ** 2 - 4 * a * a
    base = 8 * l + 15 - a * a
    return {"as_printed": [base + _sq(d), base - _sq(d)],
            "recursion": [base + 2 * _sq(d), base - 2 * _sq(d)]}


def _complex_iii(a, l, M, g, p, s):
    if p == 1:
        return {"as_printed": [3 - a * a - 2j * a * (1 + 2 * l)]}
    r = _sq((1 - a * a) - 1j * a * (1 + 2 * l))
    c = 11 - a * a - 2j * a * (1 + 2 * l)
    return {"as_printed": [c + r, c - r], "recursion": [c + 4 * r, c - 4 * r]}


def _v1(a, l, M, g, p, s):
    if p == 1:
        return {"as_printed": [a * a + 2 * a * (l + 1) + 2 * l + 3 if s == 0
                               else a * a + 2 * a * l + 2 * l + 5]}
    if s == 0:
        r = 2 * _sq((l + 2 + 2 * a) ** 2 - 4 * a)
        y = [-2 * (l + 2 + 2 * a) + r, -2 * (l + 2 + 2 * a) - r]
        return {"as_printed": [v + a * a + 3 * (2 * l + 5) + 2 * (l + 3) * a for v in y]}
    r = 2 * _sq((l + 2 * a) ** 2 + 3 * (2 * l + 3))
    y = [-(4 * l + 9 + 8 * a) + r, -(4 * l + 9 + 8 * a) - r]
    return {"as_printed": [v + a * a + 8 * (l + 3) + 2 * (l + 4) * a for v in y]}


def _v2(a, l, M, g, p, s):
    if p == 1:
        return {"as_printed": [a * a - 2 * a * (l + 1) + 2 * l + 3 if s == 0
                               else a * a - 2 * a * l + 2 * l + 5]}
    if s == 0:
        r = 2 * _sq((l + 2 + 2 * a) ** 2 - 4 * a * (2 * l + 3))
        y = [-2 * (l + 2 + 2 * a) + r, -2 * (l + 2 + 2 * a) - r]
        return {"as_printed": [v + a * a + 3 * (2 * l + 5) - 2 * a * (l - 1) for v in y]}
    r = 2 * _sq((l - 2 * a) ** 2 + 3 * (2 * l + 3))
    y = [-(4 * l + 9 + 4 * a) + r, -(4 * l + 9 + 4 * a) - r]
    return {"as_printed": [v + a * a + 8 * (l + 3) - 2 * a * (l - 2) for v in y]}


def _v3(a, l, M, g, p, s):
    if p == 1:
        return {"as_printed": [a * a - 2 * a * (2 * g + 3) + 2 * l + 2 * g + 5]}
    r = 2 * _sq((l + g + 3 + 2 * a) ** 2 - 4 * a * (2 * g + 3))
    y = [-2 * (l + g + 3 + 2 * a) + r, -2 * (l + g + 3 + 2 * a) - r]
    shift = M * M + a * a - (l + g + 2) ** 2 - 2 * a * (2 * g - M + 3)
    return {"as_printed": [v + shift for v in y]}


_CLOSED_FORMS: dict[tuple[Family, str], tuple[Callable, set]] = {
    (Family.ComplexDSHG, "i"): (_complex_i, {(1, 0), (2, 0)}),
    (Family.ComplexDSHG, "iii"): (_complex_iii, {(1, 0), (2, 0)}),
    (Family.RealDSHG_V1, "i"): (_v1, {(1, 0), (1, 1), (2, 0), (2, 1)}),
    (Family.RealDSHG_V2, "i"): (_v2, {(1, 0), (1, 1), (2, 0), (2, 1)}),
    (Family.RealDSHG_V3, "i"): (_v3, {(1, 0), (2, 0)}),
}


@dataclass(frozen=True)
class ClosedForm:
    key: str
    variants: dict[str, list[complex]] = field(default_factory=dict)


def closed_form_energies(spec: ModelSpec) -> ClosedForm:
    """Tabulated literal energy formulas for the handful of low-lying cases.

    Reference data for reconciliation only; never used as ground truth.
    """
    periodic = spec.family is Family.PeriodicDSG
    hyp = replace(spec, family=Family.ComplexDSHG) if periodic else spec
    cond = check_qes(hyp)
    if not cond.satisfied:
        raise Unavailable("QES condition not satisfied")
    base = branch_reflect(hyp)
    s = base.sector if base.uses_sector else 0
    entry = _CLOSED_FORMS.get((base.family, base.branch))
    if entry is None or (cond.p, s) not in entry[1]:
        raise Unavailable(f"no tabulated form for {base.family.value} branch {base.branch} "
                          f"p={cond.p} s={s}")
    fn = entry[0]
    base = snap_to_condition(base)
    a, l, M, g = (float(base.a), float(base.l), float(base.M), float(base.g))
    variants = {k: [complex(v) for v in vals] for k, vals in fn(a, l, M, g, cond.p, s).items()}
    key = f"{base.family.cli_name}/{base.branch}/p={cond.p}" + (f"/s={s}" if base.uses_sector else "")
    if periodic:
        variants = {k: sorted((-v for v in vals), key=lambda z: (z.real, z.imag))
                    for k, vals in variants.items()}
        key = "periodic-dsg<-" + key
    return ClosedForm(key, variants)
