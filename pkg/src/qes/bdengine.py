"""Series ODEs, three-term recursions and Bender-Dunne polynomial families.

Every family is compiled to the canonical form

    t(t-1) eta'' + (a2 t^2 + a1 t + a0) eta' + (b1 t + b0) eta = 0,

with ``b0 = eps/4``. A power series ``eta = sum c_n t^n`` then obeys a
three-term recursion, and rescaling ``c_n = P_n / (n! (nu)_n)`` with
``nu = -a0`` turns it into

    P_{n+1} = A(n, eps) P_n - B(n) P_{n-1},   P_0 = 1,

which is the BD recursion. Nothing here is specific to one family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .models import (Family, ModelSpec, check_qes, eps_energy_map, gauge_constants,
                     series_variable, snap_to_condition, branch_reflect)
from .polyalg import ONE, ZERO, CRational, EpsPolynomial, I, poly_roots

QUARTER = CRational(Fraction(1, 4))
EPS_OVER_4 = EpsPolynomial([0, QUARTER])


class UnsupportedBranch(ValueError):
    pass


class NormalizationFailure(ArithmeticError):
    pass


class DegenerateRoots(ValueError):
    pass


_SUBSTITUTION = {"cosh2": "t = cosh(x)^2", "neg_sinh2": "t = -sinh(x)^2"}


@dataclass(frozen=True)
class SeriesODE:
    a2: CRational
    a1: CRational
    a0: CRational
    b1: CRational
    b0: EpsPolynomial = EPS_OVER_4
    variable: str = "cosh2"
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    kappa: CRational = ZERO

    @property
    def substitution(self) -> str:
        return _SUBSTITUTION[self.variable]

    @property
    def nu(self) -> CRational:
        return -self.a0

    def reflected(self) -> "SeriesODE":
        """Same ODE in u = 1 - t, re-based so that b0 is again eps/4."""
        a2, a1, a0, b1 = self.a2, self.a1, self.a0, self.b1
        return SeriesODE(-a2, 2 * a2 + a1, -(a2 + a1 + a0), -b1, EPS_OVER_4,
                         "neg_sinh2" if self.variable == "cosh2" else "cosh2",
                         self.alpha, self.beta, self.kappa)

    def apply(self, poly_coeffs, t, eps):
        """Evaluate the canonical left-hand side on eta(t) = sum c_k t^k (numeric)."""
        c = np.asarray(poly_coeffs, dtype=complex)
        t = np.asarray(t, dtype=complex)
        eta = np.polynomial.polynomial.polyval(t, c)
        d1 = np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(c))
        d2 = np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(c, 2))
        a2, a1, a0, b1 = (complex(v) for v in (self.a2, self.a1, self.a0, self.b1))
        b0 = complex(self.b0(CRational(0))) + complex(self.b0.coeff(1)) * eps
        return t * (t - 1) * d2 + (a2 * t * t + a1 * t + a0) * d1 + (b1 * t + b0) * eta

    def to_dict(self) -> dict:
        return {
            "a2": self.a2.to_json(), "a1": self.a1.to_json(), "a0": self.a0.to_json(),
            "b1": self.b1.to_json(), "b0": self.b0.to_json(),
            "variable": self.variable, "substitution": self.substitution,
            "alpha": str(self.alpha), "beta": str(self.beta),
        }


def build_series_ode(spec: ModelSpec, force: bool = False) -> SeriesODE:
    """Canonical series ODE for the family/branch of ``spec``.

    Unless ``force`` is set the QES condition must hold; M is snapped onto
    its exact QES value when it only holds within tolerance.
    """
    if spec.family is Family.PeriodicDSG:
        raise UnsupportedBranch("no native series ODE for the periodic family; "
                                "it is transported from ComplexDSHG")
    if not force:
        spec = snap_to_condition(spec)
    gc = gauge_constants(spec)
    k, al, be = gc.kappa, gc.alpha, gc.beta
    ode = SeriesODE(
        a2=4 * k,
        a1=1 - 4 * k + al + be,
        a0=CRational(-(al + Fraction(1, 2))),
        b1=gc.K1 / 2,
        b0=EPS_OVER_4,
        variable="cosh2",
        alpha=al,
        beta=be,
        kappa=k,
    )
    if series_variable(spec) == "neg_sinh2":
        ode = ode.reflected()
    return ode


def _pochhammer(x: CRational, n: int) -> CRational:
    out = ONE
    for k in range(n):
        out = out * (x + k)
    return out


@dataclass(frozen=True)
class Recursion:
    ode: SeriesODE

    def A(self, n: int) -> EpsPolynomial:
        """Coefficient of P_n: eps/4 + n(n-1+a1)."""
        return self.ode.b0 + CRational(n * (n - 1)) + self.ode.a1 * n

    def B(self, n: int) -> CRational:
        """Coefficient of P_{n-1} (with a minus sign): -n(n+nu-1)(a2(n-1)+b1)."""
        o = self.ode
        return -(o.nu + (n - 1)) * n * (o.a2 * (n - 1) + o.b1)

    def polynomials(self, N: int) -> list[EpsPolynomial]:
        P = [EpsPolynomial.constant(ONE)]
        prev = EpsPolynomial()
        for n in range(N):
            nxt = self.A(n) * P[n] - prev * self.B(n)
            prev = P[n]
            P.append(nxt)
        return P

    def series_scale(self, n: int) -> CRational:
        """Factor with c_n = P_n * series_scale(n), taking c_0 = 1."""
        den = _pochhammer(self.ode.nu, n) * math.factorial(n)
        if den.is_zero():
            raise NormalizationFailure(f"(nu)_{n} vanishes for nu = {self.ode.nu}")
        return ONE / den

    def c_recursion(self, n: int, eps):
        """Coefficients (of c_{n+1}, c_n, c_{n-1}) of the raw series recursion."""
        o = self.ode
        b0 = complex(o.b0.coeff(0)) + complex(o.b0.coeff(1)) * eps
        return (complex((o.a0 - n) * (n + 1)),
                n * (n - 1) + complex(o.a1) * n + b0,
                complex(o.a2 * (n - 1) + o.b1))


def ode_to_recursion(ode: SeriesODE) -> Recursion:
    nu = ode.nu
    if nu.is_real() and nu.re.denominator == 1 and nu.re <= 0:
        raise NormalizationFailure(f"nu = {nu} hits a pole of Gamma; c_n -> P_n rescaling fails")
    return Recursion(ode)


def closed_form_norms(spec: ModelSpec, N: int) -> list[CRational] | None:
    """Tabulated gamma_n = (4ai)^n n! prod (k+l+1/2)(M-2k-2l-1), complex branch i only."""
    base = branch_reflect(spec)
    if base.family is not Family.ComplexDSHG or base.branch != "i":
        return None
    a, l, M = base.a, base.l, base.M
    out, acc = [], ONE
    out.append(acc)
    for k in range(1, N + 1):
        acc = acc * (4 * a * I) * k * (k + l + Fraction(1, 2)) * (M - 2 * k - 2 * l - 1)
        out.append(acc)
    return out


def functional_moments(polys: list[EpsPolynomial]) -> list[CRational]:
    """m_k = L[eps^k] for the functional with L[P_n] = delta_{n0}."""
    m: list[CRational] = []
    for n, P in enumerate(polys):
        acc = ONE if n == 0 else ZERO
        for j in range(n):
            acc = acc - P.coeff(j) * m[j]
        m.append(acc / P.coeff(n))
    return m


def apply_functional(q: EpsPolynomial, m: list[CRational]) -> CRational:
    if q.degree >= len(m):
        raise ValueError("not enough moments for this degree")
    acc = ZERO
    for j, c in enumerate(q.coeffs):
        acc = acc + c * m[j]
    return acc


@dataclass(frozen=True)
class Norms:
    functional: tuple[CRational, ...]
    closed_form: tuple[CRational, ...] | None

    @property
    def mismatches(self) -> list[int]:
        if self.closed_form is None:
            return []
        return [n for n, (f, c) in enumerate(zip(self.functional, self.closed_form)) if f != c]


def norms(rec: Recursion, N: int, spec: ModelSpec | None = None) -> Norms:
    """gamma_n = L[P_n^2] from the moment functional, alongside the tabulated closed form."""
    polys = rec.polynomials(2 * N)
    m = functional_moments(polys)
    func = tuple(apply_functional(polys[n] * polys[n], m) for n in range(N + 1))
    closed = closed_form_norms(spec, N) if spec is not None else None
    return Norms(func, tuple(closed) if closed is not None else None)


@dataclass
class BDFamily:
    spec: ModelSpec
    ode: SeriesODE
    polynomials: list[EpsPolynomial]
    critical_index: int
    norms: Norms
    roots: tuple[complex, ...] = ()
    weights: tuple[complex, ...] | None = None
    moments: tuple[complex, ...] | None = None
    moments_E: tuple[complex, ...] | None = None
    energy_map: object = field(default=None, repr=False)

    @property
    def critical(self) -> EpsPolynomial:
        return self.polynomials[self.critical_index]

    def to_dict(self) -> dict:
        def cpair(z):
            return [float(z.real), float(z.imag)]

        return {
            "model": self.spec.to_dict(),
            "ode": self.ode.to_dict(),
            "critical_index": self.critical_index,
            "polynomials": [P.to_json() for P in self.polynomials],
            "norms": [n.to_json() for n in self.norms.functional],
            "norms_closed_form": (None if self.norms.closed_form is None
                                  else [n.to_json() for n in self.norms.closed_form]),
            "roots": [cpair(r) for r in self.roots],
            "weights": None if self.weights is None else [cpair(w) for w in self.weights],
            "moments": None if self.moments is None else [cpair(m) for m in self.moments],
            "moments_E": None if self.moments_E is None else [cpair(m) for m in self.moments_E],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BDFamily":
        spec = ModelSpec.from_dict(d["model"])
        cp = (lambda vals: None if vals is None else tuple(complex(x, y) for x, y in vals))
        closed = d.get("norms_closed_form")
        fam = cls(
            spec=spec,
            ode=build_series_ode(spec, force=True),
            polynomials=[EpsPolynomial.from_json(p) for p in d["polynomials"]],
            critical_index=d["critical_index"],
            norms=Norms(tuple(CRational.from_json(x) for x in d["norms"]),
                        None if closed is None else tuple(CRational.from_json(x) for x in closed)),
            roots=cp(d["roots"]),
            weights=cp(d["weights"]),
            moments=cp(d["moments"]),
            moments_E=cp(d["moments_E"]),
        )
        fam.energy_map = eps_energy_map(spec)
        return fam


def generate_family(rec: Recursion, N: int, spec: ModelSpec,
                    n_moments: int = 40) -> BDFamily:
    cond = check_qes(spec).require()
    p = cond.p
    if N < p:
        raise ValueError(f"N={N} below the critical index p={p}")
    spec = snap_to_condition(spec, cond)
    polys = rec.polynomials(N)
    fam = BDFamily(spec, rec.ode, polys, p, norms(rec, N, spec),
                   energy_map=eps_energy_map(spec))
    fam.roots = poly_roots(fam.critical).roots
    try:
        w, mu, muE = weights_and_moments(fam, p, n_moments)
        fam.weights, fam.moments, fam.moments_E = w, mu, muE
    except DegenerateRoots:
        pass
    return fam


def bd_family(spec: ModelSpec, N: int | None = None, n_moments: int = 40) -> BDFamily:
    """Convenience: ODE -> recursion -> family, with N defaulting to p + 3."""
    cond = check_qes(spec).require()
    rec = ode_to_recursion(build_series_ode(spec))
    return generate_family(rec, N if N is not None else cond.p + 3, spec, n_moments)


def weights_and_moments(family: BDFamily, p: int | None = None, n_max: int = 40):
    """Discrete weights on the critical roots and the resulting moments.

    Solves sum_i w_i P_n(eps_i) = delta_{n0} for n < p; moments are
    mu_n = sum_i w_i eps_i^n, and the same in the energy variable.
    """
    p = family.critical_index if p is None else p
    roots = np.array(poly_roots(family.polynomials[p]).roots)
    for i in range(p):
        for j in range(i + 1, p):
            if abs(roots[i] - roots[j]) < 1e-7:
                raise DegenerateRoots(f"critical roots {roots[i]} and {roots[j]} collide")
    V = np.array([[complex(family.polynomials[n](complex(r))) for r in roots] for n in range(p)])
    rhs = np.zeros(p, dtype=complex)
    rhs[0] = 1.0
    w = np.linalg.solve(V, rhs)
    emap = family.energy_map or eps_energy_map(family.spec)
    E = np.array([emap.to_energy(complex(r)) for r in roots])
    mu = tuple(complex(np.sum(w * roots ** n)) for n in range(n_max + 1))
    muE = tuple(complex(np.sum(w * E ** n)) for n in range(n_max + 1))
    return tuple(complex(x) for x in w), mu, muE


@dataclass(frozen=True)
class MomentGrowth:
    variable: str
    ratios: tuple[complex, ...]
    dominant_root: complex
    converged: bool
    tabulated_claim: complex

    @property
    def ratio(self) -> complex:
        return self.ratios[-1]


def moment_growth(family: BDFamily, n_max: int = 40, variable: str = "E",
                  tol: float = 1e-6) -> MomentGrowth:
    """Limit of mu_{n+1}/mu_n, compared against the largest-modulus critical root."""
    if family.weights is None:
        raise DegenerateRoots("weights unavailable for this family")
    roots = np.array(family.roots)
    emap = family.energy_map or eps_energy_map(family.spec)
    if variable == "E":
        nodes = np.array([emap.to_energy(complex(r)) for r in roots])
    elif variable == "eps":
        nodes = roots
    else:
        raise ValueError("variable must be 'E' or 'eps'")
    w = np.array(family.weights)
    mu = [complex(np.sum(w * nodes ** n)) for n in range(n_max + 1)]
    ratios = tuple((mu[n + 1] / mu[n]) if mu[n] != 0 else complex("nan")
                   for n in range(n_max))
    dom = complex(nodes[np.argmax(np.abs(nodes))])
    r = ratios[-1]
    converged = bool(np.isfinite(r) and abs(r - dom) <= tol * max(1.0, abs(dom)))
    claim = complex(float(family.spec.M + family.spec.a ** 2))
    return MomentGrowth(variable, ratios, dom, converged, claim)
