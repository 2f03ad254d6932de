"""Exact complex-rational scalars and polynomials in the spectral parameter.

All recursion work is done over Q(i) so that cancellations such as the
vanishing of a three-term coefficient at the critical index are exact.
Only root extraction drops to floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

ROOT_TOL = 1e-10
MERGE_TOL = 1e-7


class NotDivisible(ArithmeticError):
    """Raised when an exact polynomial division leaves a remainder."""


class DegenerateLeadingCoefficient(ValueError):
    """Raised when root extraction is asked of a constant polynomial."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class CRational:
    """Complex number with arbitrary-precision rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("CRational is immutable")

    @classmethod
    def coerce(cls, x) -> "CRational":
        if isinstance(x, CRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    @classmethod
    def parse(cls, re: str, im: str = "0") -> "CRational":
        return cls(Fraction(re), Fraction(im))

    def conjugate(self) -> "CRational":
        return CRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __add__(self, other):
        try:
            o = CRational.coerce(other)
        except TypeError:
            return NotImplemented
        return CRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = CRational.coerce(other)
        except TypeError:
            return NotImplemented
        return CRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return CRational.coerce(other) - self

    def __mul__(self, other):
        try:
            o = CRational.coerce(other)
        except TypeError:
            return NotImplemented
        return CRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CRational.coerce(other)
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("CRational division by zero")
        num = self * o.conjugate()
        return CRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        return CRational.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return CRational(1) / (self ** -n)
        out, base = CRational(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        try:
            o = CRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def to_json(self) -> dict:
        return {"re": str(self.re), "im": str(self.im)}

    @classmethod
    def from_json(cls, d: dict) -> "CRational":
        return cls(Fraction(d["re"]), Fraction(d["im"]))


ZERO = CRational(0)
ONE = CRational(1)
I = CRational(0, 1)


class EpsPolynomial:
    """Univariate polynomial in eps with CRational coefficients.

    ``coeffs[k]`` multiplies ``eps**k``. Trailing zeros are trimmed so the
    zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [CRational.coerce(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("EpsPolynomial is immutable")

    @classmethod
    def constant(cls, c) -> "EpsPolynomial":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "EpsPolynomial":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> CRational:
        return self.coeffs[-1] if self.coeffs else ZERO

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> CRational:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    def __add__(self, other):
        return poly_add(self, _as_poly(other))

    __radd__ = __add__

    def __neg__(self):
        return EpsPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return poly_add(self, -_as_poly(other))

    def __rsub__(self, other):
        return poly_add(_as_poly(other), -self)

    def __mul__(self, other):
        if isinstance(other, EpsPolynomial):
            return poly_mul(self, other)
        return poly_scale(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, EpsPolynomial):
            try:
                other = _as_poly(other)
            except TypeError:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        """Horner evaluation: exact for CRational/rational input, numeric otherwise."""
        if isinstance(x, (CRational, int, Fraction)):
            acc = ZERO
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        cs = [complex(c) for c in self.coeffs]
        acc = np.zeros_like(np.asarray(x, dtype=complex))
        for c in reversed(cs):
            acc = acc * x + c
        return acc[()] if np.ndim(acc) == 0 else acc

    def numeric(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=complex)

    def __repr__(self):
        return f"EpsPolynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            tag = "" if k == 0 else ("eps" if k == 1 else f"eps^{k}")
            terms.append(f"({c}){'*' + tag if tag else ''}")
        return " + ".join(terms)

    def to_json(self) -> list:
        return [c.to_json() for c in self.coeffs]

    @classmethod
    def from_json(cls, data: list) -> "EpsPolynomial":
        return cls(CRational.from_json(d) for d in data)


def _as_poly(x) -> EpsPolynomial:
    if isinstance(x, EpsPolynomial):
        return x
    return EpsPolynomial.constant(CRational.coerce(x))


def poly_add(p: EpsPolynomial, q: EpsPolynomial) -> EpsPolynomial:
    n = max(len(p.coeffs), len(q.coeffs))
    return EpsPolynomial(p.coeff(k) + q.coeff(k) for k in range(n))


def poly_mul(p: EpsPolynomial, q: EpsPolynomial) -> EpsPolynomial:
    if p.is_zero() or q.is_zero():
        return EpsPolynomial()
    out = [ZERO] * (len(p.coeffs) + len(q.coeffs) - 1)
    for i, a in enumerate(p.coeffs):
        if a.is_zero():
            continue
        for j, b in enumerate(q.coeffs):
            out[i + j] = out[i + j] + a * b
    return EpsPolynomial(out)


def poly_scale(p: EpsPolynomial, c) -> EpsPolynomial:
    if isinstance(c, EpsPolynomial):
        return poly_mul(p, c)
    c = CRational.coerce(c)
    return EpsPolynomial(a * c for a in p.coeffs)


def poly_divmod(p: EpsPolynomial, d: EpsPolynomial) -> tuple[EpsPolynomial, EpsPolynomial]:
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(p.coeffs)
    dq = d.degree
    lead = d.leading
    if len(rem) - 1 < dq:
        return EpsPolynomial(), p
    quot = [ZERO] * (len(rem) - dq)
    for k in range(len(rem) - 1, dq - 1, -1):
        c = rem[k] / lead
        quot[k - dq] = c
        if c.is_zero():
            continue
        for j, b in enumerate(d.coeffs):
            rem[k - dq + j] = rem[k - dq + j] - c * b
    return EpsPolynomial(quot), EpsPolynomial(rem[:dq])


def poly_divide_exact(p: EpsPolynomial, d: EpsPolynomial) -> EpsPolynomial:
    """Return ``q`` with ``p == q * d`` exactly, else raise :class:`NotDivisible`."""
    q, r = poly_divmod(p, d)
    if not r.is_zero():
        raise NotDivisible(f"remainder {r} is nonzero")
    return q


def expand_roots(roots: Sequence[complex], leading: complex = 1.0) -> np.ndarray:
    """Coefficients (low to high) of ``leading * prod(eps - r)``."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
    return leading * c


@dataclass(frozen=True)
class RootSet:
    roots: tuple[complex, ...]
    multiplicity: tuple[int, ...]
    residual_at_root: tuple[float, ...]
    exact: tuple[CRational, ...] | None = None
    root_tol: float = ROOT_TOL

    @property
    def ok(self) -> bool:
        return all(r <= self.root_tol for r in self.residual_at_root)

    @property
    def has_multiple(self) -> bool:
        return any(m > 1 for m in self.multiplicity)


def normalized_residual(p: EpsPolynomial, root: complex) -> float:
    lead = abs(complex(p.leading))
    return float(abs(p(complex(root))) / (1.0 + lead * abs(root) ** p.degree))


def _companion_roots(c: np.ndarray) -> np.ndarray:
    monic = c[:-1] / c[-1]
    n = len(monic)
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic
    bal, _ = scipy.linalg.matrix_balance(comp, permute=False)
    return np.linalg.eigvals(bal)


def _polish(c: np.ndarray, r: complex, steps: int = 3) -> complex:
    dc = c[1:] * np.arange(1, len(c))
    for _ in range(steps):
        f = np.polyval(c[::-1], r)
        df = np.polyval(dc[::-1], r)
        if df == 0:
            break
        step = f / df
        if not np.isfinite(step):
            break
        r = r - step
    return complex(r)


def poly_roots(p: EpsPolynomial, root_tol: float = ROOT_TOL,
               merge_tol: float = MERGE_TOL) -> RootSet:
    """All complex roots via balanced companion-matrix eigenvalues.

    Linear polynomials also get their exact root. Roots closer than
    ``merge_tol`` are replaced by their mean and flagged with multiplicity.
    """
    if p.degree < 1:
        raise DegenerateLeadingCoefficient(f"degree {p.degree} polynomial has no roots")
    exact = None
    if p.degree == 1:
        exact = (-p.coeffs[0] / p.coeffs[1],)
        raw = np.array([complex(exact[0])])
    else:
        c = p.numeric()
        raw = _companion_roots(c)
        raw = np.array([_polish(c, r) for r in raw])
    roots = list(raw)
    mult = [1] * len(roots)
    used = [False] * len(roots)
    groups: list[list[int]] = []
    for i in range(len(roots)):
        if used[i]:
            continue
        grp = [i]
        used[i] = True
        for j in range(i + 1, len(roots)):
            if not used[j] and abs(roots[j] - roots[i]) < merge_tol:
                grp.append(j)
                used[j] = True
        groups.append(grp)
    for grp in groups:
        if len(grp) > 1:
            mean = complex(np.mean([roots[k] for k in grp]))
            for k in grp:
                roots[k] = mean
                mult[k] = len(grp)
    res = tuple(normalized_residual(p, r) for r in roots)
    return RootSet(tuple(complex(r) for r in roots), tuple(mult), res, exact, root_tol)
