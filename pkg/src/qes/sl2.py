"""sl(2) generators on polynomials of degree <= n and the gauged Hamiltonian.

Here the variable is T = cosh(2x), i.e. T = 2t - 1 in terms of the
t = cosh^2(x) used by the series engine. Generators:

    J- = d/dT,  J0 = T d/dT - n/2,  J+ = T^2 d/dT - n T.

Matrices act on the monomial basis {1, T, ..., T^n}; column k is the image
of T^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .models import Family, ModelSpec, branch_reflect
from .polyalg import ONE, ZERO, CRational, I

Matrix = tuple[tuple[CRational, ...], ...]


def _zeros(n: int) -> list[list[CRational]]:
    return [[ZERO] * n for _ in range(n)]


def _freeze(m) -> Matrix:
    return tuple(tuple(row) for row in m)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    out = _zeros(n)
    for i in range(n):
        for k in range(n):
            if A[i][k].is_zero():
                continue
            for j in range(n):
                out[i][j] = out[i][j] + A[i][k] * B[k][j]
    return _freeze(out)


def mat_add(A: Matrix, B: Matrix, cb=ONE) -> Matrix:
    return _freeze([[A[i][j] + B[i][j] * cb for j in range(len(A))] for i in range(len(A))])


def mat_scale(A: Matrix, c) -> Matrix:
    return _freeze([[x * c for x in row] for row in A])


def identity(n: int) -> Matrix:
    return _freeze([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])


def commutator(A: Matrix, B: Matrix) -> Matrix:
    return mat_add(mat_mul(A, B), mat_mul(B, A), CRational(-1))


def to_numpy(A: Matrix) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in A], dtype=complex)


@dataclass(frozen=True)
class GeneratorRep:
    n: int
    Jm: Matrix
    J0: Matrix
    Jp: Matrix

    def by_name(self) -> dict[str, Matrix]:
        return {"J-": self.Jm, "J0": self.J0, "J+": self.Jp}


def build_generators(n: int) -> GeneratorRep:
    if n < 0:
        raise ValueError("representation label n must be non-negative")
    d = n + 1
    Jm, J0, Jp = _zeros(d), _zeros(d), _zeros(d)
    half_n = Fraction(n, 2)
    for k in range(d):
        if k >= 1:
            Jm[k - 1][k] = CRational(k)
        J0[k][k] = CRational(k - half_n)
        if k + 1 <= n:
            Jp[k + 1][k] = CRational(k - n)
    return GeneratorRep(n, _freeze(Jm), _freeze(J0), _freeze(Jp))


def decompose(rep: GeneratorRep, C: Matrix) -> dict[str, CRational] | None:
    """Exact coefficients of C in span{J-, J0, J+, I}, or None if C lies outside."""
    n = rep.n
    d = n + 1
    if n == 0:
        coeffs = {"J-": ZERO, "J0": ZERO, "J+": ZERO, "I": C[0][0]}
    else:
        c0 = C[1][1] - C[0][0]
        cI = C[0][0] + c0 * Fraction(n, 2)
        cm = C[0][1]
        cp = C[1][0] / (-n)
        coeffs = {"J-": cm, "J0": c0, "J+": cp, "I": cI}
    recon = mat_add(mat_add(mat_add(mat_scale(rep.Jm, coeffs["J-"]),
                                    mat_scale(rep.J0, coeffs["J0"])),
                            mat_scale(rep.Jp, coeffs["J+"])),
                    mat_scale(identity(d), coeffs["I"]))
    return coeffs if recon == C else None


def commutation_table(rep: GeneratorRep) -> dict[str, dict[str, str]]:
    """[X, Y] expressed in the generator basis, as exact rational strings."""
    names = rep.by_name()
    table = {}
    for x, y in (("J0", "J+"), ("J0", "J-"), ("J+", "J-")):
        co = decompose(rep, commutator(names[x], names[y]))
        if co is None:
            raise ArithmeticError(f"[{x},{y}] leaves the algebra")
        table[f"[{x},{y}]"] = {k: str(v) for k, v in co.items() if not v.is_zero()}
    return table


@dataclass(frozen=True)
class GaugedHamiltonianMatrix:
    n: int
    matrix: Matrix
    construction: str
    invariant: bool = True
    leak: CRational = ZERO

    def numeric(self) -> np.ndarray:
        return to_numpy(self.matrix)

    def eigenvalues(self) -> np.ndarray:
        ev = np.linalg.eigvals(self.numeric())
        return ev[np.lexsort((ev.imag, ev.real))]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "construction": self.construction,
            "invariant": self.invariant,
            "leak": self.leak.to_json(),
            "matrix": [[[str(x.re), str(x.im)] for x in row] for row in self.matrix],
        }


def _base(spec: ModelSpec) -> ModelSpec:
    base = branch_reflect(spec)
    if base.family is not Family.ComplexDSHG or base.branch != "i":
        raise ValueError("gauged sl(2) form is defined for the ComplexDSHG branch (i) family")
    return base


def hg_direct(spec: ModelSpec, n: int) -> GaugedHamiltonianMatrix:
    """-4(T^2-1)D^2 - [(8l+12)T + 4ia(T^2-1)]D - [K - (iza/2)(T+1)] on degree <= n.

    K = -M^2 + a^2 + 4(l+1)^2 - 2ia(2l-M+3), z = 4(M-2l-3). The factor a in
    the last term comes from the iza cosh^2(x) coupling of the gauged ODE.
    The T^{n+1} coefficient of the image of T^n is returned as ``leak``.
    """
    s = _base(spec)
    a, l, M = CRational(s.a), CRational(s.l), CRational(s.M)
    K = -M * M + a * a + 4 * (l + 1) * (l + 1) - 2 * I * a * (2 * l - M + 3)
    z = 4 * (M - 2 * l - 3)
    half_iz = I * z * a / 2
    d = n + 1
    H = [[ZERO] * d for _ in range(d)]
    leak = ZERO
    for k in range(d):
        img: dict[int, CRational] = {}

        def add(power, c):
            if power >= 0 and not c.is_zero():
                img[power] = img.get(power, ZERO) + c

        # -4(T^2 - 1) k(k-1) T^{k-2}
        add(k, CRational(-4 * k * (k - 1)))
        add(k - 2, CRational(4 * k * (k - 1)))
        # -[(8l+12)T + 4ia(T^2-1)] k T^{k-1}
        add(k, -(8 * l + 12) * k)
        add(k + 1, -4 * I * a * k)
        add(k - 1, 4 * I * a * k)
        # -[K - (iz/2)(T+1)] T^k
        add(k, -K + half_iz)
        add(k + 1, half_iz)
        for power, c in img.items():
            if power <= n:
                H[power][k] = H[power][k] + c
            elif k == n:
                leak = leak + c
    return GaugedHamiltonianMatrix(n, _freeze(H), "direct", leak.is_zero(), leak)


def hg_sl2(spec: ModelSpec, n: int) -> GaugedHamiltonianMatrix:
    """-4[(J0^2 - J-^2) + ia(J+ - J-) + (n+2l+2)J0] - [-M^2+a^2+4(l+1)^2+4n(l+1)+n^2]."""
    s = _base(spec)
    a, l, M = CRational(s.a), CRational(s.l), CRational(s.M)
    rep = build_generators(n)
    inner = mat_add(mat_mul(rep.J0, rep.J0), mat_mul(rep.Jm, rep.Jm), CRational(-1))
    inner = mat_add(inner, mat_add(rep.Jp, rep.Jm, CRational(-1)), I * a)
    inner = mat_add(inner, rep.J0, l * 2 + 2 + n)
    const = -M * M + a * a + 4 * (l + 1) * (l + 1) + 4 * n * (l + 1) + n * n
    H = mat_add(mat_scale(inner, -4), identity(n + 1), -const)
    return GaugedHamiltonianMatrix(n, H, "sl2")


@dataclass
class SL2Report:
    n: int
    verdict: str
    invariant: bool
    differences: list[tuple[int, int, str]] = field(default_factory=list)
    eigenvalues_direct: list[complex] = field(default_factory=list)
    qes_energies: list[complex] = field(default_factory=list)
    max_eigen_error: float = float("nan")
    commutators: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "verdict": self.verdict,
            "invariant": self.invariant,
            "differences": [list(d) for d in self.differences],
            "eigenvalues_direct": [[z.real, z.imag] for z in self.eigenvalues_direct],
            "qes_energies": [[z.real, z.imag] for z in self.qes_energies],
            "max_eigen_error": self.max_eigen_error,
            "commutators": self.commutators,
        }


def compare(spec: ModelSpec, n: int) -> SL2Report:
    """Entry-by-entry comparison of the two constructions plus an eigenvalue check."""
    from .models import check_qes
    from .spectra import qes_spectrum

    Hd, Hs = hg_direct(spec, n), hg_sl2(spec, n)
    diffs = []
    for i in range(n + 1):
        for j in range(n + 1):
            dlt = Hd.matrix[i][j] - Hs.matrix[i][j]
            if not dlt.is_zero():
                diffs.append((i, j, str(dlt)))
    verdict = "Match" if not diffs and Hd.invariant else "Mismatch"
    ev = [complex(z) for z in Hd.eigenvalues()]
    rep = SL2Report(n, verdict, Hd.invariant, diffs, ev,
                    commutators=commutation_table(build_generators(n)))
    cond = check_qes(spec)
    if Hd.invariant and cond.satisfied and cond.p == n + 1:
        E = qes_spectrum(spec).energies
        rep.qes_energies = E
        cost = np.array([[abs(x - y) / max(1.0, abs(y)) for y in E] for x in ev])
        rows, cols = linear_sum_assignment(cost)
        rep.max_eigen_error = float(cost[rows, cols].max())
    return rep
