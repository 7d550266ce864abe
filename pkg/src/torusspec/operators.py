"""Fourier model of sections, potentials and the truncated operator family.

Sections of the trivialised bundle are expanded over the monomials

    v_c = (exp(conj(c) z - c conj(z)), 0)
    w_c = (0, exp(-conj(c) z + c conj(z)))

with frequencies ``c`` in the dual lattice.  In this basis the family

    D_{a,b} = dbar_{a,b} + M,    M = [[0, -conj(q)], [q, 0]]

is diagonal in its first-order part (eigenvalue ``b - c`` on ``v_c`` and
``a - conj(c)`` on ``w_c``) while the potential acts by convolution with
the coefficients of ``q(z) = sum_c q_c exp(-conj(c) z + c conj(z))``.

Frequencies are keyed by their integer coordinates over the reduced dual
generators so convolution index arithmetic is exact.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import SingularResolventError
from .lattice import (
    DUAL_MEMBERSHIP_TOL,
    DualLattice,
    TorusLattice,
    enumerate_dual_coords,
)

Coord2 = tuple[int, int]


@dataclass(frozen=True)
class Potential:
    """Finitely supported Fourier coefficients of the potential q."""

    dual: DualLattice
    coeffs: dict[Coord2, complex] = field(default_factory=dict)

    @classmethod
    def from_pairs(
        cls,
        dual: DualLattice,
        pairs: Iterable[tuple[complex, complex]],
        tol: float = DUAL_MEMBERSHIP_TOL,
    ) -> "Potential":
        """Build from (frequency, coefficient) pairs, validating that every
        frequency is a dual lattice point."""
        coeffs: dict[Coord2, complex] = {}
        for c, q in pairs:
            mn = dual.coords(complex(c), tol)
            coeffs[mn] = coeffs.get(mn, 0.0) + complex(q)
        return cls(dual, {mn: q for mn, q in coeffs.items() if q != 0})

    @classmethod
    def constant(cls, dual: DualLattice, q0: complex) -> "Potential":
        if q0 == 0:
            return cls(dual, {})
        return cls(dual, {(0, 0): complex(q0)})

    def get(self, mn: Coord2) -> complex:
        return self.coeffs.get(mn, 0.0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def support_radius(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(abs(self.dual.point(*mn)) for mn in self.coeffs)

    def items(self):
        return sorted(self.coeffs.items())

    def items_complex(self):
        return [(self.dual.point(*mn), q) for mn, q in self.items()]


@dataclass(frozen=True)
class SectionCoeffs:
    """Coefficients of a section over the basis {v_c} (first slot) and
    {w_c} (second slot)."""

    dual: DualLattice
    first: dict[Coord2, complex] = field(default_factory=dict)
    second: dict[Coord2, complex] = field(default_factory=dict)

    @classmethod
    def basis_vector(cls, dual: DualLattice, species: str, mn: Coord2) -> "SectionCoeffs":
        if species == "v":
            return cls(dual, {mn: 1.0}, {})
        if species == "w":
            return cls(dual, {}, {mn: 1.0})
        raise ValueError(f"unknown species {species!r}")

    @classmethod
    def from_pairs(cls, dual, first_pairs=(), second_pairs=(), tol=DUAL_MEMBERSHIP_TOL):
        first = {dual.coords(complex(c), tol): complex(u) for c, u in first_pairs}
        second = {dual.coords(complex(c), tol): complex(u) for c, u in second_pairs}
        return cls(dual, first, second)

    def scaled(self, factor: complex) -> "SectionCoeffs":
        return SectionCoeffs(
            self.dual,
            {mn: factor * u for mn, u in self.first.items()},
            {mn: factor * u for mn, u in self.second.items()},
        )

    def minus(self, other: "SectionCoeffs") -> "SectionCoeffs":
        first = dict(self.first)
        for mn, u in other.first.items():
            first[mn] = first.get(mn, 0.0) - u
        second = dict(self.second)
        for mn, u in other.second.items():
            second[mn] = second.get(mn, 0.0) - u
        return SectionCoeffs(self.dual, first, second)

    def euclid_norm(self) -> float:
        return float(
            np.sqrt(
                sum(abs(u) ** 2 for u in self.first.values())
                + sum(abs(u) ** 2 for u in self.second.values())
            )
        )


def j_image(s: SectionCoeffs) -> SectionCoeffs:
    """Right multiplication by the quaternion j on coefficient vectors.

    Pointwise (u1, u2) -> (-conj(u2), conj(u1)); conjugating a w-monomial
    gives the v-monomial of the same frequency, so indices are preserved.
    """
    first = {mn: -u.conjugate() for mn, u in s.second.items()}
    second = {mn: u.conjugate() for mn, u in s.first.items()}
    return SectionCoeffs(s.dual, first, second)


def wiener_norm(s) -> float:
    """l^1 norm of all stored Fourier coefficients."""
    if isinstance(s, Potential):
        return float(sum(abs(q) for q in s.coeffs.values()))
    return float(
        sum(abs(u) for u in s.first.values()) + sum(abs(u) for u in s.second.values())
    )


def operator_basis(R: float, dual: DualLattice) -> tuple[tuple[str, Coord2], ...]:
    """Deterministic basis ordering of the truncated operator: all v-modes
    in dual enumeration order, then all w-modes."""
    mns = enumerate_dual_coords(dual, R)
    return tuple(("v", mn) for mn in mns) + tuple(("w", mn) for mn in mns)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix of the truncated family member D_{a,b}."""

    basis: tuple[tuple[str, Coord2], ...]
    entries: np.ndarray
    a: complex
    b: complex
    radius: float
    dual: DualLattice

    @property
    def n(self) -> int:
        return len(self.basis)

    def index(self) -> dict[tuple[str, Coord2], int]:
        return {key: i for i, key in enumerate(self.basis)}

    def section_from_vector(self, vec: np.ndarray) -> SectionCoeffs:
        first: dict[Coord2, complex] = {}
        second: dict[Coord2, complex] = {}
        for (species, mn), u in zip(self.basis, vec):
            if u == 0:
                continue
            (first if species == "v" else second)[mn] = complex(u)
        return SectionCoeffs(self.dual, first, second)

    def vector_from_section(self, s: SectionCoeffs) -> np.ndarray:
        idx = self.index()
        vec = np.zeros(self.n, dtype=complex)
        for mn, u in s.first.items():
            key = ("v", mn)
            if key in idx:
                vec[idx[key]] = u
        for mn, u in s.second.items():
            key = ("w", mn)
            if key in idx:
                vec[idx[key]] = u
        return vec


def vacuum_diagonal(a: complex, b: complex, basis, dual: DualLattice) -> np.ndarray:
    diag = np.empty(len(basis), dtype=complex)
    for i, (species, mn) in enumerate(basis):
        c = dual.point(*mn)
        diag[i] = (b - c) if species == "v" else (a - c.conjugate())
    return diag


def assemble(
    a: complex, b: complex, q: Potential, R: float, dual: DualLattice
) -> OperatorMatrix:
    """Galerkin compression of D_{a,b} to the modes with |c| <= R.

    Couplings whose target frequency leaves the disc are dropped, keeping
    the matrix square.
    """
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    basis = operator_basis(R, dual)
    n = len(basis)
    idx = {key: i for i, key in enumerate(basis)}
    A = np.zeros((n, n), dtype=complex)
    A[np.arange(n), np.arange(n)] = vacuum_diagonal(a, b, basis, dual)
    for (sm, sn), qc in q.coeffs.items():
        for i, (species, (m, n2)) in enumerate(basis):
            tgt = (sm - m, sn - n2)
            if species == "v":
                j = idx.get(("w", tgt))
                if j is not None:
                    A[j, i] += qc
            else:
                j = idx.get(("v", tgt))
                if j is not None:
                    A[j, i] += -qc.conjugate()
    return OperatorMatrix(basis, A, complex(a), complex(b), float(R), dual)


def evaluate_pointwise(
    s: SectionCoeffs, z: complex, lat: TorusLattice | None = None
) -> tuple[complex, complex]:
    """Evaluate the finite Fourier sum at a point of the plane.

    The value is Gamma-periodic by construction of the dual lattice.
    """
    u1 = 0.0 + 0.0j
    for mn, coeff in sorted(s.first.items()):
        c = s.dual.point(*mn)
        u1 += coeff * cmath.exp(c.conjugate() * z - c * z.conjugate())
    u2 = 0.0 + 0.0j
    for mn, coeff in sorted(s.second.items()):
        c = s.dual.point(*mn)
        u2 += coeff * cmath.exp(-c.conjugate() * z + c * z.conjugate())
    return u1, u2


def multiply_by_potential(q: Potential, s: SectionCoeffs) -> SectionCoeffs:
    """Coefficient-space action of M = [[0, -conj(q)], [q, 0]].

    Same convolution rule as ``assemble`` but without truncation: the
    first-slot input v_c lands on w_{c'-c} with weight q_{c'}, the second
    slot w_c on v_{c'-c} with weight -conj(q_{c'}).
    """
    first: dict[Coord2, complex] = {}
    second: dict[Coord2, complex] = {}
    for (sm, sn), qc in q.coeffs.items():
        for (m, n), u in s.first.items():
            tgt = (sm - m, sn - n)
            second[tgt] = second.get(tgt, 0.0) + qc * u
        for (m, n), u in s.second.items():
            tgt = (sm - m, sn - n)
            first[tgt] = first.get(tgt, 0.0) - qc.conjugate() * u
    return SectionCoeffs(s.dual, first, second)


def gauge_shift(kind: str, c: complex, s: SectionCoeffs) -> SectionCoeffs:
    """Index shift realising the diagonal unimodular gauges.

    ``tc`` multiplies both slots by exp(-conj(c) z + c conj(z)): v-indices
    shift by -c, w-indices by +c.  ``Tc`` multiplies the slots by opposite
    unimodular factors: both indices shift by -c.  Both are isometries of
    the Wiener norm.
    """
    if kind not in ("tc", "Tc"):
        raise ValueError(f"unknown gauge kind {kind!r}")
    cm, cn = s.dual.coords(complex(c))
    if kind == "tc":
        first = {(m - cm, n - cn): u for (m, n), u in s.first.items()}
        second = {(m + cm, n + cn): u for (m, n), u in s.second.items()}
    else:
        first = {(m - cm, n - cn): u for (m, n), u in s.first.items()}
        second = {(m - cm, n - cn): u for (m, n), u in s.second.items()}
    return SectionCoeffs(s.dual, first, second)


def vacuum_resolvent_diag(
    a: complex,
    b: complex,
    R: float,
    dual: DualLattice,
    tol_vac: float = 1e-9,
) -> np.ndarray:
    """Diagonal of the vacuum resolvent G_{a,b} over ``operator_basis``.

    Entries are 1/(b-c) on v-modes and 1/(a-conj(c)) on w-modes; the
    largest modulus equals the operator norm on Wiener-normed coefficients.
    """
    basis = operator_basis(R, dual)
    diag = vacuum_diagonal(a, b, basis, dual)
    dist = np.abs(diag).min()
    if dist <= tol_vac:
        raise SingularResolventError(
            f"(a, b) is within {dist:.3e} of the vacuum locus"
        )
    return 1.0 / diag


# ---------------------------------------------------------------------------
# pointwise grid oracle (discrete Fourier recovery on the fundamental cell)


def _pairing_matrix(dual: DualLattice, lat: TorusLattice) -> np.ndarray:
    """Integer matrix sending dual coordinates (m, n) to the DFT frequency
    pair (m1, m2) defined by -conj(c) g_i + c conj(g_i) = 2 pi i m_i."""
    import math as _math

    rows = []
    for gen in (dual.c1, dual.c2):
        m1 = (-gen.conjugate() * lat.gamma1 + gen * lat.gamma1.conjugate()) / (
            2j * _math.pi
        )
        m2 = (-gen.conjugate() * lat.gamma2 + gen * lat.gamma2.conjugate()) / (
            2j * _math.pi
        )
        rows.append((round(m1.real), round(m2.real)))
    return np.array(rows, dtype=int).T  # columns: images of c1, c2


def grid_points(lat: TorusLattice, N: int) -> np.ndarray:
    j = np.arange(N)
    return (
        j[:, None] / N * lat.gamma1 + j[None, :] / N * lat.gamma2
    ).astype(complex)


def section_on_grid(s: SectionCoeffs, lat: TorusLattice, N: int):
    """Evaluate both slots of a section on the uniform N x N cell grid."""
    P = _pairing_matrix(s.dual, lat)
    j = np.arange(N)
    u1 = np.zeros((N, N), dtype=complex)
    u2 = np.zeros((N, N), dtype=complex)
    for mn, coeff in sorted(s.first.items()):
        # v-monomial carries the frequencies of -c
        m1, m2 = -(P @ np.array(mn))
        u1 += coeff * np.exp(2j * np.pi * (j[:, None] * m1 + j[None, :] * m2) / N)
    for mn, coeff in sorted(s.second.items()):
        m1, m2 = P @ np.array(mn)
        u2 += coeff * np.exp(2j * np.pi * (j[:, None] * m1 + j[None, :] * m2) / N)
    return u1, u2


def section_from_grid(
    u1: np.ndarray,
    u2: np.ndarray,
    dual: DualLattice,
    lat: TorusLattice,
    radius: float,
    drop_tol: float = 1e-12,
) -> SectionCoeffs:
    """Recover coefficients with |c| <= radius by discrete quadrature."""
    N = u1.shape[0]
    P = _pairing_matrix(dual, lat)
    f1 = np.fft.fft2(u1) / N**2
    f2 = np.fft.fft2(u2) / N**2
    first: dict[Coord2, complex] = {}
    second: dict[Coord2, complex] = {}
    for mn in enumerate_dual_coords(dual, radius):
        m1, m2 = P @ np.array(mn)
        cf = complex(f1[(-m1) % N, (-m2) % N])
        if abs(cf) > drop_tol:
            first[mn] = cf
        cf = complex(f2[m1 % N, m2 % N])
        if abs(cf) > drop_tol:
            second[mn] = cf
    return SectionCoeffs(dual, first, second)


def potential_on_grid(q: Potential, lat: TorusLattice, N: int) -> np.ndarray:
    P = _pairing_matrix(q.dual, lat)
    j = np.arange(N)
    vals = np.zeros((N, N), dtype=complex)
    for mn, qc in q.items():
        m1, m2 = P @ np.array(mn)
        vals += qc * np.exp(2j * np.pi * (j[:, None] * m1 + j[None, :] * m2) / N)
    return vals
