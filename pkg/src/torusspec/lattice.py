"""Lattice arithmetic.

The period lattice ``Gamma = <gamma1, gamma2>`` of the torus, its dual
``Gamma'`` of frequencies ``c`` with ``-conj(c)*g + c*conj(g)`` an integer
multiple of ``2*pi*i`` for both periods ``g``, the logarithmic multiplier
coordinates ``(a, b)`` and the symmetry actions on them.

Dual-lattice points are handled internally through their integer
coordinates with respect to the reduced generator pair, so that index
arithmetic (sums and differences of frequencies) is exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DegenerateLatticeError, NotInDualLatticeError

#: absolute tolerance for the dual-lattice membership congruence
DUAL_MEMBERSHIP_TOL = 1e-12


def _arg2pi(c: complex) -> float:
    """Principal argument normalised to [0, 2*pi)."""
    a = cmath.phase(c)
    if a < -1e-12:
        a += 2.0 * math.pi
    elif a < 0.0:
        a = 0.0
    return a


def _sort_key(c: complex):
    # ascending modulus, then argument in [0, 2*pi), then (Re, Im)
    return (abs(c), _arg2pi(c), c.real, c.imag)


@dataclass(frozen=True)
class TorusLattice:
    """Period lattice of the torus ``C / Gamma``."""

    gamma1: complex
    gamma2: complex

    def __post_init__(self):
        scale = max(abs(self.gamma1), abs(self.gamma2))
        if scale == 0.0 or self.covolume <= 1e-12 * scale * scale:
            raise DegenerateLatticeError(
                "lattice generators are collinear or zero"
            )

    @property
    def covolume(self) -> float:
        """Area of the fundamental parallelogram, |Im(conj(g1) * g2)|."""
        return abs((self.gamma1.conjugate() * self.gamma2).imag)


@dataclass(frozen=True)
class LogCoord:
    """A point (a, b) of the logarithmic multiplier plane C^2."""

    a: complex
    b: complex


@dataclass(frozen=True)
class Multiplier:
    """Multiplier values (h(gamma1), h(gamma2)) in C* x C*."""

    h1: complex
    h2: complex

    def __post_init__(self):
        if self.h1 == 0 or self.h2 == 0:
            raise ValueError("multiplier values must be nonzero")


class DualLattice:
    """Dual lattice ``Gamma'`` with a reduced generator pair ``c1, c2``."""

    def __init__(self, c1: complex, c2: complex):
        self.c1 = complex(c1)
        self.c2 = complex(c2)
        det = self.c1.real * self.c2.imag - self.c1.imag * self.c2.real
        if abs(det) <= 1e-14 * max(abs(self.c1), abs(self.c2)) ** 2:
            raise DegenerateLatticeError("dual generators are collinear")
        # inverse of [[Re c1, Re c2], [Im c1, Im c2]], used to read off
        # integer coordinates of lattice points
        self._inv = (
            (self.c2.imag / det, -self.c2.real / det),
            (-self.c1.imag / det, self.c1.real / det),
        )

    def __repr__(self):
        return f"DualLattice(c1={self.c1!r}, c2={self.c2!r})"

    def point(self, m: int, n: int) -> complex:
        return m * self.c1 + n * self.c2

    def raw_coords(self, c: complex) -> tuple[float, float]:
        r0, r1 = self._inv
        return (
            r0[0] * c.real + r0[1] * c.imag,
            r1[0] * c.real + r1[1] * c.imag,
        )

    def coords(self, c: complex, tol: float = DUAL_MEMBERSHIP_TOL) -> tuple[int, int]:
        """Integer coordinates of a lattice point; rejects non-members."""
        x, y = self.raw_coords(c)
        m, n = round(x), round(y)
        if abs(self.point(m, n) - c) > tol * (1.0 + abs(c)):
            raise NotInDualLatticeError(f"{c!r} is not a dual lattice point")
        return m, n

    def contains(self, c: complex, tol: float = DUAL_MEMBERSHIP_TOL) -> bool:
        try:
            self.coords(c, tol)
        except NotInDualLatticeError:
            return False
        return True


def _pairing_integers(c: complex, lat: TorusLattice) -> tuple[float, float]:
    """(m1, m2) with -conj(c)*g_i + c*conj(g_i) = 2*pi*i*m_i, as reals."""
    m1 = (-c.conjugate() * lat.gamma1 + c * lat.gamma1.conjugate()) / (2j * math.pi)
    m2 = (-c.conjugate() * lat.gamma2 + c * lat.gamma2.conjugate()) / (2j * math.pi)
    return m1.real, m2.real


def congruence_defect(c: complex, lat: TorusLattice) -> float:
    """Distance of the pairing values from the nearest integers."""
    m1, m2 = _pairing_integers(c, lat)
    return max(abs(m1 - round(m1)), abs(m2 - round(m2)))


def _gauss_reduce(u: complex, v: complex) -> tuple[complex, complex]:
    # Lagrange-Gauss reduction of a rank-2 lattice basis in the plane.
    while True:
        if abs(v) < abs(u):
            u, v = v, u
        mu = round((v * u.conjugate()).real / (abs(u) ** 2))
        if mu == 0:
            return u, v
        v = v - mu * u


def _canonical_sign(c: complex) -> complex:
    # of {c, -c} keep the representative with argument in [0, pi)
    return c if _arg2pi(c) < math.pi - 1e-12 else -c


def dual_lattice(lat: TorusLattice) -> DualLattice:
    """Reduced generators of ``Gamma'``.

    Solves the two real linear congruence systems for the pairing integers
    (1,0) and (0,1), then Gauss-reduces to a minimal-length pair; ties are
    broken by smaller principal argument in [0, 2*pi).
    """
    g1, g2 = lat.gamma1, lat.gamma2
    # Im(conj(c) * g) = pi * m  for both periods; unknowns (x, y) = (Re c, Im c)
    det = g1.imag * (-g2.real) - (-g1.real) * g2.imag
    if abs(det) < 1e-14 * max(abs(g1), abs(g2)) ** 2:
        raise DegenerateLatticeError("lattice generators are collinear")

    def solve(m1: float, m2: float) -> complex:
        x = (math.pi * m1 * (-g2.real) - (-g1.real) * math.pi * m2) / det
        y = (g1.imag * math.pi * m2 - math.pi * m1 * g2.imag) / det
        return complex(x, y)

    u, v = _gauss_reduce(solve(1.0, 0.0), solve(0.0, 1.0))
    u, v = _canonical_sign(u), _canonical_sign(v)
    if _sort_key(v) < _sort_key(u):
        u, v = v, u
    dual = DualLattice(u, v)
    for gen in (u, v):
        if congruence_defect(gen, lat) > DUAL_MEMBERSHIP_TOL:
            raise DegenerateLatticeError("dual generator fails the congruence")
    return dual


def enumerate_dual_coords(dual: DualLattice, radius: float) -> list[tuple[int, int]]:
    """Integer coordinates of all dual points with |c| <= radius, in the
    deterministic order (|c|, arg in [0, 2*pi), Re, Im)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    bound_m = sum(abs(x) for x in dual._inv[0])
    bound_n = sum(abs(x) for x in dual._inv[1])
    M = int(math.ceil(radius * bound_m)) + 1
    N = int(math.ceil(radius * bound_n)) + 1
    tol = 1e-9 * (1.0 + radius)
    found = []
    for m in range(-M, M + 1):
        for n in range(-N, N + 1):
            c = dual.point(m, n)
            if abs(c) <= radius + tol:
                found.append((m, n))
    found.sort(key=lambda mn: _sort_key(dual.point(*mn)))
    return found


def enumerate_dual(dual: DualLattice, radius: float) -> list[complex]:
    """All dual points with |c| <= radius in deterministic order."""
    return [dual.point(m, n) for m, n in enumerate_dual_coords(dual, radius)]


def exp_multiplier(coord: LogCoord, lat: TorusLattice) -> Multiplier:
    """Multiplier h(g) = exp(a*g + b*conj(g)) of the coordinate (a, b)."""
    h1 = cmath.exp(coord.a * lat.gamma1 + coord.b * lat.gamma1.conjugate())
    h2 = cmath.exp(coord.a * lat.gamma2 + coord.b * lat.gamma2.conjugate())
    return Multiplier(h1, h2)


def apply_symmetry(
    kind: str,
    coord: LogCoord,
    c: complex = 0.0,
    dual: DualLattice | None = None,
) -> LogCoord:
    """Apply one of the symmetries of the logarithmic spectrum.

    ``tc``:  (a, b) -> (a - conj(c), b + c)   (deck transformation of exp)
    ``Tc``:  (a, b) -> (a + conj(c), b + c)   (vacuum-only symmetry)
    ``rho``: (a, b) -> (conj(b), conj(a))     (real structure; c ignored)

    For ``tc`` and ``Tc`` the shift must lie in the dual lattice; membership
    is validated when ``dual`` is given.
    """
    if kind == "rho":
        return LogCoord(coord.b.conjugate(), coord.a.conjugate())
    if kind not in ("tc", "Tc"):
        raise ValueError(f"unknown symmetry kind {kind!r}")
    c = complex(c)
    if dual is not None:
        dual.coords(c)  # raises NotInDualLatticeError on failure
    if kind == "tc":
        return LogCoord(coord.a - c.conjugate(), coord.b + c)
    return LogCoord(coord.a + c.conjugate(), coord.b + c)


def reduce_to_domain(coord: LogCoord, dual: DualLattice) -> tuple[LogCoord, complex]:
    """Move (a, b) by the tc-action into the fundamental domain where the
    a-coordinate has coefficients in [-1/2, 1/2) over the conjugated dual
    basis.  Returns the reduced coordinate and the lattice shift used.
    """
    conj_dual = DualLattice(dual.c1.conjugate(), dual.c2.conjugate())
    lam1, lam2 = conj_dual.raw_coords(coord.a)
    n1 = math.floor(lam1 + 0.5)
    n2 = math.floor(lam2 + 0.5)
    c = dual.point(n1, n2)
    return apply_symmetry("tc", coord, c), c
