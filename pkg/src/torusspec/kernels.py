"""Kernel detection for the truncated operator family.

Spectral indicators (smallest singular value and log|det|), kernel
vectors, Riesz projectors by trapezoid contour quadrature of the
transversal resolvent, restriction of the family to projector ranges,
and argument-principle zero counting.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    IllConditionedContourError,
    NoKernelError,
    UnexpectedRankError,
    UnreliableContourError,
)
from .lattice import DualLattice, LogCoord
from .operators import Potential, SectionCoeffs, assemble

#: dense SVD below this dimension, iterative refinement above
SVD_DIM_LIMIT = 600

DEFAULT_KER_TOL = 1e-7
DEFAULT_PROJ_TOL = 1e-8
DEFAULT_COND_MAX = 1e12
DEFAULT_WINDING_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralIndicator:
    sigma_min: float
    log_abs_det: float
    at: LogCoord
    R: float


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray
    center: LogCoord
    radius: float
    nodes: int
    rank: int


def _smallest_pair_dense(A: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(A, compute_uv=False)
    return float(s[-1]), float(s[-2]) if len(s) > 1 else float(s[-1])


def _smallest_pair_iterative(A: np.ndarray, iters: int = 60, tol: float = 1e-12):
    """Two smallest singular values by block inverse iteration on A^H A.

    Falls back to 0 for exactly singular factorizations.
    """
    n = A.shape[0]
    try:
        lu, piv = sla.lu_factor(A, check_finite=False)
    except Exception:
        return _smallest_pair_dense(A)
    if not np.all(np.isfinite(lu)):
        return 0.0, 0.0
    rng_free = np.arange(n)
    V = np.empty((n, 2), dtype=complex)
    V[:, 0] = np.cos(0.7 * rng_free) + 1j * np.sin(1.3 * rng_free + 0.4)
    V[:, 1] = np.cos(2.1 * rng_free + 1.1) + 1j * np.sin(0.9 * rng_free + 2.0)
    V, _ = np.linalg.qr(V)
    prev = None
    for _ in range(iters):
        W = sla.lu_solve((lu, piv), V, check_finite=False)
        W = sla.lu_solve((lu, piv), W, trans=2, check_finite=False)
        if not np.all(np.isfinite(W)):
            return 0.0, 0.0
        V, _ = np.linalg.qr(W)
        # Rayleigh quotients of (A^H A)^{-1}
        Y = sla.lu_solve((lu, piv), V, check_finite=False)
        gram = Y.conj().T @ Y
        evals = np.linalg.eigvalsh(gram)
        sig = np.sort(1.0 / np.sqrt(np.maximum(evals, 1e-300)))
        if prev is not None and np.allclose(sig, prev, rtol=tol, atol=0.0):
            break
        prev = sig
    return float(sig[0]), float(sig[1])


def smallest_singular_pair(A: np.ndarray) -> tuple[float, float]:
    if A.shape[0] <= SVD_DIM_LIMIT:
        return _smallest_pair_dense(A)
    return _smallest_pair_iterative(A)


def indicator(
    a: complex, b: complex, q: Potential, R: float, dual: DualLattice | None = None
) -> SpectralIndicator:
    """Smallest singular value and log|det| of the truncated D_{a,b}.

    The determinant of a zero potential is the product of the explicit
    diagonal, evaluated directly.
    """
    dual = dual if dual is not None else q.dual
    if q.is_zero():
        from .operators import operator_basis, vacuum_diagonal

        diag = vacuum_diagonal(a, b, operator_basis(R, dual), dual)
        mods = np.abs(diag)
        sigma = float(mods.min())
        log_det = float(np.sum(np.log(mods))) if sigma > 0.0 else float("-inf")
        return SpectralIndicator(sigma, log_det, LogCoord(a, b), float(R))
    A = assemble(a, b, q, R, dual).entries
    sigma, _ = smallest_singular_pair(A)
    sign, log_det = np.linalg.slogdet(A)
    if sign == 0:
        log_det = float("-inf")
    return SpectralIndicator(float(sigma), float(log_det), LogCoord(a, b), float(R))


def _kernel_vectors_dense(A: np.ndarray, ker_tol: float) -> list[np.ndarray]:
    u, s, vh = np.linalg.svd(A)
    vecs = [vh[i].conj() for i in range(len(s)) if s[i] <= ker_tol]
    return vecs


def _kernel_vector_iterative(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    lu, piv = sla.lu_factor(A, check_finite=False)
    i = np.arange(n)
    v = (np.cos(0.7 * i) + 1j * np.sin(1.3 * i + 0.4)).astype(complex)
    v /= np.linalg.norm(v)
    for _ in range(40):
        w = sla.lu_solve((lu, piv), v, check_finite=False)
        w = sla.lu_solve((lu, piv), w, trans=2, check_finite=False)
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0:
            break
        w /= nrm
        if np.abs(1.0 - abs(np.vdot(w, v))) < 1e-14:
            v = w
            break
        v = w
    return v


def _phase_normalize(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    ph = vec[k] / abs(vec[k])
    return vec / ph


def kernel_vectors(
    a: complex,
    b: complex,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    ker_tol: float = DEFAULT_KER_TOL,
) -> list[SectionCoeffs]:
    """All kernel vectors (sigma <= ker_tol), unit Euclidean norm, phase
    normalised so the largest-modulus coefficient is positive real, ordered
    by dominant basis index."""
    dual = dual if dual is not None else q.dual
    op = assemble(a, b, q, R, dual)
    A = op.entries
    if A.shape[0] <= SVD_DIM_LIMIT:
        vecs = _kernel_vectors_dense(A, ker_tol)
    else:
        sig, _ = _smallest_pair_iterative(A)
        vecs = [_kernel_vector_iterative(A)] if sig <= ker_tol else []
    if not vecs:
        sig, _ = smallest_singular_pair(A)
        raise NoKernelError(
            f"sigma_min = {sig:.3e} exceeds ker_tol = {ker_tol:.1e} at (a, b)"
        )
    vecs = [_phase_normalize(v / np.linalg.norm(v)) for v in vecs]
    vecs.sort(key=lambda v: int(np.argmax(np.abs(v))))
    return [op.section_from_vector(v) for v in vecs]


def kernel_vector(
    a: complex,
    b: complex,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    ker_tol: float = DEFAULT_KER_TOL,
) -> SectionCoeffs:
    """The kernel vector for the smallest singular value (first of the
    ordered basis when the kernel is higher dimensional)."""
    return kernel_vectors(a, b, q, R, dual, ker_tol)[0]


# ---------------------------------------------------------------------------
# contour machinery


def _resolvent_solves(
    A: np.ndarray, lambdas: np.ndarray, cond_max: float
) -> list[np.ndarray]:
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    out = []
    for lam in lambdas:
        M = A + lam * eye
        anorm = np.linalg.norm(M, 1)
        lu, piv = sla.lu_factor(M, check_finite=False)
        rcond = _rcond_from_lu(lu, piv, anorm)
        if not np.isfinite(rcond) or rcond < 1.0 / cond_max:
            raise IllConditionedContourError(
                f"resolvent condition {1.0 / max(rcond, 1e-300):.2e} exceeds "
                f"cond_max at node {lam!r}"
            )
        out.append(sla.lu_solve((lu, piv), eye, check_finite=False))
    return out


def _rcond_from_lu(lu: np.ndarray, piv: np.ndarray, anorm: float) -> float:
    gecon = sla.get_lapack_funcs(("gecon",), (lu,))[0]
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        return 0.0
    return float(rcond)


def _quadrature_projector(A: np.ndarray, eps: float, nodes: int, cond_max: float):
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    lambdas = eps * np.exp(1j * theta)
    solves = _resolvent_solves(A, lambdas, cond_max)
    P = np.zeros_like(A)
    for lam, S in zip(lambdas, solves):
        P += lam * S
    return P / nodes


def riesz_projector(
    center: LogCoord,
    eps: float,
    q: Potential,
    R: float,
    nodes: int = 32,
    dual: DualLattice | None = None,
    proj_tol: float = DEFAULT_PROJ_TOL,
    cond_max: float = DEFAULT_COND_MAX,
    quad_tol: float = 1e-9,
    max_nodes: int = 1024,
) -> Projector:
    """Spectral projector along the transversal circle of radius ``eps``.

    Trapezoid quadrature of (D_{a+l,b+l})^{-1} over |l| = eps; node count
    is doubled until the projector changes by less than ``quad_tol``.
    Captures the part of the family singular inside the transversal disc.
    """
    if nodes < 16:
        raise ValueError("nodes must be at least 16")
    dual = dual if dual is not None else q.dual
    A = assemble(center.a, center.b, q, R, dual).entries
    P = _quadrature_projector(A, eps, nodes, cond_max)
    used = nodes
    while used < max_nodes:
        P2 = _quadrature_projector(A, eps, 2 * used, cond_max)
        delta = np.linalg.norm(P2 - P, 2)
        P, used = P2, 2 * used
        if delta < quad_tol:
            break
    else:
        raise IllConditionedContourError(
            "contour quadrature failed to converge; circle too close to spectrum"
        )
    defect = np.linalg.norm(P @ P - P, 2)
    if defect > proj_tol:
        raise IllConditionedContourError(
            f"projector idempotency defect {defect:.2e} exceeds {proj_tol:.1e}"
        )
    tr = np.trace(P)
    rank = int(round(tr.real))
    if abs(tr - rank) > 1e-6:
        raise IllConditionedContourError(
            f"projector trace {tr!r} is not close to an integer"
        )
    return Projector(P, center, float(eps), used, rank)


def projector_range(P: Projector, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the leading ``dim``-dimensional range."""
    u, s, _ = np.linalg.svd(P.matrix)
    return u[:, :dim]


def restricted_pencil(
    center_family: Callable[[complex], LogCoord],
    q: Potential,
    R: float,
    eps: float,
    dual: DualLattice | None = None,
    nodes: int = 48,
    cond_max: float = DEFAULT_COND_MAX,
) -> Callable[[complex], tuple[complex, complex]]:
    """Coefficients of the transversal characteristic polynomial.

    For each family parameter x, computes the rank-2 Riesz projector of
    the transversal circle at ``center_family(x)``, restricts the matrix
    of the family member to an orthonormal basis of its range and returns
    the coefficients (p1, p2) of det(B + lambda) = lambda^2 + p1 lambda + p2.
    Traces and determinants of the compression are basis independent, so
    the coefficients vary continuously along any x-path.
    """
    dual = dual if dual is not None else q.dual

    def pencil(x: complex) -> tuple[complex, complex]:
        center = center_family(x)
        P = riesz_projector(center, eps, q, R, nodes, dual, cond_max=cond_max)
        if P.rank != 2:
            raise UnexpectedRankError(
                f"projector rank {P.rank} != 2 at x = {x!r}; eps or R mis-chosen"
            )
        U = projector_range(P, 2)
        A = assemble(center.a, center.b, q, R, dual).entries
        B = U.conj().T @ A @ U
        p1 = complex(np.trace(B))
        p2 = complex(np.linalg.det(B))
        return p1, p2

    return pencil


# ---------------------------------------------------------------------------
# argument principle


def winding_from_samples(values: Sequence[complex], floor: float) -> float:
    """Total phase increment / 2*pi along a closed sample loop."""
    vals = np.asarray(values, dtype=complex)
    if np.any(np.abs(vals) < floor):
        raise UnreliableContourError("function vanishes near the contour")
    ratios = np.roll(vals, -1) / vals
    return float(np.sum(np.angle(ratios)) / (2.0 * np.pi))


def count_zeros_winding(
    f: Callable[[complex], complex],
    center: complex,
    radius: float,
    nodes: int = 64,
    floor: float = DEFAULT_WINDING_FLOOR,
) -> int:
    """Number of zeros (with multiplicity) of a holomorphic function inside
    the circle, by the discrete argument principle."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    vals = [f(center + radius * cmath.exp(1j * t)) for t in theta]
    w = winding_from_samples(vals, floor)
    k = round(w)
    if abs(w - k) > 0.25:
        raise UnreliableContourError(
            f"winding {w:.4f} is not within 0.25 of an integer"
        )
    if k < 0:
        raise UnreliableContourError(f"negative winding {k} for a holomorphic f")
    return int(k)


def det_circle_samples(
    A: np.ndarray, center: complex, radius: float, nodes: int
) -> list[complex]:
    """Normalised values of det(A + lambda I) on a lambda-circle.

    The common scale factor exp(max log|det|) is dropped; winding numbers
    are unaffected and overflow is avoided.
    """
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    signs = []
    logs = []
    for t in theta:
        lam = center + radius * cmath.exp(1j * t)
        sign, logdet = np.linalg.slogdet(A + lam * eye)
        signs.append(sign)
        logs.append(logdet)
    logs = np.asarray(logs)
    ref = logs.max()
    return [s * math.exp(l - ref) for s, l in zip(signs, logs)]


def det_winding(A: np.ndarray, center: complex, radius: float, nodes: int = 64) -> int:
    vals = det_circle_samples(A, center, radius, nodes)
    w = winding_from_samples(vals, DEFAULT_WINDING_FLOOR)
    k = round(w)
    if abs(w - k) > 0.25:
        raise UnreliableContourError(
            f"det winding {w:.4f} is not within 0.25 of an integer"
        )
    return int(k)
