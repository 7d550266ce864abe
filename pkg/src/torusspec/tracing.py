"""Locating and tracing the logarithmic spectrum.

Transversal root solves along the diagonal direction (a, b) + (l, l),
graph-over-plane continuation, epsilon-tube audits, handle/node
classification at vacuum double points and windowed genus reports.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla


def _quiet_lu(A):
    """LU factorization with the exact-singularity warning silenced; the
    callers detect singular factors from the result."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sla.lu_factor(A, check_finite=False)

from .errors import (
    BranchAmbiguityError,
    ClassificationWindowError,
    ConfigError,
    IllConditionedContourError,
    RootBracketingError,
    UnexpectedRankError,
    UnreliableContourError,
)
from .kernels import (
    DEFAULT_KER_TOL,
    SVD_DIM_LIMIT,
    det_winding,
    restricted_pencil,
    smallest_singular_pair,
    winding_from_samples,
)
from .lattice import (
    DualLattice,
    LogCoord,
    TorusLattice,
    _arg2pi,
    enumerate_dual,
)
from .operators import Potential, assemble, wiener_norm

#: handle-vs-node separation threshold, relative to the window radius
ZERO_SEP_FACTOR = 1e-4

#: the projector route is attempted only when the total coupling is small
#: against the dual lattice scale; beyond that regime foreign spectral
#: branches enter every transversal window that is large enough to contain
#: the discriminant zeros, and the two-mode pencil takes over
REFINE_COUPLING_FRACTION = 0.125


@dataclass(frozen=True)
class SpectrumSample:
    coord: LogCoord
    sigma_min: float
    kernel_dim: int
    branch_tag: str  # graph_over_b | graph_over_a | near_double_point


@dataclass(frozen=True)
class DoublePointReport:
    c_pair: tuple[complex, complex]
    verdict: str  # Handle | Node | Indeterminate
    node_location: LogCoord | None
    discriminant_zeros: tuple[complex, ...]
    multiplier_is_real: bool | None
    method: str  # projector | two-mode
    zero_separation: float


@dataclass(frozen=True)
class TubeAuditReport:
    eps: float
    checked: int
    skipped_in_core: int
    violations: tuple[tuple[LogCoord, float], ...]
    max_distance: float


@dataclass(frozen=True)
class GenusWindowReport:
    window_radius: float
    handle_count: int
    node_count: int
    indeterminate_count: int
    reports: tuple[DoublePointReport, ...]
    failures: tuple[tuple[tuple[complex, complex], str], ...]
    note: str = (
        "windowed census: a lower-bound certificate only; double points "
        "outside the window are unexamined"
    )


# ---------------------------------------------------------------------------
# transversal solves


def _root_polish(A: np.ndarray, lam: complex, tol: float = 1e-12, iters: int = 40):
    """Newton refinement of det(A + lam I) = 0 via the resolvent entry.

    With y = (A+lam)^-1 e_j and z = (A+lam)^-1 y the Newton step for the
    reciprocal diagonal resolvent entry is -y_j / z_j.
    """
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    j = None
    for _ in range(iters):
        try:
            lu, piv = _quiet_lu(A + lam * eye)
        except Exception:
            break
        if not np.all(np.isfinite(lu)):
            break
        if j is None:
            probe = np.cos(0.7 * np.arange(n)) + 1j * np.sin(1.3 * np.arange(n) + 0.4)
            y0 = sla.lu_solve((lu, piv), probe, check_finite=False)
            j = int(np.argmax(np.abs(y0)))
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        y = sla.lu_solve((lu, piv), e, check_finite=False)
        z = sla.lu_solve((lu, piv), y, check_finite=False)
        if not (np.isfinite(y[j]) and np.isfinite(z[j])) or z[j] == 0:
            break
        step = -y[j] / z[j]
        lam = lam + step
        if abs(step) < tol:
            break
    return lam


def solve_transversal(
    base: LogCoord,
    eps: float,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    polish_tol: float = 1e-12,
    margin: float = 1e-8,
) -> list[complex]:
    """All l with |l| < eps where the family member at base + (l, l) is
    singular.

    The singular parameters are the negated eigenvalues of the truncated
    matrix; the count is cross-checked against the winding number of the
    determinant along the circle (small dimensions) and each root is
    Newton-polished.  Roots are returned sorted by modulus then argument.
    """
    dual = dual if dual is not None else q.dual
    A = assemble(base.a, base.b, q, R, dual).entries
    mu = np.linalg.eigvals(A)
    dist_to_circle = np.abs(np.abs(mu) - eps)
    if dist_to_circle.min() < margin:
        raise IllConditionedContourError(
            "transversal circle passes through the spectrum"
        )
    raw = [-m for m in mu if abs(m) < eps]
    if A.shape[0] <= 240:
        w = det_winding(A, 0.0, eps, nodes=96)
        if w != len(raw):
            raise RootBracketingError(
                f"det winding {w} does not match {len(raw)} eigenvalue roots"
            )
    roots = []
    for lam in raw:
        lam = _root_polish(A, lam, polish_tol)
        if abs(lam) >= eps:
            raise RootBracketingError("polished root escaped the transversal disc")
        roots.append(lam)
    roots.sort(key=lambda z: (abs(z), _arg2pi(z), z.real, z.imag))
    return roots


def _slide_to_plane(
    plane: str,
    fixed: complex,
    seed: complex,
    q: Potential,
    R: float,
    dual: DualLattice,
    tol: float = 1e-13,
    iters: int = 50,
) -> complex:
    """Newton in the free coordinate at a fixed plane coordinate.

    For the b-plane the free coordinate is a (parameter derivative
    supported on w-modes), for the a-plane it is b (v-modes).
    """
    free = seed
    mask_species = "w" if plane == "b_plane" else "v"
    a0, b0 = (free, fixed) if plane == "b_plane" else (fixed, free)
    op0 = assemble(a0, b0, q, R, dual)
    mask = np.array([1.0 if sp == mask_species else 0.0 for sp, _ in op0.basis])
    n = len(op0.basis)
    j = None
    A = op0.entries.copy()
    diag_idx = np.arange(n)
    for _ in range(iters):
        try:
            lu, piv = _quiet_lu(A)
        except Exception:
            break
        if not np.all(np.isfinite(lu)):
            break
        if j is None:
            probe = np.cos(0.7 * np.arange(n)) + 1j * np.sin(1.3 * np.arange(n) + 0.4)
            y0 = sla.lu_solve((lu, piv), probe, check_finite=False)
            j = int(np.argmax(np.abs(y0) * mask))
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        y = sla.lu_solve((lu, piv), e, check_finite=False)
        z = sla.lu_solve((lu, piv), mask * y, check_finite=False)
        if not (np.isfinite(y[j]) and np.isfinite(z[j])) or z[j] == 0:
            break
        step = -y[j] / z[j]
        free = free + step
        A[diag_idx, diag_idx] += step * mask
        if abs(step) < tol:
            break
    return free


def _grid_values(region, step: float) -> list[complex]:
    re_min, re_max, im_min, im_max = region
    if re_max < re_min or im_max < im_min or step <= 0:
        raise ConfigError("invalid trace region or step")
    nre = max(1, int(round((re_max - re_min) / step)) + 1)
    nim = max(1, int(round((im_max - im_min) / step)) + 1)
    res = [re_min + k * step for k in range(nre)]
    ims = [im_min + k * step for k in range(nim)]
    values = []
    for r, im in enumerate(ims):
        row = [complex(t, im) for t in res]
        if r % 2 == 1:
            row.reverse()  # serpentine keeps continuation steps short
        values.extend(row)
    return values


def trace_graph(
    plane: str,
    region: tuple[float, float, float, float],
    step: float,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    eps: float = 0.2,
    seed: complex = 0.0,
    ker_tol: float = DEFAULT_KER_TOL,
    verify_every: int = 8,
    max_halvings: int = 4,
) -> list[SpectrumSample]:
    """Trace the spectrum as a graph over a region of the b-plane (or the
    a-plane, with the rho-symmetric roles).

    The region must keep distance > eps from the represented lattice
    frequencies of its own species.  Continuation is zeroth order: the
    previous graph value seeds a Newton slide at the next grid point; the
    transversal solve re-verifies the root count at the start and every
    ``verify_every`` samples, with step halving on ambiguity.
    """
    if plane not in ("b_plane", "a_plane"):
        raise ConfigError(f"unknown plane {plane!r}")
    dual = dual if dual is not None else q.dual
    lattice_pts = enumerate_dual(dual, R)
    values = _grid_values(region, step)
    for beta in values:
        ref = beta if plane == "b_plane" else beta.conjugate()
        if min(abs(ref - c) for c in lattice_pts) <= eps:
            raise ConfigError(
                f"region value {beta!r} is within eps of a represented lattice line"
            )

    def verify(beta: complex, guess: complex) -> complex:
        base = (
            LogCoord(guess, beta) if plane == "b_plane" else LogCoord(beta, guess)
        )
        roots = solve_transversal(base, eps, q, R, dual)
        if len(roots) != 1:
            raise BranchAmbiguityError(
                f"{len(roots)} transversal roots at {beta!r}; shrink step or "
                "reclassify the region"
            )
        landed = guess + roots[0]
        return _slide_to_plane(plane, beta, landed, q, R, dual)

    samples: list[SpectrumSample] = []
    prev_beta = None
    prev_free = complex(seed)
    for k, beta in enumerate(values):
        target = beta
        try:
            if k == 0 or k % verify_every == 0:
                free = verify(target, prev_free)
            else:
                free = _slide_to_plane(plane, target, prev_free, q, R, dual)
                if abs(free - prev_free) > 0.5 * eps:
                    free = verify(target, prev_free)
        except (BranchAmbiguityError, IllConditionedContourError):
            if prev_beta is None:
                raise
            ok = False
            for level in range(1, max_halvings + 1):
                pieces = 2**level
                free = prev_free
                try:
                    for i in range(1, pieces + 1):
                        mid = prev_beta + (target - prev_beta) * i / pieces
                        free = verify(mid, free)
                    ok = True
                    break
                except (BranchAmbiguityError, IllConditionedContourError):
                    continue
            if not ok:
                raise
        a, b = (free, target) if plane == "b_plane" else (target, free)
        A = assemble(a, b, q, R, dual).entries
        s1, s2 = smallest_singular_pair(A)
        if s1 > ker_tol:
            raise BranchAmbiguityError(
                f"continuation lost the branch at {beta!r} (sigma_min {s1:.2e})"
            )
        graph_val = free
        dist = min(
            abs(graph_val - (c.conjugate() if plane == "b_plane" else c))
            for c in lattice_pts
        )
        if dist >= eps:
            raise BranchAmbiguityError(
                f"graph value {graph_val!r} left the eps-tube at {beta!r}"
            )
        samples.append(
            SpectrumSample(
                LogCoord(a, b),
                float(s1),
                2 if s2 <= ker_tol else 1,
                "graph_over_b" if plane == "b_plane" else "graph_over_a",
            )
        )
        prev_beta, prev_free = target, free
    return samples


def locate_graph_sample(
    plane: str,
    value: complex,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    seed: complex | None = None,
    ker_tol: float = DEFAULT_KER_TOL,
) -> SpectrumSample:
    """Locate the single graph sample over one plane coordinate.

    The seed defaults to the second-order tube estimate
    -sum |q_c|^2 / value for the branch hugging the origin cell.
    """
    dual = dual if dual is not None else q.dual
    if seed is None:
        total = sum(abs(qc) ** 2 for qc in q.coeffs.values())
        seed = -total / value if value != 0 else 0.0
    free = _slide_to_plane(plane, value, complex(seed), q, R, dual)
    a, b = (free, value) if plane == "b_plane" else (value, free)
    A = assemble(a, b, q, R, dual).entries
    s1, s2 = smallest_singular_pair(A)
    if s1 > ker_tol:
        raise BranchAmbiguityError(f"no spectrum point found over {value!r}")
    return SpectrumSample(
        LogCoord(a, b),
        float(s1),
        2 if s2 <= ker_tol else 1,
        "graph_over_b" if plane == "b_plane" else "graph_over_a",
    )


# ---------------------------------------------------------------------------
# double points


def _taylor_roots_inside(samples: Sequence[complex], radius: float):
    """Roots inside the sampling circle from the Taylor coefficients of the
    analytic samples (spectrally accurate contour DFT)."""
    vals = np.asarray(samples, dtype=complex)
    N = len(vals)
    coeffs = np.fft.fft(vals) / N
    K = N // 2
    ak = coeffs[: K + 1] / radius ** np.arange(K + 1)
    scale = np.abs(ak).max()
    keep = K
    while keep > 2 and abs(ak[keep]) < 1e-12 * scale:
        keep -= 1
    poly = ak[: keep + 1][::-1]
    roots = np.roots(poly)
    return [complex(r) for r in roots if abs(r) <= radius * (1.0 + 1e-9)]


def _secant_polish(f, x0: complex, tol: float = 1e-12, iters: int = 60) -> complex:
    x1 = x0 + (abs(x0) + 1e-3) * 1e-4
    f0, f1 = f(x0), f(x1)
    for _ in range(iters):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0, x1, f1 = x1, f1, x2, f(x2)
        if abs(x1 - x0) < tol:
            break
    return x1


def _multiplier_is_real(coord: LogCoord, lat: TorusLattice, tol: float = 1e-8) -> bool:
    """Real multipliers have both log-multiplier periods with imaginary
    part in pi * Z."""
    for g in (lat.gamma1, lat.gamma2):
        im = (coord.a * g + coord.b * g.conjugate()).imag
        if abs(im / math.pi - round(im / math.pi)) * math.pi > tol:
            return False
    return True


def _eigs_inside(A: np.ndarray, radius: float) -> list[complex]:
    if A.shape[0] <= SVD_DIM_LIMIT:
        mu = np.linalg.eigvals(A)
    else:
        import scipy.sparse.linalg as spla

        mu = spla.eigs(A, k=min(10, A.shape[0] - 2), sigma=0.0,
                       return_eigenvectors=False)
    return [complex(m) for m in mu if abs(m) < radius]


def classify_double_point(
    c_pair: tuple[complex, complex],
    eps: float,
    q: Potential,
    R: float,
    lat: TorusLattice,
    dual: DualLattice | None = None,
    nodes: int = 32,
    zero_sep: float | None = None,
) -> DoublePointReport:
    """Handle/node classification of the vacuum double point (conj(c''), c').

    Along the transversal family x -> (conj(c'') + x + l, c' - x + l) the
    restricted quadratic pencil has a discriminant of total vanishing
    order two in the window; two separated zeros certify a handle, one
    double zero a node, whose multiplier must come out real.

    In the small-coupling regime the discriminant comes from the two
    spectral parameters isolated by the transversal projector (the
    projector compression is cross-checked against them); otherwise the
    two-mode compression of the truncated matrix supplies the first-order
    discriminant 4 x^2 - 4 |q_{c'+c''}|^2.
    """
    dual = dual if dual is not None else q.dual
    c2, c1 = complex(c_pair[0]), complex(c_pair[1])
    mn2 = dual.coords(c2)
    mn1 = dual.coords(c1)
    dp = LogCoord(c2.conjugate(), c1)
    zero_sep = ZERO_SEP_FACTOR * eps if zero_sep is None else zero_sep
    qs = q.get((mn1[0] + mn2[0], mn1[1] + mn2[1]))

    def family(x: complex) -> LogCoord:
        return LogCoord(dp.a + x, dp.b - x)

    r_x = 0.45 * eps
    r_lambda = 0.6 * eps
    min_spacing = min(abs(dual.c1), abs(dual.c2))
    method = "two-mode"
    disc = None
    pair_at = None

    if not q.is_zero() and wiener_norm(q) <= REFINE_COUPLING_FRACTION * min_spacing:

        def pair_eig(x: complex) -> tuple[complex, complex]:
            center = family(x)
            A = assemble(center.a, center.b, q, R, dual).entries
            inside = _eigs_inside(A, r_lambda)
            if len(inside) != 2:
                raise UnexpectedRankError(
                    f"{len(inside)} spectral parameters in the transversal "
                    f"disc at x = {x!r}"
                )
            return inside[0], inside[1]

        def disc_eig(x: complex) -> complex:
            m1, m2 = pair_eig(x)
            return (m1 - m2) ** 2

        try:
            # audit the window, then cross-check the eigenvalue pair against
            # the projector compression at two contour points
            pencil = restricted_pencil(family, q, R, r_lambda, dual)
            for xc in (r_x, 1j * r_x):
                p1, p2 = pencil(xc)
                d_proj = p1 * p1 - 4.0 * p2
                d_eig = disc_eig(xc)
                scale = max(abs(d_proj), abs(d_eig), 1e-12)
                if abs(d_proj - d_eig) > 1e-6 * scale:
                    raise IllConditionedContourError(
                        "projector and eigenvalue discriminants disagree"
                    )
            disc = disc_eig
            method = "projector"
        except (UnexpectedRankError, IllConditionedContourError):
            disc = None

    if disc is None:
        method = "two-mode"

        def disc_two_mode(x: complex) -> complex:
            # compression of the family to span{v_{c'}, w_{c''}} is
            # [[-x, -conj(q_s)], [q_s, x]] up to the common shift l
            return 4.0 * x * x - 4.0 * abs(qs) ** 2

        disc = disc_two_mode

    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    try:
        samples = [disc(r_x * cmath.exp(1j * t)) for t in theta]
        w = winding_from_samples(samples, 1e-300)
    except (UnexpectedRankError, IllConditionedContourError,
            UnreliableContourError) as exc:
        raise ClassificationWindowError(
            f"discriminant unavailable on |x| = {r_x:.3g}: {exc}"
        )
    k = round(w)
    if abs(w - k) > 0.25 or k != 2:
        raise ClassificationWindowError(
            f"discriminant winding {w:.3f} != 2 on |x| = {r_x:.3g}"
        )
    roots = _taylor_roots_inside(samples, r_x)
    if len(roots) != 2:
        raise ClassificationWindowError(
            f"found {len(roots)} discriminant zeros, expected 2"
        )
    sep = abs(roots[0] - roots[1])
    if sep > zero_sep:
        roots = [_secant_polish(disc, r) for r in roots]
        sep = abs(roots[0] - roots[1])
    roots.sort(key=lambda z: (_arg2pi(z), abs(z)))

    if sep > zero_sep:
        verdict = "Handle"
        node_location = None
        mult_real = None
    else:
        verdict = "Node" if sep <= 0.5 * zero_sep else "Indeterminate"
        x0 = 0.5 * (roots[0] + roots[1])
        if method == "projector":
            # polish the double zero on the discriminant derivative
            h = 1e-4 * r_x

            def disc_deriv(x: complex) -> complex:
                return (disc(x + h) - disc(x - h)) / (2.0 * h)

            x0 = _secant_polish(disc_deriv, x0)
            A = assemble(family(x0).a, family(x0).b, q, R, dual).entries
            m1, m2 = _eigs_inside(A, r_lambda)[:2]
            lam0 = -0.5 * (m1 + m2)
        else:
            lam0 = 0.0
        node_location = LogCoord(dp.a + x0 + lam0, dp.b - x0 + lam0)
        mult_real = _multiplier_is_real(node_location, lat)
    return DoublePointReport(
        (c2, c1), verdict, node_location, tuple(roots), mult_real, method, float(sep)
    )


def tube_audit(
    samples: Sequence[SpectrumSample],
    eps: float,
    dual: DualLattice,
    core_bound: float | None = None,
) -> TubeAuditReport:
    """Check that samples outside the compact core lie in the eps-tube
    around the vacuum spectrum.  Violations are report content, not
    faults."""
    if core_bound is None:
        core_bound = 2.0 * max(abs(dual.c1), abs(dual.c2))
    max_reach = max(
        (max(abs(s.coord.a), abs(s.coord.b)) for s in samples), default=1.0
    )
    pts = enumerate_dual(dual, max_reach + 1.0)
    checked = 0
    skipped = 0
    violations = []
    worst = 0.0
    for s in samples:
        a, b = s.coord.a, s.coord.b
        if max(abs(a), abs(b)) <= core_bound:
            skipped += 1
            continue
        checked += 1
        dist = min(min(abs(a - c.conjugate()), abs(b - c)) for c in pts)
        worst = max(worst, dist)
        if dist >= eps:
            violations.append((s.coord, float(dist)))
    return TubeAuditReport(float(eps), checked, skipped, tuple(violations), worst)


def genus_window_report(
    window_radius: float,
    eps: float,
    q: Potential,
    R: float,
    lat: TorusLattice,
    dual: DualLattice | None = None,
) -> GenusWindowReport:
    """Classify every vacuum double point (conj(c''), c') with
    |c''|, |c'| <= window_radius."""
    dual = dual if dual is not None else q.dual
    pts = enumerate_dual(dual, window_radius)
    handles = nodes_ = indet = 0
    reports = []
    failures = []
    for c2 in pts:
        for c1 in pts:
            try:
                rep = classify_double_point((c2, c1), eps, q, R, lat, dual)
            except (ClassificationWindowError, UnreliableContourError) as exc:
                failures.append(((c2, c1), str(exc)))
                continue
            reports.append(rep)
            if rep.verdict == "Handle":
                handles += 1
            elif rep.verdict == "Node":
                nodes_ += 1
            else:
                indet += 1
    return GenusWindowReport(
        float(window_radius), handles, nodes_, indet, tuple(reports), tuple(failures)
    )
