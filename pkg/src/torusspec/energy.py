"""End asymptotics and the three Willmore energy routes.

Local charts at the two ends of the traced spectrum (x = 1/b at the end
``o``, x = 1/a at the end ``infinity``), the end-slope formula
W = -4 * Re(lambda) * Vol, the residue pairing of the logarithmic
derivative of the multiplier map, and the direct Fourier energy
W = 4 * Vol * sum |q_c|^2 calibrated against the exactly solvable
constant-potential family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NonGraphEndError, WrongBranchError, ZeroOfSectionError
from .kernels import DEFAULT_KER_TOL, kernel_vector
from .lattice import DualLattice, TorusLattice
from .operators import Potential, SectionCoeffs, evaluate_pointwise, wiener_norm
from .tracing import SpectrumSample, trace_graph

DEFAULT_FIT_TOL = 1e-8


@dataclass(frozen=True)
class EndChart:
    """Power-series chart of a traced branch at one end."""

    end: str  # "o" | "infinity"
    samples: tuple[tuple[complex, complex], ...]  # (x, value) pairs
    fit: tuple[complex, ...]  # coefficients c_0 .. c_d of value(x)
    residual: float

    @property
    def slope(self) -> complex:
        return self.fit[1] if len(self.fit) > 1 else 0.0


@dataclass(frozen=True)
class EnergyReport:
    W_direct: float
    W_slope_o: float
    W_slope_inf: float
    W_residue: float
    vol: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("W_direct", "W_slope_o", "W_slope_inf", "W_residue"):
            if getattr(self, name) < -1e-9:
                raise ValueError(f"{name} is negative beyond tolerance")


def fit_end_chart(
    end: str,
    xs: Sequence[complex],
    values: Sequence[complex],
    fit_degree: int = 4,
    fit_tol: float = DEFAULT_FIT_TOL,
) -> EndChart:
    """Least-squares power-series fit value(x) = c_0 + c_1 x + ... through
    end-chart samples.  The constant term must vanish to fit_tol."""
    if end not in ("o", "infinity"):
        raise ValueError(f"unknown end {end!r}")
    xs = np.asarray(xs, dtype=complex)
    values = np.asarray(values, dtype=complex)
    deg = min(fit_degree, len(xs) - 1)
    V = np.vander(xs, deg + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, values, rcond=None)
    residual = float(np.max(np.abs(V @ coeffs - values))) if len(xs) else 0.0
    if residual > 10.0 * fit_tol:
        raise NonGraphEndError(
            f"end fit residual {residual:.3e} exceeds 10*fit_tol; possible "
            "unresolved handle in the window"
        )
    if abs(coeffs[0]) > fit_tol:
        raise NonGraphEndError(
            f"end chart constant term {coeffs[0]!r} does not vanish"
        )
    return EndChart(
        end,
        tuple(zip(map(complex, xs), map(complex, values))),
        tuple(map(complex, coeffs)),
        residual,
    )


def end_chart(
    end: str,
    samples: Sequence[SpectrumSample],
    lat: TorusLattice | None = None,
    fit_degree: int = 4,
    fit_tol: float = DEFAULT_FIT_TOL,
) -> EndChart:
    """Chart from traced graph samples: x = 1/b with value a at the end o,
    x = 1/a with value b at the end infinity."""
    xs, values = [], []
    for s in samples:
        if end == "o":
            xs.append(1.0 / s.coord.b)
            values.append(s.coord.a)
        else:
            xs.append(1.0 / s.coord.a)
            values.append(s.coord.b)
    return fit_end_chart(end, xs, values, fit_degree, fit_tol)


def willmore_slope(chart: EndChart, lat: TorusLattice) -> float:
    """W = -4 * Re(slope) * Vol(C/Gamma) from the degree-1 chart
    coefficient."""
    lam = chart.slope
    return -4.0 * lam.real * lat.covolume


def slope_imag_ratio(chart: EndChart) -> float:
    lam = chart.slope
    return abs(lam.imag) / abs(lam) if lam != 0 else 0.0


# --- truncated Laurent series helpers (powers -> coefficients) -------------


def _series_mul(s1: dict, s2: dict) -> dict:
    out: dict[int, complex] = {}
    for k1, a1 in s1.items():
        for k2, a2 in s2.items():
            out[k1 + k2] = out.get(k1 + k2, 0.0) + a1 * a2
    return out


def _series_deriv(s: dict) -> dict:
    return {k - 1: k * a for k, a in s.items() if k != 0}


def _series_primitive(s: dict) -> dict:
    if abs(s.get(-1, 0.0)) > 1e-12:
        raise ValueError("series has a residue; primitive is not single valued")
    return {k + 1: a / (k + 1) for k, a in s.items() if k != -1}


def _residue(s: dict) -> complex:
    return s.get(-1, 0.0)


def _chart_series(chart: EndChart) -> tuple[dict, dict]:
    """(a-series, b-series) in the local end parameter."""
    poly = {k: c for k, c in enumerate(chart.fit)}
    inv = {-1: 1.0 + 0.0j}
    if chart.end == "o":
        return poly, inv  # a = fit(x), b = 1/x
    return inv, poly  # a = 1/x, b = fit(x)


def _pairing(da: dict, db: dict) -> complex:
    """(omega_1, omega_2)_p = Res_p(omega_1 * F_2) with dF_2 = omega_2."""
    return _residue(_series_mul(da, _series_primitive(db)))


def willmore_residue(
    chart_o: EndChart, chart_inf: EndChart, lat: TorusLattice
) -> float:
    """Residue pairing of omega_inf = da and omega_o = db at the two ends.

    Evaluates W = 4 (da, db)_infinity Vol = -4 (da, db)_o Vol by truncated
    series arithmetic and returns the mean of the two determinations.
    """
    W, _ = willmore_residue_detailed(chart_o, chart_inf, lat)
    return W


def willmore_residue_detailed(
    chart_o: EndChart, chart_inf: EndChart, lat: TorusLattice
) -> tuple[float, dict]:
    vol = lat.covolume
    g1, g2 = lat.gamma1, lat.gamma2

    results = {}
    for chart, sign, tag in ((chart_inf, +1.0, "infinity"), (chart_o, -1.0, "o")):
        a_ser, b_ser = _chart_series(chart)
        da, db = _series_deriv(a_ser), _series_deriv(b_ser)
        pairing = _pairing(da, db)
        results[f"residue_{tag}"] = sign * 4.0 * pairing * vol
        # same series data paired in the period basis:
        # theta = da g1 + db conj(g1), theta~ = da g2 + db conj(g2)
        theta = {
            k: da.get(k, 0.0) * g1 + db.get(k, 0.0) * g1.conjugate()
            for k in set(da) | set(db)
        }
        theta2 = {
            k: da.get(k, 0.0) * g2 + db.get(k, 0.0) * g2.conjugate()
            for k in set(da) | set(db)
        }
        results[f"hitchin_{tag}"] = sign * 2.0j * _pairing(theta, theta2)

    w_inf = results["residue_infinity"]
    w_o = results["residue_o"]
    W = 0.5 * (w_inf.real + w_o.real)
    diag = {
        "residue_infinity": w_inf,
        "residue_o": w_o,
        "hitchin_infinity": results["hitchin_infinity"],
        "hitchin_o": results["hitchin_o"],
        "residue_end_mismatch": abs(w_inf - w_o),
    }
    return float(W), diag


def willmore_direct(q: Potential, lat: TorusLattice) -> float:
    """W = 4 * Vol * sum_c |q_c|^2.

    The constant 4 is the trace-pairing normalisation calibrated against
    the end-slope formula on the exactly solvable constant-potential
    family; the acceptance suite re-derives the agreement.
    """
    return 4.0 * lat.covolume * float(sum(abs(qc) ** 2 for qc in q.coeffs.values()))


# --- kernel sections near the ends ------------------------------------------


def _normalized_section(
    sample: SpectrumSample,
    q: Potential,
    R: float,
    dual: DualLattice | None,
    ker_tol: float,
) -> SectionCoeffs:
    if sample.kernel_dim != 1:
        raise WrongBranchError("section extraction requires a 1-dimensional kernel")
    dual = dual if dual is not None else q.dual
    psi = kernel_vector(sample.coord.a, sample.coord.b, q, R, dual, ker_tol)
    if sample.branch_tag == "graph_over_b":
        pivot = psi.second.get((0, 0), 0.0)
    elif sample.branch_tag == "graph_over_a":
        pivot = psi.first.get((0, 0), 0.0)
    else:
        raise WrongBranchError(f"cannot normalise branch {sample.branch_tag!r}")
    if abs(pivot) < 1e-6:
        raise WrongBranchError(
            f"normalising coefficient {abs(pivot):.2e} below threshold"
        )
    return psi.scaled(1.0 / pivot)


def kernel_section_deviation(
    sample: SpectrumSample,
    q: Potential,
    R: float,
    dual: DualLattice | None = None,
    ker_tol: float = DEFAULT_KER_TOL,
) -> tuple[SectionCoeffs, float, float]:
    """Kernel section normalised on its branch, with Wiener distances to
    the constant vacuum sections (0, 1) and (1, 0)."""
    dual = dual if dual is not None else q.dual
    psi = _normalized_section(sample, q, R, dual, ker_tol)
    psi_o = SectionCoeffs.basis_vector(dual, "w", (0, 0))
    psi_inf = SectionCoeffs.basis_vector(dual, "v", (0, 0))
    dev_o = wiener_norm(psi.minus(psi_o))
    dev_inf = wiener_norm(psi.minus(psi_inf))
    return psi, float(dev_o), float(dev_inf)


def s_map(
    sample: SpectrumSample,
    p: complex,
    q: Potential,
    R: float,
    lat: TorusLattice,
    dual: DualLattice | None = None,
    ker_tol: float = DEFAULT_KER_TOL,
) -> tuple[complex, complex]:
    """Projective ratio [u1 : u2] of the kernel section evaluated at a
    point of the torus, normalised so the larger slot is 1."""
    dual = dual if dual is not None else q.dual
    psi = kernel_vector(sample.coord.a, sample.coord.b, q, R, dual, ker_tol)
    u1, u2 = evaluate_pointwise(psi, p, lat)
    if max(abs(u1), abs(u2)) <= 1e-10:
        raise ZeroOfSectionError(f"kernel section vanishes at p = {p!r}")
    if abs(u2) >= abs(u1):
        return (u1 / u2, 1.0 + 0.0j)
    return (1.0 + 0.0j, u2 / u1)


# --- orchestration -----------------------------------------------------------


def default_end_window(q: Potential) -> float:
    return 8.0 * max(1.0, q.support_radius())


def end_offset(dual: DualLattice) -> float:
    """Imaginary offset keeping an end path halfway between lattice rows."""
    gap = abs((dual.c1.conjugate() * dual.c2).imag) / abs(dual.c1)
    return 0.5 * gap


def energy_report(
    q: Potential,
    lat: TorusLattice,
    R: float,
    dual: DualLattice | None = None,
    b0: float | None = None,
    step: float | None = None,
    imag_offset: float | None = None,
    eps: float = 0.2,
    fit_degree: int = 4,
    fit_tol: float = DEFAULT_FIT_TOL,
    ker_tol: float = DEFAULT_KER_TOL,
) -> EnergyReport:
    """Full three-route energy evaluation from traced end branches.

    Both end branches are traced over the window [b0, 2 b0] (and its
    rho-image over the a-plane), offset from the real axis so the path
    keeps clear of the lattice lines.
    """
    dual = dual if dual is not None else q.dual
    b0 = default_end_window(q) if b0 is None else b0
    step = b0 / 16.0 if step is None else step
    off = end_offset(dual) if imag_offset is None else imag_offset

    if q.is_zero():
        return EnergyReport(0.0, 0.0, 0.0, 0.0, lat.covolume, {})

    region = (b0, 2.0 * b0, off, off)
    samples_o = trace_graph("b_plane", region, step, q, R, dual, eps=eps,
                            seed=-willmore_direct(q, lat) / (4 * lat.covolume) / b0,
                            ker_tol=ker_tol)
    samples_inf = trace_graph("a_plane", region, step, q, R, dual, eps=eps,
                              seed=-willmore_direct(q, lat) / (4 * lat.covolume) / b0,
                              ker_tol=ker_tol)
    chart_o = end_chart("o", samples_o, lat, fit_degree, fit_tol)
    chart_inf = end_chart("infinity", samples_inf, lat, fit_degree, fit_tol)

    w_slope_o = willmore_slope(chart_o, lat)
    w_slope_inf = willmore_slope(chart_inf, lat)
    w_res, res_diag = willmore_residue_detailed(chart_o, chart_inf, lat)
    w_direct = willmore_direct(q, lat)

    warnings = []
    for chart, tag in ((chart_o, "o"), (chart_inf, "infinity")):
        ratio = slope_imag_ratio(chart)
        if ratio > 1e-3:
            warnings.append(f"inconsistent-slope at end {tag}: |Im|/|lam| = {ratio:.2e}")
    diag = {
        "slope_o": chart_o.slope,
        "slope_inf": chart_inf.slope,
        "imag_ratio_o": slope_imag_ratio(chart_o),
        "imag_ratio_inf": slope_imag_ratio(chart_inf),
        "fit_residual_o": chart_o.residual,
        "fit_residual_inf": chart_inf.residual,
        "warnings": warnings,
        **res_diag,
    }
    return EnergyReport(
        w_direct, w_slope_o, w_slope_inf, w_res, lat.covolume, diag
    )
