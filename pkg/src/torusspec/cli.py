"""Command line surface: config ingestion and deterministic result emission.

Configs are JSON documents; results are a JSON record per run plus a
plot-ready CSV table of spectrum samples.  All floating point numbers are
serialized with 17 significant digits and runs are deterministic, so
re-running a config reproduces byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import json

from . import __version__
from .errors import ConfigError, TorusSpecError
from .kernels import (
    DEFAULT_KER_TOL,
    DEFAULT_PROJ_TOL,
    indicator,
)
from .lattice import (
    LogCoord,
    TorusLattice,
    apply_symmetry,
    dual_lattice,
    enumerate_dual,
)
from .energy import (
    DEFAULT_FIT_TOL,
    energy_report,
    kernel_section_deviation,
    s_map,
)
from .operators import Potential
from .tracing import (
    classify_double_point,
    genus_window_report,
    locate_graph_sample,
    trace_graph,
    tube_audit,
)

DEFAULT_TOLERANCES = {
    "ker_tol": DEFAULT_KER_TOL,
    "proj_tol": DEFAULT_PROJ_TOL,
    "fit_tol": DEFAULT_FIT_TOL,
    "tol_vac": 1e-9,
    "cond_max": 1e12,
    "winding_floor": 1e-12,
    "dual_membership_tol": 1e-12,
}

CSV_COLUMNS = ("a_re", "a_im", "b_re", "b_im", "sigma_min", "kernel_dim", "branch_tag")


# ---------------------------------------------------------------------------
# serialization with fixed 17-significant-digit floats


def _fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x == float("inf"):
        return '"inf"'
    if x == float("-inf"):
        return '"-inf"'
    return format(float(x), ".17g")


def _to_jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, LogCoord):
        return {"a": _to_jsonable(obj.a), "b": _to_jsonable(obj.b)}
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def dumps_canonical(obj) -> str:
    """JSON with deterministic key order and .17g floats."""

    def emit(o) -> str:
        if o is None:
            return "null"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            items = ", ".join(f"{json.dumps(str(k))}: {emit(v)}" for k, v in o.items())
            return "{" + items + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ", ".join(emit(v) for v in o) + "]"
        raise TypeError(f"cannot serialize {type(o)!r}")

    return emit(_to_jsonable(obj))


def samples_to_csv(samples) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for s in samples:
        lines.append(
            ",".join(
                [
                    format(s.coord.a.real, ".17g"),
                    format(s.coord.a.imag, ".17g"),
                    format(s.coord.b.real, ".17g"),
                    format(s.coord.b.imag, ".17g"),
                    format(s.sigma_min, ".17g"),
                    str(s.kernel_dim),
                    s.branch_tag,
                ]
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# config parsing


def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    raise ConfigError(f"cannot parse complex number from {v!r}")


class JobConfig:
    """Validated run configuration."""

    def __init__(self, raw: dict):
        try:
            lat_block = raw["lattice"]
            self.lattice = TorusLattice(
                _as_complex(lat_block["gamma1"]), _as_complex(lat_block["gamma2"])
            )
        except KeyError as exc:
            raise ConfigError(f"missing lattice field: {exc}")
        self.dual = dual_lattice(self.lattice)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(raw.get("tolerances", {}))
        self.tolerances = tol
        pairs = []
        for item in raw.get("potential", []):
            pairs.append((_as_complex(item["c"]), _as_complex(item["coeff"])))
        try:
            self.potential = Potential.from_pairs(
                self.dual, pairs, tol["dual_membership_tol"]
            )
        except TorusSpecError as exc:
            raise ConfigError(f"invalid potential: {exc}")
        if "truncation_radius" not in raw:
            raise ConfigError("missing truncation_radius")
        self.R = float(raw["truncation_radius"])
        if self.R <= 0:
            raise ConfigError("truncation_radius must be positive")
        if self.R < 2.0 * self.potential.support_radius():
            raise ConfigError(
                "truncation_radius must be at least twice the potential "
                "support radius"
            )
        self.task = raw.get("task", {})
        self.raw = raw

    @classmethod
    def load(cls, path: str | Path) -> "JobConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        return cls(raw)


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (outputs dict, samples list)


def _task_vacuum(cfg: JobConfig):
    w = float(cfg.task.get("window_radius", 1.0))
    pts = enumerate_dual(cfg.dual, w)
    lines = [{"kind": "v", "b": c} for c in pts] + [
        {"kind": "w", "a": c.conjugate()} for c in pts
    ]
    dps = [
        {"c2": c2, "c1": c1, "at": LogCoord(c2.conjugate(), c1)}
        for c2 in pts
        for c1 in pts
    ]
    return {
        "dual_points": pts,
        "dual_generators": [cfg.dual.c1, cfg.dual.c2],
        "lines": lines,
        "double_points": dps,
    }, []


class _GridRow:
    """Sample-shaped row so indicator sweeps share the CSV table format."""

    def __init__(self, coord: LogCoord, sigma_min: float, kernel_dim: int):
        self.coord = coord
        self.sigma_min = sigma_min
        self.kernel_dim = kernel_dim
        self.branch_tag = "grid"


def _task_indicator(cfg: JobConfig):
    task = cfg.task
    rect = task.get("rect")
    if not rect or len(rect) != 4:
        raise ConfigError("indicator task needs rect = [re_min, re_max, im_min, im_max]")
    nx, ny = task.get("grid", [40, 40])
    fixed = task.get("fixed", {})
    sweep = task.get("sweep", "b")
    if sweep not in ("a", "b"):
        raise ConfigError("indicator sweep must be 'a' or 'b'")
    other = _as_complex(fixed.get("a" if sweep == "b" else "b", 0.0))
    ker_tol = cfg.tolerances["ker_tol"]
    rows = []
    grid_rows = []
    re_min, re_max, im_min, im_max = map(float, rect)
    for iy in range(int(ny)):
        im = im_min + (im_max - im_min) * iy / max(int(ny) - 1, 1)
        for ix in range(int(nx)):
            re = re_min + (re_max - re_min) * ix / max(int(nx) - 1, 1)
            z = complex(re, im)
            a, b = (other, z) if sweep == "b" else (z, other)
            ind = indicator(a, b, cfg.potential, cfg.R, cfg.dual)
            rows.append(
                {
                    "a": a,
                    "b": b,
                    "sigma_min": ind.sigma_min,
                    "log_abs_det": ind.log_abs_det,
                }
            )
            grid_rows.append(
                _GridRow(
                    LogCoord(a, b),
                    ind.sigma_min,
                    1 if ind.sigma_min <= ker_tol else 0,
                )
            )
    return (
        {"sweep": sweep, "fixed": other, "grid": [int(nx), int(ny)], "rows": rows},
        grid_rows,
    )


def _trace_from_task(cfg: JobConfig, task: dict):
    plane = task.get("plane", "b_plane")
    rect = task.get("rect")
    if not rect or len(rect) != 4:
        raise ConfigError("trace task needs rect = [re_min, re_max, im_min, im_max]")
    step = float(task.get("step", 0.1))
    eps = float(task.get("eps", 0.2))
    seed = _as_complex(task.get("seed", 0.0))
    return trace_graph(
        plane,
        tuple(map(float, rect)),
        step,
        cfg.potential,
        cfg.R,
        cfg.dual,
        eps=eps,
        seed=seed,
        ker_tol=cfg.tolerances["ker_tol"],
    )


def _task_trace(cfg: JobConfig):
    samples = _trace_from_task(cfg, cfg.task)
    return {"sample_count": len(samples)}, samples


def _report_to_jsonable(rep):
    return {
        "c2": rep.c_pair[0],
        "c1": rep.c_pair[1],
        "verdict": rep.verdict,
        "node_location": rep.node_location,
        "discriminant_zeros": list(rep.discriminant_zeros),
        "multiplier_is_real": rep.multiplier_is_real,
        "method": rep.method,
        "zero_separation": rep.zero_separation,
    }


def _task_classify(cfg: JobConfig):
    task = cfg.task
    eps = float(task.get("eps", 0.8))
    reports = []
    failures = []
    if "pairs" in task:
        pair_list = [
            (_as_complex(p[0]), _as_complex(p[1])) for p in task["pairs"]
        ]
    else:
        w = float(task.get("window_radius", 1.0))
        pts = enumerate_dual(cfg.dual, w)
        pair_list = [(c2, c1) for c2 in pts for c1 in pts]
    for c2, c1 in pair_list:
        try:
            rep = classify_double_point(
                (c2, c1), eps, cfg.potential, cfg.R, cfg.lattice, cfg.dual
            )
            reports.append(_report_to_jsonable(rep))
        except TorusSpecError as exc:
            failures.append({"c2": c2, "c1": c1, "error": exc.payload()})
    return {"eps": eps, "reports": reports, "failures": failures}, []


def _task_genus(cfg: JobConfig):
    task = cfg.task
    w = float(task.get("window_radius", 1.0))
    eps = float(task.get("eps", 0.8))
    rep = genus_window_report(w, eps, cfg.potential, cfg.R, cfg.lattice, cfg.dual)
    return {
        "window_radius": rep.window_radius,
        "handle_count": rep.handle_count,
        "node_count": rep.node_count,
        "indeterminate_count": rep.indeterminate_count,
        "failures": [
            {"c2": c2, "c1": c1, "error": msg} for (c2, c1), msg in rep.failures
        ],
        "reports": [_report_to_jsonable(r) for r in rep.reports],
        "note": rep.note,
    }, []


def _task_energy(cfg: JobConfig):
    task = cfg.task
    rep = energy_report(
        cfg.potential,
        cfg.lattice,
        cfg.R,
        cfg.dual,
        b0=task.get("b0"),
        step=task.get("step"),
        imag_offset=task.get("imag_offset"),
        eps=float(task.get("eps", 0.2)),
        fit_degree=int(task.get("fit_degree", 4)),
        fit_tol=cfg.tolerances["fit_tol"],
        ker_tol=cfg.tolerances["ker_tol"],
    )
    return {
        "W_direct": rep.W_direct,
        "W_slope_o": rep.W_slope_o,
        "W_slope_inf": rep.W_slope_inf,
        "W_residue": rep.W_residue,
        "vol": rep.vol,
        "diagnostics": rep.diagnostics,
    }, []


def _task_section(cfg: JobConfig):
    task = cfg.task
    plane = task.get("plane", "b_plane")
    values = [_as_complex(v) for v in task.get("values", [])]
    points = [_as_complex(p) for p in task.get("points", [0.0])]
    ker_tol = cfg.tolerances["ker_tol"]
    out = []
    samples = []
    for v in values:
        sample = locate_graph_sample(plane, v, cfg.potential, cfg.R, cfg.dual,
                                     ker_tol=ker_tol)
        samples.append(sample)
        psi, dev_o, dev_inf = kernel_section_deviation(
            sample, cfg.potential, cfg.R, cfg.dual, ker_tol
        )
        ratios = [
            {"p": p, "ratio": s_map(sample, p, cfg.potential, cfg.R, cfg.lattice,
                                    cfg.dual, ker_tol)}
            for p in points
        ]
        out.append(
            {
                "value": v,
                "coord": sample.coord,
                "dev_o": dev_o,
                "dev_inf": dev_inf,
                "coefficients": {
                    "first": {str(k): u for k, u in sorted(psi.first.items())},
                    "second": {str(k): u for k, u in sorted(psi.second.items())},
                },
                "s_map": ratios,
            }
        )
    return {"sections": out}, samples


def _task_audit(cfg: JobConfig):
    task = cfg.task
    samples = _trace_from_task(cfg, task)
    eps = float(task.get("eps", 0.2))
    tube = tube_audit(samples, eps, cfg.dual, task.get("core_bound"))
    shifts = task.get("symmetry_shifts", [[1, 0], [0, 1]])
    ker_tol = cfg.tolerances["ker_tol"]
    rho_worst = 0.0
    per_worst = 0.0
    for s in samples:
        base = indicator(s.coord.a, s.coord.b, cfg.potential, cfg.R, cfg.dual)
        mirrored = apply_symmetry("rho", s.coord)
        rho = indicator(mirrored.a, mirrored.b, cfg.potential, cfg.R, cfg.dual)
        rho_worst = max(rho_worst, abs(base.sigma_min - rho.sigma_min))
        for m, n in shifts:
            c = cfg.dual.point(int(m), int(n))
            shifted = apply_symmetry("tc", s.coord, c, cfg.dual)
            per = indicator(shifted.a, shifted.b, cfg.potential, cfg.R, cfg.dual)
            per_worst = max(per_worst, abs(base.sigma_min - per.sigma_min))
    return {
        "tube": {
            "eps": tube.eps,
            "checked": tube.checked,
            "skipped_in_core": tube.skipped_in_core,
            "violations": [
                {"coord": coord, "distance": d} for coord, d in tube.violations
            ],
            "max_distance": tube.max_distance,
        },
        "rho_symmetry_worst": rho_worst,
        "periodicity_worst": per_worst,
    }, samples


TASKS = {
    "vacuum": _task_vacuum,
    "indicator": _task_indicator,
    "trace": _task_trace,
    "classify": _task_classify,
    "genus": _task_genus,
    "energy": _task_energy,
    "section": _task_section,
    "audit": _task_audit,
}


def run(subcommand: str, config_path: str, output_path: str | None,
        threads: int = 0) -> int:
    """Execute one subcommand; returns the process exit status."""
    try:
        if subcommand not in TASKS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        cfg = JobConfig.load(config_path)
        outputs, samples = TASKS[subcommand](cfg)
        record = {
            "task": subcommand,
            "version": __version__,
            "inputs": cfg.raw,
            "tolerances": cfg.tolerances,
            "outputs": outputs,
            "samples": [
                {
                    "coord": s.coord,
                    "sigma_min": s.sigma_min,
                    "kernel_dim": s.kernel_dim,
                    "branch_tag": s.branch_tag,
                }
                for s in samples
            ],
        }
        text = dumps_canonical(record) + "\n"
        if output_path:
            Path(output_path).write_text(text)
            if samples:
                Path(output_path).with_suffix(".csv").write_text(
                    samples_to_csv(samples)
                )
        else:
            sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        _emit_error(exc, output_path)
        return 2
    except TorusSpecError as exc:
        _emit_error(exc, output_path)
        return 1


def _emit_error(exc: TorusSpecError, output_path: str | None) -> None:
    text = dumps_canonical({"error": exc.payload()}) + "\n"
    if output_path:
        try:
            Path(output_path).write_text(text)
            return
        except OSError:
            pass
    sys.stderr.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="torusspec",
        description="Spectral curves and Willmore energies of periodic "
        "Dirac-type operators on a 2-torus",
    )
    parser.add_argument("subcommand", choices=sorted(TASKS))
    parser.add_argument("--config", required=True, help="path to a JSON job config")
    parser.add_argument("--out", default=None, help="output JSON path (CSV beside it)")
    parser.add_argument(
        "--threads",
        type=int,
        default=0,
        help="worker threads (0 = auto); results are reduced in "
        "deterministic order regardless",
    )
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
