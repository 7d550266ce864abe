"""Spectral curves of periodic Dirac-type operators on a 2-torus.

Computes, traces and classifies the logarithmic spectrum of the truncated
family D_{a,b} = dbar_{a,b} + M over the multiplier coordinates (a, b),
and evaluates the Willmore energy of the underlying line bundle by three
independent routes (direct Fourier sum, end slope, residue pairing).
"""

__version__ = "0.1.0"

from .lattice import (
    DualLattice,
    LogCoord,
    Multiplier,
    TorusLattice,
    apply_symmetry,
    dual_lattice,
    enumerate_dual,
    exp_multiplier,
    reduce_to_domain,
)
from .operators import (
    OperatorMatrix,
    j_image,
    Potential,
    SectionCoeffs,
    assemble,
    evaluate_pointwise,
    gauge_shift,
    multiply_by_potential,
    vacuum_resolvent_diag,
    wiener_norm,
)
from .kernels import (
    Projector,
    SpectralIndicator,
    count_zeros_winding,
    indicator,
    kernel_vector,
    kernel_vectors,
    restricted_pencil,
    riesz_projector,
)
from .tracing import (
    DoublePointReport,
    GenusWindowReport,
    SpectrumSample,
    TubeAuditReport,
    classify_double_point,
    genus_window_report,
    locate_graph_sample,
    solve_transversal,
    trace_graph,
    tube_audit,
)
from .energy import (
    EndChart,
    EnergyReport,
    end_chart,
    energy_report,
    fit_end_chart,
    kernel_section_deviation,
    s_map,
    willmore_direct,
    willmore_residue,
    willmore_slope,
)

__all__ = [
    "DualLattice",
    "LogCoord",
    "Multiplier",
    "TorusLattice",
    "apply_symmetry",
    "dual_lattice",
    "enumerate_dual",
    "exp_multiplier",
    "reduce_to_domain",
    "OperatorMatrix",
    "Potential",
    "SectionCoeffs",
    "assemble",
    "evaluate_pointwise",
    "gauge_shift",
    "j_image",
    "multiply_by_potential",
    "vacuum_resolvent_diag",
    "wiener_norm",
    "Projector",
    "SpectralIndicator",
    "count_zeros_winding",
    "indicator",
    "kernel_vector",
    "kernel_vectors",
    "restricted_pencil",
    "riesz_projector",
    "DoublePointReport",
    "GenusWindowReport",
    "SpectrumSample",
    "TubeAuditReport",
    "classify_double_point",
    "genus_window_report",
    "locate_graph_sample",
    "solve_transversal",
    "trace_graph",
    "tube_audit",
    "EndChart",
    "EnergyReport",
    "end_chart",
    "energy_report",
    "fit_end_chart",
    "kernel_section_deviation",
    "s_map",
    "willmore_direct",
    "willmore_residue",
    "willmore_slope",
]
