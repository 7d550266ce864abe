import pytest

from torusspec import (
    LogCoord,
    Potential,
    apply_symmetry,
    classify_double_point,
    enumerate_dual,
    genus_window_report,
    indicator,
    locate_graph_sample,
    solve_transversal,
    trace_graph,
    tube_audit,
)
from torusspec.errors import ConfigError


# --- transversal solves -------------------------------------------------------


def test_transversal_vacuum_single_root(square_dual, q_zero):
    roots = solve_transversal(LogCoord(0.0, 0.3), 0.1, q_zero, 2.0, square_dual)
    assert len(roots) == 1
    assert abs(roots[0]) < 1e-12


def test_transversal_vacuum_empty(square_dual, q_zero):
    roots = solve_transversal(LogCoord(0.3, 0.3), 0.1, q_zero, 2.0, square_dual)
    assert roots == []


def test_transversal_constant_q_quadratic_root(square_dual, q_const):
    # the {v_0, w_0} block gives l^2 + l + 0.09 = 0; the smaller root is
    # exactly -0.1 (the truncation R < 1 keeps the v_1 line out of the disc)
    roots = solve_transversal(LogCoord(0.0, 1.0), 0.2, q_const, 0.75, square_dual)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(-0.1, abs=1e-12)


# --- tracing --------------------------------------------------------------------


def test_trace_vacuum_graph_is_zero(square_dual, q_zero):
    samples = trace_graph(
        "b_plane", (0.7, 1.3, 0.25, 0.25), 0.1, q_zero, 2.0, square_dual, eps=0.2
    )
    assert len(samples) == 7
    for s in samples:
        assert abs(s.coord.a) < 1e-12
        assert s.kernel_dim == 1
        assert s.branch_tag == "graph_over_b"


def test_trace_constant_hyperbola(square_dual, q_const):
    samples = trace_graph(
        "b_plane", (2.0, 3.0, 0.0, 0.0), 0.1, q_const, 1.5, square_dual, eps=0.2
    )
    assert len(samples) == 11
    for s in samples:
        assert abs(s.coord.a + 0.09 / s.coord.b) < 1e-8
        assert s.sigma_min <= 1e-7
        assert s.kernel_dim == 1


def test_trace_rho_image(square_dual, q_const):
    # tracing the a-plane over the conjugate-reflected region reproduces the
    # conjugated samples
    b_samples = trace_graph(
        "b_plane", (2.0, 2.5, 0.25, 0.25), 0.1, q_const, 1.5, square_dual, eps=0.2
    )
    a_samples = trace_graph(
        "a_plane", (2.0, 2.5, -0.25, -0.25), 0.1, q_const, 1.5, square_dual, eps=0.2
    )
    paired = {
        (round(s.coord.a.real, 9), round(s.coord.a.imag, 9)): s for s in a_samples
    }
    for s in b_samples:
        mirrored = apply_symmetry("rho", s.coord)
        key = (round(mirrored.a.real, 9), round(mirrored.a.imag, 9))
        assert key in paired
        twin = paired[key]
        assert abs(twin.coord.b - mirrored.b) < 1e-9


def test_trace_rejects_region_on_lattice_line(square_dual, q_const):
    with pytest.raises(ConfigError):
        trace_graph(
            "b_plane", (0.4, 0.6, 0.0, 0.0), 0.05, q_const, 1.5, square_dual, eps=0.2
        )


def test_locate_graph_sample(square_dual, q_const):
    s = locate_graph_sample("b_plane", 5.0, q_const, 2.0, square_dual)
    assert abs(s.coord.a + 0.09 / 5.0) < 1e-10
    assert s.kernel_dim == 1


# --- rho and periodicity of the indicator ----------------------------------------


def test_indicator_rho_symmetry_on_samples(square_dual, q_perturbed):
    samples = trace_graph(
        "b_plane", (0.8, 1.6, 0.25, 0.25), 0.1, q_perturbed, 4.0, square_dual, eps=0.2
    )
    for s in samples:
        mirrored = apply_symmetry("rho", s.coord)
        ind = indicator(mirrored.a, mirrored.b, q_perturbed, 4.0, square_dual)
        assert abs(ind.sigma_min - s.sigma_min) < 1e-9


def test_indicator_periodicity_interior(square_dual, q_perturbed):
    coord = LogCoord(-0.033, 1.2 + 0.25j)
    base = indicator(coord.a, coord.b, q_perturbed, 5.0, square_dual)
    for c in (0.5, 0.5j, -0.5):
        shifted = apply_symmetry("tc", coord, c, square_dual)
        ind = indicator(shifted.a, shifted.b, q_perturbed, 5.0, square_dual)
        assert abs(ind.sigma_min - base.sigma_min) < 1e-9


# --- classification ----------------------------------------------------------------


def test_classify_vacuum_node(square_torus, square_dual, q_zero):
    rep = classify_double_point((0.0, 0.0), 0.3, q_zero, 2.5, square_torus, square_dual)
    assert rep.verdict == "Node"
    assert rep.multiplier_is_real is True
    assert abs(rep.node_location.a) < 1e-10 and abs(rep.node_location.b) < 1e-10
    # discriminant 4 x^2: both zeros at the origin
    assert max(abs(z) for z in rep.discriminant_zeros) < 1e-7


def test_classify_coupled_constant_handle(square_torus, square_dual, q_const):
    rep = classify_double_point(
        (-0.5, 0.5), 0.8, q_const, 2.5, square_torus, square_dual
    )
    assert rep.verdict == "Handle"
    # two-mode discriminant 4 x^2 - 4 |q0|^2: zeros at +/- |q0|
    zeros = sorted(rep.discriminant_zeros, key=lambda z: z.real)
    assert zeros[0] == pytest.approx(-0.3, abs=1e-9)
    assert zeros[1] == pytest.approx(0.3, abs=1e-9)


def test_classify_uncoupled_constant_node(square_torus, square_dual, q_const):
    rep = classify_double_point(
        (0.0, 0.5j), 0.8, q_const, 2.5, square_torus, square_dual
    )
    assert rep.verdict == "Node"
    assert rep.multiplier_is_real is True
    assert abs(rep.node_location.a - 0.0) < 1e-9
    assert abs(rep.node_location.b - 0.5j) < 1e-9


def test_classify_small_coupling_projector_route(square_torus, square_dual):
    q = Potential.constant(square_dual, 0.02)
    rep = classify_double_point((-0.5, 0.5), 0.3, q, 2.5, square_torus, square_dual)
    assert rep.method == "projector"
    assert rep.verdict == "Handle"
    zeros = sorted(rep.discriminant_zeros, key=lambda z: z.real)
    assert zeros[0] == pytest.approx(-0.02, abs=1e-6)
    assert zeros[1] == pytest.approx(0.02, abs=1e-6)


def test_classify_small_coupling_node_kernel_dim(square_torus, square_dual):
    # the projector route locates the true crossing; the truncated family
    # has a 2-dimensional kernel there and a real multiplier
    q = Potential.constant(square_dual, 0.02)
    rep = classify_double_point((0.0, 0.5j), 0.3, q, 2.5, square_torus, square_dual)
    assert rep.method == "projector"
    assert rep.verdict == "Node"
    assert rep.multiplier_is_real is True
    loc = rep.node_location
    A_ind = indicator(loc.a, loc.b, q, 2.5, square_dual)
    assert A_ind.sigma_min < 1e-7
    from torusspec.kernels import smallest_singular_pair
    from torusspec import assemble

    s1, s2 = smallest_singular_pair(assemble(loc.a, loc.b, q, 2.5, square_dual).entries)
    assert s2 < 1e-7


def test_classify_single_mode_first_order_oracle(square_torus, square_dual):
    # coupling reaches the pair at first order iff q_{c' + c''} != 0;
    # degenerate perturbation of the two-mode block splits the zeros to
    # +/- |q_{c'+c''}|
    q = Potential.from_pairs(square_dual, [(0.5, 0.04)])
    pts = enumerate_dual(square_dual, 0.6)
    for c2 in pts:
        for c1 in pts:
            rep = classify_double_point(
                (c2, c1), 0.4, q, 2.5, square_torus, square_dual
            )
            coupled = abs((c1 + c2) - 0.5) < 1e-12
            if coupled:
                assert rep.verdict == "Handle"
                assert sorted(abs(z) for z in rep.discriminant_zeros) == pytest.approx(
                    [0.04, 0.04], abs=1e-9
                )
            else:
                assert rep.verdict == "Node"
                assert rep.multiplier_is_real is True


# --- tube audit -----------------------------------------------------------------


def test_tube_audit_vacuum(square_dual, q_zero):
    samples = trace_graph(
        "b_plane", (2.0, 2.6, 0.25, 0.25), 0.1, q_zero, 2.0, square_dual, eps=0.2
    )
    rep = tube_audit(samples, 0.1, square_dual, core_bound=1.0)
    assert rep.checked == len(samples)
    assert rep.violations == ()
    assert rep.max_distance < 1e-12


def test_tube_audit_hyperbola_bound(square_dual, q_const):
    samples = trace_graph(
        "b_plane", (3.0, 4.0, 0.25, 0.25), 0.2, q_const, 2.0, square_dual, eps=0.1
    )
    rep = tube_audit(samples, 0.1, square_dual, core_bound=1.0)
    assert rep.violations == ()
    assert rep.max_distance <= 0.09 / 3.0 + 1e-12


def test_tube_audit_flags_handle_waist(square_dual):
    # waist sample of the coupled handle at (0, 3): distance |a| = |q0|,
    # flagged exactly when |q0| >= eps
    from torusspec import SpectrumSample

    waist = SpectrumSample(LogCoord(0.2, 2.8), 0.0, 1, "near_double_point")
    flagged = tube_audit([waist], 0.15, square_dual, core_bound=1.0)
    assert len(flagged.violations) == 1
    clear = tube_audit([waist], 0.25, square_dual, core_bound=1.0)
    assert clear.violations == ()


def test_handle_adjacent_multiplier_is_non_real(square_torus, square_dual, q_const):
    # branch points of the coupled handle sit away from the real
    # representations
    from torusspec.tracing import _multiplier_is_real

    waist = LogCoord(-0.5 + 0.3, 0.5 - 0.3)
    ind = indicator(waist.a, waist.b, q_const, 2.5, square_dual)
    assert ind.sigma_min < 1e-10
    assert not _multiplier_is_real(waist, square_torus)


def test_tube_audit_core_skipped(square_dual, q_zero):
    samples = trace_graph(
        "b_plane", (0.7, 1.3, 0.25, 0.25), 0.1, q_zero, 2.0, square_dual, eps=0.2
    )
    rep = tube_audit(samples, 0.1, square_dual, core_bound=10.0)
    assert rep.checked == 0
    assert rep.skipped_in_core == len(samples)


# --- genus window -----------------------------------------------------------------


def test_genus_vacuum_all_nodes(square_torus, square_dual, q_zero):
    rep = genus_window_report(0.6, 0.4, q_zero, 2.5, square_torus, square_dual)
    assert rep.handle_count == 0
    assert rep.indeterminate_count == 0
    assert rep.failures == ()
    assert rep.node_count == 25


def test_genus_constant_handles_on_antidiagonal(square_torus, square_dual, q_const):
    rep = genus_window_report(1.1, 0.8, q_const, 2.5, square_torus, square_dual)
    pts = enumerate_dual(square_dual, 1.1)
    assert rep.failures == ()
    assert rep.handle_count == len(pts)
    assert rep.node_count == len(pts) ** 2 - len(pts)
    for r in rep.reports:
        coupled = abs(r.c_pair[0] + r.c_pair[1]) < 1e-12
        assert (r.verdict == "Handle") == coupled
