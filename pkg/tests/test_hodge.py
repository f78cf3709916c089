import numpy as np
import pytest

from parhodge import compat, hodge, localsys, numlin, surface, twisted

from conftest import doughnut_metric, torus_grid_cochain


def build(gen, args, n=1, seed=30, trivial=True):
    rng = np.random.default_rng(seed)
    k, h, loops = gen(*args)
    f = localsys.trivial_system(k, n) if trivial else \
        localsys.random_flat_system(k, loops, n, rng)
    return k, h, f, loops


def test_twisted_matrices_reduce_to_scalar_for_trivial_system():
    k, h, f, _ = build(surface.annulus, (5, 2), n=3)
    mc = hodge.metric_complex(k, h, f)
    m0, m1, m2, w1 = surface.whitney_scalar_matrices(k, h)
    assert np.abs(mc.m1 - np.kron(m1, np.eye(3))).max() < 1e-12
    assert np.abs(mc.m0 - np.kron(m0, np.eye(3))).max() < 1e-12
    assert np.abs(mc.w1_twisted - np.kron(w1, np.eye(3))).max() < 1e-12


def test_mass_matrices_spd_and_wedge_skew_twisted():
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False)
    mc = hodge.metric_complex(k, h, f)
    for m in (mc.m0, mc.m1, mc.m2):
        assert np.linalg.eigvalsh(m)[0] > 0
    assert np.abs(mc.w1_twisted + mc.w1_twisted.T).max() == 0.0


def test_adjointness_identity_random_pairs():
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False)
    mc = hodge.metric_complex(k, h, f)
    cod = hodge.codifferentials(mc)
    d0, d1, _, _ = mc.coboundaries()
    rng = np.random.default_rng(31)
    for _ in range(50):
        a = rng.standard_normal(d0.shape[1])
        u = rng.standard_normal(d0.shape[0])
        lhs = (d0 @ a) @ mc.m1 @ u
        rhs = a @ mc.m0 @ (cod["delta1"] @ u)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


def test_delta1_d0_is_laplacian_with_constant_kernel():
    k, h, f, _ = build(surface.torus, (4,))
    mc = hodge.metric_complex(k, h, f)
    cod = hodge.codifferentials(mc)
    d0, _, _, _ = mc.coboundaries()
    lap = cod["delta1"] @ d0
    assert numlin.rank(lap) == k.n_vertices - 1
    assert np.abs(lap @ np.ones(k.n_vertices)).max() < 1e-9


def test_harmonic_dims_closed_and_bounded():
    k, h, f, _ = build(surface.torus, (4,))
    mc = hodge.metric_complex(k, h, f)
    harm = hodge.harmonic_spaces(mc)
    assert harm.dim_n == harm.dim_d == 2
    k2, h2, f2, _ = build(surface.annulus, (6, 2))
    mc2 = hodge.metric_complex(k2, h2, f2)
    harm2 = hodge.harmonic_spaces(mc2)
    assert harm2.dim_n == 1 and harm2.dim_d == 1


def test_harmonic_dims_match_cohomology_twisted():
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False, seed=32)
    mc = hodge.metric_complex(k, h, f)
    harm = hodge.harmonic_spaces(mc)
    assert harm.dim_n == twisted.cohomology(k, f, 1, "absolute").dim
    assert harm.dim_d == twisted.cohomology(k, f, 1, "relative").dim


def test_harmonic_representative_is_lsq_projection():
    rng = np.random.default_rng(33)
    k, h, f, _ = build(surface.torus, (4,))
    mc = hodge.metric_complex(k, h, f)
    d0, d1, _, _ = mc.coboundaries()
    closed = numlin.nullspace_basis(d1)
    for _ in range(10):
        u = closed @ rng.standard_normal(closed.shape[1])
        hrep = hodge.harmonic_representative(mc, u)
        # harmonic: closed and co-closed, in the same class
        assert np.abs(d1 @ hrep).max() < 1e-9
        assert np.abs(d0.T @ mc.m1 @ hrep).max() < 1e-9
        assert numlin.rank(np.column_stack([u - hrep, d0 @ np.eye(d0.shape[1])])) \
            == numlin.rank(d0)


def test_metric_scaling_leaves_harmonic_spaces_invariant():
    k, h, f, _ = build(surface.annulus, (6, 2))
    mc1 = hodge.metric_complex(k, h, f)
    h2 = surface.metric_from_lengths(k, 2.0 * h.lengths)
    mc2 = hodge.metric_complex(k, h2, f)
    h_n1 = hodge.harmonic_spaces(mc1).h_n
    h_n2 = hodge.harmonic_spaces(mc2).h_n
    assert compat.subspace_angle(h_n1, h_n2, mc1.m1) < 1e-9


def test_metric_independence_of_harmonic_dims():
    rng = np.random.default_rng(34)
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False, seed=35)
    mc1 = hodge.metric_complex(k, h, f)
    mc2 = hodge.metric_complex(k, surface.perturbed_metric(k, h, rng), f)
    a, b = hodge.harmonic_spaces(mc1), hodge.harmonic_spaces(mc2)
    assert (a.dim_n, a.dim_d) == (b.dim_n, b.dim_d)


def test_hodge_decomposition_orthogonality_and_dims():
    for gen, args, n, trivial, seed in [
        (surface.torus, (4,), 1, True, 0),
        (surface.disk, (4,), 1, True, 0),
        (surface.annulus, (6, 2), 1, True, 0),
        (surface.genus_k, (1, 1, 1), 3, False, 36),
    ]:
        k, h, f, _ = build(gen, args, n=n, trivial=trivial, seed=seed)
        mc = hodge.metric_complex(k, h, f)
        dec = hodge.hodge_decomposition(mc)
        rep = dec["report"]
        assert rep["dim_sum_ok"]
        assert max(rep["orthogonality"].values()) < 1e-9
        assert rep["refinement_report"]["H_N_in_CcC_residual"] < 1e-9
        assert rep["refinement_report"]["H_D_in_CcC_residual"] < 1e-9


def test_hodge_decomposition_orthogonality_20_random_systems():
    rng = np.random.default_rng(60)
    k, h, loops = surface.genus_k(1, 1, 1)
    for _ in range(20):
        f = localsys.random_flat_system(k, loops, 3, rng)
        mc = hodge.metric_complex(k, h, f)
        rep = hodge.hodge_decomposition(mc)["report"]
        assert rep["dim_sum_ok"]
        assert max(rep["orthogonality"].values()) < 1e-9


def test_hodge_decomposition_closed_torus_collapses():
    k, h, f, _ = build(surface.torus, (4,))
    mc = hodge.metric_complex(k, h, f)
    dec = hodge.hodge_decomposition(mc)
    assert dec["report"]["dims"]["CcC"] == 2
    assert dec["report"]["refinement_report"]["dim_exact_in_CcC"] == 0
    assert dec["report"]["refinement_report"]["split_neumann_ok"]
    assert dec["report"]["refinement_report"]["split_dirichlet_ok"]


def test_hodge_decomposition_disk_middle_carries_no_cohomology():
    k, h, f, _ = build(surface.disk, (4,))
    mc = hodge.metric_complex(k, h, f)
    dec = hodge.hodge_decomposition(mc)
    rep = dec["report"]["refinement_report"]
    # trivial cohomology on both sides; CcC itself is exact material
    assert rep["dim_exact_in_CcC"] == dec["report"]["dims"]["CcC"]
    assert rep["split_neumann_ok"]


def test_hodge_decomposition_annulus_middle_dims():
    k, h, f, _ = build(surface.annulus, (6, 2))
    mc = hodge.metric_complex(k, h, f)
    dec = hodge.hodge_decomposition(mc)
    rep = dec["report"]
    harm = hodge.harmonic_spaces(mc)
    assert harm.dim_n == 1 and harm.dim_d == 1
    # both harmonic flavors sit inside CcC exactly
    assert rep["refinement_report"]["H_N_in_CcC_residual"] < 1e-12
    assert rep["refinement_report"]["H_D_in_CcC_residual"] < 1e-12
    # the Neumann-side refinement holds exactly; the Dirichlet-side
    # identity genuinely fails at the discrete level and the report says so
    assert rep["refinement_report"]["split_neumann_ok"]
    assert rep["refinement_report"]["dirichlet_defect"] >= 0


def test_galerkin_star_skew_always():
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False, seed=37)
    mc = hodge.metric_complex(k, h, f)
    jh = hodge.galerkin_star(mc)
    assert np.abs(jh.T @ mc.m1 + mc.m1 @ jh).max() < 1e-10


def test_galerkin_star_flat_torus_maps_dx_to_dy():
    m = 8
    k, h, f, _ = build(surface.torus, (m,))
    mc = hodge.metric_complex(k, h, f)
    jh = hodge.galerkin_star(mc)
    hx = hodge.harmonic_representative(mc, torus_grid_cochain(k, m, 1, 0))
    hy = hodge.harmonic_representative(mc, torus_grid_cochain(k, m, 0, 1))
    err = np.linalg.norm(jh @ hx - hy) / np.linalg.norm(hy)
    assert err < 0.05


def test_galerkin_square_improves_under_refinement():
    # the uniform flat grid is exact, so exercise convergence on a curved
    # embedding of the same combinatorial family
    vals = []
    for m in (4, 8):
        k, _, _ = surface.torus(m)
        h = doughnut_metric(k, m)
        f = localsys.trivial_system(k, 1)
        mc = hodge.metric_complex(k, h, f)
        vals.append(hodge.galerkin_diagnostics(mc)["jsq_on_ccc"])
    assert vals[1] < vals[0]


def test_galerkin_flat_torus_exact_on_harmonics():
    for m in (4, 8):
        k, h, f, _ = build(surface.torus, (m,))
        mc = hodge.metric_complex(k, h, f)
        diag = hodge.galerkin_diagnostics(mc)
        assert diag["jsq_on_ccc"] < 1e-9
        assert diag["p38_residual"] < 1e-9


def test_gauge_invariance_of_metric_complex():
    rng = np.random.default_rng(38)
    k, h, f, _ = build(surface.genus_k, (1, 1, 1), n=3, trivial=False, seed=39)
    gauges = [localsys.random_rotation(rng, 3) for _ in range(k.vertex_count)]
    f2 = localsys.gauge_transform(k, f, gauges)
    mc1 = hodge.metric_complex(k, h, f)
    mc2 = hodge.metric_complex(k, h, f2)
    a, b = hodge.harmonic_spaces(mc1), hodge.harmonic_spaces(mc2)
    assert (a.dim_n, a.dim_d) == (b.dim_n, b.dim_d)
    # M1 is conjugated by the block-orthogonal gauge on edge values
    n = 3
    blocks = np.zeros_like(mc1.m1)
    for ei, (u, v) in enumerate(k.edges):
        blocks[n * ei:n * ei + n, n * ei:n * ei + n] = gauges[u]
    assert np.abs(blocks @ mc1.m1 @ blocks.T - mc2.m1).max() < 1e-9
