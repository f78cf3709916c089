"""Twisted simplicial cochains, cohomology, parabolic classes and the cup form.

Cochain coordinates: a p-cochain takes a fiber vector on each canonical
p-simplex, stored blockwise in simplex order (vertices by id, edges in
lexicographic order, triangles in stored order).  The value on a simplex
lives in the fiber at its lowest vertex; coboundary formulas transport all
terms there.  The `relative` flavor is the subcomplex of cochains vanishing
on boundary simplices, represented on interior degrees of freedom.

The symplectic pairing comes from the simplicial cup product evaluated on
the fundamental 2-cycle and is metric-free.  On closed one-cochains the
antisymmetrized cup value per triangle coincides exactly with the integral
of the wedge of the corresponding Whitney forms, which the tests cross-check
against the metric module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import NotClosed
from .numlin import DEFAULT_TOL


@dataclass
class TwistedCochainSpace:
    """Coordinate description of one cochain degree and flavor.

    `dof_mask` marks the coordinates of the absolute space that the flavor
    keeps (the relative flavor zeroes boundary-supported blocks); `dim` is
    the dimension of the flavor's own coordinate space.
    """

    degree: int
    flavor: str
    fiber_dim: int
    dim: int
    dof_mask: np.ndarray


def cochain_space(k, f, degree, flavor="absolute"):
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1 or 2")
    n = f.fiber_dim
    counts = [k.vertex_count, k.n_edges, k.n_triangles]
    if flavor == "absolute":
        mask = np.ones(n * counts[degree], dtype=bool)
    elif flavor == "relative":
        masks = [interior_vertex_mask(k), interior_edge_mask(k),
                 np.ones(k.n_triangles, dtype=bool)]
        mask = _expand(masks[degree], n)
    else:
        raise ValueError("flavor must be 'absolute' or 'relative'")
    return TwistedCochainSpace(degree=degree, flavor=flavor, fiber_dim=n,
                               dim=int(mask.sum()), dof_mask=mask)


@dataclass
class CohomologyBasis:
    degree: int
    flavor: str
    reps: np.ndarray  # columns are cocycles in absolute coordinates
    dim: int


def interior_edge_mask(k):
    mask = np.ones(k.n_edges, dtype=bool)
    mask[k.boundary_edge_indices] = False
    return mask


def interior_vertex_mask(k):
    mask = np.ones(k.vertex_count, dtype=bool)
    mask[k.boundary_vertices] = False
    return mask


def _expand(mask, n):
    return np.repeat(mask, n)


def coboundaries(k, f):
    """Twisted coboundary matrices (d0, d1) and their relative compressions.

    (d0 a)(u -> v) = P_uv a(v) - a(u) on canonical edges; (d1 w) on a
    triangle with sorted vertices (w0, w1, w2) is
    P_w0w1 w(w1 w2) - w(w0 w2) + w(w0 w1), valued at w0.
    d1 @ d0 vanishes exactly when the system is flat.
    """
    n = f.fiber_dim
    eye = np.eye(n)
    d0 = np.zeros((n * k.n_edges, n * k.vertex_count))
    for ei, (u, v) in enumerate(k.edges):
        d0[n * ei:n * ei + n, n * v:n * v + n] = f.transports[ei]
        d0[n * ei:n * ei + n, n * u:n * u + n] = -eye
    d1 = np.zeros((n * k.n_triangles, n * k.n_edges))
    for ti, t in enumerate(k.triangles):
        w0, w1, w2 = sorted(t)
        e01, e02, e12 = k.edge_id(w0, w1), k.edge_id(w0, w2), k.edge_id(w1, w2)
        d1[n * ti:n * ti + n, n * e12:n * e12 + n] = f.transports[e01]
        d1[n * ti:n * ti + n, n * e02:n * e02 + n] = -eye
        d1[n * ti:n * ti + n, n * e01:n * e01 + n] = eye
    ve = _expand(interior_vertex_mask(k), n)
    ee = _expand(interior_edge_mask(k), n)
    d0_rel = d0[np.ix_(ee, ve)]
    d1_rel = d1[:, ee]
    return d0, d1, d0_rel, d1_rel


def cohomology(k, f, degree, flavor="absolute", tol=DEFAULT_TOL):
    """Basis of cocycle representatives, chosen Euclidean-orthonormal and
    orthogonal to the coboundary space; `dim` is the Betti number."""
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1 or 2")
    if flavor not in ("absolute", "relative"):
        raise ValueError("flavor must be 'absolute' or 'relative'")
    n = f.fiber_dim
    d0, d1, d0_rel, d1_rel = coboundaries(k, f)
    if flavor == "absolute":
        chain_dims = [n * k.vertex_count, n * k.n_edges, n * k.n_triangles]
        ds = [d0, d1]
        masks = [np.ones(dim, dtype=bool) for dim in chain_dims]
    else:
        ve = _expand(interior_vertex_mask(k), n)
        ee = _expand(interior_edge_mask(k), n)
        chain_dims = [int(ve.sum()), int(ee.sum()), n * k.n_triangles]
        ds = [d0_rel, d1_rel]
        masks = [ve, ee, np.ones(n * k.n_triangles, dtype=bool)]

    d_out = ds[degree] if degree < 2 else np.zeros((0, chain_dims[2]))
    d_in = ds[degree - 1] if degree > 0 else np.zeros((chain_dims[0], 0))
    kernel = numlin.nullspace_basis(d_out, tol)
    coeffs = numlin.nullspace_basis(d_in.T @ kernel, tol)
    reps_flavor = kernel @ coeffs
    reps = np.zeros((([n * k.vertex_count, n * k.n_edges, n * k.n_triangles])[degree],
                     reps_flavor.shape[1]))
    reps[masks[degree]] = reps_flavor
    return CohomologyBasis(degree=degree, flavor=flavor, reps=reps,
                           dim=reps.shape[1])


def class_coordinates(h_basis, u):
    """Coordinates of closed cochains `u` (columns) in an orthonormal
    cohomology basis whose reps are orthogonal to the coboundaries."""
    return h_basis.reps.T @ u


def boundary_complex(k, f):
    """Coboundary of the boundary subcomplex and the boundary-edge selector.

    Returns (d0_boundary, restriction) with `restriction` mapping absolute
    1-cochains to boundary 1-cochains by selecting boundary-edge blocks.
    """
    n = f.fiber_dim
    bverts = list(k.boundary_vertices)
    bedges = list(k.boundary_edge_indices)
    vpos = {v: i for i, v in enumerate(bverts)}
    d0b = np.zeros((n * len(bedges), n * len(bverts)))
    for row, ei in enumerate(bedges):
        u, v = k.edges[ei]
        d0b[n * row:n * row + n, n * vpos[v]:n * vpos[v] + n] = f.transports[ei]
        d0b[n * row:n * row + n, n * vpos[u]:n * vpos[u] + n] = -np.eye(n)
    restriction = np.zeros((n * len(bedges), n * k.n_edges))
    for row, ei in enumerate(bedges):
        restriction[n * row:n * row + n, n * ei:n * ei + n] = np.eye(n)
    return d0b, restriction


def restriction_and_parabolic(k, f, tol=DEFAULT_TOL):
    """Restriction map to boundary cohomology and the parabolic classes.

    Parabolic cohomology in degree one is the kernel of the restriction to
    the boundary; `exactness_check` confirms it coincides with the image of
    the relative cohomology (dimension and span agreement).
    """
    h1 = cohomology(k, f, 1, "absolute", tol)
    h1_rel = cohomology(k, f, 1, "relative", tol)
    d0b, restriction = boundary_complex(k, f)
    # coordinates on boundary H^1: orthogonal complement of the exact
    # boundary cochains
    z = numlin.nullspace_basis(d0b.T, tol)
    r_star = z.T @ restriction @ h1.reps
    # reps and z are orthonormal, so the honest scale of r_star is 1
    par_coeffs = numlin.nullspace_basis(r_star, tol, scale=1.0)
    par_reps = h1.reps @ par_coeffs

    image_coeffs = class_coordinates(h1, h1_rel.reps)
    image_dim = numlin.rank(image_coeffs, tol, scale=1.0)
    same = (par_coeffs.shape[1] == image_dim) and (
        numlin.rank(np.hstack([par_coeffs, image_coeffs]), tol, scale=1.0) == image_dim
    )
    return {
        "r_star_matrix": r_star,
        "h1": h1,
        "h1_rel": h1_rel,
        "parabolic_basis": CohomologyBasis(
            degree=1, flavor="parabolic", reps=par_reps, dim=par_reps.shape[1]
        ),
        "parabolic_coeffs": par_coeffs,
        "boundary_h1_dim": z.shape[1],
        "image_dim": image_dim,
        "exactness_check": bool(same),
    }


def _check_closed(k, f, u_basis, tol):
    _, d1, _, _ = coboundaries(k, f)
    if u_basis.shape[1]:
        res = np.abs(d1 @ u_basis).max()
        scale = max(1.0, np.abs(u_basis).max())
        if res > tol.residual_tol * scale:
            raise NotClosed(f"basis columns are not closed (residual {res:.3e})")
    return d1


def cup_omega(k, f, u_basis, tol=DEFAULT_TOL, check_closed=True):
    """Skew pairing of closed one-cochains by the simplicial cup product
    summed over the fundamental cycle; never consults a metric.

    The raw cup value on a triangle with sorted vertices (w0, w1, w2) is
    B(u(w0 w1), P_w0w1 v(w1 w2)) with the orientation parity of the stored
    triangle; the result is antisymmetrized, which on closed cochains
    matches the Whitney wedge integral triangle by triangle.
    """
    u_basis = np.asarray(u_basis, dtype=float)
    if check_closed:
        _check_closed(k, f, u_basis, tol)
    raw = _cup_raw(k, f, u_basis, u_basis)
    return 0.5 * (raw - raw.T)


def _cup_raw(k, f, u_basis, v_basis):
    n = f.fiber_dim
    raw = np.zeros((u_basis.shape[1], v_basis.shape[1]))
    for ti, t in enumerate(k.triangles):
        w0, w1, w2 = sorted(t)
        e01, e12 = k.edge_id(w0, w1), k.edge_id(w1, w2)
        p = f.transports[e01]
        ub = u_basis[n * e01:n * e01 + n]
        vb = v_basis[n * e12:n * e12 + n]
        raw += k.sorted_sign[ti] * (ub.T @ p @ vb)
    return raw


def parabolic_pairing(k, f, u_basis, tol=DEFAULT_TOL):
    """Cup pairing with the left argument lifted to a relative cocycle.

    Each column's boundary restriction is exact on the boundary (that is
    what parabolic means); subtracting the coboundary of an extension of a
    boundary primitive kills it, which makes the pairing independent of the
    chosen representatives within their classes, hence metric-free.
    """
    d1 = _check_closed(k, f, u_basis, tol)
    n = f.fiber_dim
    d0, _, _, _ = coboundaries(k, f)
    d0b, restriction = boundary_complex(k, f)
    bverts = list(k.boundary_vertices)
    lifted = u_basis.copy()
    if bverts and u_basis.shape[1]:
        primitives = numlin.lsq_solve(d0b, np.eye(d0b.shape[0]),
                                      restriction @ u_basis, tol)
        res = d0b @ primitives - restriction @ u_basis
        if np.abs(res).max() > tol.residual_tol * max(1.0, np.abs(u_basis).max()):
            raise NotClosed("columns are not parabolic: boundary restriction "
                            "is not exact on the boundary")
        extend = np.zeros((n * k.vertex_count, u_basis.shape[1]))
        for i, v in enumerate(bverts):
            extend[n * v:n * v + n] = primitives[n * i:n * i + n]
        lifted = u_basis - d0 @ extend
    raw = _cup_raw(k, f, lifted, u_basis)
    return 0.5 * (raw - raw.T)


def euler_characteristic_dims(k, f, tol=DEFAULT_TOL):
    """Absolute Betti numbers (deg 0..2); their alternating sum equals the
    fiber dimension times the Euler characteristic for any flat system."""
    return [cohomology(k, f, p, "absolute", tol).dim for p in (0, 1, 2)]
