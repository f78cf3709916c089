import warnings

import numpy as np
import pytest

from parhodge import localsys, surface
from parhodge.errors import NotConnectedWarning


@pytest.fixture(autouse=True)
def _silence_disconnected():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConnectedWarning)
        yield


def torus_grid_cochain(k, m, dx, dy):
    """Closed cochain on the m x m torus grid with periods (dx, dy)."""
    u = np.zeros(k.n_edges)
    for ei, (a, b) in enumerate(k.edges):
        ia, ja = divmod(a, m)
        ib, jb = divmod(b, m)
        di = (ib - ia) % m
        dj = (jb - ja) % m
        di = di if di <= m // 2 else di - m
        dj = dj if dj <= m // 2 else dj - m
        u[ei] = dx * di / m + dy * dj / m
    return u


def doughnut_metric(k, m, r_major=2.0, r_minor=1.0):
    """Chordal metric of the torus grid embedded as a torus of revolution."""
    def pos(v):
        i, j = divmod(v, m)
        u = 2 * np.pi * i / m
        w = 2 * np.pi * j / m
        return np.array([
            (r_major + r_minor * np.cos(w)) * np.cos(u),
            (r_major + r_minor * np.cos(w)) * np.sin(u),
            r_minor * np.sin(w),
        ])
    positions = np.array([pos(v) for v in range(k.vertex_count)])
    return surface.metric_from_positions(k, positions)


def union_with_metric_and_system(k1, h1, f1, k2, h2, f2):
    """Disjoint union of two (complex, metric, system) triples."""
    ku, offset = surface.disjoint_union(k1, k2)
    lengths = np.empty(ku.n_edges)
    n = f1.fiber_dim
    transports = np.empty((ku.n_edges, n, n))
    for ei, (a, b) in enumerate(ku.edges):
        if a < offset:
            orig = k1.edge_id(a, b)
            lengths[ei] = h1.lengths[orig]
            transports[ei] = f1.transports[orig]
        else:
            orig = k2.edge_id(a - offset, b - offset)
            lengths[ei] = h2.lengths[orig]
            transports[ei] = f2.transports[orig]
    hu = surface.metric_from_lengths(ku, lengths)
    fu = localsys.FlatLocalSystem(fiber_dim=n, transports=transports)
    return ku, hu, fu
