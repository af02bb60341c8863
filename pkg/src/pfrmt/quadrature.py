"""Composite Gauss-Legendre rules on a truncated interval.

A :class:`PanelGrid` carries, besides nodes and weights, a spectral
integration matrix per panel so that running integrals
``int_{lo}^{t_i} f`` are available at the nodes themselves.  Ordered
double integrals are built from that.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre


@lru_cache(maxsize=None)
def reference_panel(n):
    """Gauss-Legendre nodes/weights on [-1, 1] and the running-integral matrix.

    ``Q @ f`` gives ``int_{-1}^{t_i} p(t) dt`` for the degree ``n-1``
    interpolant ``p`` of ``f`` at the nodes.
    """
    t, w = legendre.leggauss(n)
    vander = legendre.legvander(t, n - 1)
    prim = np.empty((n, n))
    prim[:, 0] = t + 1.0
    for j in range(1, n):
        cj = np.zeros(n + 1)
        cj[j + 1] = 1.0 / (2 * j + 1)
        cj[j - 1] = -1.0 / (2 * j + 1)
        prim[:, j] = legendre.legval(t, cj)  # P_j integrated from -1 (boundary terms cancel)
    q = prim @ np.linalg.inv(vander)
    t.setflags(write=False)
    w.setflags(write=False)
    q.setflags(write=False)
    return t, w, q


class PanelGrid:
    """Composite rule with ``n`` nodes on each panel between ``breakpoints``."""

    def __init__(self, breakpoints, n=20):
        bp = np.unique(np.asarray(breakpoints, dtype=float))
        if bp.size < 2:
            raise ValueError("need at least two breakpoints")
        t, w, q = reference_panel(n)
        self.n = n
        self.breakpoints = bp
        half = 0.5 * np.diff(bp)
        mid = 0.5 * (bp[1:] + bp[:-1])
        self.half = half
        self.nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()
        self._q = q

    @property
    def size(self):
        return self.nodes.size

    def integrate(self, values, axis=-1):
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def running_integral(self, values):
        """``int_{lo}^{x_i} f`` at every node; ``values`` has nodes on the last axis."""
        values = np.asarray(values)
        shape = values.shape
        panels = values.reshape(shape[:-1] + (self.half.size, self.n))
        inner = np.einsum("...pj,ij->...pi", panels, self._q) * self.half[:, None]
        # panel totals from the Gauss sum (the last node is not the panel end)
        totals = np.einsum("...pj,j->...p", panels, reference_panel(self.n)[1]) * self.half
        offsets = np.cumsum(totals, axis=-1) - totals
        return (inner + offsets[..., None]).reshape(shape)


def uniform_breakpoints(lo, hi, width):
    count = max(1, int(np.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, count + 1)


def refined_breakpoints(lo, hi, width, centers=(), scales=()):
    """Uniform breakpoints plus geometric refinement around each ``center``.

    Near a center with small ``scale`` (distance of a complex pole from the
    real axis) panels shrink to about ``scale / 2``.
    """
    bp = [uniform_breakpoints(lo, hi, width)]
    for c, s in zip(centers, scales):
        if not np.isfinite(c) or s >= width:
            continue
        s = max(s, 1e-6)
        offsets = s * 0.5 * 2.0 ** np.arange(0, 40)
        offsets = offsets[offsets < 4 * width]
        pts = np.concatenate([c - offsets, [c], c + offsets])
        bp.append(pts[(pts > lo) & (pts < hi)])
    return np.concatenate(bp)
