"""Covariant 2-tensor fields (metrics) and their pointwise derivative data."""

from __future__ import annotations

import numpy as np

from . import fields
from .fields import EXACT, FD


class TensorField:
    """Symmetric covariant 2-tensor with scalar-field components."""

    def __init__(self, chart, comps):
        dim = chart.dim
        arr = np.empty((dim, dim), dtype=object)
        for a in range(dim):
            for b in range(dim):
                f = comps[a][b] if not isinstance(comps, np.ndarray) else comps[a, b]
                arr[a, b] = f if f is not None else fields.constant(chart, 0.0)
        self.chart = chart
        self.comps = arr

    @classmethod
    def zeros(cls, chart):
        dim = chart.dim
        z = fields.constant(chart, 0.0)
        return cls(chart, [[z] * dim for _ in range(dim)])

    def component(self, a, b):
        return self.comps[a, b]

    def set_component(self, a, b, f):
        self.comps[a, b] = f
        self.comps[b, a] = f

    def matrix_at(self, point, memo=None):
        dim = self.chart.dim
        M = np.empty((dim, dim))
        for a in range(dim):
            for b in range(a, dim):
                v = self.comps[a, b].value(point, memo)
                M[a, b] = M[b, a] = v
        return M

    def matrices_at(self, points):
        """Vectorized evaluation: (N, dim, dim) array over (N, dim) points."""
        points = np.asarray(points, dtype=float)
        n, dim = points.shape[0], self.chart.dim
        M = np.empty((n, dim, dim))
        for a in range(dim):
            for b in range(a, dim):
                col = self.comps[a, b].values(points)
                M[:, a, b] = M[:, b, a] = col
        return M

    def symmetry_residual_at(self, point, memo=None):
        """Max deviation between the (a,b) and (b,a) stored components."""
        dim = self.chart.dim
        worst = 0.0
        for a in range(dim):
            for b in range(a + 1, dim):
                worst = max(
                    worst,
                    abs(self.comps[a, b].value(point, memo) - self.comps[b, a].value(point, memo)),
                )
        return worst

    def derivative_arrays(self, point, mode=EXACT):
        """Components and their first/second partials at a point.

        Returns ``(V, dV, d2V)`` with ``V[a,b] = g_ab``, ``dV[a,b,k] =
        d_k g_ab`` and ``d2V[a,b,k,l] = d_k d_l g_ab``.
        """
        dim = self.chart.dim
        V = np.empty((dim, dim))
        dV = np.empty((dim, dim, dim))
        d2V = np.empty((dim, dim, dim, dim))
        if mode == EXACT:
            memo = {}
            for a in range(dim):
                for b in range(a, dim):
                    jet = self.comps[a, b].jet(point, memo)
                    V[a, b] = V[b, a] = jet.f
                    dV[a, b] = dV[b, a] = jet.g
                    d2V[a, b] = d2V[b, a] = 0.5 * (jet.h + jet.h.T)
        elif mode == FD:
            for a in range(dim):
                for b in range(a, dim):
                    f = self.comps[a, b]
                    V[a, b] = V[b, a] = f.value(point)
                    for k in range(dim):
                        dV[a, b, k] = dV[b, a, k] = f.derivative(point, (k,), FD)
                    for k in range(dim):
                        for l in range(k, dim):
                            s = f.derivative(point, (k, l), FD)
                            d2V[a, b, k, l] = d2V[a, b, l, k] = s
                            d2V[b, a, k, l] = d2V[b, a, l, k] = s
        else:
            raise ValueError(f"unknown differentiation mode {mode!r}")
        return V, dV, d2V
