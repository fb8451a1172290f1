"""Coordinate charts: labelled boxes with optional periodic directions.

A single chart (with periodic identifications for angle coordinates) is
enough for every check this package runs; there are no atlases or
transition maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Chart:
    """A coordinate box ``[lo_0,hi_0] x ... x [lo_{d-1},hi_{d-1}]``."""

    names: tuple
    box: tuple
    periodic: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if not (len(self.names) == len(self.box) == len(self.periodic)):
            raise ValueError("chart needs one name, interval and periodic flag per coordinate")
        for lo, hi in self.box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"degenerate coordinate interval ({lo}, {hi})")

    @property
    def dim(self):
        return len(self.names)

    def center(self):
        return np.array([0.5 * (lo + hi) for lo, hi in self.box])

    def spans(self):
        return np.array([hi - lo for lo, hi in self.box])

    def sample_points(self, count, seed, margin=0.01):
        """Seeded uniform sample of ``count`` interior points, shape (count, dim).

        Non-periodic coordinates are shrunk by ``margin`` (fraction of the
        span) so finite-difference stencils never leave the box.
        """
        rng = np.random.default_rng(seed)
        u = rng.random((count, self.dim))
        pts = np.empty_like(u)
        for i, (lo, hi) in enumerate(self.box):
            if self.periodic[i]:
                a, b = lo, hi
            else:
                pad = margin * (hi - lo)
                a, b = lo + pad, hi - pad
            pts[:, i] = a + u[:, i] * (b - a)
        return pts

    def axis_midpoints(self, i, n):
        """Midpoint-rule nodes for coordinate ``i`` split into ``n`` cells."""
        lo, hi = self.box[i]
        h = (hi - lo) / n
        return lo + h * (np.arange(n) + 0.5)


def concat_charts(a, b, label=""):
    """Chart of a product, with coordinate names kept unique."""
    names = list(a.names)
    for name in b.names:
        new = name
        k = 2
        while new in names:
            new = f"{name}_{k}"
            k += 1
        names.append(new)
    return Chart(tuple(names), a.box + b.box, a.periodic + b.periodic, label=label)
