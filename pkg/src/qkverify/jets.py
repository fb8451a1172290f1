"""Second-order truncated Taylor numbers for forward-mode differentiation.

A ``Jet`` carries the value, gradient and Hessian of an expression with
respect to a fixed coordinate system and propagates them exactly through
arithmetic and the elementary functions used by field rules.  Evaluating a
rule on jets seeded with ``Jet.variable`` therefore yields all partial
derivatives up to total order two in a single pass.
"""

from __future__ import annotations

import numpy as np


class Jet:
    """Value, gradient and Hessian of a scalar expression.

    Instances are immutable by convention: every operation returns a new
    jet, so jets are safe to memoize and share.
    """

    __slots__ = ("f", "g", "h")

    def __init__(self, f, g, h):
        self.f = float(f)
        self.g = np.asarray(g, dtype=float)
        self.h = np.asarray(h, dtype=float)

    @classmethod
    def variable(cls, value, index, dim):
        """Seed jet for coordinate ``index`` of a ``dim``-dimensional chart."""
        g = np.zeros(dim)
        g[index] = 1.0
        return cls(value, g, np.zeros((dim, dim)))

    @classmethod
    def constant(cls, value, dim):
        return cls(value, np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self):
        return self.g.shape[0]

    def __repr__(self):
        return f"Jet({self.f!r}, |grad|={np.max(np.abs(self.g)):.3g})"

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.f + other.f, self.g + other.g, self.h + other.h)
        return Jet(self.f + other, self.g, self.h)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.f - other.f, self.g - other.g, self.h - other.h)
        return Jet(self.f - other, self.g, self.h)

    def __rsub__(self, other):
        return Jet(other - self.f, -self.g, -self.h)

    def __neg__(self):
        return Jet(-self.f, -self.g, -self.h)

    def __mul__(self, other):
        if isinstance(other, Jet):
            cross = np.outer(self.g, other.g)
            return Jet(
                self.f * other.f,
                self.f * other.g + other.f * self.g,
                self.f * other.h + other.f * self.h + cross + cross.T,
            )
        return Jet(self.f * other, self.g * other, self.h * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other._reciprocal()
        return Jet(self.f / other, self.g / other, self.h / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, k):
        if k == 0:
            return Jet.constant(1.0, self.dim)
        if k == 1:
            return self
        if self.f == 0.0 and (k < 2 or k != int(k)):
            raise ZeroDivisionError("jet power with vanishing base")
        return self._chain(self.f**k, k * self.f ** (k - 1), k * (k - 1) * self.f ** (k - 2))

    # -- elementary functions (numpy dispatches np.exp(jet) to jet.exp()) --

    def _chain(self, v, dv, d2v):
        # second-order chain rule for a scalar function applied to this jet
        return Jet(v, dv * self.g, dv * self.h + d2v * np.outer(self.g, self.g))

    def _reciprocal(self):
        return self._chain(1.0 / self.f, -1.0 / self.f**2, 2.0 / self.f**3)

    def exp(self):
        v = np.exp(self.f)
        return self._chain(v, v, v)

    def log(self):
        return self._chain(np.log(self.f), 1.0 / self.f, -1.0 / self.f**2)

    def sqrt(self):
        v = np.sqrt(self.f)
        return self._chain(v, 0.5 / v, -0.25 / v**3)

    def sin(self):
        s, c = np.sin(self.f), np.cos(self.f)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.f), np.cos(self.f)
        return self._chain(c, -s, -c)
