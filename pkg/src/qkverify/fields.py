"""Scalar fields on a chart with derivatives up to order two.

Fields form a small expression DAG.  Leaves evaluate a rule written in
terms of the coordinate scalars; interior nodes combine child values.  The
same code path handles plain floats, numpy arrays (vectorized evaluation)
and :class:`~qkverify.jets.Jet` coordinates, so one definition serves both
pointwise checks and grid quadrature.

Two differentiation modes sit behind one interface:

* ``exact`` -- forward-mode jets, exact to machine precision;
* ``fd``    -- central finite differences with one Richardson step.

A ``memo`` dict may be threaded through evaluations at a fixed point to
reuse the work shared between the many tensor components built from the
same handful of ingredient fields.  Memo entries are only valid for the
coordinates the caller seeded, so leaf rules that re-evaluate other fields
at transformed coordinates must not forward it.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet

EXACT = "exact"
FD = "fd"

FD_STEP = 1e-4


def _is_jet_coords(coords):
    return any(isinstance(c, Jet) for c in coords)


class ScalarField:
    """Real-valued function on a chart, differentiable up to order two."""

    def __init__(self, chart, name=""):
        self.chart = chart
        self.name = name

    # -- evaluation --------------------------------------------------------

    def _ev(self, coords, memo):
        raise NotImplementedError

    def _memoized(self, coords, memo):
        if memo is None:
            return self._ev(coords, None)
        key = id(self)
        hit = memo.get(key)
        if hit is None:
            hit = self._ev(coords, memo)
            memo[key] = hit
        return hit

    def value(self, point, memo=None):
        """Evaluate at a point (sequence of floats)."""
        return float(self._memoized([float(x) for x in point], memo))

    def values(self, points):
        """Vectorized evaluation over an (N, dim) array of points."""
        points = np.asarray(points, dtype=float)
        coords = [points[:, i] for i in range(self.chart.dim)]
        out = self._ev(coords, {})
        return np.broadcast_to(np.asarray(out, dtype=float), (points.shape[0],)).copy()

    def jet(self, point, memo=None):
        """Value, gradient and Hessian at a point, via Taylor arithmetic."""
        dim = self.chart.dim
        coords = [Jet.variable(float(point[i]), i, dim) for i in range(dim)]
        out = self._memoized(coords, memo)
        if not isinstance(out, Jet):
            return Jet.constant(out, dim)
        return out

    # -- derivatives -------------------------------------------------------

    def derivative(self, point, index, mode=EXACT, memo=None):
        """Partial derivative for a multi-index of total order one or two."""
        index = tuple(index)
        if len(index) not in (1, 2):
            raise ValueError(f"derivative order {len(index)} not supported (max 2)")
        if mode == EXACT:
            jet = self.jet(point, memo)
            if len(index) == 1:
                return float(jet.g[index[0]])
            return float(jet.h[index[0], index[1]])
        if mode == FD:
            if len(index) == 1:
                return _fd_first(self, point, index[0])
            if index[0] == index[1]:
                return _fd_second_diag(self, point, index[0])
            return _fd_second_mixed(self, point, index[0], index[1])
        raise ValueError(f"unknown differentiation mode {mode!r}")

    def partial(self, i):
        """The field ``x -> d(self)/dx_i`` (exact mode)."""
        return _Partial(self, (i,))

    # -- algebra -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            if other.chart is not self.chart and other.chart != self.chart:
                raise ValueError("scalar fields live on different charts")
            return other
        return _Constant(self.chart, float(other))

    def __add__(self, other):
        return _Sum(self.chart, [self, self._coerce(other)])

    __radd__ = __add__

    def __sub__(self, other):
        return _Sum(self.chart, [self, -self._coerce(other)])

    def __rsub__(self, other):
        return _Sum(self.chart, [self._coerce(other), -self])

    def __neg__(self):
        return _Scaled(self.chart, -1.0, self)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return _Product(self.chart, self, self._coerce(other))
        return _Scaled(self.chart, float(other), self)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScalarField):
            return _Quotient(self.chart, self, self._coerce(other))
        return _Scaled(self.chart, 1.0 / float(other), self)

    def __rtruediv__(self, other):
        return _Quotient(self.chart, self._coerce(other), self)

    def __pow__(self, k):
        return _Power(self.chart, self, k)

    def __repr__(self):
        tag = self.name or type(self).__name__
        return f"<field {tag} on {self.chart.label or self.chart.dim}>"


# ---------------------------------------------------------------------------
# node types
# ---------------------------------------------------------------------------


class _Constant(ScalarField):
    def __init__(self, chart, c):
        super().__init__(chart)
        self.c = float(c)

    def _ev(self, coords, memo):
        return self.c

    def partial(self, i):
        return _Constant(self.chart, 0.0)


class _Coordinate(ScalarField):
    def __init__(self, chart, index):
        super().__init__(chart, name=chart.names[index])
        self.index = index

    def _ev(self, coords, memo):
        return coords[self.index]

    def partial(self, i):
        return _Constant(self.chart, 1.0 if i == self.index else 0.0)


class _Leaf(ScalarField):
    """Opaque rule written directly in terms of the coordinate scalars."""

    def __init__(self, chart, rule, name=""):
        super().__init__(chart, name)
        self.rule = rule

    def _ev(self, coords, memo):
        return self.rule(coords)


class _Sum(ScalarField):
    def __init__(self, chart, terms):
        super().__init__(chart)
        self.terms = list(terms)

    def _ev(self, coords, memo):
        acc = self.terms[0]._memoized(coords, memo)
        for t in self.terms[1:]:
            acc = acc + t._memoized(coords, memo)
        return acc

    def partial(self, i):
        parts = [t.partial(i) for t in self.terms]
        parts = [p for p in parts if not _is_zero(p)]
        if not parts:
            return _Constant(self.chart, 0.0)
        if len(parts) == 1:
            return parts[0]
        return _Sum(self.chart, parts)


class _Scaled(ScalarField):
    def __init__(self, chart, weight, base):
        super().__init__(chart)
        self.weight = weight
        self.base = base

    def _ev(self, coords, memo):
        return self.weight * self.base._memoized(coords, memo)

    def partial(self, i):
        p = self.base.partial(i)
        if _is_zero(p):
            return _Constant(self.chart, 0.0)
        return _Scaled(self.chart, self.weight, p)


class _Product(ScalarField):
    def __init__(self, chart, a, b):
        super().__init__(chart)
        self.a = a
        self.b = b

    def _ev(self, coords, memo):
        return self.a._memoized(coords, memo) * self.b._memoized(coords, memo)


class _Quotient(ScalarField):
    def __init__(self, chart, a, b):
        super().__init__(chart)
        self.a = a
        self.b = b

    def _ev(self, coords, memo):
        return self.a._memoized(coords, memo) / self.b._memoized(coords, memo)


class _Power(ScalarField):
    def __init__(self, chart, base, k):
        super().__init__(chart)
        self.base = base
        self.k = k

    def _ev(self, coords, memo):
        return self.base._memoized(coords, memo) ** self.k


class _Func(ScalarField):
    _FLOAT = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sin": np.sin, "cos": np.cos}

    def __init__(self, chart, kind, base):
        super().__init__(chart)
        self.kind = kind
        self.base = base

    def _ev(self, coords, memo):
        u = self.base._memoized(coords, memo)
        if isinstance(u, Jet):
            return getattr(u, self.kind)()
        return self._FLOAT[self.kind](u)


class _Slice(ScalarField):
    """Pullback of a field on a factor chart along a coordinate projection."""

    def __init__(self, chart, base_field, offset):
        super().__init__(chart, name=base_field.name)
        self.base_field = base_field
        self.offset = offset
        self.base_dim = base_field.chart.dim

    def _ev(self, coords, memo):
        return self.base_field._memoized(coords[self.offset : self.offset + self.base_dim], memo)

    def partial(self, i):
        if i < self.offset or i >= self.offset + self.base_dim:
            return _Constant(self.chart, 0.0)
        return _Slice(self.chart, self.base_field.partial(i - self.offset), self.offset)


class _Partial(ScalarField):
    """Exact derivative field of total order <= 2.

    Values come from jets of the base field, so a first-order partial can
    be differentiated once more (via the base Hessian) but not jetted.
    """

    def __init__(self, base, index):
        super().__init__(base.chart)
        self.base = base
        self.index = tuple(index)

    def _ev(self, coords, memo):
        if _is_jet_coords(coords):
            raise TypeError("derivative fields support derivatives up to total order 2 only")
        if any(isinstance(c, np.ndarray) for c in coords):
            n = max(np.size(c) for c in coords)
            cols = [np.broadcast_to(np.asarray(c, float), (n,)) for c in coords]
            return np.array([self._at([col[k] for col in cols], None) for k in range(n)])
        return self._at(coords, memo)

    def _at(self, point, memo):
        jet = self.base.jet(point, memo)
        if len(self.index) == 1:
            return float(jet.g[self.index[0]])
        return float(jet.h[self.index[0], self.index[1]])

    def partial(self, i):
        if len(self.index) >= 2:
            raise ValueError("cannot differentiate past total order 2")
        return _Partial(self.base, self.index + (i,))

    def derivative(self, point, index, mode=EXACT, memo=None):
        index = tuple(index)
        if mode == EXACT:
            total = len(self.index) + len(index)
            if total > 2:
                raise ValueError("cannot differentiate past total order 2")
            return self.base.derivative(point, self.index + index, mode, memo)
        return super().derivative(point, index, mode, memo)


def _is_zero(f):
    return isinstance(f, _Constant) and f.c == 0.0


# ---------------------------------------------------------------------------
# constructors and helpers
# ---------------------------------------------------------------------------


def coordinate(chart, i):
    return _Coordinate(chart, i)


def constant(chart, c):
    return _Constant(chart, c)


def from_rule(chart, rule, name=""):
    """Field from a rule written in the coordinate scalars (jet-generic)."""
    return _Leaf(chart, rule, name)


def pullback_field(chart, base_field, offset):
    return _Slice(chart, base_field, offset)


def exp(f):
    return _Func(f.chart, "exp", f)


def log(f):
    return _Func(f.chart, "log", f)


def sqrt(f):
    return _Func(f.chart, "sqrt", f)


def sin(f):
    return _Func(f.chart, "sin", f)


def cos(f):
    return _Func(f.chart, "cos", f)


def differentiate(f, point, direction, order=1, mode=EXACT):
    """Partial derivative of ``f`` along one coordinate, order 1 or 2."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return f.derivative(point, (direction,) * order, mode=mode)


# ---------------------------------------------------------------------------
# finite differences (central, one Richardson extrapolation step)
# ---------------------------------------------------------------------------


def _shift(point, i, h):
    q = [float(x) for x in point]
    q[i] += h
    return q


def _fd_first(f, point, i, h=FD_STEP):
    def central(s):
        return (f.value(_shift(point, i, s)) - f.value(_shift(point, i, -s))) / (2 * s)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def _fd_second_diag(f, point, i, h=FD_STEP):
    f0 = f.value(point)

    def central(s):
        return (f.value(_shift(point, i, s)) - 2 * f0 + f.value(_shift(point, i, -s))) / (s * s)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def _fd_second_mixed(f, point, i, j, h=FD_STEP):
    def central(s):
        pp = f.value(_shift(_shift(point, i, s), j, s))
        pm = f.value(_shift(_shift(point, i, s), j, -s))
        mp = f.value(_shift(_shift(point, i, -s), j, s))
        mm = f.value(_shift(_shift(point, i, -s), j, -s))
        return (pp - pm - mp + mm) / (4 * s * s)

    return (4.0 * central(h / 2) - central(h)) / 3.0
