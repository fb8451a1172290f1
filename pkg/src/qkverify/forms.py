"""Sparse exterior calculus on a chart.

Forms store one scalar-field coefficient per strictly increasing index
tuple.  Wedge products and exterior derivatives are assembled structurally;
all numerics happen when a form is evaluated at a point.
"""

from __future__ import annotations

from bisect import bisect_left
from itertools import combinations

import numpy as np

from . import fields
from .fields import ScalarField, _is_zero


def _merge_sign(I, J):
    """Sign of sorting the concatenation of two increasing tuples, 0 on overlap."""
    inversions = 0
    for j in J:
        if j in I:
            return 0, None
        inversions += sum(1 for i in I if i > j)
    merged = tuple(sorted(I + J))
    return (-1) ** inversions, merged


class DifferentialForm:
    """Degree-k alternating tensor field with sparse coefficients."""

    def __init__(self, chart, degree, coeffs=None):
        if degree < 0:
            raise ValueError("negative form degree")
        self.chart = chart
        self.degree = degree
        self.coeffs = {}
        if coeffs:
            for idx, f in coeffs.items():
                self._set(tuple(idx), f)

    def _set(self, idx, f):
        if len(idx) != self.degree:
            raise ValueError(f"index {idx} does not match degree {self.degree}")
        if list(idx) != sorted(set(idx)):
            raise ValueError(f"coefficient index {idx} must be strictly increasing")
        if not _is_zero(f):
            self.coeffs[idx] = f

    def _add_term(self, idx, f):
        if _is_zero(f):
            return
        if idx in self.coeffs:
            self.coeffs[idx] = self.coeffs[idx] + f
        else:
            self.coeffs[idx] = f

    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree)

    def coefficient(self, idx):
        return self.coeffs.get(tuple(idx), fields.constant(self.chart, 0.0))

    def _check_chart(self, other):
        if self.chart is not other.chart and self.chart != other.chart:
            raise ValueError("forms live on different charts")

    # -- linear structure ---------------------------------------------------

    def __add__(self, other):
        self._check_chart(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        out = DifferentialForm(self.chart, self.degree, self.coeffs)
        for idx, f in other.coeffs.items():
            out._add_term(idx, f)
        return out

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, w):
        """Multiply by a number or a scalar field."""
        out = DifferentialForm(self.chart, self.degree)
        for idx, f in self.coeffs.items():
            out._add_term(idx, w * f if isinstance(w, ScalarField) else f * w)
        return out

    # -- exterior algebra ----------------------------------------------------

    def wedge(self, other):
        self._check_chart(other)
        out = DifferentialForm(self.chart, self.degree + other.degree)
        if out.degree > self.chart.dim:
            return out
        for I, f in self.coeffs.items():
            for J, g in other.coeffs.items():
                sign, K = _merge_sign(I, J)
                if sign == 0:
                    continue
                term = f * g
                out._add_term(K, term if sign > 0 else -term)
        return out

    def d(self):
        """Exterior derivative; coefficients differentiate in exact mode."""
        out = DifferentialForm(self.chart, self.degree + 1)
        if out.degree > self.chart.dim:
            return out
        for I, f in self.coeffs.items():
            for i in range(self.chart.dim):
                if i in I:
                    continue
                df = f.partial(i)
                if _is_zero(df):
                    continue
                pos = bisect_left(I, i)
                idx = I[:pos] + (i,) + I[pos:]
                out._add_term(idx, df if pos % 2 == 0 else -df)
        return out

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, point, vectors, memo=None):
        """Evaluate on tangent vectors given in the coordinate basis."""
        if len(vectors) != self.degree:
            raise ValueError(f"degree-{self.degree} form needs {self.degree} vectors, got {len(vectors)}")
        if self.degree == 0:
            return sum(f.value(point, memo) for f in self.coeffs.values())
        V = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        total = 0.0
        for idx, f in self.coeffs.items():
            minor = V[list(idx), :]
            total += f.value(point, memo) * np.linalg.det(minor)
        return float(total)

    def coefficient_values(self, point, memo=None):
        """All coefficients at a point, keyed by increasing index tuple."""
        return {idx: f.value(point, memo) for idx, f in self.coeffs.items()}

    def max_abs_coefficient(self, point, memo=None):
        if not self.coeffs:
            return 0.0
        return max(abs(v) for v in self.coefficient_values(point, memo).values())

    def pullback(self, chart, offset):
        """Pull back along the projection that reads this form's chart
        coordinates starting at ``offset`` of ``chart``."""
        out = DifferentialForm(chart, self.degree)
        for idx, f in self.coeffs.items():
            new_idx = tuple(i + offset for i in idx)
            out._add_term(new_idx, fields.pullback_field(chart, f, offset))
        return out

    def __repr__(self):
        return f"<{self.degree}-form, {len(self.coeffs)} terms>"


# ---------------------------------------------------------------------------
# module-level operation aliases
# ---------------------------------------------------------------------------


def wedge(a, b):
    return a.wedge(b)


def exterior_derivative(w):
    return w.d()


def evaluate_form(w, point, vectors):
    return w.evaluate(point, vectors)


def coordinate_one_form(chart, i):
    """The coordinate differential for coordinate ``i``."""
    return DifferentialForm(chart, 1, {(i,): fields.constant(chart, 1.0)})


def form_from_components(chart, degree, comps):
    """Build a form from ``{index tuple: field or number}``."""
    out = DifferentialForm(chart, degree)
    for idx, f in comps.items():
        if not isinstance(f, ScalarField):
            f = fields.constant(chart, f)
        out._add_term(tuple(idx), f)
    return out


def all_indices(dim, degree):
    return list(combinations(range(dim), degree))
