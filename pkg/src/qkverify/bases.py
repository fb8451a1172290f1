"""Explicit hyper-Kahler base models and verification of their 2-form triples.

Two concrete families are provided:

* the flat 4-torus with the standard self-dual triple, and
* Gibbons-Hawking charts ``V dy^2 + V^{-1)(dtau + theta)^2`` built from a
  positive harmonic potential with point charges, with ``d theta`` solved
  in closed form.

Products of bases model higher-dimensional cases.  Compact non-flat
examples enter only through their lattice data (see ``obstructions``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields
from .charts import Chart, concat_charts
from .forms import DifferentialForm, form_from_components
from .report import CheckResult
from .tensors import TensorField

# cyclic triples (i, j, k) over {1, 2, 3}, zero-based over {0, 1, 2}
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


@dataclass
class HyperKahlerBase:
    """Chart of dimension 4n carrying a metric and a closed 2-form triple."""

    chart: Chart
    metric: TensorField
    sigma: tuple
    n: int
    flat: bool
    label: str
    flip_sigma2: bool = False
    # per flat factor: offset of its 4 coordinates inside the chart and the
    # sign applied to sigma_2 there (consumed by the explicit connection)
    flat_factors: tuple = ()

    @property
    def dim(self):
        return self.chart.dim


def _flat_sigma_components(s2):
    # standard self-dual triple on R^4; s2 = -1 flips the sigma_2 convention
    return (
        {(0, 1): 1.0, (2, 3): 1.0},
        {(0, 2): s2, (1, 3): -s2},
        {(0, 3): 1.0, (1, 2): 1.0},
    )


def make_flat_torus_base(flip_sigma2=False):
    """Unit flat 4-torus with the standard integral triple."""
    chart = Chart(("x0", "x1", "x2", "x3"), [(0.0, 1.0)] * 4, (True,) * 4, label="T4")
    one = fields.constant(chart, 1.0)
    zero = fields.constant(chart, 0.0)
    comps = [[one if a == b else zero for b in range(4)] for a in range(4)]
    s2 = -1.0 if flip_sigma2 else 1.0
    sigma = tuple(
        form_from_components(chart, 2, c) for c in _flat_sigma_components(s2)
    )
    return HyperKahlerBase(
        chart=chart,
        metric=TensorField(chart, comps),
        sigma=sigma,
        n=1,
        flat=True,
        label="flat-T4",
        flip_sigma2=flip_sigma2,
        flat_factors=((0, s2),),
    )


# ---------------------------------------------------------------------------
# Gibbons-Hawking charts
# ---------------------------------------------------------------------------


def _check_gh_box(box, charges):
    """The chart must avoid each charge and its monopole string.

    The closed-form connection potential is regular away from the half-line
    ``{y1 = p1, y2 = p2, y3 <= p3}`` below each charge.
    """
    (y1lo, y1hi), (y2lo, y2hi), (y3lo, y3hi) = box
    for (p1, p2, p3), q in charges:
        inside = y1lo <= p1 <= y1hi and y2lo <= p2 <= y2hi and y3lo <= p3 <= y3hi
        if inside:
            raise ValueError(f"chart box contains the charge at ({p1}, {p2}, {p3})")
        hits_string = y1lo <= p1 <= y1hi and y2lo <= p2 <= y2hi and y3lo <= p3
        if hits_string:
            raise ValueError(
                f"chart box meets the monopole string below the charge at ({p1}, {p2}, {p3})"
            )


def make_gibbons_hawking_base(charges, constant=1.0, box=None, flip_sigma2=False):
    """Gibbons-Hawking base from point charges.

    ``charges`` is a list of ``((p1, p2, p3), q)`` pairs; the potential is
    ``V = constant + sum q / (2 |y - p|)`` and the connection form solves
    ``d theta = -*dV`` in closed form (monopole gauge, string pointing down).
    """
    charges = [((float(p[0]), float(p[1]), float(p[2])), float(q)) for p, q in charges]
    if box is None:
        box = ((0.6, 1.4), (0.6, 1.4), (0.6, 1.4))
    box = tuple((float(a), float(b)) for a, b in box)
    _check_gh_box(box, charges)

    chart = Chart(
        ("tau", "y1", "y2", "y3"),
        ((0.0, 1.0),) + box,
        (True, False, False, False),
        label="GH",
    )

    def potential(coords):
        v = constant
        for (p1, p2, p3), q in charges:
            r = np.sqrt(
                (coords[1] - p1) ** 2 + (coords[2] - p2) ** 2 + (coords[3] - p3) ** 2
            )
            v = v + q / (2.0 * r)
        return v

    def theta_comp(axis):
        # dy1/dy2 components of the monopole potential (q/2)(1 - z/r) dphi
        def rule(coords):
            total = 0.0
            for (p1, p2, p3), q in charges:
                x, y, z = coords[1] - p1, coords[2] - p2, coords[3] - p3
                r = np.sqrt(x * x + y * y + z * z)
                k = (q / 2.0) * (1.0 - z / r) / (x * x + y * y)
                total = total + (-y * k if axis == 1 else x * k)
            return total

        return rule

    V = fields.from_rule(chart, potential, name="V")
    theta1 = fields.from_rule(chart, theta_comp(1), name="theta1")
    theta2 = fields.from_rule(chart, theta_comp(2), name="theta2")
    # connection 1-form dtau + theta; theta has no dy3 component in this gauge
    conn = form_from_components(chart, 1, {(0,): 1.0, (1,): theta1, (2,): theta2})

    # V positivity on a coarse grid (formulas are singular only off-chart)
    grid = np.stack(
        np.meshgrid(*[chart.axis_midpoints(i, 5) for i in range(4)], indexing="ij"), axis=-1
    ).reshape(-1, 4)
    if np.min(V.values(grid)) <= 0.0:
        raise ValueError("Gibbons-Hawking potential is not positive on the chart box")

    s2 = -1.0 if flip_sigma2 else 1.0
    sigma = []
    for i, j, k in CYCLIC:
        dyi = form_from_components(chart, 1, {(1 + i,): 1.0})
        vol2 = form_from_components(chart, 2, {tuple(sorted((1 + j, 1 + k))): 1.0})
        if (1 + j, 1 + k) != tuple(sorted((1 + j, 1 + k))):
            vol2 = -vol2
        s = conn.wedge(dyi) + vol2.scaled(V)
        sigma.append(s.scaled(s2) if i == 1 else s)

    Vinv = 1.0 / V
    g = TensorField.zeros(chart)
    g.set_component(0, 0, Vinv)
    g.set_component(0, 1, Vinv * theta1)
    g.set_component(0, 2, Vinv * theta2)
    for a in (1, 2, 3):
        g.set_component(a, a, V)
    g.set_component(1, 1, V + Vinv * theta1 * theta1)
    g.set_component(2, 2, V + Vinv * theta2 * theta2)
    g.set_component(1, 2, Vinv * theta1 * theta2)

    return HyperKahlerBase(
        chart=chart,
        metric=g,
        sigma=tuple(sigma),
        n=1,
        flat=False,
        label="gibbons-hawking",
        flip_sigma2=flip_sigma2,
    )


def product_base(b1, b2):
    """Riemannian product; the triple is the sum of the factor pullbacks."""
    chart = concat_charts(b1.chart, b2.chart, label=f"{b1.label}*{b2.label}")
    off = b1.dim

    g = TensorField.zeros(chart)
    for a in range(b1.dim):
        for b in range(a, b1.dim):
            g.set_component(a, b, fields.pullback_field(chart, b1.metric.component(a, b), 0))
    for a in range(b2.dim):
        for b in range(a, b2.dim):
            g.set_component(off + a, off + b, fields.pullback_field(chart, b2.metric.component(a, b), off))

    sigma = tuple(
        b1.sigma[i].pullback(chart, 0) + b2.sigma[i].pullback(chart, off) for i in range(3)
    )
    factors = tuple(b1.flat_factors) + tuple((o + off, s) for o, s in b2.flat_factors)
    return HyperKahlerBase(
        chart=chart,
        metric=g,
        sigma=sigma,
        n=b1.n + b2.n,
        flat=b1.flat and b2.flat,
        label=f"product({b1.label},{b2.label})",
        flip_sigma2=b1.flip_sigma2 or b2.flip_sigma2,
        flat_factors=factors if (b1.flat and b2.flat) else (),
    )


# ---------------------------------------------------------------------------
# pointwise structure maps and the triple verification
# ---------------------------------------------------------------------------


def form_matrix_at(form, point, dim, memo=None):
    """Antisymmetric component matrix of a 2-form at a point."""
    W = np.zeros((dim, dim))
    for (a, b), v in form.coefficient_values(point, memo).items():
        W[a, b] = v
        W[b, a] = -v
    return W


def structure_maps_at(metric_matrix, form_matrices):
    """Endomorphisms J_i = g^{-1} sigma_i from pointwise matrices."""
    return [np.linalg.solve(metric_matrix, W) for W in form_matrices]


def quaternion_branch(J1, J2, J3):
    """Sign s with J1 J2 = s J3 minimizing the residual, plus that residual."""
    P = J1 @ J2
    plus = np.max(np.abs(P - J3))
    minus = np.max(np.abs(P + J3))
    return (1, plus) if plus <= minus else (-1, minus)


def verify_triple(base, samples=100, tolerance=1e-8, seed=7):
    """Check the defining residuals of a hyper-Kahler triple at seeded points.

    Residuals: closedness of each sigma_i, the wedge identity
    ``sigma_i ^ sigma_j = 2 delta_ij vol`` (4-dimensional bases only),
    ``J_i^2 = -Id`` and quaternionic consistency ``J1 J2 = +/- J3`` with a
    single sign across all sampled points.
    """
    dim = base.dim
    pts = base.chart.sample_points(samples, seed)
    dsigma = [s.d() for s in base.sigma]
    eye = np.eye(dim)

    res = {"d_sigma": 0.0, "J_squared": 0.0, "quaternion": 0.0}
    if dim == 4:
        res["wedge_identity"] = 0.0
    branches = set()

    for p in pts:
        memo = {}
        res["d_sigma"] = max(res["d_sigma"], max(ds.max_abs_coefficient(p, memo) for ds in dsigma))
        G = base.metric.matrix_at(p, memo)
        Ws = [form_matrix_at(s, p, dim, memo) for s in base.sigma]
        Js = structure_maps_at(G, Ws)
        res["J_squared"] = max(
            res["J_squared"], max(np.max(np.abs(J @ J + eye)) for J in Js)
        )
        sign, q = quaternion_branch(*Js)
        branches.add(sign)
        res["quaternion"] = max(res["quaternion"], q)
        if dim == 4:
            density = np.sqrt(np.linalg.det(G))
            for i in range(3):
                for j in range(i, 3):
                    w = base.sigma[i].wedge(base.sigma[j])
                    val = w.coefficient_values(p, memo).get((0, 1, 2, 3), 0.0)
                    want = 2.0 * density if i == j else 0.0
                    res["wedge_identity"] = max(res["wedge_identity"], abs(val - want))

    consistent = len(branches) == 1
    passed = consistent and all(v < tolerance for v in res.values())
    return CheckResult(
        name="base.triple",
        passed=passed,
        tolerance=tolerance,
        residuals=res,
        provenance={
            "base": base.label,
            "samples": samples,
            "seed": seed,
            "quaternion_sign": sorted(branches),
            "sign_consistent": consistent,
            "flip_sigma2": base.flip_sigma2,
        },
    )
