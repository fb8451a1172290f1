"""Connection 1-forms on the torus-bundle chart with prescribed curvature.

The total chart is ``(t, th1, th2, th3, base coordinates)``.  A connection
triple consists of 1-forms ``alpha_i = dth_i + A_i`` with ``A_i`` pulled
back from the base and ``d alpha_i`` matching the base triple ``sigma_i``.
Two constructions are available: explicit linear potentials on flat
factors, and a quadrature-based homotopy primitive on star-shaped charts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields
from .bases import CYCLIC
from .charts import Chart
from .forms import DifferentialForm, form_from_components
from .report import CheckResult

DEFAULT_T_RANGE = (-2.0, 2.0)
DEFAULT_NODES = 32


def total_chart(base, t_range=DEFAULT_T_RANGE):
    """Chart (t, th1..th3, base coordinates) of the bundle-over-line model."""
    names = ("t", "th1", "th2", "th3") + tuple(base.chart.names)
    box = ((float(t_range[0]), float(t_range[1])), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)) + base.chart.box
    periodic = (False, True, True, True) + base.chart.periodic
    return Chart(names, box, periodic, label=f"R x T3 x {base.chart.label}")


@dataclass
class ConnectionTriple:
    """1-forms (alpha_1, alpha_2, alpha_3) on the total chart."""

    forms: tuple
    mode: str
    base: object
    chart: Chart
    quadrature_nodes: int = 0

    def base_parts(self):
        """The A_i with alpha_i = dth_i + A_i (coefficients on base axes)."""
        out = []
        for i, a in enumerate(self.forms):
            A = DifferentialForm(self.chart, 1)
            for (idx,), f in a.coeffs.items():
                if idx != 1 + i:
                    A._add_term((idx,), f)
            out.append(A)
        return out


def flat_connection(base, t_range=DEFAULT_T_RANGE):
    """Explicit connection for flat bases: linear potentials per factor.

    On a factor with coordinates (x0, x1, x2, x3) the potentials are
    ``A_1 = x0 dx1 + x2 dx3``, ``A_2 = s2 (x0 dx2 + x3 dx1)``,
    ``A_3 = x0 dx3 + x1 dx2``, which differentiate to the factor triple.
    """
    if not base.flat:
        raise ValueError("explicit connection requires a flat base (use the homotopy primitive)")
    chart = total_chart(base, t_range)
    head = 4  # t and the three fiber angles precede the base coordinates

    alphas = []
    for i in range(3):
        comps = {(1 + i,): fields.constant(chart, 1.0)}
        alphas.append(comps)
    for off, s2 in base.flat_factors:
        x = [fields.coordinate(chart, head + off + a) for a in range(4)]
        terms = (
            ((1, x[0]), (3, x[2])),
            ((2, s2 * x[0]), (1, s2 * x[3])),
            ((3, x[0]), (2, x[1])),
        )
        for i, pairs in enumerate(terms):
            for axis, coeff in pairs:
                idx = (head + off + axis,)
                prev = alphas[i].get(idx)
                alphas[i][idx] = coeff if prev is None else prev + coeff

    forms = tuple(form_from_components(chart, 1, comps) for comps in alphas)
    return ConnectionTriple(forms=forms, mode="explicit", base=base, chart=chart)


def poincare_primitive(sigma, chart, nodes=DEFAULT_NODES, center=None, closedness_tol=1e-8):
    """Radial homotopy primitive of a closed 2-form on a star-shaped chart.

    Returns the 1-form ``A`` with ``A(x)(v) = int_0^1 s sigma(c + s(x-c))(x-c, v) ds``
    evaluated by Gauss-Legendre quadrature; then ``dA = sigma`` up to
    quadrature error.  Raises if ``sigma`` is not closed on the chart.
    """
    dim = chart.dim
    dsigma = sigma.d()
    worst = max(dsigma.max_abs_coefficient(p) for p in chart.sample_points(20, seed=11))
    if worst > closedness_tol:
        raise ValueError(
            f"form is not closed on the chart (max |d sigma| = {worst:.3e} > {closedness_tol:.1e})"
        )

    if center is None:
        center = chart.center()
    center = np.asarray(center, dtype=float)
    nodes_s, weights = np.polynomial.legendre.leggauss(nodes)
    nodes_s = 0.5 * (nodes_s + 1.0)  # map to [0, 1]
    weights = 0.5 * weights

    coeff_fields = list(sigma.coeffs.items())

    def component_rule(b):
        def rule(coords):
            # A_b(x) = sum_a int_0^1 s sigma_ab(c + s(x-c)) (x-c)^a ds
            disp = [coords[a] - center[a] for a in range(dim)]
            total = 0.0
            for s, w in zip(nodes_s, weights):
                arg = [center[a] + s * disp[a] for a in range(dim)]
                for (p, q), f in coeff_fields:
                    # do not forward any memo: the integrand shifts coordinates
                    val = f._ev(arg, None)
                    if q == b:
                        total = total + w * s * val * disp[p]
                    elif p == b:
                        total = total - w * s * val * disp[q]
            return total

        return rule

    axes = {i for idx in sigma.coeffs for i in idx}
    comps = {
        (b,): fields.from_rule(chart, component_rule(b), name=f"A_{b}") for b in sorted(axes)
    }
    return form_from_components(chart, 1, comps)


def poincare_connection(base, t_range=DEFAULT_T_RANGE, nodes=DEFAULT_NODES):
    """Connection from homotopy primitives of the base triple."""
    chart = total_chart(base, t_range)
    forms = []
    for i in range(3):
        A = poincare_primitive(base.sigma[i], base.chart, nodes=nodes)
        alpha = form_from_components(chart, 1, {(1 + i,): 1.0}) + A.pullback(chart, 4)
        forms.append(alpha)
    return ConnectionTriple(
        forms=tuple(forms), mode="poincare", base=base, chart=chart, quadrature_nodes=nodes
    )


def connection_residual(conn, samples=100, tolerance=1e-8, seed=7):
    """Max coefficient of ``d alpha_i - sigma_i`` over seeded sample points."""
    base = conn.base
    pulled = [s.pullback(conn.chart, 4) for s in base.sigma]
    diffs = [conn.forms[i].d() - pulled[i] for i in range(3)]
    pts = conn.chart.sample_points(samples, seed)

    res = {"d_alpha_minus_sigma": 0.0, "fiber_pairing": 0.0}
    for p in pts:
        memo = {}
        res["d_alpha_minus_sigma"] = max(
            res["d_alpha_minus_sigma"], max(d.max_abs_coefficient(p, memo) for d in diffs)
        )
        for i in range(3):
            for j in range(3):
                v = conn.forms[i].coefficient_values(p, memo).get((1 + j,), 0.0)
                res["fiber_pairing"] = max(res["fiber_pairing"], abs(v - (1.0 if i == j else 0.0)))

    passed = all(v < tolerance for v in res.values())
    return CheckResult(
        name="connection.curvature_match",
        passed=passed,
        tolerance=tolerance,
        residuals=res,
        provenance={
            "mode": conn.mode,
            "quadrature_nodes": conn.quadrature_nodes,
            "samples": samples,
            "seed": seed,
            "base": base.label,
        },
    )
