"""Assembly of the candidate quaternionic Kahler model and its form checks.

Given a hyper-Kahler base ``(N, g_N, sigma_i)`` and a connection triple
``alpha_i`` on the torus-bundle chart, the model carries

    g     = dt^2 + 4 rho^2 sum_i alpha_i^2 + rho g_N,      rho = e^{2t},
    w_i   = 2 rho dt ^ alpha_i + 4 rho^2 alpha_j ^ alpha_k + rho sigma_i,

with (i, j, k) cyclic.  The structure maps J_i solve ``g J_i = w_i``
pointwise.  ``ideal_residual`` quantifies whether the span of the w_i
generates a differential ideal, which is the local characterization of the
quaternionic Kahler property in dimension at least eight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields
from .bases import CYCLIC, form_matrix_at, quaternion_branch, structure_maps_at
from .charts import Chart
from .connection import connection_residual
from .forms import DifferentialForm, all_indices, coordinate_one_form, form_from_components
from .report import CheckResult
from .tensors import TensorField

RHO_RATE = 2.0  # rho = exp(rate * t); anything else breaks the ideal condition


@dataclass
class QKModel:
    """Total-space chart with assembled metric and fundamental 2-forms."""

    base: object
    connection: object
    chart: Chart
    m: int
    n: int
    rho: fields.ScalarField
    rho_rate: float
    metric: TensorField
    omega: tuple
    sigma_pulled: tuple

    @property
    def dim(self):
        return self.chart.dim

    def structure_maps_at(self, point, memo=None):
        """J_i = g^{-1} w_i at a point, solved with a dense linear solver."""
        G = self.metric.matrix_at(point, memo)
        Ws = [form_matrix_at(w, point, self.dim, memo) for w in self.omega]
        return G, structure_maps_at(G, Ws)

    def slice_metric(self, t0):
        """Metric of the fixed-t slice, as a tensor on the (th, base) chart."""
        slice_chart = Chart(self.chart.names[1:], self.chart.box[1:], self.chart.periodic[1:],
                            label=f"{self.chart.label}|t={t0}")

        def frozen(f):
            def rule(coords):
                return f._ev([t0, *coords], None)

            return fields.from_rule(slice_chart, rule)

        comps = [[frozen(self.metric.component(a + 1, b + 1)) for b in range(self.dim - 1)]
                 for a in range(self.dim - 1)]
        return TensorField(slice_chart, comps)

    def fiber_metric(self, base_point=None):
        """Metric restricted to a fiber {base point fixed}, on the (t, th) chart."""
        if base_point is None:
            base_point = self.base.chart.center()
        base_point = [float(x) for x in base_point]
        fiber_chart = Chart(self.chart.names[:4], self.chart.box[:4], self.chart.periodic[:4],
                            label="fiber")

        def frozen(f):
            def rule(coords):
                return f._ev([*coords, *base_point], None)

            return fields.from_rule(fiber_chart, rule)

        comps = [[frozen(self.metric.component(a, b)) for b in range(4)] for a in range(4)]
        return TensorField(fiber_chart, comps)


class AssemblyError(ValueError):
    """The connection failed its curvature-matching precondition."""


def assemble_qk_model(base, conn, rho_rate=RHO_RATE, check_connection=True,
                      connection_tolerance=None, seed=7):
    """Build the model; verifies ``d alpha_i = sigma_i`` first unless told not to."""
    if check_connection:
        tol = connection_tolerance
        if tol is None:
            tol = 1e-8 if conn.mode == "explicit" else 1e-6
        gate = connection_residual(conn, samples=25, tolerance=tol, seed=seed)
        if not gate.passed:
            raise AssemblyError(
                f"connection residual {max(gate.residuals.values()):.3e} exceeds {tol:.1e}"
            )

    chart = conn.chart
    dim = chart.dim
    t = fields.coordinate(chart, 0)
    rho = fields.exp(rho_rate * t)
    rho2 = rho * rho

    dt = coordinate_one_form(chart, 0)
    alphas = conn.forms
    sigma_pulled = tuple(s.pullback(chart, 4) for s in base.sigma)

    # metric: dt^2 + 4 rho^2 sum alpha_i x alpha_i + rho g_N
    g = TensorField.zeros(chart)
    g.set_component(0, 0, fields.constant(chart, 1.0))
    alpha_comps = [[a.coefficient((c,)) for c in range(dim)] for a in alphas]
    four_rho2 = 4.0 * rho2
    for a in range(1, dim):
        for b in range(a, dim):
            term = None
            for i in range(3):
                fa, fb = alpha_comps[i][a], alpha_comps[i][b]
                if fields._is_zero(fa) or fields._is_zero(fb):
                    continue
                prod = fa * fb
                term = prod if term is None else term + prod
            pieces = []
            if term is not None:
                pieces.append(four_rho2 * term)
            if a >= 4 and b >= 4:
                base_comp = base.metric.component(a - 4, b - 4)
                if not fields._is_zero(base_comp):
                    pieces.append(rho * fields.pullback_field(chart, base_comp, 4))
            if pieces:
                total = pieces[0]
                for piece in pieces[1:]:
                    total = total + piece
                g.set_component(a, b, total)

    omega = []
    for i, j, k in CYCLIC:
        w = (
            dt.wedge(alphas[i]).scaled(2.0 * rho)
            + alphas[j].wedge(alphas[k]).scaled(four_rho2)
            + sigma_pulled[i].scaled(rho)
        )
        omega.append(w)

    return QKModel(
        base=base,
        connection=conn,
        chart=chart,
        m=base.n + 1,
        n=base.n,
        rho=rho,
        rho_rate=rho_rate,
        metric=g,
        omega=tuple(omega),
        sigma_pulled=sigma_pulled,
    )


def hermitian_compatibility(model, samples=100, tolerance=1e-8, seed=7):
    """Residuals of J_i^2 + Id, g(J_i., J_i.) - g and J1 J2 -/+ J3."""
    pts = model.chart.sample_points(samples, seed)
    eye = np.eye(model.dim)
    res = {"J_squared": 0.0, "metric_compatibility": 0.0, "quaternion": 0.0, "solve": 0.0}
    branches = set()
    for p in pts:
        memo = {}
        G, Js = model.structure_maps_at(p, memo)
        Ws = [form_matrix_at(w, p, model.dim, memo) for w in model.omega]
        scale = max(np.max(np.abs(G)), 1.0)
        for J, W in zip(Js, Ws):
            res["J_squared"] = max(res["J_squared"], np.max(np.abs(J @ J + eye)))
            res["metric_compatibility"] = max(
                res["metric_compatibility"], np.max(np.abs(J.T @ G @ J - G)) / scale
            )
            res["solve"] = max(res["solve"], np.max(np.abs(G @ J - W)) / scale)
        sign, q = quaternion_branch(*Js)
        branches.add(sign)
        res["quaternion"] = max(res["quaternion"], q)

    consistent = len(branches) == 1
    passed = consistent and all(v < tolerance for v in res.values())
    return CheckResult(
        name="model.hermitian_compatibility",
        passed=passed,
        tolerance=tolerance,
        residuals=res,
        provenance={
            "samples": samples,
            "seed": seed,
            "quaternion_sign": sorted(branches),
            "sign_consistent": consistent,
            "flip_sigma2": model.base.flip_sigma2,
        },
    )


def ideal_residual(model, samples=100, tolerance=1e-8, seed=7):
    """Least-squares membership of d(w_i) in the algebraic ideal of the w_j.

    At each sampled point the 1-forms beta_ij in ``d w_i = sum_j beta_ij ^ w_j``
    are solved for in the coordinate cotangent basis; the reported residual
    is the sup-norm of the unresolved 3-form coefficients.
    """
    dim = model.dim
    triples = all_indices(dim, 3)
    pos = {idx: r for r, idx in enumerate(triples)}
    domega = [w.d() for w in model.omega]
    pts = model.chart.sample_points(samples, seed)

    worst = 0.0
    min_rank = 3 * dim
    for p in pts:
        memo = {}
        Ws = [form_matrix_at(w, p, dim, memo) for w in model.omega]
        # columns: the 3-form dx^a ^ w_j expressed on increasing triples
        A = np.zeros((len(triples), 3 * dim))
        for j, W in enumerate(Ws):
            for a in range(dim):
                col = j * dim + a
                for (r, s, u), row in pos.items():
                    if a == r:
                        A[row, col] = W[s, u]
                    elif a == s:
                        A[row, col] = -W[r, u]
                    elif a == u:
                        A[row, col] = W[r, s]
        for i in range(3):
            b = np.zeros(len(triples))
            for idx, v in domega[i].coefficient_values(p, memo).items():
                b[pos[idx]] = v
            sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
            min_rank = min(min_rank, rank)
            worst = max(worst, float(np.max(np.abs(A @ sol - b))))

    full_rank = min_rank == 3 * dim
    passed = worst < tolerance and full_rank
    return CheckResult(
        name="model.differential_ideal",
        passed=passed,
        tolerance=tolerance,
        residuals={"ideal_membership": worst},
        provenance={
            "samples": samples,
            "seed": seed,
            "design_rank": int(min_rank),
            "full_rank": full_rank,
            "rho_rate": model.rho_rate,
            "flip_sigma2": model.base.flip_sigma2,
        },
    )


def fundamental_form_degeneracy(model, samples=20, seed=7):
    """Smallest |top coefficient| of the m-th power of sum_i w_i ^ w_i."""
    Omega = None
    for w in model.omega:
        sq = w.wedge(w)
        Omega = sq if Omega is None else Omega + sq
    power = Omega
    for _ in range(model.m - 1):
        power = power.wedge(Omega)
    top = tuple(range(model.dim))
    smallest = np.inf
    for p in model.chart.sample_points(samples, seed):
        smallest = min(smallest, abs(power.coefficient_values(p).get(top, 0.0)))
    return float(smallest)
