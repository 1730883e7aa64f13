"""Desk-scale checks of the main weighted estimates in the Gauss model.

Three quantitative surfaces:

  * the bilinear space-time embedding: the integral of
    |grad_bar P_t f| |grad_bar P_t g| t dgamma dt against
    20 * q2 * ||f||_w * ||g||_{w^{-1}},
  * the weighted Riesz operator norm on the truncated Hermite subspace
    against 80 * q2,
  * the representation identity pairing the Riesz transform with the
    time-derivative of the one-form Poisson flow.

q2 values are grid lower bounds, which only tightens the inequalities
being checked.  Time integrals are truncated at a point T with an
explicit analytic tail certificate instead of adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .gauss import (
    FlowGrid,
    HermiteFunction,
    ModelError,
    OneForm,
    WeightSpec,
    default_flow_grid,
    default_quad_order,
    exterior_derivative,
    gh_rule,
    hermite_design,
    q2_characteristic,
    riesz_apply,
    semigroup_apply,
    truncate_weight,
    weighted_inner,
)

TAIL_TARGET = 1e-8
TRUNCATION_LADDER = (2, 4, 8, 16, 32)

CSV_HEADER = "param,q2_lower,weighted_norm,bound_ratio,trunc_n,q2_trunc"


class EstimateError(ValueError):
    """An estimate check could not be formed or an asserted row failed."""


@dataclass(frozen=True)
class EmbeddingResult:
    lhs: float
    bound: float
    ratio: float
    t_truncation: float
    tail_estimate: float
    q2_lower: float
    f_norm: float
    g_norm: float

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "bound": self.bound, "ratio": self.ratio,
                "t_truncation": self.t_truncation,
                "tail_estimate": self.tail_estimate, "q2_lower": self.q2_lower,
                "f_norm": self.f_norm, "g_norm": self.g_norm}


@dataclass(frozen=True)
class NormResult:
    """Largest generalized singular value of the coefficient shift.

    weighted_norm is a lower bound of the true weighted operator norm
    (restriction to the truncated subspace).
    """

    weighted_norm: float
    q2: float
    bound_ratio: float
    subspace_dim: int

    def as_dict(self) -> dict:
        return {"weighted_norm": self.weighted_norm, "q2": self.q2,
                "bound_ratio": self.bound_ratio,
                "subspace_dim": self.subspace_dim}


def _composite_gauss_legendre(t_max: float, nodes_per_panel: int = 16):
    """Composite Gauss-Legendre rule on [0, t_max] with unit panels."""
    panels = max(1, int(math.ceil(t_max)))
    edges = np.linspace(0.0, t_max, panels + 1)
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    ts = []
    ws = []
    for a, b in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (b - a) * xg + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * wg)
    return np.concatenate(ts), np.concatenate(ws)


def _space_time_gradient(coeffs: np.ndarray, eigenvalues: np.ndarray,
                         design: np.ndarray, t: np.ndarray):
    """|grad_bar| of a Poisson flow on the x-nodes for every t.

    coeffs are basis coefficients, eigenvalues the per-slot decay rates
    (sqrt(n) for functions, sqrt(m+1) for one-forms); design holds
    orthonormal basis values at the x-nodes.  The spatial derivative uses
    hhat_k' = sqrt(k) hhat_{k-1}.
    """
    k = np.arange(len(coeffs))
    decay = np.exp(-np.multiply.outer(t, eigenvalues))          # (T, n)
    spatial = design[:, :-1] @ ((decay * coeffs * np.sqrt(k)).T[1:])    # (X, T)
    temporal = design @ ((decay * coeffs * eigenvalues).T)              # (X, T)
    return np.sqrt(spatial**2 + temporal**2)


def bilinear_lhs(f: HermiteFunction, g: OneForm, w: WeightSpec,
                 grid: FlowGrid | None = None,
                 quad_order: int | None = None,
                 q2_value: float | None = None) -> EmbeddingResult:
    """Space-time bilinear integral and its weighted bound.

    f must lie in the range of the generator (zero constant coefficient).
    The t-integral runs over [0, T] with T chosen so that the analytic
    e^{-2t} tail envelope stays below TAIL_TARGET; the certificate is
    returned as tail_estimate.  Pass q2_value to reuse a characteristic
    already computed on the same grid.
    """
    if abs(f.coeffs[0]) > 0:
        raise EstimateError("f must have zero constant coefficient "
                            "(range of the generator)")
    grid = default_flow_grid() if grid is None else grid
    order = default_quad_order(w) if quad_order is None else quad_order
    xg, wg = gh_rule(order)

    cf = f.array
    cg = g.array
    if not cf.any() or not cg.any():
        q2 = q2_characteristic(w, grid).value if q2_value is None else q2_value
        return EmbeddingResult(0.0, 0.0, 0.0, 0.0, 0.0, q2,
                               math.sqrt(max(weighted_inner(f, f, w, order), 0.0)),
                               math.sqrt(max(weighted_inner(g, g, w.inverse(), order), 0.0)))

    nf = len(cf)
    ng = len(cg)
    design_f = hermite_design(nf - 1, xg)
    design_g = hermite_design(ng - 1, xg)
    eig_f = np.sqrt(np.arange(nf))
    eig_g = np.sqrt(np.arange(1, ng + 1))

    # decay envelope |grad_bar| <= e^{-t} C(x): every active mode decays at
    # least like e^{-t}
    kf = np.arange(nf)
    cf_env = (design_f[:, :-1] @ (np.abs(cf) * np.sqrt(kf))[1:]
              + design_f @ (np.abs(cf) * eig_f))
    kg = np.arange(ng)
    cg_env = (design_g[:, :-1] @ (np.abs(cg) * np.sqrt(kg))[1:]
              + design_g @ (np.abs(cg) * eig_g))
    x_const = float(np.dot(wg, cf_env * cg_env))
    t_max = 10.0
    while x_const * math.exp(-2 * t_max) * (t_max / 2 + 0.25) > TAIL_TARGET:
        t_max += 2.0
    tail = x_const * math.exp(-2 * t_max) * (t_max / 2 + 0.25)

    ts, tw = _composite_gauss_legendre(t_max)
    grad_f = _space_time_gradient(cf, eig_f, design_f, ts)      # (X, T)
    grad_g = _space_time_gradient(cg, eig_g, design_g, ts)
    space = wg @ (grad_f * grad_g)                              # (T,)
    lhs = float(np.dot(tw * ts, space))

    q2 = q2_characteristic(w, grid).value if q2_value is None else q2_value
    f_norm = math.sqrt(max(weighted_inner(f, f, w, order), 0.0))
    g_norm = math.sqrt(max(weighted_inner(g, g, w.inverse(), order), 0.0))
    bound = 20.0 * q2 * f_norm * g_norm
    ratio = lhs / bound if bound > 0 else math.inf
    return EmbeddingResult(lhs, bound, ratio, t_max, tail, q2, f_norm, g_norm)


def weighted_riesz_norm(w: WeightSpec, n_dim: int,
                        quad_order: int | None = None,
                        grid: FlowGrid | None = None,
                        q2_value: float | None = None) -> NormResult:
    """Largest weighted singular value of the Riesz shift on span{hhat_1..hhat_N}.

    Builds the Gram matrices A (of hhat_1..hhat_N) and B (of the shifted
    family hhat_0..hhat_{N-1}) in L^2(w dgamma) and solves B v = lambda A v
    by symmetric reduction.  A must be numerically positive definite.
    """
    if n_dim < 2:
        raise EstimateError("subspace dimension must be >= 2")
    order = default_quad_order(w) if quad_order is None else quad_order
    xg, wg = gh_rule(order)
    design = hermite_design(n_dim, xg)                      # (X, N+1)
    gram = design.T @ (design * (wg * w(xg))[:, None])      # (N+1, N+1)
    if not np.all(np.isfinite(gram)):
        raise EstimateError("Gram matrix overflowed; raise the quadrature order")
    a = gram[1:, 1:]
    b = gram[:-1, :-1]
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise EstimateError(
            "weighted Gram matrix is not positive definite at this "
            "quadrature order; raise the order or lower N") from exc
    lam = scipy.linalg.eigh(b, a, eigvals_only=True)[-1]
    if q2_value is None:
        q2_value = q2_characteristic(w, grid or default_flow_grid()).value
    norm = math.sqrt(float(lam))
    return NormResult(norm, q2_value, norm / (80.0 * q2_value), n_dim)


def representation_check(n: int, t_max: float = 20.0,
                         nodes_per_panel: int = 16) -> dict:
    """Pairing <R hhat_n, hhat_{n-1} dx> against the space-time flow integral.

    lhs is the direct inner product; rhs is 4 int <d P_t f, d/dt P_t g> t dt
    computed coefficientwise in t-quadrature.  The two agree in absolute
    value; the signed values are both reported.
    """
    if n < 1:
        raise EstimateError("n must be >= 1")
    f = HermiteFunction.basis(n)
    g = OneForm.basis(n - 1)
    lhs = weighted_inner(riesz_apply(f), g, WeightSpec.constant(1.0))

    ts, tw = _composite_gauss_legendre(t_max, nodes_per_panel)
    eig_g = np.sqrt(np.arange(1, len(g.coeffs) + 1))

    def integrand(t):
        df = exterior_derivative(semigroup_apply(f, t, "poisson")).array
        dt_g = -eig_g * np.exp(-eig_g * t) * g.array
        m = min(len(df), len(dt_g))
        return float(np.dot(df[:m], dt_g[:m]))

    vals = np.array([integrand(t) for t in ts])
    rhs = 4.0 * float(np.dot(tw * ts, vals))
    # |integrand| <= n e^{-2 t sqrt(n)}; tail of 4 int t e^{-2 sqrt(n) t}
    root = math.sqrt(n)
    tail = 4.0 * n * math.exp(-2 * root * t_max) * (
        t_max / (2 * root) + 1 / (4 * n))
    return {"lhs": float(lhs), "rhs": rhs,
            "abs_gap": abs(abs(lhs) - abs(rhs)), "t_truncation": t_max,
            "tail_bound": tail}


def _family_weight(family: str, param: float) -> WeightSpec:
    if family == "exp":
        return WeightSpec.exp_linear(param)
    if family == "const":
        return WeightSpec.constant(param)
    raise EstimateError(f"unknown weight family {family!r}; use exp or const")


def sweep_report(family: str, params, n_dim: int = 32,
                 grid: FlowGrid | None = None,
                 ladder=TRUNCATION_LADDER, strict: bool = True) -> list:
    """Weight-family sweep: q2, weighted norm, and the truncation ladder.

    Emits one row per (param, ladder level) with the columns of
    CSV_HEADER.  In strict mode raises EstimateError if any bound_ratio
    exceeds 1 or a truncation ladder fails to be nondecreasing (small
    numerical slack); otherwise the computed rows are returned and the
    caller inspects them with sweep_problems.
    """
    params = [float(p) for p in params]
    if params != sorted(params):
        raise EstimateError("params must be sorted ascending")
    grid = default_flow_grid() if grid is None else grid
    rows = []
    for p in params:
        w = _family_weight(family, p)
        q2 = q2_characteristic(w, grid).value
        res = weighted_riesz_norm(w, n_dim, grid=grid, q2_value=q2)
        for level in ladder:
            q2t = q2_characteristic(truncate_weight(w, level), grid).value
            rows.append({"param": p, "q2_lower": q2, "weighted_norm":
                         res.weighted_norm, "bound_ratio": res.bound_ratio,
                         "trunc_n": level, "q2_trunc": q2t})
    problems = sweep_problems(rows)
    if strict and problems:
        raise EstimateError("; ".join(problems))
    return rows


def sweep_problems(rows) -> list:
    """Violations of the asserted sweep properties, empty when clean."""
    problems = []
    by_param: dict = {}
    for r in rows:
        by_param.setdefault(r["param"], []).append(r)
        if r["bound_ratio"] > 1.0:
            problems.append(f"bound_ratio {r['bound_ratio']} > 1 "
                            f"at param {r['param']}")
    for p, group in by_param.items():
        prev = -math.inf
        for r in sorted(group, key=lambda r: r["trunc_n"]):
            if r["q2_trunc"] < prev * (1 - 1e-9):
                problems.append(f"truncation ladder not monotone at "
                                f"param {p}, n {r['trunc_n']}")
            prev = r["q2_trunc"]
    return sorted(set(problems))


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(f"{r['param']:g},{r['q2_lower']!r},{r['weighted_norm']!r},"
                     f"{r['bound_ratio']!r},{r['trunc_n']},{r['q2_trunc']!r}")
    return "\n".join(lines) + "\n"
