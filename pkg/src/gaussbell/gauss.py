"""Hermite spectral model of the Gauss space on the real line.

Functions and one-forms are finite vectors of coefficients in the
orthonormal probabilists' Hermite basis hhat_n = h_n / sqrt(n!), which
diagonalizes the Ornstein-Uhlenbeck operator L = d^2/dx^2 - x d/dx with
L hhat_n = -n hhat_n.  On one-forms the weighted Hodge Laplacian acts
with eigenvalue -(m+1) on slot m, the unique action compatible with
d P_t = P_t d on the exterior derivative.

Semigroups act diagonally on coefficients; the pointwise Poisson flow of
a weight is computed through the subordination identity

    P_t = pi^{-1/2} * int_0^inf u^{-1/2} e^{-u} exp((t^2/4u) L) du

with the inner heat step given by the Mehler average

    e^{sL} f(x) = int f(x e^{-s} + sqrt(1 - e^{-2s}) y) dgamma(y).

The u-integral uses generalized Gauss-Laguerre (alpha = -1/2) nodes, the
spatial integrals Gauss-Hermite nodes; all rules are cached.  Weights are
symbolic: constants, exponential-linear e^{ax} with |a| <= 2, and
two-sided truncations clamping to [1/n, n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

#: default Hermite truncation order of model functions
DEFAULT_TRUNCATION = 32
#: Gauss-Hermite order for unweighted integrals
QUAD_UNWEIGHTED = 80
#: Gauss-Hermite order for exponential / truncated weights
QUAD_WEIGHTED = 160
#: default Gauss-Laguerre order of the subordination integral
SUBORDINATION_ORDER = 512
#: largest admissible |a| in exponential-linear weights
EXP_A_MAX = 2.0

_SQRT_PI = math.sqrt(math.pi)


class QuadratureError(ValueError):
    """Quadrature produced a non-finite value (order too low for the weight)."""


class ModelError(ValueError):
    """Invalid input to the Gauss-space model."""


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def gh_rule(order: int):
    """Probabilists' Gauss-Hermite rule; weights sum to 1 (gamma-average)."""
    if order < 2:
        raise ModelError("quadrature order must be >= 2")
    x, w = np.polynomial.hermite_e.hermegauss(order)
    return x, w / math.sqrt(2 * math.pi)


@lru_cache(maxsize=16)
def laguerre_rule(order: int):
    """Generalized Gauss-Laguerre rule, alpha = -1/2, weights sum to 1.

    Nodes are eigenvalues of the Jacobi matrix; weights come from the
    Christoffel function evaluated by the orthonormal recurrence with
    running rescaling, which stays finite at orders in the thousands
    (needed because the subordination integrand has a boundary layer at
    u -> 0 for small t).
    """
    if order < 2:
        raise ModelError("quadrature order must be >= 2")
    alpha = -0.5
    k = np.arange(order)
    diag = 2 * k + alpha + 1
    beta = k * (k + alpha)
    nodes = eigvalsh_tridiagonal(diag, np.sqrt(beta[1:]))
    sqb = np.sqrt(beta)
    v_prev = np.full_like(nodes, 1.0 / math.sqrt(_SQRT_PI))
    total = v_prev**2
    logscale = np.zeros_like(nodes)
    v_curr = (nodes - diag[0]) * v_prev / sqb[1]
    total = total + v_curr**2
    for kk in range(1, order - 1):
        v_next = ((nodes - diag[kk]) * v_curr - sqb[kk] * v_prev) / sqb[kk + 1]
        v_prev, v_curr = v_curr, v_next
        total = total + v_curr**2
        big = np.abs(v_curr) > 1e100
        if big.any():
            c = np.where(big, np.abs(v_curr), 1.0)
            v_prev = v_prev / c
            v_curr = v_curr / c
            total = total / c**2
            logscale = logscale + np.log(c)
    with np.errstate(under="ignore"):
        weights = np.exp(-2 * logscale - np.log(total)) / _SQRT_PI
    return nodes, weights


def subordination_nodes(t: float, gl_order: int):
    """Heat times s_j and probability weights w_j with P_t = sum w_j e^{s_j L}."""
    if t < 0:
        raise ModelError("t must be >= 0")
    u, w = laguerre_rule(gl_order)
    return t * t / (4.0 * u), w


# ---------------------------------------------------------------------------
# Hermite basis
# ---------------------------------------------------------------------------

def hermite_eval(n: int, x, orthonormal: bool = False):
    """Probabilists' Hermite h_n(x) by the three-term recurrence.

    With orthonormal=True returns h_n(x)/sqrt(n!), evaluated by the
    normalized recurrence for stability at large n and |x|.
    """
    if n < 0:
        raise ModelError("n must be >= 0")
    x = np.asarray(x, dtype=float)
    if orthonormal:
        prev = np.zeros_like(x)
        curr = np.ones_like(x)
        for k in range(n):
            prev, curr = curr, (x * curr - math.sqrt(k) * prev) / math.sqrt(k + 1)
        return curr if x.ndim else float(curr)
    prev = np.zeros_like(x)
    curr = np.ones_like(x)
    for k in range(n):
        prev, curr = curr, x * curr - k * prev
    return curr if x.ndim else float(curr)


def hermite_design(nmax: int, x) -> np.ndarray:
    """Matrix of orthonormal values hhat_0..hhat_nmax at x, shape x.shape + (nmax+1,)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (nmax + 1,))
    prev = np.zeros_like(x)
    curr = np.ones_like(x)
    out[..., 0] = curr
    for k in range(nmax):
        prev, curr = curr, (x * curr - math.sqrt(k) * prev) / math.sqrt(k + 1)
        out[..., k + 1] = curr
    return out


@dataclass(frozen=True)
class HermiteFunction:
    """A function sum_n c_n hhat_n with finitely many coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.coeffs))
        if not all(math.isfinite(v) for v in c):
            raise ModelError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, n: int, size: int | None = None) -> "HermiteFunction":
        size = (n + 1) if size is None else size
        c = [0.0] * size
        c[n] = 1.0
        return cls(tuple(c))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x):
        return hermite_design(self.order, x) @ self.array

    def norm(self) -> float:
        """L^2(gamma) norm; Parseval is exact in this representation."""
        return float(np.linalg.norm(self.array))

    def __add__(self, other: "HermiteFunction") -> "HermiteFunction":
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return HermiteFunction(tuple(a))

    def scaled(self, lam: float) -> "HermiteFunction":
        return HermiteFunction(tuple(lam * v for v in self.coeffs))


@dataclass(frozen=True)
class OneForm:
    """A one-form (sum_m b_m hhat_m) dx."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.coeffs))
        if not all(math.isfinite(v) for v in c):
            raise ModelError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, m: int, size: int | None = None) -> "OneForm":
        size = (m + 1) if size is None else size
        c = [0.0] * size
        c[m] = 1.0
        return cls(tuple(c))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x):
        """The dx-component at x."""
        return hermite_design(self.order, x) @ self.array

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def scaled(self, lam: float) -> "OneForm":
        return OneForm(tuple(lam * v for v in self.coeffs))


def exterior_derivative(f: HermiteFunction) -> OneForm:
    """d(hhat_n) = sqrt(n) hhat_{n-1} dx, coefficientwise."""
    c = f.array
    if len(c) == 1:
        return OneForm((0.0,))
    out = np.sqrt(np.arange(1, len(c))) * c[1:]
    return OneForm(tuple(out))


def riesz_apply(f: HermiteFunction) -> OneForm:
    """Riesz transform d (-L)^{-1/2}: hhat_n -> hhat_{n-1} dx, hhat_0 -> 0.

    Constants are annihilated (they span the kernel of -L); on the rest
    the coefficient vector shifts down one slot, which is an isometry on
    the orthogonal complement of the constants.
    """
    c = f.array
    if len(c) == 1:
        return OneForm((0.0,))
    return OneForm(tuple(c[1:]))


def semigroup_apply(obj, t: float, mode: str):
    """Diagonal semigroup action on coefficients.

    heat: c_n -> e^{-nt} c_n; poisson: c_n -> e^{-t sqrt(n)} c_n;
    poisson_oneform: b_m -> e^{-t sqrt(m+1)} b_m.
    """
    if t < 0:
        raise ModelError("t must be >= 0")
    if mode == "heat":
        if not isinstance(obj, HermiteFunction):
            raise ModelError("heat mode expects a HermiteFunction")
        factors = np.exp(-np.arange(len(obj.coeffs)) * t)
        return HermiteFunction(tuple(obj.array * factors))
    if mode == "poisson":
        if not isinstance(obj, HermiteFunction):
            raise ModelError("poisson mode expects a HermiteFunction")
        factors = np.exp(-np.sqrt(np.arange(len(obj.coeffs))) * t)
        return HermiteFunction(tuple(obj.array * factors))
    if mode == "poisson_oneform":
        if not isinstance(obj, OneForm):
            raise ModelError("poisson_oneform mode expects a OneForm")
        factors = np.exp(-np.sqrt(np.arange(1, len(obj.coeffs) + 1)) * t)
        return OneForm(tuple(obj.array * factors))
    if mode == "heat_oneform":
        if not isinstance(obj, OneForm):
            raise ModelError("heat_oneform mode expects a OneForm")
        factors = np.exp(-np.arange(1, len(obj.coeffs) + 1) * t)
        return OneForm(tuple(obj.array * factors))
    raise ModelError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """Symbolic strictly positive weight: constant, e^{ax}, or a clamp.

    kind is "const" (param = c > 0), "exp" (param = a, |a| <= EXP_A_MAX)
    or "trunc" (param = level n >= 1, inner a WeightSpec); truncation
    clamps values to [1/n, n].
    """

    kind: str
    param: float
    inner: "WeightSpec | None" = None

    def __post_init__(self):
        if self.kind == "const":
            if not (self.param > 0 and math.isfinite(self.param)):
                raise ModelError("constant weight needs c > 0")
        elif self.kind == "exp":
            if not math.isfinite(self.param):
                raise ModelError("exp weight needs finite a")
            if abs(self.param) > EXP_A_MAX:
                raise ModelError(
                    f"|a| = {abs(self.param)} exceeds the quadrature "
                    f"reliability bound {EXP_A_MAX}")
        elif self.kind == "trunc":
            if self.inner is None:
                raise ModelError("truncation needs an inner weight")
            if self.param < 1 or self.param != int(self.param):
                raise ModelError("truncation level must be an integer >= 1")
        else:
            raise ModelError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "WeightSpec":
        return cls("const", float(c))

    @classmethod
    def exp_linear(cls, a: float) -> "WeightSpec":
        return cls("exp", float(a))

    @classmethod
    def truncated(cls, inner: "WeightSpec", n: int) -> "WeightSpec":
        return cls("trunc", float(n), inner)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "const":
            return np.full_like(x, self.param)
        if self.kind == "exp":
            return np.exp(self.param * x)
        return np.clip(self.inner(x), 1.0 / self.param, self.param)

    def inverse(self) -> "WeightSpec":
        """Pointwise reciprocal; commutes with the symmetric clamp band."""
        if self.kind == "const":
            return WeightSpec.constant(1.0 / self.param)
        if self.kind == "exp":
            return WeightSpec.exp_linear(-self.param)
        return WeightSpec.truncated(self.inner.inverse(), int(self.param))

    def to_string(self) -> str:
        if self.kind == "const":
            return f"const:c={self.param!r}"
        if self.kind == "exp":
            return f"exp:a={self.param!r}"
        return f"trunc:n={int(self.param)}:{self.inner.to_string()}"

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """Parse the grammar const:c=<v> | exp:a=<v> | trunc:n=<k>:<inner>."""
        text = text.strip()
        if text.startswith("const:c="):
            return cls.constant(float(text[len("const:c="):]))
        if text.startswith("exp:a="):
            return cls.exp_linear(float(text[len("exp:a="):]))
        if text.startswith("trunc:n="):
            rest = text[len("trunc:n="):]
            head, sep, inner = rest.partition(":")
            if not sep:
                raise ModelError(f"truncation needs an inner weight: {text!r}")
            return cls.truncated(cls.parse(inner), int(head))
        raise ModelError(f"cannot parse weight {text!r}")


def truncate_weight(w: WeightSpec, n: int) -> WeightSpec:
    """Two-sided truncation clamping w to [1/n, n]."""
    if n < 1:
        raise ModelError("truncation level must be >= 1")
    return WeightSpec.truncated(w, n)


def default_quad_order(w: WeightSpec) -> int:
    return QUAD_UNWEIGHTED if w.kind == "const" else QUAD_WEIGHTED


def gauss_integral(w, quad_order: int) -> float:
    """integral of w against the standard Gaussian measure."""
    x, wt = gh_rule(quad_order)
    val = float(np.dot(wt, w(x)))
    if not math.isfinite(val):
        raise QuadratureError("gaussian integral overflowed; raise the order")
    return val


def weighted_inner(u, v, w: WeightSpec, quad_order: int | None = None) -> float:
    """Gauss-Hermite approximation of int u v w dgamma.

    Exact up to rounding when u*v*w is a polynomial of degree below
    2*quad_order (constant weights).  u and v must be both functions or
    both one-forms.
    """
    if isinstance(u, HermiteFunction) != isinstance(v, HermiteFunction):
        raise ModelError("weighted_inner needs two functions or two one-forms")
    order = default_quad_order(w) if quad_order is None else quad_order
    if order < 2:
        raise ModelError("quad_order must be >= 2")
    x, wt = gh_rule(order)
    vals = u.eval(x) * v.eval(x) * w(x)
    out = float(np.dot(wt, vals))
    if not math.isfinite(out):
        raise QuadratureError("weighted inner product overflowed; raise the order")
    return out


# ---------------------------------------------------------------------------
# pointwise flows
# ---------------------------------------------------------------------------

def heat_weight(w: WeightSpec, x, s, quad_order: int | None = None):
    """e^{sL} w at x, broadcasting x and s.

    Exponential-linear weights use the Gaussian closed form
    exp(a x e^{-s} + a^2 (1 - e^{-2s})/2); everything else goes through
    the Mehler-average quadrature.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ModelError("s must be >= 0")
    if w.kind == "const":
        return np.broadcast_to(np.full(1, w.param), np.broadcast(x, s).shape).copy()
    if w.kind == "exp":
        a = w.param
        return np.exp(a * x * np.exp(-s) + a * a * (1 - np.exp(-2 * s)) / 2)
    order = default_quad_order(w) if quad_order is None else quad_order
    gx, gw = gh_rule(order)
    pts = (x * np.exp(-s))[..., None] + np.sqrt(np.maximum(1 - np.exp(-2 * s), 0.0))[..., None] * gx
    return w(pts) @ gw


def mehler_heat_apply(f, x, s, quad_order: int) -> np.ndarray:
    """e^{sL} f at x by the Mehler-average quadrature, f an arbitrary callable."""
    x = np.asarray(x, dtype=float)
    gx, gw = gh_rule(quad_order)
    scalar_s = np.isscalar(s) or np.asarray(s).ndim == 0
    s = np.asarray(s, dtype=float)
    pts = (x * np.exp(-s))[..., None] + np.sqrt(np.maximum(1 - np.exp(-2 * s), 0.0))[..., None] * gx
    out = f(pts) @ gw
    return out


def _poisson_batch(w: WeightSpec, xs: np.ndarray, t: float, gl_order: int,
                   gh_order: int | None = None) -> np.ndarray:
    """P_t w at the points xs via subordination (vectorized over xs)."""
    xs = np.asarray(xs, dtype=float)
    if w.kind == "const":
        return np.full(xs.shape, w.param)
    s, wj = subordination_nodes(t, gl_order)
    if w.kind == "exp":
        a = w.param
        with np.errstate(over="ignore", invalid="ignore"):
            # overflow -> inf/nan -> the caller rejects non-finite output
            inner = np.exp(a * np.multiply.outer(xs, np.exp(-s))
                           + a * a * (1 - np.exp(-2 * s)) / 2)
            return inner @ wj
    order = default_quad_order(w) if gh_order is None else gh_order
    gx, gw = gh_rule(order)
    sig = np.sqrt(np.maximum(1 - np.exp(-2 * s), 0.0))
    pts = np.multiply.outer(xs, np.exp(-s))[..., None] + sig[None, :, None] * gx
    return (w(pts) @ gw) @ wj


def poisson_weight(w: WeightSpec, x: float, t: float,
                   quad_order: int = SUBORDINATION_ORDER) -> float:
    """P_t w (x): subordinated Poisson flow of a weight at one point.

    quad_order is the Gauss-Laguerre order of the u-integral; the inner
    Mehler averages use the weight's default Gauss-Hermite order.
    """
    if not t > 0:
        raise ModelError("t must be > 0")
    val = float(_poisson_batch(w, np.array([x]), t, quad_order)[0])
    if not math.isfinite(val):
        raise QuadratureError("Poisson flow overflowed; weight grows too fast")
    return val


def heat_step_quadrature(n: int, x, s: float, quad_order: int) -> np.ndarray:
    """e^{sL} hhat_n at x via the Mehler average (validation path).

    The integrand is a degree-n polynomial, so Gauss-Hermite with
    quad_order > n/2 reproduces e^{-ns} hhat_n(x) to rounding.
    """
    return mehler_heat_apply(lambda p: hermite_design(n, p)[..., n], x, s,
                             quad_order)


def poisson_step_quadrature(n: int, x, t: float, gl_order: int,
                            gh_order: int) -> np.ndarray:
    """P_t hhat_n at x via subordination + Mehler quadrature (validation path)."""
    x = np.asarray(x, dtype=float)
    s, wj = subordination_nodes(t, gl_order)
    vals = heat_step_quadrature(n, x[..., None] * np.ones_like(s), s, gh_order)
    return vals @ wj


def discrete_poisson_kernel(xs, t: float, gl_order: int, gh_order: int):
    """The discrete probability measure representing P_t at the points xs.

    Returns (pts, mass, s) with pts of shape (len(xs), J, K), mass (J, K)
    summing to 1, and the subordination times s of shape (J,).  Evaluating
    sum mass * f(pts) gives the same value as the quadrature Poisson flow;
    using one shared kernel for several integrands preserves the exact
    Cauchy-Schwarz structure of flow inequalities at the discrete level.
    """
    xs = np.asarray(xs, dtype=float)
    s, wj = subordination_nodes(t, gl_order)
    gx, gw = gh_rule(gh_order)
    sig = np.sqrt(np.maximum(1 - np.exp(-2 * s), 0.0))
    pts = np.multiply.outer(xs, np.exp(-s))[..., None] + sig[None, :, None] * gx
    mass = wj[:, None] * gw[None, :]
    return pts, mass, s


def flow_inequality_suite(fs, gs, ws, x_nodes, t_nodes, gl_order: int = 256,
                 gh_order: int = QUAD_UNWEIGHTED) -> dict:
    """Worst pointwise margins of the flow inequalities over a grid.

    Checked, for every grid node (x, t), every f in fs, g in gs, w in ws:

      a) P_t f(x)^2      <= P_t(f^2 w)(x) * P_t(w^{-1})(x)
      b) d P_t f          = P_t (d f)           (coefficients, exact)
      c) |heat_t g|(x)    <= heat_t |g|(x)      (one-form vs scalar heat)
      d) |P_t g(x)|^2     <= P_t(|g|^2 w^{-1})(x) * P_t(w)(x)
      product) P_t(w)(x) * P_t(w^{-1})(x) >= 1

    The flow quantities in a), d) and product) are all evaluated against
    one shared discrete kernel per (x, t), so the Cauchy-Schwarz structure
    behind the inequalities survives discretization exactly; margins can
    only be negative through rounding.  Returns {"a": m, "c": m, "d": m,
    "product": m, "b_gap": gap} with m the minimal margin per item
    (positive = inequality held everywhere) and b_gap the largest
    coefficient discrepancy in b).
    """
    xs = np.asarray(x_nodes, dtype=float)
    winvs = [w.inverse() for w in ws]
    worst = {"a": math.inf, "c": math.inf, "d": math.inf, "product": math.inf}
    gx, gw = gh_rule(gh_order)
    for t in t_nodes:
        pts, mass, s = discrete_poisson_kernel(xs, t, gl_order, gh_order)
        es = np.exp(-s)
        fvals = [f.eval(pts) for f in fs]
        gvals = [g.eval(pts) for g in gs]
        for w, winv in zip(ws, winvs):
            wv = w(pts)
            wiv = winv(pts)
            p_w = np.einsum("xjk,jk->x", wv, mass)
            p_winv = np.einsum("xjk,jk->x", wiv, mass)
            worst["product"] = min(worst["product"],
                                   float(np.min(p_w * p_winv - 1.0)))
            for fv in fvals:
                p_f = np.einsum("xjk,jk->x", fv, mass)
                p_f2w = np.einsum("xjk,jk->x", fv * fv * wv, mass)
                worst["a"] = min(worst["a"],
                                 float(np.min(p_f2w * p_winv - p_f**2)))
            for gv in gvals:
                p_gvec = np.einsum("xjk,jk,j->x", gv, mass, es)
                p_g2winv = np.einsum("xjk,jk->x", gv * gv * wiv, mass)
                worst["d"] = min(worst["d"],
                                 float(np.min(p_g2winv * p_w - p_gvec**2)))
        # c) single Mehler step: scalar heat of |g| dominates the one-form heat
        hpts = (xs * math.exp(-t))[:, None] \
            + math.sqrt(max(1 - math.exp(-2 * t), 0.0)) * gx
        for g in gs:
            hv = hermite_design(g.order, hpts) @ g.array
            lhs = math.exp(-t) * np.abs(hv @ gw)
            rhs = np.abs(hv) @ gw
            worst["c"] = min(worst["c"], float(np.min(rhs - lhs)))
    # b) exact diagonal identity, worst over the same t nodes
    worst_b = 0.0
    for t in t_nodes:
        for f in fs:
            lhs = exterior_derivative(semigroup_apply(f, t, "poisson")).array
            rhs = semigroup_apply(exterior_derivative(f), t,
                                  "poisson_oneform").array
            worst_b = max(worst_b,
                          float(np.max(np.abs(lhs - rhs), initial=0.0)))
    worst["b_gap"] = worst_b
    return worst


def flow_inequality_margins(f: HermiteFunction, g: OneForm, w: WeightSpec,
                   x_nodes, t_nodes, gl_order: int = 256,
                   gh_order: int = QUAD_UNWEIGHTED) -> dict:
    """flow_inequality_suite for a single (f, g, w) triple."""
    return flow_inequality_suite([f], [g], [w], x_nodes, t_nodes, gl_order, gh_order)


# ---------------------------------------------------------------------------
# the Poisson-A2 characteristic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowGrid:
    """Space-time grid over which the flow characteristic is maximized.

    quad_order is the Gauss-Laguerre order of the subordination integral.
    """

    x_nodes: tuple
    t_nodes: tuple
    quad_order: int = SUBORDINATION_ORDER

    def __post_init__(self):
        xs = tuple(float(v) for v in self.x_nodes)
        ts = tuple(float(v) for v in self.t_nodes)
        if len(xs) == 0 or len(ts) == 0:
            raise ModelError("grid must be nonempty")
        if any(t <= 0 for t in ts):
            raise ModelError("t nodes must be positive")
        if list(ts) != sorted(ts):
            raise ModelError("t nodes must be increasing")
        if any(abs(a + b) > 1e-12 for a, b in zip(xs, reversed(xs))):
            raise ModelError("x nodes must be symmetric about 0")
        object.__setattr__(self, "x_nodes", xs)
        object.__setattr__(self, "t_nodes", ts)

    def as_dict(self) -> dict:
        return {"x_nodes": list(self.x_nodes), "t_nodes": list(self.t_nodes),
                "quad_order": self.quad_order}


def default_flow_grid(quad_order: int = SUBORDINATION_ORDER) -> FlowGrid:
    """x in [-8, 8] step 0.25; t log-spaced 1e-3 .. 32 (40 nodes)."""
    xs = np.arange(-8.0, 8.0 + 1e-9, 0.25)
    ts = np.logspace(math.log10(1e-3), math.log10(32.0), 40)
    return FlowGrid(tuple(xs), tuple(ts), quad_order)


@dataclass(frozen=True)
class Q2Result:
    """Grid lower bound of the flow characteristic, with its arg-max node.

    value includes the analytic t -> infinity limit
    (int w dgamma)(int w^{-1} dgamma); argmax_t is math.inf when the limit
    dominates every grid node.  min_product is the smallest product seen
    on the grid (the flow product is never below 1 for a true semigroup,
    and the discrete kernel inherits that by Cauchy-Schwarz).
    """

    value: float
    argmax_x: float | None
    argmax_t: float
    limit: float
    min_product: float
    node_count: int
    below_one_count: int

    def as_dict(self) -> dict:
        return {"q2_lower": self.value, "argmax_x": self.argmax_x,
                "argmax_t": self.argmax_t, "limit": self.limit,
                "min_product": self.min_product,
                "node_count": self.node_count,
                "below_one_count": self.below_one_count}


def q2_characteristic(w: WeightSpec, grid: FlowGrid | None = None) -> Q2Result:
    """Maximum of P_t(w)(x) P_t(w^{-1})(x) over the grid and the t limit.

    Any finite computation undershoots the true supremum, so the value is
    a certified lower bound only.
    """
    grid = default_flow_grid() if grid is None else grid
    winv = w.inverse()
    xs = np.asarray(grid.x_nodes)
    best = -math.inf
    arg = (None, math.inf)
    min_product = math.inf
    below_one = 0
    for t in grid.t_nodes:
        p = _poisson_batch(w, xs, t, grid.quad_order)
        pinv = _poisson_batch(winv, xs, t, grid.quad_order)
        prod = p * pinv
        if not np.all(np.isfinite(prod)):
            raise QuadratureError("Poisson flow overflowed on the grid")
        i = int(np.argmax(prod))
        if prod[i] > best:
            best = float(prod[i])
            arg = (float(xs[i]), float(t))
        min_product = min(min_product, float(prod.min()))
        below_one += int(np.sum(prod < 1.0 - 1e-10))
    order = default_quad_order(w)
    limit = gauss_integral(w, order) * gauss_integral(winv, order)
    if limit > best:
        best = limit
        arg = (None, math.inf)
    return Q2Result(best, arg[0], arg[1], limit, min_product,
                    len(xs) * len(grid.t_nodes), below_one)
