"""Numerical certification of the Bellman function properties.

This module samples the domain D_Q, builds finite-difference Hessians,
and checks pointwise:

  * size:      0 <= B_Q <= 80 (Z + H),
  * concavity: dX^T (-d^2 B_Q) dX >= (4/Q) |d zeta| |d eta| off the
               singular set Pi (finite differences, relative exclusion
               band around Pi),
  * sign:      the radial profile is nonincreasing in nu = |eta|.

The same machinery certifies the auxiliary-function bounds (five size
bounds, five 2x2 Hessian inequalities) on an (r, s) grid, evaluates the
mollified function by seeded Monte Carlo, and aggregates everything into
a VerificationReport.

Randomness is always drawn from numpy's PCG64 generator; every entry
point takes an explicit seed and two runs with the same configuration
produce identical reports up to the timestamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bellman
from .bellman import (
    BellmanPoint,
    DomainError,
    QContext,
    aux_raw,
    aux_size_bound,
    bq_batch,
    beta_values,
    pi_distance_batch,
    radial_batch,
    unweighted_batch,
)
from .report import CheckResult, Measurement, VerificationReport

# Margin by which sampled points stay strictly inside D_Q.
SAMPLING_DELTA = 1e-3

# Tolerance models (relative to 1 + |B_Q| unless stated otherwise).
SIZE_TOL = 1e-10
SIGN_TOL = 1e-6
HESSIAN_TOL = 1e-4
AUX_SIZE_TOL = 1e-12         # rounding allowance on the exact size bounds
AUX_HESSIAN_TOL = 1e-6       # absolute finite-difference slack
MAX_HALVINGS = 8

# Central second differences of B carry rounding noise ~ eps*(1+|B|)/(4h^2).
# Steps below this floor would drown the HESSIAN_TOL slack in float64 noise,
# so stencils that only fit with smaller steps are skipped, like the ball
# exits that force the halvings in the first place.
STEP_NOISE_FLOOR = math.sqrt(np.finfo(float).eps / (0.4 * HESSIAN_TOL))

_GOLDEN_BRACKET = (1e-8, 1e8)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SuiteConfig:
    """Configuration of a verification run (defaults are the documented ones)."""

    q_list: tuple = (1.0, 2.0, 10.0, 100.0)
    samples_per_q: int = 1000
    eta_dim: int = 1
    seed: int = 0
    fd_step: float = 1e-4
    pi_exclusion: float = 1e-3
    directions_per_point: int = 64
    mollify_eps: float = 0.0
    mc_samples: int = 0
    aux_grid_n: int = 40

    def __post_init__(self):
        if self.samples_per_q < 1:
            raise DomainError("samples_per_q must be >= 1")
        if not (self.fd_step > 0):
            raise DomainError("fd_step must be > 0")
        if not (self.pi_exclusion > 0):
            raise DomainError("pi_exclusion must be > 0")
        if self.eta_dim < 1:
            raise DomainError("eta_dim must be >= 1")
        if self.mollify_eps < 0:
            raise DomainError("mollify_eps must be >= 0")
        if not (0 <= int(self.seed) < 2**63):
            raise DomainError("seed must be a nonnegative 64-bit integer")
        for q in self.q_list:
            QContext(q, self.eta_dim)

    def as_dict(self) -> dict:
        return {
            "q_list": list(self.q_list),
            "samples_per_q": self.samples_per_q,
            "eta_dim": self.eta_dim,
            "seed": self.seed,
            "fd_step": self.fd_step,
            "pi_exclusion": self.pi_exclusion,
            "directions_per_point": self.directions_per_point,
            "mollify_eps": self.mollify_eps,
            "mc_samples": self.mc_samples,
            "aux_grid_n": self.aux_grid_n,
        }


@dataclass
class PointVerdict:
    point: BellmanPoint
    size_ok: bool
    sign_ok: bool | None          # None when the forward step did not fit
    hessian_ok: bool | None       # None when excluded near Pi or stencil skipped
    worst_margin: float
    excluded_near_pi: bool
    skip_reasons: tuple = ()


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _snap_product(r: np.ndarray, s: np.ndarray, u: np.ndarray):
    """Nudge s (then r) by ulps until r*s == u exactly, elementwise.

    Needed when the rs-interval degenerates to a single value: membership
    in the domain is exact, and a rounded product one ulp off the target
    would fall outside.  One-ulp moves of s move the product by about one
    ulp of u, so a few steps always land.
    """
    for target in (s, r):
        for _ in range(8):
            p = r * s
            if np.array_equal(p, u):
                return r, s
            target[p > u] = np.nextafter(target[p > u], 0.0)
            target[p < u] = np.nextafter(target[p < u], np.inf)
    bad = r * s != u
    # last resort: balanced split, exact for u = 1
    r[bad] = np.sqrt(u[bad])
    s[bad] = u[bad] / r[bad]
    return r, s


def sample_columns(q: float, eta_dim: int, count: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw `count` points strictly inside D_Q as an (count, 5+eta_dim) array.

    Construction: rs uniform in [1+delta, Q-delta] (rs = 1 exactly when the
    interval degenerates), split into r, s by a log-uniform factor in
    [1e-2, 1e2]; Z and H log-uniform in [1e-3, 1e3]; zeta uniform with
    zeta^2 <= (1-delta) Z r; eta a uniform direction times a uniform
    magnitude with <eta,eta> <= (1-delta) H s.
    """
    d = SAMPLING_DELTA
    lo, hi = 1.0 + d, q - d
    degenerate = hi <= lo
    if degenerate:
        u = np.full(count, (1.0 + q) / 2.0)
    else:
        u = rng.uniform(lo, hi, count)
    f = 10.0 ** rng.uniform(-2.0, 2.0, count)
    r = np.sqrt(u) * f
    s = np.sqrt(u) / f
    if degenerate:
        # the slab has no width: the product must hit its value exactly
        r, s = _snap_product(r, s, u)
    z = 10.0 ** rng.uniform(-3.0, 3.0, count)
    h = 10.0 ** rng.uniform(-3.0, 3.0, count)
    zeta = rng.uniform(-1.0, 1.0, count) * np.sqrt((1 - d) * z * r)
    direction = rng.normal(size=(count, eta_dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    mag = rng.uniform(0.0, 1.0, count) * np.sqrt((1 - d) * h * s)
    eta = direction * mag[:, None]
    return np.column_stack([z, h, zeta, eta, r, s])


def sample_domain(ctx: QContext, count: int, seed) -> list:
    """Deterministic list of BellmanPoints strictly inside D_Q."""
    if count < 1:
        raise DomainError("count must be >= 1")
    cols = sample_columns(ctx.q, ctx.eta_dim, count, _rng(seed))
    return [BellmanPoint.from_array(row) for row in cols]


def in_domain_batch(x: np.ndarray, q: float) -> np.ndarray:
    """Exact membership test for an (n, 5+eta_dim) coordinate array."""
    z = x[:, 0]
    h = x[:, 1]
    zeta = x[:, 2]
    eta2 = np.sum(x[:, 3:-2] ** 2, axis=1)
    r = x[:, -2]
    s = x[:, -1]
    u = r * s
    return ((z >= 0) & (h >= 0) & (r > 0) & (s > 0)
            & (zeta**2 <= z * r) & (eta2 <= h * s)
            & (u >= 1.0) & (u <= q))


# ---------------------------------------------------------------------------
# finite-difference Hessian
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _stencil_template(dim: int):
    """Offsets (in units of the per-coordinate step) and index maps.

    Layout: [center] + [+2e_i, -2e_i for each i] + [the four cross points
    for each pair i<j].  Returns (offsets, diag_idx, cross_idx) where
    diag_idx[i] = (plus, minus) and cross_idx[(i, j)] = (pp, pm, mp, mm).
    """
    offsets = [np.zeros(dim)]
    diag_idx = {}
    for i in range(dim):
        diag_idx[i] = (len(offsets), len(offsets) + 1)
        e = np.zeros(dim)
        e[i] = 2.0
        offsets.append(e.copy())
        offsets.append(-e)
    cross_idx = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            base = len(offsets)
            cross_idx[(i, j)] = (base, base + 1, base + 2, base + 3)
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                e = np.zeros(dim)
                e[i] = si
                e[j] = sj
                offsets.append(e)
    return np.array(offsets), diag_idx, cross_idx


def _assemble_hessians(fvals: np.ndarray, steps: np.ndarray, dim: int) -> np.ndarray:
    """Assemble (m, dim, dim) Hessians from stencil values (m, n_stencil)."""
    _, diag_idx, cross_idx = _stencil_template(dim)
    m = fvals.shape[0]
    hess = np.empty((m, dim, dim))
    f0 = fvals[:, 0]
    for i in range(dim):
        ip, im = diag_idx[i]
        hess[:, i, i] = (fvals[:, ip] - 2 * f0 + fvals[:, im]) / (4 * steps[:, i] ** 2)
    for (i, j), (pp, pm, mp, mm) in cross_idx.items():
        v = (fvals[:, pp] - fvals[:, pm] - fvals[:, mp] + fvals[:, mm]) \
            / (4 * steps[:, i] * steps[:, j])
        hess[:, i, j] = v
        hess[:, j, i] = v
    # symmetric by construction; average against rounding anyway
    return 0.5 * (hess + np.transpose(hess, (0, 2, 1)))


def fd_hessian_batch(x: np.ndarray, q: float, h: float,
                     max_halvings: int = MAX_HALVINGS):
    """Central-difference Hessians of B_Q for every row of x.

    The step in coordinate i is h * max(1, |x_i|); if any stencil point
    leaves D_Q the step is halved, up to `max_halvings` times, after which
    the point is marked unfitted.  Halvings stop early once the step falls
    under STEP_NOISE_FLOOR, where float64 cancellation noise would exceed
    the concavity tolerance.  Returns (hessians, used_h, fitted).
    """
    x = np.asarray(x, dtype=float)
    n, dim = x.shape
    offsets, _, _ = _stencil_template(dim)
    hess = np.full((n, dim, dim), np.nan)
    used_h = np.full(n, np.nan)
    fitted = np.zeros(n, dtype=bool)
    remaining = np.arange(n)
    for level in range(max_halvings + 1):
        if remaining.size == 0:
            break
        hcur = h * 0.5**level
        if hcur < STEP_NOISE_FLOOR and level > 0:
            break
        xr = x[remaining]
        steps = hcur * np.maximum(1.0, np.abs(xr))            # (m, dim)
        pts = xr[:, None, :] + steps[:, None, :] * offsets[None, :, :]
        flat = pts.reshape(-1, dim)
        ok = in_domain_batch(flat, q).reshape(len(remaining), -1).all(axis=1)
        if ok.any():
            idx = remaining[ok]
            sel = pts[ok]
            fvals = bq_batch(sel.reshape(-1, dim), q).reshape(ok.sum(), -1)
            hess[idx] = _assemble_hessians(fvals, steps[ok], dim)
            used_h[idx] = hcur
            fitted[idx] = True
            remaining = remaining[~ok]
    return hess, used_h, fitted


def fd_hessian(point: BellmanPoint, ctx: QContext, h: float) -> np.ndarray:
    """Finite-difference Hessian at one point (raises if no step fits).

    Staying clear of the singular set is the caller's job: finite
    differences straddling Pi are meaningless, so check pi_distance
    against the exclusion band first (verify_point does).
    """
    point.validate(ctx)
    if not h > 0:
        raise DomainError("h must be > 0")
    hess, _, fitted = fd_hessian_batch(point.as_array()[None, :], ctx.q, h)
    if not fitted[0]:
        raise DomainError(
            f"stencil leaves D_Q even after {MAX_HALVINGS} halvings of h")
    return hess[0]


def hessian_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """2*dim signed coordinate directions plus `count` random unit vectors."""
    eye = np.eye(dim)
    coords = np.concatenate([eye, -eye], axis=0)
    rand = rng.normal(size=(count, dim))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.concatenate([coords, rand], axis=0)


def hessian_margins(hess: np.ndarray, directions: np.ndarray, q: float,
                    eta_dim: int):
    """Concavity slack min over directions of dX^T(-H)dX - (4/Q)|dzeta||deta|.

    Also returns the minimal ratio form/rhs over directions with rhs > 0
    (the empirically observed concavity constant relative to 4/Q).
    """
    forms = -np.einsum("nij,ki,kj->nk", hess, directions, directions)
    dzeta = np.abs(directions[:, 2])
    deta = np.linalg.norm(directions[:, 3:3 + eta_dim], axis=1)
    rhs = (4.0 / q) * dzeta * deta
    margins = (forms - rhs[None, :]).min(axis=1)
    pos = rhs > 1e-12
    if pos.any():
        ratios = (forms[:, pos] / rhs[None, pos]).min(axis=1)
    else:
        ratios = np.full(hess.shape[0], np.inf)
    return margins, ratios


# ---------------------------------------------------------------------------
# sign (monotonicity in nu) check
# ---------------------------------------------------------------------------

def sign_forward_diff_batch(x: np.ndarray, q: float, h: float):
    """One-sided d/dnu of the radial profile; returns (fd, fits).

    Forward step h*(1+nu); evaluated only where (nu+step)^2 <= H s keeps
    the stepped point inside the radial domain.
    """
    z = x[:, 0]
    hh = x[:, 1]
    za = np.abs(x[:, 2])
    nu = np.sqrt(np.sum(x[:, 3:-2] ** 2, axis=1))
    r = x[:, -2]
    s = x[:, -1]
    step = h * (1.0 + nu)
    fits = (nu + step) ** 2 <= hh * s
    fd = np.full(x.shape[0], np.nan)
    if fits.any():
        b0 = radial_batch(z[fits], hh[fits], za[fits], nu[fits], r[fits], s[fits], q)
        b1 = radial_batch(z[fits], hh[fits], za[fits], nu[fits] + step[fits],
                          r[fits], s[fits], q)
        fd[fits] = (b1 - b0) / step[fits]
    return fd, fits


# ---------------------------------------------------------------------------
# B43 golden-section reference
# ---------------------------------------------------------------------------

def b43_reference_batch(x: np.ndarray, q: float,
                        bracket=_GOLDEN_BRACKET, iters: int = 64) -> np.ndarray:
    """B43 by direct golden-section maximization of the inner objective.

    Independent of the critical-parameter closed form: maximizes
    beta(a) = zeta^2/(r + aK/Q) + eta^2/(s + K/(Qa)) over log a on the
    bracket and returns Z + H - max beta.  beta has a single stationary
    point in a, so golden section on log a applies.
    """
    x = np.asarray(x, dtype=float)
    lo = np.full(x.shape[0], math.log(bracket[0]))
    hi = np.full(x.shape[0], math.log(bracket[1]))
    for _ in range(iters):
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        fc = beta_values(x, q, np.exp(c))
        fd_ = beta_values(x, q, np.exp(d))
        keep_right = fc < fd_          # maximum is to the right of c
        lo = np.where(keep_right, c, lo)
        hi = np.where(keep_right, hi, d)
    beta_max = beta_values(x, q, np.exp(0.5 * (lo + hi)))
    return x[:, 0] + x[:, 1] - beta_max


def b43_reference(point: BellmanPoint, ctx: QContext, **kw) -> float:
    point.validate(ctx)
    return float(b43_reference_batch(point.as_array()[None, :], ctx.q, **kw)[0])


# ---------------------------------------------------------------------------
# point verification
# ---------------------------------------------------------------------------

def verify_point(point: BellmanPoint, ctx: QContext, cfg: SuiteConfig,
                 directions: np.ndarray | None = None) -> PointVerdict:
    """Size / sign / Hessian verdict for a single point.

    Margins are pre-tolerance slacks normalized by 1 + |B_Q| (size by
    1 + Z + H); the _ok flags apply the documented tolerances.
    """
    point.validate(ctx)
    x = point.as_array()[None, :]
    q = ctx.q
    if directions is None:
        directions = hessian_directions(
            ctx.dim, cfg.directions_per_point,
            _rng(np.random.SeedSequence([cfg.seed, 1])))

    b = float(bq_batch(x, q)[0])
    zh = point.z + point.h
    scale_b = 1.0 + abs(b)
    skip = []

    size_margin = min(b, bellman.SIZE_CONSTANT * zh - b) / (1.0 + zh)
    size_ok = (b >= -SIZE_TOL * (1.0 + zh)
               and b <= bellman.SIZE_CONSTANT * zh * (1.0 + SIZE_TOL) + SIZE_TOL)

    fd, fits = sign_forward_diff_batch(x, q, cfg.fd_step)
    if fits[0]:
        sign_margin = -fd[0] / scale_b
        sign_ok = fd[0] <= SIGN_TOL * scale_b
    else:
        sign_margin = math.inf
        sign_ok = None
        skip.append("sign step does not fit in domain")

    margins = [size_margin, sign_margin]
    pid = float(pi_distance_batch(x, q)[0])
    excluded = pid <= cfg.pi_exclusion
    if excluded:
        hessian_ok = None
        skip.append("within Pi exclusion band")
    else:
        hess, _, fitted = fd_hessian_batch(x, q, cfg.fd_step)
        if not fitted[0]:
            hessian_ok = None
            skip.append("hessian stencil does not fit in domain")
        else:
            hmarg, _ = hessian_margins(hess, directions, q, ctx.eta_dim)
            hessian_ok = bool(hmarg[0] >= -HESSIAN_TOL * scale_b)
            margins.append(hmarg[0] / scale_b)

    finite = [m for m in margins if math.isfinite(m)]
    return PointVerdict(
        point=point,
        size_ok=bool(size_ok),
        sign_ok=sign_ok,
        hessian_ok=hessian_ok,
        worst_margin=min(finite) if finite else math.inf,
        excluded_near_pi=bool(excluded),
        skip_reasons=tuple(skip),
    )


# ---------------------------------------------------------------------------
# auxiliary-function certificates
# ---------------------------------------------------------------------------

_AUX_DIRECTIONS = np.column_stack([
    np.cos(2 * np.pi * np.arange(16) / 16),
    np.sin(2 * np.pi * np.arange(16) / 16),
])


def _aux_hessian_rhs(kind, r, s, vr, vs):
    if kind == "M":
        return r * vs * vs
    if kind == "N":
        return s * vr * vr
    if kind == "K":
        return np.abs(vr * vs) / 4.0
    if kind == "Mtilde":
        return np.abs(vr * vs) / s
    if kind == "Ntilde":
        return np.abs(vr * vs) / r
    raise DomainError(f"unknown auxiliary kind {kind!r}")


def aux_margins_batch(r: np.ndarray, s: np.ndarray, q: float, h: float):
    """Size and Hessian slacks of all five auxiliary functions, batched.

    The closed forms are smooth on r, s > 0, so finite-difference stencils
    may step slightly off the slab 1 <= rs <= Q; the size bounds are only
    meaningful (and only checked) at the nodes themselves.  Returns
    {kind: (size_margin, hessian_margin)} with size margins normalized by
    1 + bound and Hessian margins absolute.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    hr = h * np.maximum(1.0, r)
    hs = h * np.maximum(1.0, s)
    out = {}
    for kind in bellman.AUX_KINDS:
        f0 = aux_raw(kind, r, s, q)
        bound = aux_size_bound(kind, r, s, q)
        size_margin = np.minimum(f0, bound - f0) / (1.0 + bound)

        hrr = (aux_raw(kind, r + 2 * hr, s, q) - 2 * f0
               + aux_raw(kind, r - 2 * hr, s, q)) / (4 * hr * hr)
        hss = (aux_raw(kind, r, s + 2 * hs, q) - 2 * f0
               + aux_raw(kind, r, s - 2 * hs, q)) / (4 * hs * hs)
        hrs = (aux_raw(kind, r + hr, s + hs, q) - aux_raw(kind, r + hr, s - hs, q)
               - aux_raw(kind, r - hr, s + hs, q)
               + aux_raw(kind, r - hr, s - hs, q)) / (4 * hr * hs)
        worst = np.full(r.shape, np.inf)
        for vr, vs in _AUX_DIRECTIONS:
            form = -(hrr * vr * vr + 2 * hrs * vr * vs + hss * vs * vs)
            worst = np.minimum(worst, form - _aux_hessian_rhs(kind, r, s, vr, vs))
        out[kind] = (size_margin, worst)
    return out


def verify_aux(r: float, s: float, ctx: QContext, h: float) -> dict:
    """Certificates for the five auxiliary functions at one (r, s) node.

    Returns {kind: {"value", "size_ok", "hessian_ok", "size_margin",
    "hessian_margin"}}.  The node must satisfy 1 <= r*s <= Q.
    """
    if not (r > 0 and s > 0):
        raise DomainError("r and s must be positive")
    u = r * s
    if not (1.0 <= u <= ctx.q):
        raise DomainError(f"r*s = {u} outside [1, {ctx.q}]")
    rr = np.array([r])
    ss = np.array([s])
    margins = aux_margins_batch(rr, ss, ctx.q, h)
    verdict = {}
    for kind, (sm, hm) in margins.items():
        verdict[kind] = {
            "value": float(aux_raw(kind, r, s, ctx.q)),
            "size_margin": float(sm[0]),
            "hessian_margin": float(hm[0]),
            "size_ok": bool(sm[0] >= -AUX_SIZE_TOL),
            "hessian_ok": bool(hm[0] >= -AUX_HESSIAN_TOL),
        }
    return verdict


def aux_grid_nodes(q: float, n: int, margin: float = SAMPLING_DELTA,
                   r_range=(1e-2, 1e2)):
    """(r, s) nodes covering the slab: r log-spaced, rs linear in the slab.

    For Q = 1 the slab degenerates to rs = 1 and every rs-row sits on it.
    """
    r = np.logspace(math.log10(r_range[0]), math.log10(r_range[1]), n)
    lo, hi = 1.0 + margin, q - margin
    if hi <= lo:
        u = np.full(n, (1.0 + q) / 2.0)
    else:
        u = np.linspace(lo, hi, n)
    rg, ug = np.meshgrid(r, u, indexing="ij")
    rg = rg.ravel()
    sg = ug.ravel() / rg
    return rg, sg


def run_aux_grid(ctx: QContext, n: int, h: float) -> dict:
    """Aggregate auxiliary certificates over the n-by-n slab grid."""
    rg, sg = aux_grid_nodes(ctx.q, n)
    margins = aux_margins_batch(rg, sg, ctx.q, h)
    size_worst = np.full(rg.shape, np.inf)
    hess_worst = np.full(rg.shape, np.inf)
    for sm, hm in margins.values():
        size_worst = np.minimum(size_worst, sm)
        hess_worst = np.minimum(hess_worst, hm)
    i_s = int(np.argmin(size_worst))
    i_h = int(np.argmin(hess_worst))
    return {
        "count": rg.size,
        "size_failures": int(np.sum(size_worst < -AUX_SIZE_TOL)),
        "hessian_failures": int(np.sum(hess_worst < -AUX_HESSIAN_TOL)),
        "size_worst": float(size_worst[i_s]),
        "size_worst_at": {"r": float(rg[i_s]), "s": float(sg[i_s])},
        "hessian_worst": float(hess_worst[i_h]),
        "hessian_worst_at": {"r": float(rg[i_h]), "s": float(sg[i_h])},
    }


# ---------------------------------------------------------------------------
# mollified evaluation
# ---------------------------------------------------------------------------

def mollify_eval(point: BellmanPoint, ctx: QContext, eps: float, mc: int,
                 seed) -> float:
    """Seeded Monte-Carlo mollification of the radial profile.

    Averages B_Q over the bump psi(u) = exp(-1/(1-|u|^2)) supported in the
    unit ball of R^6, scaled by eps and self-normalized by the sampled psi
    mass.  The radial profile extends evenly in zeta and nu; the eps-ball
    must stay inside the (even) radial domain, otherwise the input is
    rejected.
    """
    point.validate(ctx)
    if eps < 0:
        raise DomainError("eps must be >= 0")
    if mc < 1:
        raise DomainError("mc must be >= 1")
    base = np.array([point.z, point.h, abs(point.zeta), point.nu,
                     point.r, point.s])
    if eps == 0.0:
        return float(radial_batch(*[np.array([v]) for v in base], ctx.q)[0])

    rng = _rng(seed)
    direction = rng.normal(size=(mc, 6))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = rng.uniform(0.0, 1.0, mc) ** (1.0 / 6.0)
    u = direction * radius[:, None]
    pts = base[None, :] - eps * u

    z, hh, za, nu, r, s = (pts[:, i] for i in range(6))
    rs = r * s
    inside = ((z >= 0) & (hh >= 0) & (r > 0) & (s > 0)
              & (za**2 <= z * r) & (nu**2 <= hh * s)
              & (rs >= 1.0) & (rs <= ctx.q))
    if not inside.all():
        raise DomainError("eps-ball exits the radial domain; reduce eps or "
                          "move the point inward")
    with np.errstate(divide="ignore", over="ignore"):
        norm2 = np.sum(u * u, axis=1)
        psi = np.exp(-1.0 / np.maximum(1.0 - norm2, 1e-300))
    vals = radial_batch(z, hh, za, nu, r, s, ctx.q)
    return float(np.dot(psi, vals) / psi.sum())


def _mollify_probe_points(q: float, eps: float) -> list:
    """A few interior points whose eps-ball comfortably fits in D_Q."""
    if q < 1.0 + 8.0 * eps + 1e-9:
        return []
    pts = []
    u_mid = (1.0 + q) / 2.0
    for zscale, frac in ((2.0, 0.3), (10.0, 0.0), (5.0, 0.6)):
        r = math.sqrt(u_mid)
        s = math.sqrt(u_mid)
        z = max(zscale, 4 * eps)
        h = z
        zeta = frac * math.sqrt(0.25 * z * r)
        nu = frac * math.sqrt(0.25 * h * s)
        pts.append(BellmanPoint(z, h, zeta, (nu,), r, s))
    return pts


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

def _location(x_row) -> dict:
    return {"point": [float(v) for v in x_row]}


def _run_q(q: float, cfg: SuiteConfig, checks: list, measurements: list) -> None:
    ctx = QContext(q, cfg.eta_dim)
    label = f"Q={q:g}"
    n = cfg.samples_per_q
    x = sample_columns(q, cfg.eta_dim, n, _rng(np.random.SeedSequence([cfg.seed, int(1e6 * q)])))
    dir_rng = _rng(np.random.SeedSequence([cfg.seed, int(1e6 * q), 1]))
    directions = hessian_directions(ctx.dim, cfg.directions_per_point, dir_rng)

    b = bq_batch(x, q)
    zh = x[:, 0] + x[:, 1]
    scale_b = 1.0 + np.abs(b)

    # size
    size_margin = np.minimum(b, bellman.SIZE_CONSTANT * zh - b) / (1.0 + zh)
    size_fail = ((b < -SIZE_TOL * (1.0 + zh))
                 | (b > bellman.SIZE_CONSTANT * zh * (1.0 + SIZE_TOL) + SIZE_TOL))
    i = int(np.argmin(size_margin))
    checks.append(CheckResult(
        name=f"size[{label}]", count=n, failures=int(size_fail.sum()),
        worst_margin=float(size_margin[i]), argmax_location=_location(x[i])))
    measurements.append(Measurement(
        name=f"observed_size_sup[{label}]",
        value=float(np.max(b / zh)),
        location=_location(x[int(np.argmax(b / zh))])))

    # unweighted six-bound (recorded, not asserted)
    us = unweighted_batch(x, q)
    um = np.minimum(us, 6.0 * zh - us) / (1.0 + zh)
    iu = int(np.argmin(um))
    measurements.append(Measurement(
        name=f"unweighted_six_bound_min_margin[{label}]",
        value=float(um[iu]), location=_location(x[iu])))

    # sign
    fd, fits = sign_forward_diff_batch(x, q, cfg.fd_step)
    sign_fail = np.zeros(n, dtype=bool)
    sign_fail[fits] = fd[fits] > SIGN_TOL * scale_b[fits]
    sign_margin = np.where(fits, -fd / scale_b, np.inf)
    i = int(np.argmin(sign_margin))
    checks.append(CheckResult(
        name=f"sign[{label}]", count=n, failures=int(sign_fail.sum()),
        skipped=int((~fits).sum()),
        worst_margin=float(sign_margin[i]) if fits.any() else None,
        argmax_location=_location(x[i]) if fits.any() else None))

    # hessian, off the Pi band, chunked
    pid = pi_distance_batch(x, q)
    excluded = pid <= cfg.pi_exclusion
    eligible = np.flatnonzero(~excluded)
    hess_fail = 0
    skip_near_pi = int(excluded.sum())
    skip_stencil = 0
    worst = np.inf
    worst_at = None
    min_ratio = np.inf
    chunk = 4096
    for start in range(0, eligible.size, chunk):
        idx = eligible[start:start + chunk]
        hess, _, fitted = fd_hessian_batch(x[idx], q, cfg.fd_step)
        skip_stencil += int((~fitted).sum())
        if fitted.any():
            sub = idx[fitted]
            margins, ratios = hessian_margins(hess[fitted], directions, q,
                                              cfg.eta_dim)
            norm_marg = margins / scale_b[sub]
            hess_fail += int(np.sum(norm_marg < -HESSIAN_TOL))
            j = int(np.argmin(norm_marg))
            if norm_marg[j] < worst:
                worst = float(norm_marg[j])
                worst_at = _location(x[sub[j]])
            min_ratio = min(min_ratio, float(ratios.min()))
    checks.append(CheckResult(
        name=f"hessian[{label}]", count=n, failures=hess_fail,
        skipped=skip_near_pi + skip_stencil,
        worst_margin=None if math.isinf(worst) else worst,
        argmax_location=worst_at))
    if skip_near_pi or skip_stencil:
        measurements.append(Measurement(
            name=f"hessian_skip_reasons[{label}]", value=skip_near_pi + skip_stencil,
            location={"near_pi": skip_near_pi, "stencil_unfit": skip_stencil}))
    if math.isfinite(min_ratio):
        measurements.append(Measurement(
            name=f"min_deriv_ratio[{label}]", value=min_ratio))

    # auxiliary certificates on the slab grid
    aux = run_aux_grid(ctx, cfg.aux_grid_n, cfg.fd_step)
    checks.append(CheckResult(
        name=f"aux_size[{label}]", count=aux["count"],
        failures=aux["size_failures"], worst_margin=aux["size_worst"],
        argmax_location=aux["size_worst_at"]))
    checks.append(CheckResult(
        name=f"aux_hessian[{label}]", count=aux["count"],
        failures=aux["hessian_failures"], worst_margin=aux["hessian_worst"],
        argmax_location=aux["hessian_worst_at"]))

    # mollified size bound (only when configured)
    if cfg.mollify_eps > 0 and cfg.mc_samples >= 1:
        probes = _mollify_probe_points(q, cfg.mollify_eps)
        fails = 0
        margin = math.inf
        gap = 0.0
        for k, pt in enumerate(probes):
            val = mollify_eval(pt, ctx, cfg.mollify_eps, cfg.mc_samples,
                               np.random.SeedSequence([cfg.seed, int(1e6 * q), 2, k]))
            bound = bellman.SIZE_CONSTANT * (1 + cfg.mollify_eps) * (pt.z + pt.h)
            margin = min(margin, val, bound - val)
            if not (0 <= val <= bound):
                fails += 1
            gap = max(gap, abs(val - bellman.eval_bq(pt, ctx)))
        checks.append(CheckResult(
            name=f"mollify_bound[{label}]", count=len(probes), failures=fails,
            skipped=0, worst_margin=None if not probes else float(margin)))
        if probes:
            measurements.append(Measurement(
                name=f"mollify_max_gap[{label}]", value=float(gap)))


def run_suite(cfg: SuiteConfig, tool_version: str = "0") -> VerificationReport:
    """Full verification sweep over cfg.q_list; deterministic given cfg."""
    checks: list = []
    measurements: list = []
    for q in cfg.q_list:
        _run_q(float(q), cfg, checks, measurements)
    return VerificationReport(
        tool_version=tool_version,
        config_echo={"subcommand": "verify-bellman", **cfg.as_dict()},
        checks=checks,
        measurements=measurements,
    )
