"""Closed-form evaluation of the six-variable Bellman function B_Q.

The function lives on the domain

    D_Q = { (Z, H, zeta, eta, r, s) :
            zeta^2 <= Z*r,  <eta,eta> <= H*s,  1 <= r*s <= Q }

with Z, H >= 0, r, s > 0, zeta real and eta a vector.  It is assembled
from six components B1, B2, B3, B41, B42, B43 built on five auxiliary
functions M, N, K, Mtilde, Ntilde of (r, s), combined with the weights

    B_Q = C1*B1 + C2*B2 + C3*B3 + C4*(B41 + B42 + B43),
    C1 = 1,  C2 = C3 = sqrt(2)/3,  C4 = 288/13.

Everything here is a pure function; the numerical certification of the
size / concavity / monotonicity properties lives in ``verify``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Combination weights for the component sum.
C1 = 1.0
C2 = math.sqrt(2.0) / 3.0
C3 = math.sqrt(2.0) / 3.0
C4 = 288.0 / 13.0

#: Effective size constant of the weighted sum: each component is at most
#: 2(Z+H), so B_Q <= (C1+C2+C3+3*C4)(Z+H) ~= 68.41 (Z+H).  The contract
#: checked downstream uses the coarser 80(Z+H).
SIZE_CONSTANT = 80.0
EFFECTIVE_SIZE_CONSTANT = C1 + C2 + C3 + 3 * C4

AUX_KINDS = ("M", "N", "K", "Mtilde", "Ntilde")

COMPONENT_IDS = ("B1", "B2", "B3", "B41", "B42", "B43")


class DomainError(ValueError):
    """Input lies outside the Bellman domain (or violates a precondition)."""


class DegeneratePointError(ValueError):
    """Critical-parameter split is 0/0; caller must resample."""


@dataclass(frozen=True)
class QContext:
    """Characteristic bound Q >= 1 plus the dimension of the eta slot."""

    q: float
    eta_dim: int = 1

    def __post_init__(self):
        if not (self.q >= 1.0) or not math.isfinite(self.q):
            raise DomainError(f"Q must be a finite real >= 1, got {self.q}")
        if self.eta_dim < 1:
            raise DomainError(f"eta_dim must be >= 1, got {self.eta_dim}")

    @property
    def dim(self) -> int:
        """Number of coordinates of a domain point: (Z, H, zeta, eta..., r, s)."""
        return 5 + self.eta_dim


@dataclass(frozen=True)
class BellmanPoint:
    """A point (Z, H, zeta, eta, r, s) of D_Q.  eta is a tuple of floats."""

    z: float
    h: float
    zeta: float
    eta: tuple
    r: float
    s: float

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(v) for v in np.atleast_1d(self.eta)))

    def validate(self, ctx: QContext) -> None:
        """Exact membership check (tolerance zero on every inequality)."""
        if len(self.eta) != ctx.eta_dim:
            raise DomainError(f"eta has length {len(self.eta)}, expected {ctx.eta_dim}")
        if self.z < 0 or self.h < 0:
            raise DomainError("Z and H must be nonnegative")
        if not (self.r > 0 and self.s > 0):
            raise DomainError("r and s must be strictly positive")
        if self.zeta**2 > self.z * self.r:
            raise DomainError("zeta^2 <= Z*r violated")
        if self.eta2 > self.h * self.s:
            raise DomainError("<eta,eta> <= H*s violated")
        u = self.r * self.s
        if not (1.0 <= u <= ctx.q):
            raise DomainError(f"r*s = {u} outside [1, {ctx.q}]")

    @property
    def eta2(self) -> float:
        return float(sum(v * v for v in self.eta))

    @property
    def nu(self) -> float:
        return math.sqrt(self.eta2)

    def as_array(self) -> np.ndarray:
        """Coordinates in the (Z, H, zeta, eta..., r, s) layout used internally."""
        return np.array([self.z, self.h, self.zeta, *self.eta, self.r, self.s])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "BellmanPoint":
        x = np.asarray(x, dtype=float)
        return cls(x[0], x[1], x[2], tuple(x[3:-2]), x[-2], x[-1])


@dataclass(frozen=True)
class CriticalA:
    """Location of the extremum in the B43 one-parameter family.

    case is one of "zero", "finite", "infinite"; value is set only for
    the finite case and is then strictly positive.
    """

    case: str
    value: float | None = None

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def infinite(cls):
        return cls("infinite")

    @classmethod
    def finite(cls, value: float):
        if not value > 0:
            raise ValueError("finite critical parameter must be positive")
        return cls("finite", float(value))


# ---------------------------------------------------------------------------
# auxiliary functions
# ---------------------------------------------------------------------------

def aux_raw(kind: str, r, s, q: float):
    """Closed form of an auxiliary function, no domain check (array friendly).

    These expressions are smooth on r, s > 0; the size bounds proved for
    them only hold on the slab 1 <= r*s <= Q.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if kind == "M":
        return -4 * q * q / r - r * s * s + (4 * q * q + 1) * s
    if kind == "N":
        return -4 * q * q / s - s * r * r + (4 * q * q + 1) * r
    if kind == "K":
        return math.sqrt(q) * np.sqrt(r * s) - r * s / 4
    if kind == "Mtilde":
        return -4 * q / s - r * r * s / (4 * q) + (4 * q + 1) * r
    if kind == "Ntilde":
        return -4 * q / r - s * s * r / (4 * q) + (4 * q + 1) * s
    raise DomainError(f"unknown auxiliary kind {kind!r}; expected one of {AUX_KINDS}")


def aux_size_bound(kind: str, r, s, q: float):
    """Upper size bound of an auxiliary function on the slab 1 <= rs <= Q."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if kind == "M":
        return 5 * q * q * s
    if kind == "N":
        return 5 * q * q * r
    if kind == "K":
        return q * np.ones(np.broadcast(r, s).shape)
    if kind == "Mtilde":
        return 5 * q * r
    if kind == "Ntilde":
        return 5 * q * s
    raise DomainError(f"unknown auxiliary kind {kind!r}")


def eval_aux(kind: str, r: float, s: float, ctx: QContext) -> float:
    """Evaluate M, N, K, Mtilde or Ntilde at (r, s) with 1 <= r*s <= Q."""
    if not (r > 0 and s > 0):
        raise DomainError("r and s must be strictly positive")
    u = r * s
    if not (1.0 <= u <= ctx.q):
        raise DomainError(f"r*s = {u} outside [1, {ctx.q}]")
    return float(aux_raw(kind, r, s, ctx.q))


# ---------------------------------------------------------------------------
# batched evaluation core
# ---------------------------------------------------------------------------

def _split_columns(x: np.ndarray):
    """Split an (n, 5+eta_dim) coordinate array into named columns."""
    z = x[:, 0]
    h = x[:, 1]
    zeta = x[:, 2]
    eta2 = np.sum(x[:, 3:-2] ** 2, axis=1)
    r = x[:, -2]
    s = x[:, -1]
    return z, h, zeta, eta2, r, s


def _check_denominators(*denoms):
    # Positivity is guaranteed on D_Q because the auxiliary functions are
    # nonnegative there; a violation means the input left the domain.
    for d in denoms:
        if not np.all(d > 0):
            raise DomainError("auxiliary denominator not strictly positive; "
                              "point outside the evaluation region")


def components_batch(x: np.ndarray, q: float) -> np.ndarray:
    """Component values B1..B43 for points given as an (n, 5+eta_dim) array.

    Returns an (n, 6) array with columns ordered as COMPONENT_IDS.  The
    B43 column uses the critical-parameter closed form; points where both
    the numerator and denominator of the critical parameter vanish are
    exactly those with zeta = eta = 0, where B43 = Z + H.
    """
    x = np.asarray(x, dtype=float)
    z, h, zeta, eta2, r, s = _split_columns(x)
    zz = zeta * zeta

    m = aux_raw("M", r, s, q)
    n_ = aux_raw("N", r, s, q)
    mt = aux_raw("Mtilde", r, s, q)
    nt = aux_raw("Ntilde", r, s, q)
    k = aux_raw("K", r, s, q)

    d2 = s + m / (q * q)
    d3 = r + n_ / (q * q)
    d41 = r + mt / q
    d42 = s + nt / q
    _check_denominators(r, s, d2, d3, d41, d42)

    b1 = z - zz / r + h - eta2 / s
    b2 = z - zz / r + h - eta2 / d2
    b3 = z - zz / d3 + h - eta2 / s
    b41 = z - zz / d41 + h - eta2 / s
    b42 = z - zz / r + h - eta2 / d42

    # B43: radial profile, zeta and nu taken nonnegative.
    za = np.abs(zeta)
    nu = np.sqrt(eta2)
    num = q * r * nu - k * za
    den = q * s * za - k * nu
    finite = (num > 0) & (den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        am = np.where(finite, num / np.where(finite, den, 1.0), 1.0)
        dz43 = r + am * k / q
        dn43 = s + k / (q * am)
        _check_denominators(dz43[finite] if finite.any() else np.array([1.0]),
                            dn43[finite] if finite.any() else np.array([1.0]))
        b43_fin = z - zz / dz43 + h - eta2 / dn43
    b43_zero = z + h - zz / r
    b43_inf = z + h - eta2 / s
    # precedence: finite, then a_m infinite (num>0, den<=0), then a_m zero
    # (den>0, num<=0), else the zeta=eta=0 point where B43 = Z + H.
    b43 = np.where(finite, b43_fin,
                   np.where(num > 0, b43_inf,
                            np.where(den > 0, b43_zero, z + h)))
    return np.column_stack([b1, b2, b3, b41, b42, b43])


def bq_batch(x: np.ndarray, q: float) -> np.ndarray:
    """Weighted sum C1*B1 + C2*B2 + C3*B3 + C4*(B41+B42+B43), batched."""
    c = components_batch(x, q)
    return (C1 * c[:, 0] + C2 * c[:, 1] + C3 * c[:, 2]
            + C4 * (c[:, 3] + c[:, 4] + c[:, 5]))


def unweighted_batch(x: np.ndarray, q: float) -> np.ndarray:
    """Diagnostic plain sum B1+B2+B3+B41+B42+B43 (bounded by 6(Z+H))."""
    return components_batch(x, q).sum(axis=1)


def radial_batch(z, h, za, nu, r, s, q: float) -> np.ndarray:
    """B_Q on the radial profile (Z, H, |zeta|, |eta|, r, s), batched.

    Accepts arbitrary-sign za, nu; only their squares and absolute values
    enter, which matches the even extension of the radial profile.
    """
    cols = np.column_stack([z, h, np.abs(za), np.abs(nu), r, s])
    return bq_batch(cols, q)


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def critical_a(point: BellmanPoint, ctx: QContext) -> CriticalA:
    """Critical parameter a_m = (Q r nu - K zeta) / (Q s zeta - K nu).

    zeta enters through its absolute value and nu = |eta|.  The finite
    case requires numerator and denominator both strictly positive; a
    nonpositive numerator (resp. denominator) with the other term positive
    gives the zero (resp. infinite) case.  Both nonpositive only happens
    at zeta = eta = 0 and is reported as degenerate.
    """
    point.validate(ctx)
    q = ctx.q
    k = float(aux_raw("K", point.r, point.s, q))
    za = abs(point.zeta)
    nu = point.nu
    num = q * point.r * nu - k * za
    den = q * point.s * za - k * nu
    if num > 0 and den > 0:
        return CriticalA.finite(num / den)
    if num > 0:
        return CriticalA.infinite()
    if den > 0:
        return CriticalA.zero()
    raise DegeneratePointError(
        "critical parameter is 0/0 (zeta = eta = 0); resample the point")


def eval_component(component_id: str, point: BellmanPoint, ctx: QContext) -> float:
    """Evaluate a single component B1 .. B43 at a domain point."""
    if component_id not in COMPONENT_IDS:
        raise DomainError(f"unknown component {component_id!r}")
    point.validate(ctx)
    c = components_batch(point.as_array()[None, :], ctx.q)
    return float(c[0, COMPONENT_IDS.index(component_id)])


def eval_bq(point: BellmanPoint, ctx: QContext) -> float:
    """The Bellman function value at a domain point."""
    point.validate(ctx)
    return float(bq_batch(point.as_array()[None, :], ctx.q)[0])


def unweighted_sum(point: BellmanPoint, ctx: QContext) -> float:
    """Plain component sum (diagnostic; satisfies 0 <= . <= 6(Z+H))."""
    point.validate(ctx)
    return float(unweighted_batch(point.as_array()[None, :], ctx.q)[0])


def pi_distance_batch(x: np.ndarray, q: float) -> np.ndarray:
    """Relative distance to the singular set Pi, batched.

    Pi is where K/Q equals |zeta| s / |eta| or |eta| r / |zeta|; these are
    exactly the loci where the critical-parameter split changes branch.
    Points with zeta = 0 or eta = 0 cannot lie on Pi and get +inf.
    """
    x = np.asarray(x, dtype=float)
    _, _, zeta, eta2, r, s = _split_columns(x)
    za = np.abs(zeta)
    nu = np.sqrt(eta2)
    k_over_q = aux_raw("K", r, s, q) / q
    out = np.full(x.shape[0], np.inf)
    ok = (za > 0) & (nu > 0)
    if ok.any():
        r1 = np.abs(k_over_q[ok] - za[ok] * s[ok] / nu[ok]) / k_over_q[ok]
        r2 = np.abs(k_over_q[ok] - nu[ok] * r[ok] / za[ok]) / k_over_q[ok]
        out[ok] = np.minimum(r1, r2)
    return out


def pi_distance(point: BellmanPoint, ctx: QContext) -> float:
    """Relative distance of a point to the singular set Pi (inf if off-axis)."""
    point.validate(ctx)
    return float(pi_distance_batch(point.as_array()[None, :], ctx.q)[0])


def beta_values(x: np.ndarray, q: float, a) -> np.ndarray:
    """The B43 inner objective zeta^2/(r + a K/Q) + eta^2/(s + K/(Q a)).

    ``a`` broadcasts against the batch; used by the independent
    golden-section reference in ``verify``.
    """
    x = np.asarray(x, dtype=float)
    _, _, zeta, eta2, r, s = _split_columns(x)
    k = aux_raw("K", r, s, q)
    a = np.asarray(a, dtype=float)
    return zeta**2 / (r + a * k / q) + eta2 / (s + k / (q * a))
