"""Smooth bump profile and the rotation model it drives.

The profile mu is smooth, non-increasing, identically 1 on [0, 2/3] and 0
on [3/4, 1], built from the classical exp(-1/x) transition.  The basic map
rotates each complex coordinate pair of a point by mu(|z|) times a rotation
vector: a full torus rotation on the inner plateau, the identity outside
the guard radius, and a smooth radial interpolation between.

Derivatives of mu come from forward-mode Taylor jets of the closed form,
vectorized over evaluation grids; the certified constants kappa_1 and C_p
are dense-grid maxima with a safety factor.

Branching happens on the radius *before* any arithmetic so plateau points
are exact: integral rotation angles reduce to the identity as Fractions,
and points at or beyond the guard radius are returned bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

Point = np.ndarray
RotationVector = tuple[Fraction, ...]


class ProfileError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Taylor jet arithmetic (coefficient lists, numpy-vectorized)


def _jet_mul(a: list, b: list) -> list:
    n = len(a)
    return [sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n)]


def _jet_recip(a: list) -> list:
    n = len(a)
    r = [1.0 / a[0]]
    for k in range(1, n):
        r.append(-r[0] * sum(a[j] * r[k - j] for j in range(1, k + 1)))
    return r


def _jet_exp(a: list) -> list:
    n = len(a)
    b = [np.exp(a[0])]
    for k in range(1, n):
        b.append(sum(j * a[j] * b[k - j] for j in range(1, k + 1)) / k)
    return b


def _jet_sigma(x: list) -> list:
    """Jet of sigma(x) = exp(-1/x); x[0] must be positive."""
    return _jet_exp([-c for c in _jet_recip(x)])


def _mu_jet(t: np.ndarray, order: int, outer: float, width: float) -> list:
    """Taylor coefficients of mu at transition points t (vectorized)."""
    n = order + 1
    zero = np.zeros_like(t)
    x = [(outer - t) / width, np.full_like(t, -1.0 / width)] + [zero] * (n - 2)
    one_minus_x = [1.0 - x[0], -x[1]] + [zero] * (n - 2)
    num = _jet_sigma(x)
    den = [a + b for a, b in zip(num, _jet_sigma(one_minus_x))]
    return _jet_mul(num, _jet_recip(den))


def _bell_polynomials(b: list, order: int) -> list:
    """Complete Bell polynomials B_0..B_order of b[1..order] (vectorized)."""
    out = [np.ones_like(b[1])]
    for n in range(order):
        acc = np.zeros_like(b[1])
        for i in range(n + 1):
            acc = acc + math.comb(n, i) * out[n - i] * b[i + 1]
        out.append(acc)
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BumpProfile:
    """The transition profile with its certified derivative constants.

    kappa1 bounds |mu'|; cbound(p) bounds the p-th order mixed partials of
    the basic map minus the identity, per unit rotation-vector norm, for
    rotation vectors of norm at most 1.  Both carry the safety factor, so
    they are honest upper bounds for anything a finite-difference probe can
    measure, and cbound is monotone in p.
    """

    inner: Fraction = Fraction(2, 3)
    outer: Fraction = Fraction(3, 4)
    max_order: int = 4
    safety: float = 1.05
    grid_step: float = 1e-5
    kappa1: float = field(init=False)
    _cbounds: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if not 0 < self.inner < self.outer <= 1:
            raise ProfileError("transition band must satisfy 0 < inner < outer <= 1")
        if self.max_order < 1:
            raise ProfileError("max_order must be at least 1")
        lo, hi = float(self.inner), float(self.outer)
        ts = np.arange(lo + self.grid_step, hi, self.grid_step)
        jets = _mu_jet(ts, self.max_order, hi, hi - lo)
        derivs = [math.factorial(p) * jets[p] for p in range(self.max_order + 1)]
        kappa1 = self.safety * float(np.max(np.abs(derivs[1])))
        b = [None] + [2.0 * math.pi * np.abs(derivs[p]) for p in range(1, self.max_order + 1)]
        bell = _bell_polynomials(b, self.max_order)
        cbounds = [1.0 + 2.0 * math.pi * kappa1]
        for p in range(2, self.max_order + 1):
            raw = self.safety * float(np.max(ts * bell[p] + p * bell[p - 1]))
            cbounds.append(max(raw, cbounds[-1]))
        object.__setattr__(self, "kappa1", kappa1)
        object.__setattr__(self, "_cbounds", tuple(cbounds))

    # -- scalar evaluation ---------------------------------------------------

    def value(self, t: float) -> float:
        if t < 0:
            raise ProfileError("profile argument must be non-negative")
        if t <= float(self.inner):
            return 1.0
        if t >= float(self.outer):
            return 0.0
        lo, hi = float(self.inner), float(self.outer)
        return float(_mu_jet(np.float64(t), 0, hi, hi - lo)[0])

    def derivative(self, t: float, p: int) -> float:
        """p-th derivative of the profile; exactly 0 on both plateaus."""
        if p == 0:
            return self.value(t)
        if not 1 <= p <= self.max_order:
            raise ProfileError(f"derivative order {p} beyond supported {self.max_order}")
        if t < 0:
            raise ProfileError("profile argument must be non-negative")
        if t <= float(self.inner) or t >= float(self.outer):
            return 0.0
        lo, hi = float(self.inner), float(self.outer)
        jet = _mu_jet(np.float64(t), p, hi, hi - lo)
        return float(math.factorial(p) * jet[p])

    def cbound(self, p: int) -> float:
        if not 1 <= p <= self.max_order:
            raise ProfileError(f"bound order {p} beyond supported {self.max_order}")
        return self._cbounds[p - 1]

    def params(self) -> dict:
        return {
            "inner": str(self.inner),
            "outer": str(self.outer),
            "max_order": self.max_order,
            "safety": self.safety,
            "grid_step": self.grid_step,
        }

    @staticmethod
    def from_params(doc: dict) -> "BumpProfile":
        return BumpProfile(
            inner=Fraction(doc["inner"]),
            outer=Fraction(doc["outer"]),
            max_order=int(doc["max_order"]),
            safety=float(doc["safety"]),
            grid_step=float(doc["grid_step"]),
        )


def bound_constants(profile: BumpProfile, p: int) -> float:
    """Certified constant for p-th order estimates (kappa1 sits on the profile)."""
    return profile.cbound(p)


# ---------------------------------------------------------------------------
# rotations and the basic map


def as_point(coords: Sequence[float], q: int | None = None) -> Point:
    z = np.asarray(coords, dtype=np.float64)
    if z.ndim != 1 or len(z) < 2:
        raise ProfileError("points need at least two coordinates")
    if q is not None and len(z) != q:
        raise ProfileError(f"expected {q} coordinates, got {len(z)}")
    return z


def torus_rotation(angles: Sequence, z: Point) -> Point:
    """Rotate each complex pair of z by the matching angle (in turns).

    Fraction angles are reduced mod 1 exactly, so integral angles are the
    identity bit for bit.  An odd trailing coordinate is fixed.  Raises if
    more angles than coordinate pairs are supplied.
    """
    m = len(z) // 2
    if len(angles) > m:
        raise ProfileError("more rotation angles than complex pairs")
    out = z.copy()
    for c, a in enumerate(angles):
        if isinstance(a, Fraction):
            a = a - math.floor(a)
            if a == 0:
                continue
            theta = 2.0 * math.pi * float(a)
        else:
            a = float(a) % 1.0
            if a == 0.0:
                continue
            theta = 2.0 * math.pi * a
        co, si = math.cos(theta), math.sin(theta)
        x, y = out[2 * c], out[2 * c + 1]
        out[2 * c] = x * co - y * si
        out[2 * c + 1] = x * si + y * co
    return out


def standard_model(profile: BumpProfile, a: Sequence, z: Point) -> Point:
    """The basic map: rotation by mu(|z|) * a, branched before arithmetic.

    Full rotation (exact angle reduction) on the inner plateau, identity
    at and beyond the guard radius, scaled float rotation in between.
    """
    t = float(np.linalg.norm(z))
    if t >= float(profile.outer):
        return z.copy()
    if t <= float(profile.inner):
        return torus_rotation(a, z)
    mu = profile.value(t)
    return torus_rotation([mu * float(x) for x in a], z)


def standard_model_jacobian(profile: BumpProfile, a: Sequence, z: Point) -> np.ndarray:
    """Exact-form Jacobian of the basic map at z.

    Block rotations R(theta_c) on each pair, plus the radial shear
    (2 pi a_c mu'(t) / t) R'(theta_c) z_c x^T on the transition band.
    At the origin it is the plain rotation matrix; the last row/column of
    an odd ambient stays e_q^T except for the shear column contributions.
    """
    q = len(z)
    m = q // 2
    if len(a) > m:
        raise ProfileError("more rotation angles than complex pairs")
    t = float(np.linalg.norm(z))
    jac = np.eye(q)
    mu = profile.value(t) if t > 0 else 1.0
    thetas = []
    for c in range(m):
        ac = float(a[c]) if c < len(a) else 0.0
        if t >= float(profile.outer):
            theta = 0.0
        elif t <= float(profile.inner) or t == 0.0:
            theta = 2.0 * math.pi * (ac % 1.0)
        else:
            theta = 2.0 * math.pi * ((mu * ac) % 1.0)
        thetas.append(theta)
        co, si = math.cos(theta), math.sin(theta)
        jac[2 * c, 2 * c], jac[2 * c, 2 * c + 1] = co, -si
        jac[2 * c + 1, 2 * c], jac[2 * c + 1, 2 * c + 1] = si, co
    dmu = profile.derivative(t, 1) if t > 0 else 0.0
    if dmu != 0.0:
        for c in range(m):
            ac = float(a[c]) if c < len(a) else 0.0
            if ac == 0.0:
                continue
            theta = thetas[c]
            co, si = math.cos(theta), math.sin(theta)
            x, y = z[2 * c], z[2 * c + 1]
            # R'(theta) z_c = rotation of z_c by theta + pi/2
            rx = -x * si - y * co
            ry = x * co - y * si
            coeff = 2.0 * math.pi * ac * dmu / t
            jac[2 * c, :] += coeff * rx * z
            jac[2 * c + 1, :] += coeff * ry * z
    return jac
