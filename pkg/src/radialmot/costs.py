"""Pointwise angular cost algebra for three charges on concentric circles.

Three unit charges sit at radii r1, r2, r3 from a common center.  Rotating
the whole configuration is free, so the first charge is pinned to angle 0
and the interaction energy is a function of the two remaining angles,

    f(a, b) = F12(a) + F13(b) + F23(a - b),

where each pairwise term is the inverse chord distance

    Fij(t) = (ri^2 + rj^2 - 2 ri rj cos t)^(-1/2).

This module evaluates f and its derivatives in closed form and exposes the
scalar quantities that organize its stationary structure:

* the alignment polynomial
      P(r) = r2 (r3 - r1)^3 - r1 (r3 + r2)^3 - r3 (r1 + r2)^3,
  whose sign decides whether the collinear configuration (a, b) = (pi, 0)
  is the global minimizer (homogeneous of degree 4 in the radii);
* the threshold radius phi(r1, r2), the unique root in r3 of P, with
  P(r) >= 0 exactly when r3 >= phi(r1, r2);
* the four corner energies f(0,0), f(0,pi), f(pi,0), f(pi,pi), of which
  f(pi,0) is always the smallest for strictly ordered radii;
* the pairwise derivative profile g(t) = -F'(t) together with its critical
  angle, used when bracketing implicit stationary curves.

Angles are canonicalized to [-pi, pi).  All functions accept plain floats;
the array versions used by the grid minimizer live in the private helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRadii, EqualRadii, InvalidRadii, SingularConfiguration

__all__ = [
    "Radii",
    "AngularConfig",
    "CostBreakdown",
    "CornerValues",
    "canonical_angle",
    "torus_distance",
    "pair_distance_sq",
    "full_cost",
    "grad_hess",
    "alignment_condition",
    "phi_threshold",
    "c_pi",
    "c_delta",
    "corner_values",
    "g_profile",
]

_TWO_PI = 2.0 * math.pi

# Equilateral angles used by c_delta: charges at 0, 2pi/3, 4pi/3.
_DELTA_ALPHA = _TWO_PI / 3.0
_DELTA_BETA = 2.0 * _TWO_PI / 3.0


def canonical_angle(t: float) -> float:
    """Wrap an angle to the canonical interval [-pi, pi)."""
    return (t + math.pi) % _TWO_PI - math.pi


def torus_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Max-norm distance between two angle pairs on the flat torus.

    Uses IEEE remainder per coordinate, which is exactly antisymmetric,
    so the distance is exactly symmetric in its arguments."""
    da = abs(math.remainder(a[0] - b[0], _TWO_PI))
    db = abs(math.remainder(a[1] - b[1], _TWO_PI))
    return max(da, db)


@dataclass(frozen=True)
class Radii:
    """An ordered triple of circle radii.

    Validation is weak on purpose: radii must be finite and nonnegative,
    but ties and unordered triples are allowed here because several
    operations (homogeneity and symmetry checks, the grid minimizer)
    are total in that regime.  Operations needing strict order check it
    themselves.
    """

    r1: float
    r2: float
    r3: float

    def __post_init__(self) -> None:
        vals = (self.r1, self.r2, self.r3)
        if not all(isinstance(v, (int, float)) for v in vals):
            raise InvalidRadii(f"radii must be numbers, got {vals!r}")
        if not all(math.isfinite(v) and v >= 0.0 for v in vals):
            raise InvalidRadii(f"radii must be finite and >= 0, got {vals!r}")
        object.__setattr__(self, "r1", float(self.r1))
        object.__setattr__(self, "r2", float(self.r2))
        object.__setattr__(self, "r3", float(self.r3))

    @classmethod
    def of(cls, r: "Radii | tuple[float, float, float]") -> "Radii":
        if isinstance(r, Radii):
            return r
        return cls(*r)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)

    def scaled(self, lam: float) -> "Radii":
        return Radii(lam * self.r1, lam * self.r2, lam * self.r3)

    @property
    def strictly_ordered(self) -> bool:
        return self.r1 < self.r2 < self.r3

    def require_strictly_ordered(self) -> None:
        if not self.strictly_ordered:
            raise DegenerateRadii(
                f"operation requires 0 <= r1 < r2 < r3, got {self.as_tuple()}"
            )


@dataclass(frozen=True)
class AngularConfig:
    """Angle pair (alpha, beta) stored as canonical representatives in [-pi, pi).

    alpha is the angle of the second charge, beta of the third; the first
    charge sits at angle 0.  Construction canonicalizes, so two configs
    describing the same torus point compare equal.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidRadii(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, canonical_angle(float(v)))

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def distance_to(self, other: "AngularConfig | tuple[float, float]") -> float:
        o = other.as_tuple() if isinstance(other, AngularConfig) else other
        return torus_distance(self.as_tuple(), o)


@dataclass(frozen=True)
class CostBreakdown:
    """Pairwise interaction terms and their sum at one configuration."""

    f12: float
    f13: float
    f23: float
    total: float


@dataclass(frozen=True)
class CornerValues:
    """The four corner energies of f on [0, pi]^2 in the order listed."""

    f00: float
    f0pi: float
    fpi0: float
    fpipi: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.f00, self.f0pi, self.fpi0, self.fpipi)

    def minimum(self) -> float:
        return min(self.as_tuple())


def pair_distance_sq(ri: float, rj: float, theta):
    """Squared chord distance ri^2 + rj^2 - 2 ri rj cos(theta).

    Accepts scalar or array angles.  Nonnegative by the law of cosines;
    zero exactly when ri == rj and theta == 0 mod 2pi.
    """
    if ri < 0.0 or rj < 0.0:
        raise InvalidRadii(f"radii must be >= 0, got ({ri}, {rj})")
    d = ri * ri + rj * rj - 2.0 * ri * rj * np.cos(theta)
    # cos rounding can push an exact zero slightly negative
    return np.maximum(d, 0.0)


def _inv_dist(ri: float, rj: float, theta):
    """F(theta) = 1/sqrt(D); +inf on coincidence."""
    d = pair_distance_sq(ri, rj, theta)
    with np.errstate(divide="ignore"):
        return d ** -0.5


def _inv_dist_d1(ri: float, rj: float, theta):
    """F'(theta) = -ri rj sin(theta) / D^(3/2)."""
    d = pair_distance_sq(ri, rj, theta)
    return -ri * rj * np.sin(theta) * d ** -1.5


def _q_poly(ri: float, rj: float, t):
    """Q(t) = ri rj t^2 + (ri^2 + rj^2) t - 3 ri rj, with t = cos(theta)."""
    return ri * rj * t * t + (ri * ri + rj * rj) * t - 3.0 * ri * rj


def _inv_dist_d2(ri: float, rj: float, theta):
    """F''(theta) = -ri rj Q(cos theta) / D^(5/2)."""
    t = np.cos(theta)
    d = pair_distance_sq(ri, rj, theta)
    return -ri * rj * _q_poly(ri, rj, t) * d ** -2.5


def full_cost(r: Radii | tuple, config: AngularConfig | tuple) -> CostBreakdown:
    """Total Coulomb energy and its pairwise breakdown at one configuration.

    Infinite terms are returned as float('inf') rather than raised: a
    coincident pair is a legitimate (infinitely expensive) configuration.
    """
    r = Radii.of(r)
    if not isinstance(config, AngularConfig):
        config = AngularConfig(*config)
    a, b = config.alpha, config.beta
    f12 = float(_inv_dist(r.r1, r.r2, a))
    f13 = float(_inv_dist(r.r1, r.r3, b))
    f23 = float(_inv_dist(r.r2, r.r3, a - b))
    return CostBreakdown(f12, f13, f23, f12 + f13 + f23)


def grad_hess(
    r: Radii | tuple, config: AngularConfig | tuple
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of f at a configuration, both in closed form.

    Returns (grad, hess) with shapes (2,) and (2, 2).  Raises
    :class:`SingularConfiguration` when any pair distance vanishes, since
    the derivatives are unbounded there.
    """
    r = Radii.of(r)
    if not isinstance(config, AngularConfig):
        config = AngularConfig(*config)
    a, b = config.alpha, config.beta
    pairs = (
        (r.r1, r.r2, a),
        (r.r1, r.r3, b),
        (r.r2, r.r3, a - b),
    )
    for ri, rj, t in pairs:
        if pair_distance_sq(ri, rj, t) == 0.0:
            raise SingularConfiguration(
                f"coincident pair at radii ({ri}, {rj}), relative angle {t}"
            )
    d12 = float(_inv_dist_d1(r.r1, r.r2, a))
    d13 = float(_inv_dist_d1(r.r1, r.r3, b))
    d23 = float(_inv_dist_d1(r.r2, r.r3, a - b))
    s12 = float(_inv_dist_d2(r.r1, r.r2, a))
    s13 = float(_inv_dist_d2(r.r1, r.r3, b))
    s23 = float(_inv_dist_d2(r.r2, r.r3, a - b))
    grad = np.array([d12 + d23, d13 - d23])
    hess = np.array([[s12 + s23, -s23], [-s23, s13 + s23]])
    return grad, hess


def alignment_condition(r: Radii | tuple) -> float:
    """Alignment polynomial P(r) = r2 (r3-r1)^3 - r1 (r3+r2)^3 - r3 (r1+r2)^3.

    Nonnegative P certifies that the collinear corner (pi, 0) is the global
    minimizer of f over the torus.  Homogeneous of degree 4.
    """
    r = Radii.of(r)
    r1, r2, r3 = r.as_tuple()
    return r2 * (r3 - r1) ** 3 - r1 * (r3 + r2) ** 3 - r3 * (r1 + r2) ** 3


def phi_threshold(r1: float, r2: float) -> float:
    """Unique r3-root of the alignment polynomial for fixed 0 <= r1 < r2.

    Closed form:

        phi = (5 r1 r2 + r2^2 + (r1 + r2) sqrt(r2^2 + 12 r1 r2 - 4 r1^2))
              / (2 (r2 - r1))

    P(r1, r2, r3) >= 0 exactly when r3 >= phi.  phi(0, r2) = r2, and phi is
    strictly increasing in r1 on [0, r2).
    """
    if not (math.isfinite(r1) and math.isfinite(r2)) or r1 < 0.0 or r2 < 0.0:
        raise InvalidRadii(f"need finite radii >= 0, got ({r1}, {r2})")
    if r1 >= r2:
        raise DegenerateRadii(
            f"phi_threshold needs 0 <= r1 < r2 strictly, got ({r1}, {r2})"
        )
    disc = r2 * r2 + 12.0 * r1 * r2 - 4.0 * r1 * r1
    # disc = r2^2 + 4 r1 (3 r2 - r1) > 0 on the admissible wedge
    return (5.0 * r1 * r2 + r2 * r2 + (r1 + r2) * math.sqrt(disc)) / (
        2.0 * (r2 - r1)
    )


def c_pi(r: Radii | tuple) -> float:
    """Energy of the collinear configuration: charges 2 and 3 opposite charge 1.

    Equals full_cost(r, (pi, 0)).total; written through the chord formula so
    unordered triples are handled without sign slips.  Infinite when r1 == r3.
    """
    r = Radii.of(r)
    a = AngularConfig(math.pi, 0.0)
    return full_cost(r, a).total


def c_delta(r: Radii | tuple) -> float:
    """Energy of the equilateral-angle configuration (0, 2pi/3, 4pi/3).

    Upper bound for the minimal energy; equals sqrt(3)/l for equal radii l.
    Infinite only when all radii vanish.
    """
    r = Radii.of(r)
    return full_cost(r, (_DELTA_ALPHA, _DELTA_BETA)).total


def corner_values(r: Radii | tuple) -> CornerValues:
    """Energies at the four corners of [0, pi]^2.

    For strictly ordered radii the chain f(pi,0) < f(0,pi) < f(0,0) and
    f(pi,0) < f(pi,pi) holds regardless of the alignment condition, so the
    collinear corner is always the cheapest of the four.
    """
    r = Radii.of(r)
    pi = math.pi
    return CornerValues(
        f00=full_cost(r, (0.0, 0.0)).total,
        f0pi=full_cost(r, (0.0, pi)).total,
        fpi0=full_cost(r, (pi, 0.0)).total,
        fpipi=full_cost(r, (pi, pi)).total,
    )


def g_profile(ri: float, rj: float, theta):
    """Pairwise attraction profile g = -F' and its derivative, plus the
    critical angle where g peaks.

    g(t) = ri rj sin(t) / D(t)^(3/2) is positive on (0, pi), increases up to

        cos(theta_crit) = (-(ri^2 + rj^2) + sqrt(ri^4 + 14 ri^2 rj^2 + rj^4))
                          / (2 ri rj)

    and decreases after it.  Requires 0 < ri < rj strictly; equal radii make
    the profile singular at 0 (raises :class:`EqualRadii`).

    Returns (g, g_prime, theta_crit); g and g_prime follow the shape of
    the theta argument.
    """
    if not (math.isfinite(ri) and math.isfinite(rj)) or ri <= 0.0 or rj <= 0.0:
        raise InvalidRadii(f"need finite radii > 0, got ({ri}, {rj})")
    if ri == rj:
        raise EqualRadii(f"g profile needs distinct radii, got ri == rj == {ri}")
    if ri > rj:
        raise DegenerateRadii(f"g profile expects ri < rj, got ({ri}, {rj})")
    g = -_inv_dist_d1(ri, rj, theta)
    gp = -_inv_dist_d2(ri, rj, theta)
    s = ri * ri + rj * rj
    ct = (-s + math.sqrt(ri ** 4 + 14.0 * ri * ri * rj * rj + rj ** 4)) / (
        2.0 * ri * rj
    )
    theta_crit = math.acos(ct)
    if np.isscalar(theta):
        return float(g), float(gp), theta_crit
    return g, gp, theta_crit
