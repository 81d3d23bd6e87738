"""Radial probability densities built from explicit segments.

A density is a finite ordered list of disjoint segments on [0, inf), each
knowing its own mass, pointwise values, partial masses and inner quantiles.
Three segment kinds cover everything the package needs:

* polynomial pieces of low degree (closed-form antiderivatives),
* tabulated pieces interpolated monotonically (shape-preserving cubic),
* a pushforward tail: the image of an earlier piece under an increasing
  map with known derivative, which represents an unbounded smooth tail
  exactly, with forward quantiles and root-found inverse values.

The cumulative distribution is assembled segment by segment, and the
quantile is the lower generalized inverse inf{x : F(x) >= p}, so a mass
sitting exactly at a gap boundary resolves to the left endpoint of the
gap.  Total mass must be 1 within 1e-10 at construction time.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DegenerateTertile, DensityError

__all__ = [
    "PolySegment",
    "TableSegment",
    "PushforwardTailSegment",
    "RadialDensity",
    "Tertiles",
    "uniform_density",
    "block_density",
]

_MASS_TOL = 1e-10
_QUANTILE_XTOL = 1e-14


@dataclass(frozen=True)
class Tertiles:
    """The two mass boundaries splitting a density into thirds."""

    s1: float
    s2: float


def _real_roots_in(coeffs_poly: np.polynomial.Polynomial, lo: float, hi: float):
    if coeffs_poly.degree() < 1:
        return []
    out = []
    for root in np.atleast_1d(coeffs_poly.roots()):
        if abs(complex(root).imag) < 1e-9:
            x = complex(root).real
            if lo <= x <= hi:
                out.append(x)
    return out


class PolySegment:
    """Polynomial density piece on a bounded interval [lo, hi].

    coeffs are ascending power-basis coefficients of the density itself.
    The piece must be nonnegative on its interval; this is verified at the
    endpoints and at all interior critical points of the polynomial.
    """

    kind = "poly"

    def __init__(self, lo: float, hi: float, coeffs: Sequence[float]):
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise DensityError(f"bad interval [{lo}, {hi}] for poly segment")
        if len(coeffs) == 0:
            raise DensityError("poly segment needs at least one coefficient")
        self.lo = float(lo)
        self.hi = float(hi)
        self.coeffs = tuple(float(c) for c in coeffs)
        self._poly = np.polynomial.Polynomial(self.coeffs)
        self._anti = self._poly.integ()
        self._anti_lo = float(self._anti(self.lo))
        self.mass = float(self._anti(self.hi)) - self._anti_lo
        crit = _real_roots_in(self._poly.deriv(), self.lo, self.hi)
        vals = [float(self._poly(x)) for x in [self.lo, self.hi, *crit]]
        low = min(vals)
        if low < -1e-12 * max(1.0, max(abs(v) for v in vals)):
            raise DensityError(
                f"poly segment dips negative on [{self.lo}, {self.hi}] "
                f"(min value {low:.3e})"
            )
        if self.mass <= 0.0:
            raise DensityError("poly segment carries no mass")

    def pdf(self, x: float) -> float:
        return max(float(self._poly(x)), 0.0)

    def mass_below(self, x: float) -> float:
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return self.mass
        return min(max(float(self._anti(x)) - self._anti_lo, 0.0), self.mass)

    def quantile_within(self, m: float) -> float:
        m = min(max(m, 0.0), self.mass)
        if m == 0.0:
            return self.lo
        if m == self.mass:
            return self.hi
        if self._poly.degree() == 0:
            return self.lo + m / self.coeffs[0]
        x = float(
            brentq(
                lambda t: self.mass_below(t) - m,
                self.lo,
                self.hi,
                xtol=_QUANTILE_XTOL,
                rtol=8.9e-16,
            )
        )
        # two Newton polish steps where the density is bounded away from 0
        for _ in range(2):
            d = self.pdf(x)
            if d > 1e-12:
                x = min(max(x - (self.mass_below(x) - m) / d, self.lo), self.hi)
        return x


class TableSegment:
    """Tabulated density piece, interpolated with a shape-preserving cubic.

    The interpolant preserves nonnegativity of the tabulated values, and
    its exact antiderivative supplies partial masses.
    """

    kind = "table"

    def __init__(self, x: Sequence[float], density: Sequence[float]):
        xs = np.asarray(x, dtype=float)
        ds = np.asarray(density, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ds.shape:
            raise DensityError("table segment needs matching 1-d x and density")
        if not np.all(np.diff(xs) > 0):
            raise DensityError("table segment x grid must be strictly increasing")
        if np.any(ds < 0):
            raise DensityError("table segment density values must be >= 0")
        self.lo = float(xs[0])
        self.hi = float(xs[-1])
        self.x = xs
        self.density = ds
        self._interp = PchipInterpolator(xs, ds, extrapolate=False)
        self._anti = self._interp.antiderivative()
        self.mass = float(self._anti(self.hi) - self._anti(self.lo))
        if self.mass <= 0.0:
            raise DensityError("table segment carries no mass")

    def pdf(self, x: float) -> float:
        if x < self.lo or x > self.hi:
            return 0.0
        return max(float(self._interp(x)), 0.0)

    def mass_below(self, x: float) -> float:
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return self.mass
        return min(max(float(self._anti(x) - self._anti(self.lo)), 0.0), self.mass)

    def quantile_within(self, m: float) -> float:
        m = min(max(m, 0.0), self.mass)
        if m == 0.0:
            return self.lo
        if m == self.mass:
            return self.hi
        return float(
            brentq(
                lambda t: self.mass_below(t) - m,
                self.lo,
                self.hi,
                xtol=_QUANTILE_XTOL,
                rtol=8.9e-16,
            )
        )


class PushforwardTailSegment:
    """Unbounded tail equal to the image of a source piece under an
    increasing map.

    forward maps the source variable x in [0, x_hi) to the tail variable
    y in [lo, inf), strictly increasing with forward(x) -> inf as
    x -> x_hi.  source_mass_below and source_quantile describe the source
    mass being pushed (total source_mass).  Tail values follow from the
    change of variables pdf(y) = source_pdf(x) / forward'(x) at
    x = forward^{-1}(y); quantiles are forward images of source quantiles,
    which keeps them exact.
    """

    kind = "pushforward-tail"

    def __init__(
        self,
        *,
        lo: float,
        source_mass: float,
        x_hi: float,
        forward: Callable[[float], float],
        forward_prime: Callable[[float], float],
        source_pdf: Callable[[float], float],
        source_mass_below: Callable[[float], float],
        source_quantile: Callable[[float], float],
    ):
        self.lo = float(lo)
        self.hi = math.inf
        self.mass = float(source_mass)
        self._x_hi = float(x_hi)
        self._forward = forward
        self._forward_prime = forward_prime
        self._source_pdf = source_pdf
        self._source_mass_below = source_mass_below
        self._source_quantile = source_quantile
        if self.mass <= 0.0:
            raise DensityError("tail segment carries no mass")

    def inverse(self, y: float) -> float:
        """Source point mapping to tail point y; bracketed bisection plus
        Brent refinement against the increasing forward map."""
        if y <= self.lo:
            return 0.0
        lo_x, hi_x = 0.0, self._x_hi
        width = self._x_hi / 2.0
        # walk the bracket toward the blow-up end until forward exceeds y
        for _ in range(200):
            cand = self._x_hi - width
            f = self._forward(cand)
            if f >= y:
                hi_x = cand
                break
            lo_x = cand
            width /= 2.0
        else:
            raise DensityError(f"tail inverse failed to bracket y={y!r}")
        return float(
            brentq(
                lambda t: self._forward(t) - y,
                lo_x,
                hi_x,
                xtol=_QUANTILE_XTOL,
                rtol=8.9e-16,
            )
        )

    def pdf(self, y: float) -> float:
        if y < self.lo:
            return 0.0
        x = self.inverse(y)
        dp = self._forward_prime(x)
        if dp <= 0.0:
            raise DensityError("pushforward map is not increasing at the probe")
        return self._source_pdf(x) / dp

    def mass_below(self, y: float) -> float:
        if y <= self.lo:
            return 0.0
        return min(max(self._source_mass_below(self.inverse(y)), 0.0), self.mass)

    def quantile_within(self, m: float) -> float:
        m = min(max(m, 0.0), self.mass)
        if m == 0.0:
            return self.lo
        if m == self.mass:
            return math.inf
        return float(self._forward(self._source_quantile(m)))


class RadialDensity:
    """Probability density on [0, inf) given by ordered disjoint segments.

    Gaps between segments are allowed (zero density there).  Total mass
    must be 1 within 1e-10; only the last segment may be unbounded.
    """

    def __init__(self, segments: Sequence):
        segs = sorted(segments, key=lambda s: s.lo)
        if not segs:
            raise DensityError("density needs at least one segment")
        if segs[0].lo < 0.0:
            raise DensityError("radial density lives on [0, inf)")
        for a, b in zip(segs, segs[1:]):
            if not math.isfinite(a.hi):
                raise DensityError("only the last segment may be unbounded")
            if b.lo < a.hi - 1e-12:
                raise DensityError(
                    f"segments overlap near [{b.lo}, {a.hi}]"
                )
        total = sum(s.mass for s in segs)
        if abs(total - 1.0) > _MASS_TOL:
            raise DensityError(
                f"segment masses sum to {total!r}, expected 1 within {_MASS_TOL}"
            )
        self.segments = tuple(segs)
        cum = np.concatenate([[0.0], np.cumsum([s.mass for s in segs])])
        cum[-1] = 1.0
        self._cum = cum
        self._los = [s.lo for s in segs]

    @property
    def support_lo(self) -> float:
        return self.segments[0].lo

    @property
    def support_hi(self) -> float:
        return self.segments[-1].hi

    def pdf(self, x: float) -> float:
        x = float(x)
        if x < self.support_lo:
            return 0.0
        i = bisect_right(self._los, x) - 1
        if i < 0:
            return 0.0
        seg = self.segments[i]
        if x > seg.hi:
            return 0.0
        return seg.pdf(x)

    def cdf(self, x: float) -> float:
        x = float(x)
        if x <= self.support_lo:
            return 0.0
        i = bisect_right(self._los, x) - 1
        seg = self.segments[i]
        return min(float(self._cum[i]) + seg.mass_below(x), 1.0)

    def quantile(self, p: float) -> float:
        """Lower quantile inf{x : F(x) >= p}; p=0 gives the support's left
        endpoint, p=1 its essential supremum (inf for unbounded tails)."""
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise DensityError(f"quantile needs p in [0, 1], got {p!r}")
        if p == 0.0:
            return self.support_lo
        if p == 1.0:
            return self.support_hi
        i = int(np.searchsorted(self._cum[1:], p, side="left"))
        i = min(i, len(self.segments) - 1)
        seg = self.segments[i]
        return seg.quantile_within(p - float(self._cum[i]))

    def tertiles(self) -> Tertiles:
        s1 = self.quantile(1.0 / 3.0)
        s2 = self.quantile(2.0 / 3.0)
        if not s1 < s2:
            raise DegenerateTertile(
                f"tertile boundaries collapse: s1={s1!r}, s2={s2!r}"
            )
        return Tertiles(s1=s1, s2=s2)

    def total_mass(self, quadrature: bool = False) -> float:
        """Sum of segment masses; with quadrature=True, an independent
        adaptive-quadrature evaluation of the density instead."""
        if not quadrature:
            return float(self._cum[-1])
        from scipy.integrate import quad

        total = 0.0
        for seg in self.segments:
            hi = seg.hi
            if math.isinf(hi):
                # integrate the tail in its source variable: exact mass
                # there is the source mass; quadrature goes over a long
                # but finite window plus the analytic remainder
                far = seg.quantile_within(seg.mass * (1.0 - 1e-9))
                val, _ = quad(seg.pdf, seg.lo, far, limit=200)
                total += val + seg.mass * 1e-9
            else:
                val, _ = quad(seg.pdf, seg.lo, hi, limit=200)
                total += val
        return total


def uniform_density(lo: float = 0.0, hi: float = 1.0) -> RadialDensity:
    """Uniform density on [lo, hi]."""
    return RadialDensity([PolySegment(lo, hi, [1.0 / (hi - lo)])])


def block_density(blocks: Sequence[tuple[float, float]]) -> RadialDensity:
    """Equal-mass constant blocks, e.g. thirds on [0,1], [2,3], [15,16]."""
    if not blocks:
        raise DensityError("need at least one block")
    w = 1.0 / len(blocks)
    segs = [PolySegment(lo, hi, [w / (hi - lo)]) for lo, hi in blocks]
    return RadialDensity(segs)
