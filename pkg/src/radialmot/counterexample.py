"""Construction of densities whose optimal coupling is no tertile branch map.

The recipe needs two ingredients on the bounded part of the support:

* a first piece rho1 on [0, s1] and a second piece rho2 on [s1, s2], each
  of mass 1/3, smooth and strictly positive, with the tertile ratio gate
  s1/s2 > (1 + 2 sqrt(3))/5 and the boundary ratio gate
  rho(0)/rho(s2) > 7/2;

* an unbounded third piece defined as the pushforward of rho1 under

      psi(x) = phi(x, T(x)) + h(x),

  where T is the decreasing mass-preserving map from the first tertile
  onto the second, phi is the threshold radius of the alignment
  condition, and h >= 0 is a bump whose jet at 0 is chosen so the full
  density matches rho2 at s2 to order C^k.  The jets come from the
  mass-preservation differential equation rho(psi(x)) psi'(x) = rho1(x)
  expanded as a truncated power series; the first bump derivative always
  works out to h'(0) = 2 rho(0)/rho(s2) - 7, which is why the boundary
  gate is 7/2.

Because psi dominates phi along the graph, every orbit (x, T x, T^2 x) of
the decreasing-decreasing-increasing branch map satisfies the alignment
condition, so the map's cost is fully collinear; yet window pairs found
here violate pairwise monotonicity, and analogous shrinking-region
arguments refute the other three tertile patterns as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy

from .costs import Radii, alignment_condition, c_pi, phi_threshold
from .density import PolySegment, PushforwardTailSegment, RadialDensity
from .errors import (
    CertificationError,
    DensityError,
    EpsMInfeasible,
    GateFailed,
    JetNotPositive,
    RegionEmpty,
    ViolationNotFound,
)
from .maps import SeidlMap, build_map
from .minimize import MinimizeOptions, radial_cost
from .mot import MongeTriple, _apply_swap

__all__ = [
    "RATIO_THRESHOLD",
    "BOUNDARY_RATIO_THRESHOLD",
    "EpsM",
    "TailSpec",
    "GraphConditionReport",
    "ViolationCertificate",
    "CounterexampleDensity",
    "ratio_gate",
    "boundary_ratio_gate",
    "limit_margin",
    "find_eps_M",
    "check_graph_condition",
    "example_piece_specs",
    "build_counterexample_density",
    "example_counterexample_density",
    "find_violation",
    "refute_class_T",
]

RATIO_THRESHOLD = (1.0 + 2.0 * math.sqrt(3.0)) / 5.0
BOUNDARY_RATIO_THRESHOLD = 3.5
_GUARD = 1e-12


def ratio_gate(s1: float, s2: float) -> bool:
    """Strict tertile ratio gate s1/s2 > (1 + 2 sqrt(3))/5.

    Evaluated with a relative guard band of 1e-12, so a ratio at the
    threshold up to floating noise counts as failing the strict
    inequality.
    """
    if not 0.0 < s1 < s2:
        raise GateFailed(f"need 0 < s1 < s2, got ({s1}, {s2})")
    return s1 / s2 > RATIO_THRESHOLD + _GUARD


def boundary_ratio_gate(ratio: float) -> bool:
    """Strict boundary density ratio gate rho(0)/rho(s2) > 7/2, with the
    same guard band convention as the tertile gate."""
    if not (math.isfinite(ratio) and ratio > 0.0):
        raise GateFailed(f"boundary ratio must be finite and positive, got {ratio!r}")
    return ratio > BOUNDARY_RATIO_THRESHOLD + _GUARD


def limit_margin(s1: float, s2: float) -> float:
    """Margin of the window inequality in the limit eps -> 0, M -> inf:

        2/s2 + 1/(2 s2) + 1/(2 s1) - sqrt(3)/s1 - 1/s1

    Positive exactly when the tertile ratio gate passes.
    """
    return (
        2.0 / s2
        + 1.0 / (2.0 * s2)
        + 1.0 / (2.0 * s1)
        - math.sqrt(3.0) / s1
        - 1.0 / s1
    )


def _window_margin(s1: float, s2: float, eps: float) -> float:
    """Margin of the finite-window inequality before the far-mass term."""
    return (
        2.0 / (s2 + eps)
        + 1.0 / (2.0 * s2 + eps)
        + 1.0 / (2.0 * s1 + eps)
        - math.sqrt(3.0) / (s1 - eps)
        - 1.0 / s1
    )


@dataclass(frozen=True)
class EpsM:
    """Window parameters certifying a pairwise swap advantage.

    Orbits entering the windows (0, eps) x (s2-eps, s2) x (s2, s2+eps)
    and (s1-eps, s1) x (s1, s1+eps) x (M, inf) admit a first-coordinate
    swap that strictly lowers the total cost, with slack at least
    margin/2.
    """

    eps: float
    M: float
    margin: float
    limit: float


def find_eps_M(s1: float, s2: float, max_halvings: int = 200) -> EpsM:
    """Window parameters for the swap argument, or EpsMInfeasible.

    Bisects eps downward from (s2 - s1)/2 until the finite-window
    inequality holds with positive margin delta, then takes
    M = eps + 2/delta so the far-mass correction consumes half the
    margin.
    """
    if not ratio_gate(s1, s2):
        raise EpsMInfeasible(
            f"tertile ratio {s1 / s2:.6f} does not exceed the threshold "
            f"{RATIO_THRESHOLD:.6f}; limit margin {limit_margin(s1, s2):.6f}"
        )
    eps = (s2 - s1) / 2.0
    for _ in range(max_halvings):
        delta = _window_margin(s1, s2, eps)
        if delta > 0.0:
            break
        eps /= 2.0
    else:
        raise EpsMInfeasible(
            f"no eps found below {(s2 - s1) / 2.0} with positive window margin"
        )
    m_far = eps + 2.0 / delta
    full = _window_margin(s1, s2, eps) - 1.0 / (m_far - eps)
    if full <= 0.0:
        raise EpsMInfeasible("window margin lost to the far-mass term")
    return EpsM(eps=eps, M=m_far, margin=delta, limit=limit_margin(s1, s2))


@dataclass(frozen=True)
class GraphConditionReport:
    """Worst alignment margin along a branch-map graph."""

    worst_margin: float
    worst_x: float
    n_samples: int

    @property
    def holds(self) -> bool:
        return self.worst_margin >= -1e-9


def check_graph_condition(rho: RadialDensity, n: int = 64) -> GraphConditionReport:
    """Minimum of the alignment polynomial over n first-tertile orbits of
    the decreasing-decreasing-increasing branch map.

    Samples the closed mass range [0, 1/3] including both endpoints, and
    evaluates the orbit in mass coordinates (m, 2/3 - m, 2/3 + m), which
    is the branch-map orbit continued to the tertile boundary; endpoint
    orbits with an infinite third radius are skipped.  Sampling the
    closed range keeps the reported minimum stable under refinement,
    because boundary minima (the uniform density's, for instance) are
    hit exactly at every n.

    Nonnegative margin means the map's support satisfies the alignment
    condition at probe resolution, so its cost is entirely collinear.
    """
    if n < 2:
        raise ValueError("need at least 2 probes")
    rho.tertiles()  # validates the map is constructible
    worst = math.inf
    worst_x = math.nan
    skipped = 0
    for j in range(n):
        m = (1.0 / 3.0) * j / (n - 1)
        orbit = (
            rho.quantile(m),
            rho.quantile(2.0 / 3.0 - m),
            rho.quantile(2.0 / 3.0 + m),
        )
        if not all(math.isfinite(v) for v in orbit):
            skipped += 1
            continue
        p = alignment_condition(orbit)
        if p < worst:
            worst, worst_x = p, orbit[0]
    return GraphConditionReport(
        worst_margin=worst, worst_x=worst_x, n_samples=n - skipped
    )


# ---------------------------------------------------------------------------
# truncated power series solver for the mass-preservation equation


def _series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    for i in range(min(len(a), order + 1)):
        if a[i] == 0.0:
            continue
        top = min(len(b), order + 1 - i)
        out[i : i + top] += a[i] * b[:top]
    return out


def _series_compose(outer: np.ndarray, inner: np.ndarray, order: int) -> np.ndarray:
    """outer(inner(x)) truncated; inner must have zero constant term."""
    out = np.zeros(order + 1)
    out[0] = outer[0]
    power = np.zeros(order + 1)
    power[0] = 1.0
    for j in range(1, len(outer)):
        power = _series_mul(power, inner, order)
        if not np.any(power):
            break
        out += outer[j] * power
    return out


def _solve_branch_series(
    rho1_jets: np.ndarray, rho2_jets: np.ndarray, s2: float, order: int, sign: float
) -> np.ndarray:
    """Taylor coefficients of the map W with W(0) = s2 solving

        rho2(W(x)) * (sign * W'(x)) = rho1(x)

    through x^(order-1), where the jets are Taylor coefficients of rho1
    at 0 and of rho2 at s2.  sign=-1 gives the decreasing first-tertile
    branch, sign=+1 the increasing tail map before the bump.
    """
    if rho2_jets[0] <= 0.0:
        raise DensityError("rho2 must be positive at s2 to solve the branch series")
    w = np.zeros(order + 1)
    w[0] = s2
    for n in range(order):
        inner = w.copy()
        inner[0] = 0.0
        comp = _series_compose(rho2_jets, inner, n)
        wp = np.array([(m + 1) * w[m + 1] for m in range(n + 1)])
        prod = float(
            sum(comp[m] * sign * wp[n - m] for m in range(n + 1))
        )
        target = rho1_jets[n] if n < len(rho1_jets) else 0.0
        w[n + 1] = (target - prod) / (sign * (n + 1) * rho2_jets[0])
    return w


def _poly_taylor(coeffs: Sequence[float], x0: float, order: int) -> np.ndarray:
    p = np.polynomial.Polynomial(list(coeffs))
    out = [float(p(x0))]
    for j in range(1, order + 1):
        p = p.deriv()
        out.append(float(p(x0)) / math.factorial(j))
    return np.array(out)


def _phi_graph_derivs(t_coeffs: np.ndarray, order: int) -> list[float]:
    """Derivatives of phi(x, T(x)) at x = 0, with T given by its Taylor
    polynomial; symbolic differentiation keeps high-order terms exact."""
    x = sympy.Symbol("x")
    b = sum(sympy.Float(float(c), 30) * x**m for m, c in enumerate(t_coeffs))
    disc = b**2 + 12 * x * b - 4 * x**2
    expr = (5 * x * b + b**2 + (x + b) * sympy.sqrt(disc)) / (2 * (b - x))
    out = []
    for j in range(order + 1):
        if j > 0:
            expr = sympy.diff(expr, x)
        out.append(float(expr.subs(x, 0).evalf(30)))
    return out


def _phi_partials(a: float, b: float) -> tuple[float, float, float]:
    """phi(a, b) and its two first partial derivatives, closed form."""
    disc = b * b + 12.0 * a * b - 4.0 * a * a
    root = math.sqrt(disc)
    num = 5.0 * a * b + b * b + (a + b) * root
    gap = b - a
    val = num / (2.0 * gap)
    da_num = 5.0 * b + root + (a + b) * (12.0 * b - 8.0 * a) / (2.0 * root)
    db_num = 5.0 * a + 2.0 * b + root + (a + b) * (2.0 * b + 12.0 * a) / (2.0 * root)
    da = (da_num * gap + num) / (2.0 * gap * gap)
    db = (db_num * gap - num) / (2.0 * gap * gap)
    return val, da, db


# ---------------------------------------------------------------------------
# bump profile


def _bump_base(t: float) -> float:
    return math.exp(-1.0 / t) if t > 0.0 else 0.0


def _smoothstep(t: float) -> float:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = _bump_base(t)
    b = _bump_base(1.0 - t)
    return a / (a + b)


def _smoothstep_d1(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    a = _bump_base(t)
    b = _bump_base(1.0 - t)
    da = a / (t * t)
    db = b / ((1.0 - t) * (1.0 - t))
    return (da * b + a * db) / ((a + b) * (a + b))


class _HProfile:
    """Smooth bump realizing a finite jet at 0 and a plateau beyond delta.

    Equal to its Taylor polynomial p on [0, delta/2], constant p(delta/2)
    beyond delta, and a smooth convex blend of the two in between, which
    keeps the profile strictly positive on (0, s1] whenever p is positive
    up to delta/2.
    """

    def __init__(self, derivs: Sequence[float], delta: float):
        coeffs = [d / math.factorial(j) for j, d in enumerate(derivs)]
        self.poly = np.polynomial.Polynomial(coeffs)
        self.dpoly = self.poly.deriv()
        self.delta = float(delta)
        self.plateau = float(self.poly(self.delta / 2.0))

    def __call__(self, x: float) -> float:
        if x <= self.delta / 2.0:
            return float(self.poly(x))
        if x >= self.delta:
            return self.plateau
        u = (x - self.delta / 2.0) / (self.delta / 2.0)
        s = _smoothstep(u)
        return self.plateau + (float(self.poly(x)) - self.plateau) * (1.0 - s)

    def prime(self, x: float) -> float:
        if x <= self.delta / 2.0:
            return float(self.dpoly(x))
        if x >= self.delta:
            return 0.0
        u = (x - self.delta / 2.0) / (self.delta / 2.0)
        s = _smoothstep(u)
        ds = _smoothstep_d1(u) * 2.0 / self.delta
        return float(self.dpoly(x)) * (1.0 - s) - (
            float(self.poly(x)) - self.plateau
        ) * ds


def _choose_delta(derivs: Sequence[float], s1: float, max_halvings: int = 60) -> float:
    """Largest delta = s1/2^j whose Taylor polynomial stays positive on
    (0, delta]; the jet has h(0) = 0 and h'(0) > 0 so this terminates."""
    poly = np.polynomial.Polynomial([d / math.factorial(j) for j, d in enumerate(derivs)])
    delta = s1 / 2.0
    for _ in range(max_halvings):
        roots = [
            complex(z).real
            for z in np.atleast_1d(poly.roots())
            if abs(complex(z).imag) < 1e-10 and 1e-300 < complex(z).real <= delta
        ]
        if not roots and poly(delta) > 0.0 and poly(delta / 2.0) > 0.0:
            return delta
        delta /= 2.0
    raise JetNotPositive(
        f"bump jet {tuple(derivs)} admits no positive profile on (0, {s1}]"
    )


# ---------------------------------------------------------------------------
# builder


class _SegmentStack:
    """Partial cdf/quantile over an ordered list of bounded segments."""

    def __init__(self, segments: Sequence):
        self.segments = list(segments)
        self.cum = np.concatenate(
            [[0.0], np.cumsum([s.mass for s in self.segments])]
        )
        self.total = float(self.cum[-1])

    def mass_below(self, x: float) -> float:
        total = 0.0
        for i, seg in enumerate(self.segments):
            if x <= seg.lo:
                break
            total = float(self.cum[i]) + seg.mass_below(x)
        return total

    def pdf(self, x: float) -> float:
        for seg in self.segments:
            if seg.lo <= x <= seg.hi:
                return seg.pdf(x)
        return 0.0

    def quantile(self, m: float) -> float:
        m = min(max(m, 0.0), self.total)
        i = int(np.searchsorted(self.cum[1:], m, side="left"))
        i = min(i, len(self.segments) - 1)
        return self.segments[i].quantile_within(m - float(self.cum[i]))


@dataclass(frozen=True)
class TailSpec:
    """Record of the pushforward tail construction.

    h_taylor holds the bump derivatives (h(0), h'(0), ..., h^(k+1)(0)):
    matching the density to order C^k at s2 pins the tail map's jet to
    order k+1, one past the density order.  h_form is the realized
    positive profile (callable, with .prime), phi_on_graph the map
    x -> phi(x, T(x)); delta is the plateau onset and plateau the
    constant value beyond it.
    """

    order: int
    h_taylor: tuple[float, ...]
    h_form: Callable[[float], float]
    phi_on_graph: Callable[[float], float]
    delta: float
    plateau: float
    psi_taylor: tuple[float, ...]
    t_taylor: tuple[float, ...]


class CounterexampleDensity(RadialDensity):
    """A constructed density together with its tail ingredients.

    Behaves exactly like a RadialDensity; additionally exposes the tail
    spec, the graph map pieces and the bump, for diagnostics and
    serialization.
    """

    def __init__(
        self,
        segments,
        *,
        tail_spec: TailSpec,
        s1: float,
        s2: float,
        boundary_ratio: float,
        psi: Callable[[float], float],
        psi_prime: Callable[[float], float],
        t_map: Callable[[float], float],
        h: Callable[[float], float],
        rho1_coeffs: tuple[tuple[float, float, tuple[float, ...]], ...],
        rho2_coeffs: tuple[tuple[float, float, tuple[float, ...]], ...],
    ):
        super().__init__(segments)
        self.tail_spec = tail_spec
        self.s1 = s1
        self.s2 = s2
        self.boundary_ratio = boundary_ratio
        self.psi = psi
        self.psi_prime = psi_prime
        self.t_map = t_map
        self.h = h
        self.rho1_coeffs = rho1_coeffs
        self.rho2_coeffs = rho2_coeffs


def _as_poly_segments(spec, what: str) -> list[PolySegment]:
    segs = []
    for item in spec:
        if isinstance(item, PolySegment):
            segs.append(item)
        else:
            lo, hi, coeffs = item
            segs.append(PolySegment(lo, hi, coeffs))
    segs.sort(key=lambda s: s.lo)
    for a, b in zip(segs, segs[1:]):
        if abs(a.hi - b.lo) > 1e-12:
            raise DensityError(f"{what} pieces must be contiguous, gap at {a.hi}")
    if not segs:
        raise DensityError(f"{what} needs at least one piece")
    return segs


def _strict_positive_min(segs: Sequence[PolySegment]) -> float:
    worst = math.inf
    for seg in segs:
        poly = np.polynomial.Polynomial(seg.coeffs)
        cand = [seg.lo, seg.hi]
        der = poly.deriv()
        if der.degree() >= 0:
            for z in np.atleast_1d(der.roots()):
                zc = complex(z)
                if abs(zc.imag) < 1e-10 and seg.lo <= zc.real <= seg.hi:
                    cand.append(zc.real)
        worst = min(worst, min(float(poly(c)) for c in cand))
    return worst


def build_counterexample_density(
    rho1_spec, rho2_spec, k: int = 1
) -> CounterexampleDensity:
    """Assemble a full density from bounded pieces plus the matched tail.

    rho1_spec and rho2_spec are sequences of polynomial pieces (instances
    of PolySegment, or (lo, hi, coeffs) tuples) covering [0, s1] and
    [s1, s2] contiguously with mass 1/3 each, strictly positive.  k is
    the smoothness order to enforce for the density at s2.

    Gate failures raise GateFailed; a bump jet that cannot stay positive
    raises JetNotPositive; a non-monotone pushforward raises
    DensityError.  The continuity rho3(s2+) = rho2(s2) is automatic from
    psi'(0) = rho(0)/rho(s2).
    """
    if not 0 <= k <= 4:
        raise ValueError("smoothness order k must be between 0 and 4")
    rho1 = _as_poly_segments(rho1_spec, "rho1")
    rho2 = _as_poly_segments(rho2_spec, "rho2")
    if abs(rho1[0].lo) > 1e-12:
        raise DensityError("rho1 must start at 0")
    s1 = rho1[-1].hi
    if abs(rho2[0].lo - s1) > 1e-12:
        raise DensityError("rho2 must start where rho1 ends")
    s2 = rho2[-1].hi
    m1 = sum(s.mass for s in rho1)
    m2 = sum(s.mass for s in rho2)
    if abs(m1 - 1.0 / 3.0) > 1e-10 or abs(m2 - 1.0 / 3.0) > 1e-10:
        raise DensityError(
            f"piece masses must each be 1/3, got {m1!r} and {m2!r}"
        )
    if _strict_positive_min(rho1) <= 0.0 or _strict_positive_min(rho2) <= 0.0:
        raise DensityError("pieces must be strictly positive on their intervals")

    if not ratio_gate(s1, s2):
        raise GateFailed(
            f"tertile ratio {s1 / s2:.6f} fails the threshold {RATIO_THRESHOLD:.6f}"
        )
    rho0 = rho1[0].pdf(0.0)
    rho_s2 = rho2[-1].pdf(s2)
    ratio = rho0 / rho_s2
    if not boundary_ratio_gate(ratio):
        raise GateFailed(
            f"boundary ratio {ratio:.6f} fails the threshold 7/2; the bump "
            "slope 2*ratio - 7 must be positive"
        )

    order = k + 1
    rho1_jets = _poly_taylor(rho1[0].coeffs, 0.0, order)
    rho2_jets = _poly_taylor(rho2[-1].coeffs, s2, order)
    t_series = _solve_branch_series(rho1_jets, rho2_jets, s2, order, sign=-1.0)
    psi_series = _solve_branch_series(rho1_jets, rho2_jets, s2, order, sign=+1.0)
    phi_derivs = _phi_graph_derivs(t_series, order)
    psi_derivs = [s2] + [
        psi_series[j] * math.factorial(j) for j in range(1, order + 1)
    ]
    h_derivs = [0.0] + [
        psi_derivs[j] - phi_derivs[j] for j in range(1, order + 1)
    ]
    expected_h1 = 2.0 * ratio - 7.0
    if abs(h_derivs[1] - expected_h1) > 1e-8 * max(1.0, abs(expected_h1)):
        raise CertificationError(
            f"bump slope {h_derivs[1]!r} disagrees with the closed form "
            f"{expected_h1!r}; jet solver inconsistency"
        )

    stack12 = _SegmentStack([*rho1, *rho2])
    stack1 = _SegmentStack(rho1)
    stack2 = _SegmentStack(rho2)

    def t_map(x: float) -> float:
        return stack12.quantile(2.0 / 3.0 - stack12.mass_below(x))

    def t_map_prime(x: float) -> float:
        return -stack1.pdf(x) / stack2.pdf(t_map(x))

    probes = np.unique(
        np.concatenate(
            [
                np.linspace(1e-6 * s1, s1 * (1.0 - 1e-6), 401),
                s1 * (1.0 - np.geomspace(1e-9, 0.5, 40)),
                s1 * np.geomspace(1e-9, 0.5, 40),
            ]
        )
    )

    def graph_prime(x: float) -> float:
        b = t_map(x)
        _, da, db = _phi_partials(x, b)
        return da + db * t_map_prime(x)

    # shrinking delta both restores positivity of the jet polynomial and
    # tames the blend slope, so one halving loop covers monotonicity too;
    # the blend seam [delta/2, delta] moves with delta, so it gets its own
    # dense probes every iteration (the global grid can straddle it)
    delta = _choose_delta(h_derivs, s1)
    h_profile = _HProfile(h_derivs, delta)
    worst = -math.inf
    for _ in range(60):
        seam = np.linspace(delta / 8.0, min(2.0 * delta, s1 * (1.0 - 1e-6)), 241)
        dpsi = np.array(
            [
                graph_prime(float(x)) + h_profile.prime(float(x))
                for x in np.concatenate([probes, seam])
            ]
        )
        worst = float(np.min(dpsi))
        if worst > 0.0:
            break
        delta /= 2.0
        h_profile = _HProfile(h_derivs, delta)
    else:
        all_probes = np.concatenate([probes, seam])
        bad = float(all_probes[int(np.argmin(dpsi))])
        raise DensityError(
            f"pushforward map fails to increase near x={bad:.6g} "
            f"(psi'={worst:.3e}); adjust the pieces or the bump"
        )

    def phi_on_graph(x: float) -> float:
        if x <= 0.0:
            return s2
        return _phi_partials(x, t_map(x))[0]

    def psi(x: float) -> float:
        return phi_on_graph(x) + h_profile(x)

    def psi_prime(x: float) -> float:
        return graph_prime(x) + h_profile.prime(x)

    tail = PushforwardTailSegment(
        lo=s2,
        source_mass=1.0 / 3.0,
        x_hi=s1,
        forward=psi,
        forward_prime=psi_prime,
        source_pdf=stack1.pdf,
        source_mass_below=stack1.mass_below,
        source_quantile=stack1.quantile,
    )
    spec = TailSpec(
        order=k,
        h_taylor=tuple(float(v) for v in h_derivs),
        h_form=h_profile,
        phi_on_graph=phi_on_graph,
        delta=delta,
        plateau=h_profile.plateau,
        psi_taylor=tuple(float(v) for v in psi_series),
        t_taylor=tuple(float(v) for v in t_series),
    )
    return CounterexampleDensity(
        [*rho1, *rho2, tail],
        tail_spec=spec,
        s1=s1,
        s2=s2,
        boundary_ratio=ratio,
        psi=psi,
        psi_prime=psi_prime,
        t_map=t_map,
        h=h_profile,
        rho1_coeffs=tuple((s.lo, s.hi, s.coeffs) for s in rho1),
        rho2_coeffs=tuple((s.lo, s.hi, s.coeffs) for s in rho2),
    )


def example_piece_specs(
    s1: float = 0.9, s2: float = 1.0, ratio: float = 4.0
) -> tuple[list[tuple], list[tuple]]:
    """Built-in bounded pieces meeting both gates.

    rho2 is linear on [s1, s2] ending at value 1 (so the boundary ratio
    is rho(0) directly); rho1 is a steep cubic from ratio down to a small
    plateau value, joined C^1 to a constant stretch.  The two pieces are
    deliberately not continuous at s1; nothing in the construction needs
    that, only positivity, the masses, and the two gates.
    """
    w = s2 - s1
    c = 1.0
    d = 2.0 * (c * w - 1.0 / 3.0) / (w * w)
    rho2 = [(s1, s2, _shifted_linear(c, d, s2))]
    if c - d * w <= 0.0 or c <= 0.0:
        raise DensityError("rho2 example parameters lost positivity")

    a0 = ratio * c
    w1 = min(s1 / 4.0, 1.0 / a0)
    t = (1.0 / 3.0 - a0 * w1 / 4.0) / (s1 - 0.25 * w1)
    if t <= 0.0:
        raise DensityError("rho1 example parameters lost positivity")
    cubic = _plateau_cubic(a0, t, w1)
    rho1 = [(0.0, w1, cubic), (w1, s1, (t,))]
    return rho1, rho2


def _shifted_linear(c: float, d: float, x0: float) -> tuple[float, float]:
    """Coefficients of c + d (x - x0) in the power basis."""
    return (c - d * x0, d)


def _plateau_cubic(a0: float, t: float, w1: float) -> tuple[float, ...]:
    """Coefficients of t + (a0 - t) (1 - x/w1)^3."""
    s = a0 - t
    return (
        t + s,
        -3.0 * s / w1,
        3.0 * s / (w1 * w1),
        -s / (w1 * w1 * w1),
    )


def example_counterexample_density(
    s1: float = 0.9, s2: float = 1.0, ratio: float = 4.0, k: int = 1
) -> CounterexampleDensity:
    """The built-in counterexample density; see example_piece_specs."""
    rho1, rho2 = example_piece_specs(s1, s2, ratio)
    return build_counterexample_density(rho1, rho2, k)


# ---------------------------------------------------------------------------
# violation search


@dataclass(frozen=True)
class ViolationCertificate:
    """Two orbits plus a coordinate swap that strictly lowers the cost.

    All four costs are exact angular minima; gap = (cost of the orbits)
    - (cost after the swap) > 0 exhibits the failure of pairwise
    monotonicity for the pattern's coupling.  collinear_gap recomputes
    the same quantity through collinear values where the alignment
    condition certifies they coincide with the true costs.
    """

    pattern: str
    template: str
    triple_a: MongeTriple
    triple_b: MongeTriple
    swapped_a: tuple[float, float, float]
    swapped_b: tuple[float, float, float]
    cost_a: float
    cost_b: float
    cost_swapped_a: float
    cost_swapped_b: float
    gap: float
    collinear_gap: float | None
    template_extrapolated: bool
    metadata: dict = field(default_factory=dict)


def _exact_cost(t: tuple[float, float, float], opts: MinimizeOptions) -> float:
    return radial_cost(Radii(*t), opts).value


def _certificate(
    pattern: str,
    template: str,
    ta: MongeTriple,
    tb: MongeTriple,
    opts: MinimizeOptions,
    extrapolated: bool,
    metadata: dict,
) -> ViolationCertificate:
    sa, sb = _apply_swap(ta.as_tuple(), tb.as_tuple(), template)
    ca = _exact_cost(ta.as_tuple(), opts)
    cb = _exact_cost(tb.as_tuple(), opts)
    cs_a = _exact_cost(sa, opts)
    cs_b = _exact_cost(sb, opts)
    gap = (ca + cb) - (cs_a + cs_b)
    # the collinear recomputation is only meaningful when every involved
    # triple is certified collinear by the alignment condition
    quads = (ta.as_tuple(), tb.as_tuple(), sa, sb)
    if all(alignment_condition(q) >= 0.0 for q in quads):
        col = (c_pi(ta.as_tuple()) + c_pi(tb.as_tuple())) - (c_pi(sa) + c_pi(sb))
    else:
        col = None
    return ViolationCertificate(
        pattern=pattern,
        template=template,
        triple_a=ta,
        triple_b=tb,
        swapped_a=sa,
        swapped_b=sb,
        cost_a=ca,
        cost_b=cb,
        cost_swapped_a=cs_a,
        cost_swapped_b=cs_b,
        gap=gap,
        collinear_gap=col,
        template_extrapolated=extrapolated,
        metadata=metadata,
    )


def find_violation(
    rho: RadialDensity,
    epsm: EpsM | None = None,
    opts: MinimizeOptions = MinimizeOptions(),
    max_bisect: int = 200,
) -> ViolationCertificate:
    """Monotonicity violation for the DDI branch map via window bisection.

    Bisects toward x -> 0 until the orbit enters the near window
    (0, eps) x (s2-eps, s2) x (s2, s2+eps), and toward y -> s1 until that
    orbit enters the far window (s1-eps, s1) x (s1, s1+eps) x (M, inf);
    swapping the first coordinates of the two orbits then lowers the
    total cost strictly.  Raises ViolationNotFound when the bisection
    budget runs out before both windows are hit.
    """
    t = rho.tertiles()
    s1, s2 = t.s1, t.s2
    if epsm is None:
        try:
            epsm = find_eps_M(s1, s2)
        except EpsMInfeasible as e:
            raise ViolationNotFound(f"no admissible window exists: {e}") from e
    ddi = build_map(rho, "DDI")
    eps, m_far = epsm.eps, epsm.M

    x_orbit = None
    x = min(eps, s1) / 2.0
    for _ in range(max_bisect):
        orbit = ddi.orbit(x)
        if (
            orbit[0] < eps
            and s2 - eps < orbit[1] < s2
            and s2 < orbit[2] < s2 + eps
        ):
            x_orbit = MongeTriple(*orbit)
            break
        x /= 2.0
    if x_orbit is None:
        raise ViolationNotFound(
            f"near-window orbit not found: last probe x={x!r} gave "
            f"{ddi.orbit(x * 2.0)}"
        )

    y_orbit = None
    d = min(eps, s1) / 2.0
    for _ in range(max_bisect):
        y = s1 - d
        orbit = ddi.orbit(y)
        if s1 - eps < orbit[0] and s1 < orbit[1] < s1 + eps and orbit[2] > m_far:
            y_orbit = MongeTriple(*orbit)
            break
        d /= 2.0
    if y_orbit is None:
        raise ViolationNotFound(
            f"far-window orbit not found: last probe y={s1 - d * 2.0!r} gave "
            f"{ddi.orbit(s1 - d * 2.0)}"
        )

    cert = _certificate(
        pattern="DDI",
        template="first",
        ta=x_orbit,
        tb=y_orbit,
        opts=opts,
        extrapolated=False,
        metadata={
            "eps": eps,
            "M": m_far,
            "window_margin": epsm.margin,
            "alignment_a": alignment_condition(x_orbit.as_tuple()),
            "alignment_b": alignment_condition(y_orbit.as_tuple()),
        },
    )
    if cert.gap <= 0.0:
        raise ViolationNotFound(
            f"window orbits found but the swap gap is {cert.gap!r}; "
            "the hypothesis chain is numerically violated"
        )
    return cert


_REGION_TEMPLATES = {"DID": "third", "III": "second", "IDD": "first"}


def _region_violation(
    rho: RadialDensity, pattern: str, opts: MinimizeOptions
) -> ViolationCertificate:
    """Shrinking-region construction for the non-DDI patterns.

    The second iterate of each pattern's map diverges at one end of the
    first tertile; shrinking the region until its second-iterate range
    dominates the running threshold sup phi turns every involved triple
    collinear, and the six-point line ordering dictates which coordinate
    swap must win.
    """
    smap = build_map(rho, pattern)
    t = smap.tertiles
    increasing_second = pattern == "III"  # second iterate increasing on tertile 1

    def second_iterate_mass(m: float) -> float:
        # mass coordinate of S^2 at first-tertile mass m
        return m + 2.0 / 3.0 if increasing_second else 1.0 - m

    # initial mass interval hugging the divergence end
    if increasing_second:
        m_lo, m_hi = 0.25, 1.0 / 3.0
    else:
        m_lo, m_hi = 0.0, 1.0 / 12.0

    m_thresh = 0.0
    for _ in range(10):
        ends = [rho.quantile(max(m_lo, 1e-15)), rho.quantile(min(m_hi, 1.0 / 3.0 - 1e-15))]
        a_max = max(ends)
        img = sorted(smap(e) for e in ends)
        bs = np.linspace(img[0], img[1], 129)
        m_thresh = max(_phi_partials(a_max, float(b))[0] for b in bs) * (1.0 + 1e-6)
        # part of the interval whose second iterate clears the threshold
        t_star = rho.cdf(m_thresh)
        if increasing_second:
            new_lo = max(m_lo, t_star - 2.0 / 3.0)
            if new_lo >= m_hi - 1e-15:
                raise RegionEmpty(
                    f"{pattern}: no first-tertile mass clears threshold {m_thresh!r}"
                )
            shrunk = new_lo > m_lo + 1e-15
            m_lo = new_lo
        else:
            new_hi = min(m_hi, 1.0 - t_star)
            if new_hi <= m_lo + 1e-15:
                raise RegionEmpty(
                    f"{pattern}: no first-tertile mass clears threshold {m_thresh!r}"
                )
            shrunk = new_hi < m_hi - 1e-15
            m_hi = new_hi
        if not shrunk:
            break

    # pick the pair by second-iterate level: well inside the certified range
    lvl_hi, lvl_lo = 4.0 * m_thresh, 2.0 * m_thresh
    if increasing_second:
        ml = rho.cdf(lvl_lo) - 2.0 / 3.0
        mr = rho.cdf(lvl_hi) - 2.0 / 3.0
    else:
        ml = 1.0 - rho.cdf(lvl_hi)
        mr = 1.0 - rho.cdf(lvl_lo)
    if not (0.0 < ml < mr < 1.0 / 3.0):
        raise RegionEmpty(
            f"{pattern}: level masses ({ml!r}, {mr!r}) left the first tertile"
        )
    xl = rho.quantile(ml)
    xr = rho.quantile(mr)
    ta = MongeTriple(*smap.orbit(xl))
    tb = MongeTriple(*smap.orbit(xr))

    template = _REGION_TEMPLATES[pattern]
    # implied collinear positions: middle coordinates reflected across 0
    line = sorted(
        (-ta.tx, -tb.tx, ta.x, tb.x, ta.t2x, tb.t2x)
    )
    strictly_ordered = all(a < b for a, b in zip(line, line[1:]))
    cert = _certificate(
        pattern=pattern,
        template=template,
        ta=ta,
        tb=tb,
        opts=opts,
        extrapolated=pattern in ("III", "IDD"),
        metadata={
            "region_mass": (m_lo, m_hi),
            "threshold": m_thresh,
            "levels": (lvl_lo, lvl_hi),
            "line_points": tuple(line),
            "line_strictly_ordered": strictly_ordered,
            "alignment_a": alignment_condition(ta.as_tuple()),
            "alignment_b": alignment_condition(tb.as_tuple()),
        },
    )
    if cert.gap <= 0.0:
        raise ViolationNotFound(
            f"{pattern}: region pair found but swap gap is {cert.gap!r}"
        )
    return cert


def refute_class_T(
    rho: RadialDensity, opts: MinimizeOptions = MinimizeOptions()
) -> dict[str, ViolationCertificate]:
    """Monotonicity violations for all four tertile patterns.

    DDI uses the window pair; the other three use the shrinking-region
    construction with the swap template dictated by the six-point line
    ordering (third coordinates for DID, second for III, first for IDD;
    the latter two are template extrapolations and flagged as such).
    """
    out: dict[str, ViolationCertificate] = {}
    out["DDI"] = find_violation(rho, opts=opts)
    for pattern in ("DID", "III", "IDD"):
        out[pattern] = _region_violation(rho, pattern, opts)
    return out
