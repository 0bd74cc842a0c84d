"""Maximal-entropy curve ``S(e)`` traced out by the free-energy maximizers.

Each ``beta`` gives a maximizer ``w_beta`` with energy ``e``, entropy ``s`` and
free energy ``g = s - beta*e``.  The points ``(e, s)`` lie on the concave curve
``S(e) = inf_beta (beta*e + g(beta))``, with ``g`` convex and ``beta = dS/de``.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .maximizer import TOL, solve_constrained
from .radial import (
    DEFAULT_N,
    _boltzmann,
    energy_max,
    energy_min,
    energy_star,
    indicator_profile,
)

BETA_MAX = 200.0
BETA_FLOOR = 0.1
DEFAULT_POINTS = 101


@dataclass(frozen=True)
class CurvePoint:
    beta: float
    e: float
    s: float
    g: float


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    """Curve points sorted by increasing energy (so decreasing ``beta``)."""

    m: float
    ceiling: float
    n: int
    points: tuple
    e_min: float
    e_star: float
    e_max: float
    dropped: tuple = ()

    def __len__(self):
        return len(self.points)

    @property
    def betas(self):
        return np.array([p.beta for p in self.points])

    @property
    def energies(self):
        return np.array([p.e for p in self.points])

    @property
    def entropies(self):
        return np.array([p.s for p in self.points])

    @property
    def free_energies(self):
        return np.array([p.g for p in self.points])

    @property
    def s_star(self):
        """Entropy of the constant state, the largest value on the curve."""
        return -self.m * math.log(self.m)


def beta_grid(beta_min=-BETA_MAX, beta_max=BETA_MAX, points=DEFAULT_POINTS, floor=BETA_FLOOR):
    """Sorted grid with log-spaced magnitudes, dense near 0.

    When the range straddles 0 the grid contains 0 and the remaining points
    are shared between the two sides in proportion to their log-widths.
    """
    if not (math.isfinite(beta_min) and math.isfinite(beta_max)) or beta_min > beta_max:
        raise DomainError(f"invalid beta range [{beta_min}, {beta_max}]")
    if points < 1:
        raise DomainError(f"need at least one point, got {points}")
    if points == 1:
        return np.array([0.0 if beta_min <= 0 <= beta_max else beta_min])
    if beta_min < 0 < beta_max:
        lo, hi = abs(beta_min), beta_max
        if min(lo, hi) < floor:
            raise DomainError(f"both sides of the range must reach |beta| >= {floor}")
        wl = math.log(lo / floor) + 1.0
        wh = math.log(hi / floor) + 1.0
        n_neg = int(round((points - 1) * wl / (wl + wh)))
        n_neg = min(max(n_neg, 1), points - 2)
        n_pos = points - 1 - n_neg
        neg = -np.geomspace(floor, lo, n_neg) if n_neg > 1 else np.array([-lo])
        pos = np.geomspace(floor, hi, n_pos) if n_pos > 1 else np.array([hi])
        return np.concatenate([neg[::-1], [0.0], pos])
    if beta_min > 0 or beta_max < 0:
        return np.sort(np.copysign(np.geomspace(abs(beta_min), abs(beta_max), points), beta_max))
    return np.linspace(beta_min, beta_max, points)


def _threads():
    try:
        return max(1, int(os.environ.get("VORTENTROPY_THREADS", "2")))
    except ValueError:
        return 1


def _arm(betas, m, ceiling, n, tol):
    """Solve along ``betas`` (ordered away from 0), warm-starting each solve."""
    out, failed = [], []
    init = None
    for b in betas:
        try:
            rep = solve_constrained(b, m, ceiling, n=n, init=init, tol=tol)
        except ConvergenceError as exc:
            failed.append((float(b), str(exc)))
            continue
        init = rep.profile.values
        out.append(CurvePoint(rep.beta, rep.energy, rep.entropy, rep.free_energy))
    return out, failed


def scan(m, betas=None, ceiling=1.0, n=DEFAULT_N, tol=TOL):
    """Trace the curve over ``betas`` (default :func:`beta_grid`).

    The negative and positive arms are continued outward from 0 independently
    and may run in parallel.  Points whose solve fails are dropped with a
    warning.
    """
    if not 0 < m < ceiling:
        raise DomainError(f"mass fraction {m} outside (0, L={ceiling})")
    betas = beta_grid() if betas is None else np.asarray(betas, dtype=float).ravel()
    if betas.size == 0 or not np.all(np.isfinite(betas)):
        raise DomainError("beta grid must be non-empty and finite")
    betas = np.unique(betas)
    neg = betas[betas < 0][::-1]
    pos = betas[betas >= 0]
    arms = [a for a in (neg, pos) if a.size]
    if _threads() > 1 and len(arms) > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            results = list(pool.map(lambda a: _arm(a, m, ceiling, n, tol), arms))
    else:
        results = [_arm(a, m, ceiling, n, tol) for a in arms]
    points, failed = [], []
    for pts, bad in results:
        points.extend(pts)
        failed.extend(bad)
    for b, msg in failed:
        warnings.warn(f"dropped beta={b:g}: {msg}", RuntimeWarning, stacklevel=2)
    points.sort(key=lambda p: (p.e, -p.beta))
    scale = ceiling * ceiling
    return EntropyCurve(
        m=float(m),
        ceiling=float(ceiling),
        n=int(n),
        points=tuple(points),
        e_min=scale * energy_min(m / ceiling),
        e_star=energy_star(m),
        e_max=scale * energy_max(m / ceiling),
        dropped=tuple(b for b, _ in failed),
    )


def _need(curve, k):
    if len(curve) < k:
        raise DomainError(f"need at least {k} curve points, got {len(curve)}")


def _chord_slopes(x, y):
    return np.diff(y) / np.diff(x)


def _whole_cell_grid(m, ceiling, candidates):
    for n in candidates:
        filled = m / ceiling * n
        if abs(filled - round(filled)) < 1e-9:
            return n
    return None


def endpoint_entropies(m, ceiling=1.0, n=DEFAULT_N):
    """Entropies of the extremal annulus and ball.

    The profiles are built on a grid where they take only the values 0 and
    ``L`` if one exists among a few candidate sizes, in which case both are 0.
    """
    n_end = _whole_cell_grid(m, ceiling, (n, 1000, 10_000, 100_000, 1_000_000)) or n
    lo = indicator_profile(m, n_end, ceiling, outer=True)
    hi = indicator_profile(m, n_end, ceiling)
    return _boltzmann(lo.values) + 0.0, _boltzmann(hi.values) + 0.0


@dataclass(frozen=True)
class ConcavityReport:
    max_second_difference: float
    second_differences_ok: bool
    e_argmax: float
    argmax_spacing: float
    argmax_ok: bool
    monotone_sides_ok: bool
    s_low_end: float
    s_high_end: float
    endpoint_fraction: float
    endpoint_trend_ok: bool
    s_omega_min: float
    s_omega_max: float
    endpoints_zero: bool
    concave: bool
    structure_ok: bool

    def to_dict(self):
        return dict(self.__dict__)


def concavity_report(curve, tol=1e-8, endpoint_fraction=0.15):
    """Concavity and shape checks of ``S(e)``.

    ``concave`` covers the second differences, the location of the maximum
    and the monotone sides; ``structure_ok`` adds the endpoint checks.

    Second differences are differences of consecutive chord slopes, which are
    nonpositive exactly when the points are in concave position.
    """
    _need(curve, 3)
    e, s = curve.energies, curve.entropies
    d2 = np.diff(_chord_slopes(e, s))
    worst = float(d2.max())
    k = int(np.argmax(s))
    gaps = np.diff(e)
    spacing = float(max(gaps[max(k - 1, 0)], gaps[min(k, gaps.size - 1)]))
    argmax_ok = abs(e[k] - curve.e_star) <= spacing
    slopes = _chord_slopes(e, s)
    left = slopes[: max(k - 1, 0)]
    right = slopes[k + 1 :]
    sides_ok = bool(np.all(left > 0) and np.all(right < 0))
    s_star = curve.s_star
    s_lo, s_hi = float(s[0]), float(s[-1])
    trend = (
        s_lo <= endpoint_fraction * s_star
        and s_hi <= endpoint_fraction * s_star
        and s[0] < s[1]
        and s[-1] < s[-2]
    )
    z_lo, z_hi = endpoint_entropies(curve.m, curve.ceiling, curve.n)
    zero = z_lo == 0.0 and z_hi == 0.0
    ok_d2 = worst <= tol
    return ConcavityReport(
        max_second_difference=worst,
        second_differences_ok=bool(ok_d2),
        e_argmax=float(e[k]),
        argmax_spacing=spacing,
        argmax_ok=bool(argmax_ok),
        monotone_sides_ok=sides_ok,
        s_low_end=s_lo,
        s_high_end=s_hi,
        endpoint_fraction=endpoint_fraction,
        endpoint_trend_ok=bool(trend),
        s_omega_min=z_lo,
        s_omega_max=z_hi,
        endpoints_zero=bool(zero),
        concave=bool(ok_d2 and argmax_ok and sides_ok),
        structure_ok=bool(ok_d2 and argmax_ok and sides_ok and trend and zero),
    )


@dataclass(frozen=True)
class DualityReport:
    min_cross_gap: float
    cross_ok: bool
    max_diagonal_gap: float
    diagonal_ok: bool
    min_g_second_difference: float
    g_convex: bool
    duality_ok: bool

    def to_dict(self):
        return dict(self.__dict__)


def duality_check(curve, tol=1e-8):
    """``s_j <= beta_k e_j + g_k`` for all pairs, equality at ``k = j``, and
    convexity of ``g`` in ``beta``."""
    b, e, s, g = curve.betas, curve.energies, curve.entropies, curve.free_energies
    cross = b[None, :] * e[:, None] + g[None, :] - s[:, None]
    diag = float(np.max(np.abs(np.diag(cross)))) if cross.size else 0.0
    min_cross = float(cross.min()) if cross.size else 0.0
    order = np.argsort(b)
    if b.size >= 3:
        d2 = float(np.diff(_chord_slopes(b[order], g[order])).min())
    else:
        d2 = 0.0
    cross_ok = min_cross >= -tol
    diag_ok = diag <= tol
    convex = d2 >= -tol
    return DualityReport(
        min_cross_gap=min_cross,
        cross_ok=bool(cross_ok),
        max_diagonal_gap=diag,
        diagonal_ok=bool(diag_ok),
        min_g_second_difference=d2,
        g_convex=bool(convex),
        duality_ok=bool(cross_ok and diag_ok and convex),
    )


@dataclass(frozen=True)
class ClausiusReport:
    energy_decreasing: bool
    max_energy_step: float
    clausius_max_err: float
    clausius_ok: bool
    slopes: tuple = field(default=(), repr=False)

    def to_dict(self):
        d = dict(self.__dict__)
        d.pop("slopes")
        return d


def _three_point_derivative(x, y):
    """Second-order derivative at interior nodes of a nonuniform grid."""
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    return (
        -h1 / (h0 * (h0 + h1)) * y[:-2]
        + (h1 - h0) / (h0 * h1) * y[1:-1]
        + h0 / (h1 * (h0 + h1)) * y[2:]
    )


def temperature_monotonicity(curve, tol=0.05):
    """Energy strictly decreasing in ``beta`` and ``ds/de`` matching ``beta``.

    The Clausius mismatch at an interior point is
    ``|ds/de - beta| / max(|beta|, local beta spacing)``.
    """
    _need(curve, 3)
    order = np.argsort(curve.betas)
    e = curve.energies[order]
    de = np.diff(e)
    decreasing = bool(np.all(de < 0))
    # derivative in e order (increasing e)
    ee, ss, bb = curve.energies, curve.entropies, curve.betas
    slope = _three_point_derivative(ee, ss)
    bi = bb[1:-1]
    spacing = np.maximum(np.abs(bb[2:] - bi), np.abs(bi - bb[:-2]))
    err = np.abs(slope - bi) / np.maximum(np.abs(bi), spacing)
    worst = float(err.max())
    return ClausiusReport(
        energy_decreasing=decreasing,
        max_energy_step=float(de.max()),
        clausius_max_err=worst,
        clausius_ok=bool(worst <= tol),
        slopes=tuple(float(x) for x in slope),
    )
