"""Angular momentum and the radial / off-center energy gap at fixed momentum.

For a radial profile the mass function obeys the envelope
``M(r) <= min(pi L r^2, 2|a|/(1 - r^2), pi m)``, which bounds the kinetic
energy by three explicit integrals ``e1 + e2 + e3``.  A small patch of height
``L`` placed near the boundary has the same mass and angular momentum but an
energy of order ``log L``, so for large ``L`` it beats every radial profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError
from .radial import DEFAULT_N, RadialProfile, _cum_mass, area_nodes


def angular_momentum_radial(profile):
    """``a = -int_0^1 M(r) r dr``; midpoint rule in ``s = r^2``."""
    w = np.asarray(profile.values, dtype=float)
    return -0.5 * float(np.mean(_cum_mass(w)))


@dataclass(frozen=True)
class EnvelopeBound:
    m: float
    a: float
    L: float
    e1: float
    e2: float
    e3: float
    radial_bound: float
    quadrature: float
    sharp_bound: float
    scale: float
    empirical_c: float

    def to_dict(self):
        return dict(self.__dict__)


def _envelope_pieces(m, a, L):
    A = abs(a)
    if not a < 0:
        raise DomainError(f"angular momentum must be negative, got {a}")
    if not 8 * A <= math.pi * L:
        raise DomainError(f"need 8|a| <= pi L (|a|={A:g}, L={L:g})")
    if not 2 * A < math.pi * m:
        raise DomainError(f"need 2|a| < pi m (|a|={A:g}, m={m:g})")
    q = math.sqrt(1.0 - 8.0 * A / (math.pi * L))
    p = math.pi * m / (2.0 * A)
    if not q >= 1.0 / p:
        raise DomainError(
            "the middle envelope interval is empty: need "
            f"sqrt(1 - 8|a|/(pi L)) >= 2|a|/(pi m) ({q:.6g} < {1 / p:.6g})"
        )
    return A, q, p


def radial_envelope_bound(m, a, L):
    """Closed-form envelope integrals and their sum.

    ``quadrature`` integrates the same piecewise envelope numerically.
    ``sharp_bound`` integrates the pointwise minimum of the three envelope
    curves, which is smaller because the first two curves actually cross at
    ``s = (1 - q)/2`` rather than at the breakpoint ``s = 1 - q`` used for
    ``e1``/``e2``.
    """
    A, q, p = _envelope_pieces(m, a, L)
    x = 8.0 * A / (math.pi * L)
    s1 = x / (1.0 + q)  # 1 - q without cancellation
    s2 = 1.0 - 1.0 / p
    e1 = math.pi * L * L * s1 * s1 / 16.0
    e2 = A * A / (2 * math.pi) * (p + math.log(p - 1.0) - 1.0 / q - math.log(s1 / q))
    e3 = -math.pi * m * m / 8.0 * math.log1p(-1.0 / p)

    # E = (1/8 pi) int_0^1 M(s)^2 / s ds
    def piece(f, lo, hi):
        if hi <= lo:
            return 0.0
        return quad(lambda s: f(s) ** 2 / s, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0] / (8 * math.pi)

    def core(s):
        return math.pi * L * s

    def mid(s):
        return 2 * A / (1 - s)

    def cap(s):
        return math.pi * m

    quad_sum = piece(core, 0.0, s1) + piece(mid, s1, s2) + piece(cap, s2, 1.0)
    s_cross = 0.5 * s1
    sharp = piece(core, 0.0, s_cross)
    sharp += piece(lambda s: min(mid(s), core(s)), s_cross, s2)
    sharp += piece(lambda s: min(cap(s), core(s)), s2, 1.0)
    total = e1 + e2 + e3
    scale = m * A + A * A * math.log(L / A)
    return EnvelopeBound(
        m=m, a=a, L=L, e1=e1, e2=e2, e3=e3, radial_bound=total,
        quadrature=quad_sum, sharp_bound=sharp, scale=scale,
        empirical_c=total / scale if scale > 0 else float("nan"),
    )


@dataclass(frozen=True)
class PatchBound:
    m: float
    a: float
    L: float
    center: float
    radius: float
    patch_energy: float
    lower_bound: float
    momentum_error: float
    feasible: bool
    height_condition: bool

    def to_dict(self):
        return dict(self.__dict__)


def patch_center(m, a, L):
    """Distance ``|x0|`` giving the patch of height ``L`` angular momentum ``a``."""
    x2 = 1.0 - m / (2.0 * L) - 2.0 * abs(a) / (math.pi * m)
    if x2 < 0:
        raise DomainError(
            f"|a|={abs(a):g} exceeds the momentum of a centered patch "
            f"({math.pi * m / 2 * (1 - m / (2 * L)):g})"
        )
    return math.sqrt(x2)


def patch_momentum(m, x0, L):
    return -math.pi * m / 2.0 * (1.0 - x0 * x0 - m / (2.0 * L))


def patch_energy_exact(m, x0, L):
    """Energy of ``L * 1_{B_rho(x0)}``, ``rho = sqrt(m/L)``.

    The free-space part is the self-energy of a uniform disk and the image
    part is harmonic in both variables, so its double average over the patch
    is its value at the center.
    """
    rho = math.sqrt(m / L)
    return math.pi * m * m / 4.0 * (-math.log(rho) + 0.25 + math.log1p(-x0 * x0))


def boundary_patch_energy(m, a, L):
    """Off-center patch with momentum ``a`` and its energy.

    The patch must fit with margin: ``L >= 4 m / (1 - |x0|)^2``.
    ``height_condition`` reports the sufficient condition
    ``L >= 4 pi^2 m^3 / a^2`` in terms of the momentum alone.
    """
    if not 0 < m < 1:
        raise DomainError(f"mass fraction must lie in (0, 1), got {m}")
    if not a < 0:
        raise DomainError(f"angular momentum must be negative, got {a}")
    x0 = patch_center(m, a, L)
    need = 4.0 * m / (1.0 - x0) ** 2
    feasible = L >= need * (1.0 - 1e-12)
    if not feasible:
        raise DomainError(
            f"patch does not fit: need L >= 4m/(1-|x0|)^2 = {need:.6g}, got {L:.6g}"
        )
    energy = patch_energy_exact(m, x0, L)
    lower = math.pi * m * m / 2.0 * math.log(math.sqrt(L / m) * (1.0 - x0) / 8.0)
    return PatchBound(
        m=m, a=a, L=L, center=x0, radius=math.sqrt(m / L),
        patch_energy=energy, lower_bound=lower,
        momentum_error=abs(patch_momentum(m, x0, L) - a),
        feasible=feasible,
        height_condition=L >= 4 * math.pi**2 * m**3 / (a * a),
    )


def patch_field(m, x0, L, n_r=256, n_theta=256, subsample=4):
    """Rasterized patch on the polar grid (for resolvable patches only)."""
    from .disk import DiskField

    rho2 = m / L
    return DiskField.rasterize(
        lambda x, y: np.where((x - x0) ** 2 + y**2 <= rho2, L, 0.0),
        n_r, n_theta, ceiling=L, subsample=subsample,
    )


def crossover_height(m, a, q_factor):
    return q_factor**2 * math.pi**2 * m**3 / (a * a)


def crossover_q(m):
    return 8.0 * math.exp(2.0 / (math.pi * m * m))


class CrossoverNotFound(RuntimeError):
    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


@dataclass(frozen=True)
class CrossoverReport:
    m: float
    q_factor: float
    a_star: float
    witness: EnvelopeBound
    patch: PatchBound
    table: list = field(default_factory=list)

    def to_dict(self):
        return {
            "m": self.m,
            "Q": self.q_factor,
            "a_star": self.a_star,
            "L": self.patch.L,
            "radial_bound": self.witness.radial_bound,
            "patch_energy": self.patch.patch_energy,
            "patch_lower_bound": self.patch.lower_bound,
            "patch_center": self.patch.center,
        }


def crossover_demo(m, points=40, a_lo=None, tol=1e-2):
    """Scan ``a`` on a logarithmic grid in ``(a_lo, 0)`` with the height
    ``L = Q^2 pi^2 m^3 / a^2`` and find the largest ``|a|`` where the patch
    energy beats the radial envelope bound (and is at least ``1 - tol``).

    ``table`` rows are ``(a, L, radial_bound, patch_energy)``.
    """
    if not 0 < m < 1:
        raise DomainError(f"mass fraction must lie in (0, 1), got {m}")
    q_factor = crossover_q(m)
    if a_lo is None:
        a_lo = -math.pi * m / 4.0
    mags = abs(a_lo) * np.logspace(-4, 0, points)[:-1]
    mags = np.append(mags, abs(a_lo) * (1 - 1e-9))
    table = []
    best = None
    for A in mags:
        a = -float(A)
        L = crossover_height(m, a, q_factor)
        try:
            env = radial_envelope_bound(m, a, L)
            patch = boundary_patch_energy(m, a, L)
        except DomainError:
            table.append((a, L, float("nan"), float("nan")))
            continue
        table.append((a, L, env.radial_bound, patch.patch_energy))
        if env.radial_bound < patch.patch_energy and patch.patch_energy >= 1 - tol:
            if best is None or A > abs(best[0].a):
                best = (env, patch)
    if best is None:
        raise CrossoverNotFound(f"no crossover for m={m} in ({a_lo:g}, 0)", table)
    return CrossoverReport(m, q_factor, best[0].a, best[0], best[1], table)


def sample_profile(m, a, L, rng, n=DEFAULT_N, tries=50):
    """Random radial profile with mass fraction ``m``, momentum ``a`` and
    values in ``[0, L]``.

    A random positive field ``g`` is tilted to ``min(L, c g exp(t (1 - s)))``;
    ``c`` fixes the mass and ``t`` the momentum.  This is heuristic sampling,
    not a uniform draw from the constraint set.
    """
    s = area_nodes(n)
    for _ in range(tries):
        g = _random_positive(rng, s)

        def shaped(t):
            base = g * np.exp(t * (1.0 - s) - t)

            def excess(logc):
                return np.mean(np.minimum(L, np.exp(logc) * base)) - m

            hi = math.log(L / base.min()) + 1.0
            lo = math.log(m / base.max()) - 1.0
            logc = brentq(excess, lo, hi, xtol=1e-14)
            return np.minimum(L, np.exp(logc) * base)

        def mom(t):
            return angular_momentum_radial(RadialProfile(shaped(t), L)) - a

        lo_t, hi_t = -60.0, 60.0
        if mom(lo_t) * mom(hi_t) > 0:
            continue
        t = brentq(mom, lo_t, hi_t, xtol=1e-13)
        vals = shaped(t)
        return RadialProfile(vals, L)
    raise DomainError(f"could not sample a profile with m={m}, a={a}, L={L}")


def _random_positive(rng, s):
    g = np.full(s.size, rng.uniform(0.2, 1.0))
    for _ in range(int(rng.integers(1, 5))):
        c, w = rng.uniform(0, 1), rng.uniform(0.03, 0.5)
        g += rng.uniform(0, 2) * np.exp(-(((s - c) / w) ** 2))
    return g
