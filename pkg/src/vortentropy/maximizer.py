"""Free-energy maximizers on the disk via the Euler-Lagrange fixed point.

Two problems are solved on the equal-area grid of :mod:`vortentropy.radial`:

* the bounded problem: maximize ``S(w) - beta*E(w)`` over radial profiles with
  ``0 <= w <= L`` and mass fraction ``m``.  Its optimality condition is
  ``w = min(L, exp(-lam - (beta/4) * Phi[w]))`` where
  ``Phi[w](s) = int_s^1 M(t)/t dt``;
* the probability problem (no ceiling, ``int w dx = 1``), whose maximizer is
  the mean-field (Onsager) profile ``w = exp(-lam - beta/(4 pi) * Phi[w])``.

The discrete condition is exactly the KKT system of the discrete free energy
because ``Phi`` is ``4n`` times the gradient of the discrete kinetic energy.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import ConvergenceError, DomainError
from .radial import (
    DEFAULT_N,
    EntropyKind,
    RadialProfile,
    _boltzmann,
    _cum_mass,
    _energy,
    _potential,
    area_nodes,
)

logger = logging.getLogger(__name__)

TOL = 1e-10
MAX_ITER = 20000
THETA0 = 0.5
THETA_FLOOR = 1.0 / 64.0
#: cold starts beyond this |beta| walk up a geometric ladder of warm starts
HOMOTOPY_START = 16.0
BETA_CRITICAL = -8.0 * math.pi


@dataclass(frozen=True, eq=False)
class MaximizerReport:
    """Converged maximizer and its diagnostics.

    ``residual`` is the sup-norm of the Euler-Lagrange defect of the discrete
    fixed point (KKT defect on saturated cells included).  For an
    extrapolated profile it is the larger residual of the two grid solves and
    ``grid_defect`` holds the defect of the combined profile on its own grid.  ``r_sat`` is the largest node
    radius of the saturated core for ``beta < 0`` and 0 when there is none.
    """

    beta: float
    profile: RadialProfile
    lam: float
    r_sat: float
    free_energy: float
    energy: float
    entropy: float
    residual: float
    iterations: int
    saturated: int = 0
    extrapolated: bool = False
    grid_defect: float = 0.0


@dataclass(frozen=True)
class ELResidual:
    sup: float
    integrated: float


# -- fixed point ------------------------------------------------------------


def _multiplier(x, m, ceiling):
    """Solve ``mean(min(L, exp(x - lam))) = m`` for ``lam``."""
    n = x.size
    lam0 = float(logsumexp(x) - math.log(n * m))
    if not np.isfinite(ceiling) or x.max() - lam0 <= math.log(ceiling):
        return lam0
    log_l = math.log(ceiling)

    def excess(lam):
        return np.mean(np.minimum(ceiling, np.exp(np.minimum(x - lam, log_l)))) - m

    # at lo every cell saturates (mean L > m); at lam0 the clipped mean is < m
    lo = float(x.min()) - log_l - 1e-12
    return brentq(excess, lo, lam0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _gibbs(w, kappa, m, ceiling):
    """One application of the fixed-point map; returns (G(w), lam, x)."""
    x = -kappa * _potential(w)
    lam = _multiplier(x, m, ceiling)
    with np.errstate(over="ignore"):
        g = np.exp(x - lam)
    if np.isfinite(ceiling):
        g = np.where(g >= ceiling, ceiling, g)
    return g, lam, x


def _kkt_defect(w, x, lam, ceiling):
    """Sup defect of ``log w = min(log L, x - lam)``.

    This covers both the free cells and the complementary condition on the
    set where the map saturates.
    """
    target = x - lam
    if np.isfinite(ceiling):
        target = np.minimum(target, math.log(ceiling))
    return float(np.max(np.abs(np.log(w) - target)))


def _picard(w, kappa, m, ceiling, tol, max_iter):
    """Damped Picard iteration; returns (w, lam, residual, iterations)."""
    theta = THETA0
    prev = np.inf
    res = np.inf
    for it in range(1, max_iter + 1):
        g, lam, x = _gibbs(w, kappa, m, ceiling)
        res = _kkt_defect(w, x, lam, ceiling)
        step = float(np.max(np.abs(g - w)))
        if res < tol and step < tol:
            if not np.isfinite(ceiling):
                return w, lam, res, it
            # the damped iterate only approaches the ceiling geometrically;
            # snap and accept only if the snapped profile still converges
            snapped = np.where(g >= ceiling, ceiling, w)
            _, lam_s, x_s = _gibbs(snapped, kappa, m, ceiling)
            res_s = _kkt_defect(snapped, x_s, lam_s, ceiling)
            if res_s < tol:
                return snapped, lam_s, res_s, it
            w = snapped
            continue
        if res > prev:
            theta = max(0.5 * theta, THETA_FLOOR)
        prev = res
        w = (1.0 - theta) * w + theta * g
    raise ConvergenceError(
        f"fixed point not reached after {max_iter} sweeps "
        f"(residual {res:.3e})",
        residual=res,
        iterations=max_iter,
    )


def _ladder(beta):
    """Intermediate betas for a cold start: halve |beta| down to the start scale."""
    steps = []
    b = abs(beta)
    while b > HOMOTOPY_START:
        b /= 2.0
        steps.append(math.copysign(b, beta))
    return steps[::-1]


def _solve(beta, kappa_of, m, ceiling, n, init, tol, max_iter):
    if init is None:
        w = np.full(n, float(m))
        total = 0
        for b in _ladder(beta):
            w, _, _, k = _picard(w, kappa_of(b), m, ceiling, max(tol, 1e-8), max_iter)
            total += k
    else:
        w = np.asarray(init, dtype=float)
        if w.size != n:
            raise DomainError(f"initial guess has {w.size} cells, expected {n}")
        w = np.clip(w, 1e-300, ceiling) * (m / w.mean())
        w = np.minimum(w, ceiling)
        total = 0
    w, lam, res, k = _picard(w, kappa_of(beta), m, ceiling, tol, max_iter)
    return w, lam, res, total + k


def _core_radius(w, ceiling, beta):
    if beta >= 0 or not np.isfinite(ceiling):
        return 0.0, int(np.count_nonzero(w >= ceiling))
    sat = np.flatnonzero(w >= ceiling)
    if sat.size == 0:
        return 0.0, 0
    return float(math.sqrt(area_nodes(w.size)[sat.max()])), int(sat.size)


# -- public API -------------------------------------------------------------


def solve_constrained(
    beta,
    m,
    ceiling=1.0,
    kind=EntropyKind.BOLTZMANN,
    n=DEFAULT_N,
    init=None,
    tol=TOL,
    max_iter=MAX_ITER,
):
    """Maximizer of ``S - beta*E`` over radial profiles with ``0 <= w <= L``.

    ``init`` warm-starts the iteration (it is rescaled to mass ``m``).  Large
    ``|beta|`` cold starts go through a short continuation in beta.
    """
    kind = EntropyKind(kind)
    if kind is not EntropyKind.BOLTZMANN:
        raise DomainError(f"only the Boltzmann entropy is supported, got {kind.value}")
    beta = float(beta)
    if not (math.isfinite(beta) and math.isfinite(m)):
        raise DomainError("beta and m must be finite")
    if not 0 < m < ceiling:
        raise DomainError(f"mass fraction {m} outside (0, L={ceiling})")
    if beta == 0.0:
        w = np.full(n, float(m))
        lam, res, iters = -math.log(m), 0.0, 0
    else:
        w, lam, res, iters = _solve(
            beta, lambda b: b / 4.0, m, ceiling, n, init, tol, max_iter
        )
    prof = RadialProfile(w, ceiling)
    r_sat, nsat = _core_radius(w, ceiling, beta)
    e = _energy(w)
    s = _boltzmann(w)
    return MaximizerReport(
        beta=beta,
        profile=prof,
        lam=float(lam),
        r_sat=r_sat,
        free_energy=s - beta * e,
        energy=e,
        entropy=s,
        residual=float(res),
        iterations=iters,
        saturated=nsat,
    )


def _check_subcritical(beta):
    if not beta > BETA_CRITICAL:
        raise DomainError(
            f"beta={beta} is at or below -8*pi: the mean-field maximizer "
            "ceases to exist and concentrates to a Dirac mass at the origin "
            "as beta decreases to -8*pi"
        )


def solve_probability(
    beta, n=DEFAULT_N, extrapolate=True, tol=TOL, max_iter=MAX_ITER
):
    """Mean-field maximizer over probability densities on the disk.

    The entropy here is ``-int w log w dx`` (not area-normalized) so that the
    optimality condition reads ``w = exp(-lam + beta*psi)``.

    With ``extrapolate`` the fixed point is also computed on the grid with
    ``3n`` cells, whose every third center coincides with a center of the
    ``n`` grid, and the two are combined by Richardson extrapolation.  This
    removes the second-order grid error of the smooth solution.  The combined
    profile is no longer an exact discrete fixed point: its defect on the
    ``n`` grid, of the size of the removed error, is ``grid_defect``.
    """
    beta = float(beta)
    _check_subcritical(beta)
    m = 1.0 / math.pi
    kappa_of = lambda b: b / (4.0 * math.pi)  # noqa: E731
    if beta == 0.0:
        w = np.full(n, m)
        lam, res, iters = -math.log(m), 0.0, 0
        extrapolate = False
    else:
        w, lam, res, iters = _solve(beta, kappa_of, m, np.inf, n, None, tol, max_iter)
        if extrapolate:
            fine, lam_f, res_f, k = _solve(
                beta, kappa_of, m, np.inf, 3 * n, np.repeat(w, 3), tol, max_iter
            )
            iters += k
            res = max(res, res_f)
            w = (9.0 * fine[1::3] - w) / 8.0
            lam = (9.0 * lam_f - lam) / 8.0
            if np.any(w <= 0):
                raise ConvergenceError("extrapolated profile lost positivity")
    prof = RadialProfile(w, np.inf)
    defect = el_residual(prof, beta, lam, probability=True).sup
    e = _energy(w)
    s = math.pi * _boltzmann(w)
    return MaximizerReport(
        beta=beta,
        profile=prof,
        lam=float(lam),
        r_sat=0.0,
        free_energy=s - beta * e,
        energy=e,
        entropy=s,
        residual=float(res),
        iterations=iters,
        extrapolated=bool(extrapolate),
        grid_defect=float(defect),
    )


def onsager_coefficient(beta):
    beta = float(beta)
    _check_subcritical(beta)
    return beta / (8.0 * math.pi + beta)


def onsager_density(beta, r):
    """Closed-form mean-field profile ``((1-A)/pi) / (1 - A r^2)^2``."""
    a = onsager_coefficient(beta)
    r = np.asarray(r, dtype=float)
    return (1.0 - a) / math.pi / (1.0 - a * r * r) ** 2


def onsager_exact(beta, n=DEFAULT_N):
    """The closed-form profile sampled at the grid nodes."""
    return RadialProfile(onsager_density(beta, np.sqrt(area_nodes(n))), np.inf)


def el_residual(profile, beta, lam, probability=False):
    """Euler-Lagrange defects of a profile.

    ``sup`` is the largest ``|-log w - kappa*Phi - lam|`` over cells below the
    ceiling, with ``kappa = beta/4`` (or ``beta/(4 pi)`` for the probability
    problem).  ``integrated`` is the largest defect of the integrated form
    ``w(s_last) - w(s) = kappa * int_s^{s_last} w M / t dt`` (trapezoid rule)
    over unsaturated cells, so it carries quadrature error.
    """
    w = np.asarray(profile.values, dtype=float)
    if np.any(w <= 0):
        raise DomainError("Euler-Lagrange residual needs a strictly positive profile")
    kappa = beta / (4.0 * math.pi) if probability else beta / 4.0
    free = w < profile.ceiling
    if not free.any():
        return ELResidual(0.0, 0.0)
    defect = np.abs(-np.log(w) - kappa * _potential(w) - lam)
    sup = float(defect[free].max())

    # integrate up to the last unsaturated cell so the path stays off the ceiling
    last = int(np.flatnonzero(free).max())
    s = area_nodes(w.size)[: last + 1]
    ww = w[: last + 1]
    f = ww * _cum_mass(w)[: last + 1] / s
    seg = 0.5 * (f[1:] + f[:-1]) * np.diff(s)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    integ = np.abs(ww[-1] - ww - kappa * tail)
    return ELResidual(sup, float(integ[free[: last + 1]].max()))


@dataclass(frozen=True)
class Certificate:
    residual_ok: bool
    monotone: bool
    boundary_bound: float
    bound_ok: bool

    @property
    def ok(self):
        return self.residual_ok and self.monotone and self.bound_ok


def certify(report, tol=TOL):
    """Checks every converged maximizer must pass.

    * residual below ``tol``;
    * nonincreasing in ``r`` for ``beta < 0``, nondecreasing for ``beta > 0``;
    * the boundary value ``exp(-lam)`` bounds the profile from below for
      ``beta < 0`` and from above for ``beta > 0`` (up to ``tol``).
    """
    w = np.asarray(report.profile.values)
    d = np.diff(w)
    b = report.beta
    if b < 0:
        monotone = bool(np.all(d <= 0))
    elif b > 0:
        monotone = bool(np.all(d >= 0))
    else:
        monotone = bool(np.all(d == 0))
    edge = math.exp(-report.lam)
    if b < 0:
        bound_ok = float(w.min()) >= edge - tol
    elif b > 0:
        bound_ok = float(w.max()) <= min(report.profile.ceiling, edge) + tol
    else:
        bound_ok = abs(float(w[0]) - edge) <= tol
    return Certificate(
        residual_ok=report.residual < tol,
        monotone=monotone,
        boundary_bound=edge,
        bound_ok=bool(bound_ok),
    )
