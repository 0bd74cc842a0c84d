"""Monotone transport between radial profiles and the free-energy comparisons
built on it.

Profiles are treated as constant on their equal-area cells, so the cumulative
mass ``C(s) = int_0^s w`` is piecewise linear and can be inverted exactly.
The map ``T`` pushes the source onto the target, ``tau = T**2`` satisfies
``C_src(s) = C_tgt(tau(s))`` and the map density is
``phi = T T'/r = d tau/ds = w_src(s) / w_tgt(tau(s))``.

All integrals of functions of ``phi`` are taken over the merged partition of
source and target cell edges (expressed in cumulative mass), on which ``phi``
is constant.  Integrals ``int_0^1 f(r) r dr`` are written ``(1/2) int_0^1 f ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .radial import _boltzmann, _energy, area_nodes

LOWER_BOUND = 1e-8
MASS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TransportMap:
    """Monotone map between two radial profiles.

    ``r``, ``T`` and ``phi`` are sampled at the source cell centers.  The
    ``seg_*`` arrays describe the merged partition: source-side length in
    ``s``, source and target cell indices, and the constant density there.
    """

    r: np.ndarray
    T: np.ndarray
    phi: np.ndarray
    residual_ma: float
    seg_length: np.ndarray
    seg_start: np.ndarray
    seg_source: np.ndarray
    seg_phi: np.ndarray

    @property
    def n(self):
        return self.r.size


def _check_profile(p, name):
    if np.min(p.values) < LOWER_BOUND:
        raise DomainError(
            f"{name} profile drops to {np.min(p.values):.3g}, below the lower bound "
            f"{LOWER_BOUND:g}"
        )


def brenier_map(source, target):
    """Increasing map ``T`` on ``[0, 1]`` with ``T(0) = 0``, ``T(1) = 1`` carrying
    ``source`` onto ``target``."""
    _check_profile(source, "source")
    _check_profile(target, "target")
    ws = np.asarray(source.values, dtype=float)
    wt = np.asarray(target.values, dtype=float)
    ns, nt = ws.size, wt.size
    cs = np.concatenate([[0.0], np.cumsum(ws) / ns])
    ct = np.concatenate([[0.0], np.cumsum(wt) / nt])
    if abs(cs[-1] - ct[-1]) > MASS_TOL:
        raise DomainError(
            f"mass mismatch {cs[-1] - ct[-1]:.3e} exceeds {MASS_TOL:g}"
        )
    if not np.array_equal(cs, ct) or ns != nt:
        ct = ct * (cs[-1] / ct[-1])
    ct[-1] = cs[-1]

    # node images, in target cell units so that identical profiles give
    # exactly tau = s
    cq = cs[:-1] + 0.5 * ws / ns
    k = np.clip(np.searchsorted(ct, cq, side="right") - 1, 0, nt - 1)
    same = k == np.arange(ns) if ns == nt else np.zeros(ns, dtype=bool)
    u = np.where(
        same,
        k + (cs[:-1] - ct[k]) * nt / wt[k] + 0.5 * (nt / ns) * (ws / wt[k]),
        k + (cq - ct[k]) * nt / wt[k],
    )
    tau = np.clip(u / nt, 0.0, 1.0)
    T = np.sqrt(tau)
    phi = ws / wt[k]

    # merged partition in cumulative mass
    cuts = np.union1d(cs, ct)
    lo, hi = cuts[:-1], cuts[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    mid = 0.5 * (lo + hi)
    i_src = np.clip(np.searchsorted(cs, mid, side="right") - 1, 0, ns - 1)
    i_tgt = np.clip(np.searchsorted(ct, mid, side="right") - 1, 0, nt - 1)
    seg_len = (hi - lo) / ws[i_src]
    seg_start = i_src / ns + (lo - cs[i_src]) / ws[i_src]
    seg_phi = ws[i_src] / wt[i_tgt]

    s = area_nodes(ns)
    if ns > 2:
        dtau = np.gradient(tau, s)
        res = float(np.max(np.abs(phi - dtau)))
    else:
        res = 0.0
    return TransportMap(
        r=np.sqrt(s), T=T, phi=phi, residual_ma=res,
        seg_length=seg_len, seg_start=seg_start, seg_source=i_src, seg_phi=seg_phi,
    )


def _log_phi_integral(tmap):
    """``int_0^1 log(phi) ds``."""
    return float(np.sum(tmap.seg_length * np.log(tmap.seg_phi)))


def entropy_identity_check(omega_beta, omega_bar, tmap=None):
    """Defect of ``S(bar) - 2 int w_beta log(phi) r dr = S(w_beta)``."""
    if tmap is None:
        tmap = brenier_map(omega_beta, omega_bar)
    w = np.asarray(omega_beta.values)
    cross = float(np.sum(tmap.seg_length * w[tmap.seg_source] * np.log(tmap.seg_phi)))
    return abs(_boltzmann(omega_bar.values) - cross - _boltzmann(w))


def _xlog_ratio(e, s):
    """``s * log(e / s)`` with the limit 0 at ``s = 0``."""
    e, s = np.broadcast_arrays(np.asarray(e, dtype=float), np.asarray(s, dtype=float))
    out = np.zeros(s.shape)
    pos = s > 0
    out[pos] = s[pos] * np.log(e[pos] / s[pos])
    return out


def _tail_weight_integrals(w, start, length, cell):
    """``int K(s) ds`` over segments inside source cells, where
    ``K(s) = (1/2) int_s^1 w M / t dt`` for the cellwise-constant ``w``."""
    n = w.size
    edges = np.arange(n + 1) / n
    cum = np.concatenate([[0.0], np.cumsum(w) / n])
    c = math.pi * (cum[:-1] - w * edges[:-1])  # M(t) = c + pi w t on each cell
    log_ratio = np.zeros(n)
    log_ratio[1:] = np.log(edges[2:] / edges[1:-1])
    cell_int = w * (c * log_ratio + math.pi * w / n)
    tail = np.concatenate([np.cumsum(cell_int[::-1])[::-1], [0.0]])

    wi, ci, e1 = w[cell], c[cell], edges[cell + 1]
    a, b = start, start + length
    # int_a^b log(e1/s) ds = [s log(e1/s) + s]_a^b
    log_part = _xlog_ratio(e1, b) - _xlog_ratio(e1, a) + length
    # int_a^b (e1 - s) ds
    lin_part = e1 * length - 0.5 * (b * b - a * a)
    inner = wi * (ci * log_part + math.pi * wi * lin_part)
    return 0.5 * (inner + tail[cell + 1] * length)


def energy_inequality_check(omega_beta, omega_bar, tmap=None):
    """Slack ``E(w_beta) - E(bar) - int_0^1 K(r) log(phi) r dr`` (nonnegative)."""
    if tmap is None:
        tmap = brenier_map(omega_beta, omega_bar)
    w = np.asarray(omega_beta.values, dtype=float)
    kint = _tail_weight_integrals(w, tmap.seg_start, tmap.seg_length, tmap.seg_source)
    term = 0.5 * float(np.sum(kint * np.log(tmap.seg_phi)))
    return _energy(w) - _energy(omega_bar.values) - term


@dataclass(frozen=True)
class JensenReport:
    defect: float
    free_energy_gap: float
    consistent: bool
    l1_distance: float


def jensen_defect(report, omega_bar, tol=1e-6):
    """Positive free-energy defect ``-2 w_beta(1) int_0^1 log(phi) r dr``.

    ``report`` is a maximizer with ``beta < 0``.  The competitor must be
    saturated wherever the maximizer is.  ``w_beta(1)`` is taken as
    ``exp(-lam)``, its exact value at the unit circle.  ``consistent`` checks
    ``F(bar) + defect <= F(w_beta) + tol``.
    """
    if not report.beta < 0:
        raise DomainError("the Jensen defect comparison needs beta < 0")
    wb = np.asarray(report.profile.values)
    wbar = np.asarray(omega_bar.values)
    if wbar.size != wb.size:
        raise DomainError("competitor must live on the maximizer's grid")
    ceiling = report.profile.ceiling
    bad = np.flatnonzero((wb >= ceiling) & (wbar < ceiling))
    if bad.size:
        r_bad = math.sqrt(area_nodes(wb.size)[bad[0]])
        raise DomainError(
            f"competitor is not saturated at r={r_bad:.6g} inside the maximizer's "
            f"saturated core (r_sat={report.r_sat:.6g})"
        )
    tmap = brenier_map(report.profile, omega_bar)
    defect = -math.exp(-report.lam) * _log_phi_integral(tmap)
    beta = report.beta
    f_bar = _boltzmann(wbar) - beta * _energy(wbar)
    gap = report.free_energy - f_bar
    return JensenReport(
        defect=defect,
        free_energy_gap=gap,
        consistent=bool(f_bar + defect <= report.free_energy + tol),
        l1_distance=float(np.mean(np.abs(wbar - wb)) * math.pi),
    )


def entropy_gap_h(u):
    """``H(u) = -log u + u - 1``."""
    u = np.asarray(u, dtype=float)
    return -np.log(u) + u - 1.0


@dataclass(frozen=True)
class QuantitativeJensen:
    h_integral: float
    sup_T_deviation: float
    h_lower_bound_ok: bool
    chain_max: float
    chain_ok: bool


def quantitative_jensen(tmap, tol=1e-12):
    """``int_0^1 H(phi) r dr``, ``sup |T(r) - r|`` and the pointwise bounds
    ``H(x) >= min(|x-1|^2, |x-1|)/4`` and ``(r^2/2) H(T^2/r^2) <= int H(phi) r dr``."""
    h_int = 0.5 * float(np.sum(tmap.seg_length * entropy_gap_h(tmap.seg_phi)))
    dev = float(np.max(np.abs(tmap.T - tmap.r)))
    x = tmap.phi
    lower = 0.25 * np.minimum((x - 1) ** 2, np.abs(x - 1))
    s = tmap.r**2
    chain = 0.5 * s * entropy_gap_h(tmap.T**2 / s)
    cmax = float(np.max(chain))
    return QuantitativeJensen(
        h_integral=h_int,
        sup_T_deviation=dev,
        h_lower_bound_ok=bool(np.all(entropy_gap_h(x) >= lower - tol)),
        chain_max=cmax,
        chain_ok=bool(cmax <= h_int + tol),
    )
