"""Non-radial vorticity fields on the unit disk.

Fields live on an equal-area polar grid: ring ``k`` spans ``s = r**2`` in
``[k/n_r, (k+1)/n_r]`` and is cut into ``n_theta`` equal angular sectors, so
every cell has area ``pi/(n_r*n_theta)``.  A field is piecewise constant on
the cells.

The Dirichlet potential ``phi`` (``-Laplace phi = omega``, ``phi = 0`` on the
circle) is the Green's-function double sum over cells.  The sum is exact in
the sense that every source cell is integrated against the kernel by
quadrature; only the target side is sampled at cell centers.  Because the
grid is invariant under rotation by one sector, the kernel table depends on
the angular offset only and the double sum is evaluated as a circular
correlation with the FFT.  This is an algebraic rewrite of the sum, not a
spectral Poisson solve.
"""

from __future__ import annotations

import functools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .radial import RadialProfile, _energy, _potential

logger = logging.getLogger(__name__)

DEFAULT_NR = 256
DEFAULT_NTHETA = 256
FAST_NR = 96
TALENTI_LEVELS = 256
RENORM_LOG_THRESHOLD = 1e-8

# source-cell quadrature: Gauss order by distance / cell diameter
_FAR, _MID, _NEAR, _SELF = 2, 4, 10, 16
_MID_RATIO, _NEAR_RATIO = 6.0, 2.0


@dataclass(frozen=True, eq=False)
class DiskField:
    """Vorticity on the equal-area polar grid, shape ``(n_r, n_theta)``."""

    values: np.ndarray
    ceiling: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.size == 0:
            raise DomainError("field values must be a non-empty (n_r, n_theta) array")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        if np.any(vals < 0):
            raise DomainError(f"negative vorticity (min {vals.min():.3g})")
        if np.any(vals > self.ceiling):
            raise DomainError(
                f"vorticity {vals.max():.17g} exceeds ceiling L={self.ceiling:g}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, ceiling=1.0, mass_fraction=None):
        vals = np.asarray(values, dtype=float)
        if mass_fraction is not None:
            mean = vals.mean()
            if not mean > 0:
                raise DomainError("cannot rescale a field with zero mass")
            scale = mass_fraction / mean
            if abs(scale - 1.0) > RENORM_LOG_THRESHOLD:
                logger.info("mass renormalization factor %.3e", scale - 1.0)
            vals = vals * scale
        return cls(vals, ceiling)

    @classmethod
    def from_radial(cls, profile, n_theta=DEFAULT_NTHETA):
        """Spread a radial profile over ``n_theta`` sectors per ring."""
        vals = np.repeat(np.asarray(profile.values, dtype=float)[:, None], n_theta, 1)
        return cls(vals, profile.ceiling)

    @classmethod
    def rasterize(cls, func, n_r=DEFAULT_NR, n_theta=DEFAULT_NTHETA, ceiling=1.0,
                  subsample=4):
        """Cell averages of ``func(x, y)`` from ``subsample**2`` equal-area
        sub-cells per cell.  ``func`` must accept arrays."""
        sub = (np.arange(subsample) + 0.5) / subsample
        s = (np.arange(n_r)[:, None] + sub[None, :]) / n_r
        t = (np.arange(n_theta)[:, None] + sub[None, :]) * (2 * math.pi / n_theta)
        r = np.sqrt(s)[:, None, :, None]
        th = t[None, :, None, :]
        vals = func(r * np.cos(th), r * np.sin(th)).mean(axis=(2, 3))
        return cls(np.clip(vals, 0.0, ceiling), ceiling)

    @property
    def n_r(self):
        return self.values.shape[0]

    @property
    def n_theta(self):
        return self.values.shape[1]

    @property
    def cell_area(self):
        return math.pi / self.values.size

    @property
    def mass_fraction(self):
        return float(self.values.mean())

    @property
    def radii(self):
        """Cell-center radii ``sqrt((k + 1/2)/n_r)``."""
        return np.sqrt((np.arange(self.n_r) + 0.5) / self.n_r)

    @property
    def angles(self):
        return (np.arange(self.n_theta) + 0.5) * (2 * math.pi / self.n_theta)

    def centers(self):
        """Cartesian cell centers, two arrays of shape ``(n_r, n_theta)``."""
        r = self.radii[:, None]
        t = self.angles[None, :]
        return r * np.cos(t), r * np.sin(t)

    def __repr__(self):
        return (
            f"DiskField(n_r={self.n_r}, n_theta={self.n_theta}, "
            f"m={self.mass_fraction:.6g}, L={self.ceiling:g})"
        )


# -- Green's function kernel --------------------------------------------------


def green(x1, x2, y1, y2):
    """Dirichlet Green's function of the unit disk, positive inside."""
    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    # |y|^2 |x - y*|^2 with y* = y/|y|^2, written without the division
    img = (x1 * x1 + x2 * x2) * (y1 * y1 + y2 * y2) - 2.0 * (x1 * y1 + x2 * y2) + 1.0
    return (np.log(img) - np.log(d2)) / (4.0 * math.pi)


def _unit_gauss(q):
    t, w = leggauss(q)
    return 0.5 * (t + 1.0), 0.5 * w


def _self_cell(x1, x2, r0, r1, t0, t1, rc, tc):
    """Integral of the kernel over the cell containing the target (rc, tc).

    The cell is cut into four triangles meeting at the target and each is
    mapped to the unit square by a Duffy transform, which cancels the
    logarithmic singularity.
    """
    u, w = _unit_gauss(_SELF)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(w, w)
    p = np.array([rc, tc])
    corners = [np.array(c) for c in ((r0, t0), (r1, t0), (r1, t1), (r0, t1))]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        e1, e2 = a - p, b - a
        rr = p[0] + uu * (e1[0] + vv * e2[0])
        tt = p[1] + uu * (e1[1] + vv * e2[1])
        jac = abs(e1[0] * e2[1] - e1[1] * e2[0]) * uu
        total += np.sum(green(x1, x2, rr * np.cos(tt), rr * np.sin(tt)) * rr * jac * ww)
    return total


def _kernel_rows(rows, n_r, n_theta):
    """Kernel table rows ``P[k, l, d]`` for targets ``k`` in ``rows``.

    ``P[k, l, d]`` is the potential at the center of cell ``(k, 0)`` due to a
    unit density on cell ``(l, d)``.
    """
    dt = 2 * math.pi / n_theta
    edges = np.sqrt(np.arange(n_r + 1) / n_r)
    dr = np.diff(edges)
    rc = np.sqrt((np.arange(n_r) + 0.5) / n_r)
    tc = (np.arange(n_theta) + 0.5) * dt
    li, di = np.meshgrid(np.arange(n_r), np.arange(n_theta), indexing="ij")
    yc1 = rc[li] * np.cos(tc[di])
    yc2 = rc[li] * np.sin(tc[di])
    diam = np.maximum(dr[li], edges[li + 1] * dt)
    rules = {}
    for q in (_FAR, _MID, _NEAR):
        u, w = _unit_gauss(q)
        rules[q] = (edges[:-1, None] + dr[:, None] * u[None, :], u * dt, w)

    out = np.empty((len(rows), n_r, n_theta))
    for i, k in enumerate(rows):
        x1, x2 = rc[k] * math.cos(dt / 2), rc[k] * math.sin(dt / 2)
        inv = 1.0 / rc[k] ** 2
        near = np.minimum(
            np.hypot(yc1 - x1, yc2 - x2), np.hypot(yc1 - x1 * inv, yc2 - x2 * inv)
        ) / diam
        tier = np.where(near < _NEAR_RATIO, _NEAR, np.where(near < _MID_RATIO, _MID, _FAR))
        row = out[i]
        for q, (rq, tq, wq) in rules.items():
            ls, ds = np.nonzero(tier == q)
            if ls.size == 0:
                continue
            rr = rq[ls][:, :, None]
            th = (ds * dt)[:, None, None] + tq[None, None, :]
            val = green(x1, x2, rr * np.cos(th), rr * np.sin(th)) * rr
            val = np.einsum("cij,i,j->c", val, wq, wq)
            row[ls, ds] = val * dr[ls] * dt
        row[k, 0] = _self_cell(x1, x2, edges[k], edges[k + 1], 0.0, dt, rc[k], dt / 2)
    return out


def _threads():
    try:
        return max(1, int(os.environ.get("VORTENTROPY_THREADS", "1")))
    except ValueError:
        return 1


@functools.lru_cache(maxsize=4)
def kernel_spectrum(n_r, n_theta):
    """Conjugated angular FFT of the kernel table, shape (n_r, n_r, n_theta//2+1).

    Rows are independent, so they may be built on several threads
    (``VORTENTROPY_THREADS``) without changing a single bit of the result.
    """
    nthreads = min(_threads(), n_r)
    chunks = [list(c) for c in np.array_split(np.arange(n_r), nthreads) if len(c)]
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(lambda c: _kernel_rows(c, n_r, n_theta), chunks))
    else:
        parts = [_kernel_rows(c, n_r, n_theta) for c in chunks]
    table = np.concatenate(parts, axis=0)
    spec = np.conj(np.fft.rfft(table, axis=2))
    spec.setflags(write=False)
    return spec


def field_potential(field):
    """Potential ``phi`` at the cell centers, shape ``(n_r, n_theta)``."""
    spec = kernel_spectrum(field.n_r, field.n_theta)
    wh = np.fft.rfft(field.values, axis=1)
    return np.fft.irfft(np.einsum("klf,lf->kf", spec, wh), n=field.n_theta, axis=1)


def self_energy_disk(field):
    """Self-interaction of every cell approximated by the equal-area disk."""
    area = field.cell_area
    rho = math.sqrt(area / math.pi)
    s = (np.arange(field.n_r) + 0.5) / field.n_r
    per_ring = -(area * area / (4 * math.pi)) * ((math.log(rho) - 0.25) - np.log1p(-s))
    return float(np.sum(per_ring[:, None] * field.values**2))


def greens_energy(field, self_term="cell"):
    """Kinetic energy ``(1/2) int omega phi dx``.

    ``self_term="cell"`` keeps the integrated self-cell kernel;
    ``"disk"`` swaps it for the uniform-disk closed form of equal area,
    which is less accurate on the elongated cells of the polar grid.
    """
    phi = field_potential(field)
    area = field.cell_area
    e = 0.5 * area * float(np.sum(field.values * phi))
    if self_term == "disk":
        diag = kernel_self_terms(field.n_r, field.n_theta)
        e -= 0.5 * area * float(np.sum(diag[:, None] * field.values**2))
        e += self_energy_disk(field)
    elif self_term != "cell":
        raise DomainError(f"unknown self_term {self_term!r}")
    return e


def kernel_self_terms(n_r, n_theta):
    """Potential at each cell center due to its own unit-density cell."""
    dt = 2 * math.pi / n_theta
    edges = np.sqrt(np.arange(n_r + 1) / n_r)
    rc = np.sqrt((np.arange(n_r) + 0.5) / n_r)
    return np.array([
        _self_cell(r * math.cos(dt / 2), r * math.sin(dt / 2), edges[k], edges[k + 1],
                   0.0, dt, r, dt / 2)
        for k, r in enumerate(rc)
    ])


def angular_momentum(field):
    """``a = -(1/2) int (1 - |x|^2) omega dx``, exact for cellwise constants."""
    s = (np.arange(field.n_r) + 0.5) / field.n_r
    return -0.5 * field.cell_area * float(np.sum((1.0 - s)[:, None] * field.values))


# -- rearrangement and Talenti comparisons ------------------------------------


def rearrange_to_radial(field):
    """Decreasing rearrangement laid on the radial grid with one cell per field cell."""
    vals = np.sort(field.values, axis=None)[::-1]
    return RadialProfile(vals, field.ceiling)


@dataclass(frozen=True, eq=False)
class PoissonProfiles:
    phi: np.ndarray
    phi_bar: np.ndarray


def poisson_profiles(field):
    """Potential of the field and radial potential of its rearrangement.

    ``phi`` has the field's shape; ``phi_bar`` lives on the radial grid of
    :func:`rearrange_to_radial`.  Both are nonnegative.
    """
    phi = field_potential(field)
    sharp = rearrange_to_radial(field)
    phi_bar = _potential(sharp.values) / (4 * math.pi)
    return PoissonProfiles(phi, phi_bar)


def ring_means(phi, phi_bar, n_r):
    """Ring-resolution comparison of ``phi`` and ``phi_bar``.

    Sorting ``phi`` descending and averaging each run of ``n_theta`` ranks
    gives the decreasing rearrangement of ``phi`` on the rings; ``phi_bar``
    is averaged over the same ranks.
    """
    sharp = np.sort(np.ravel(phi))[::-1].reshape(n_r, -1).mean(axis=1)
    bar = np.asarray(phi_bar).reshape(n_r, -1).mean(axis=1)
    return sharp, bar


@dataclass(frozen=True, eq=False)
class DistributionPair:
    levels: np.ndarray
    u: np.ndarray
    v: np.ndarray


def _superlevel_area(nodes_s, values, levels):
    """Area ``pi * s(h)`` of ``{f > h}`` for the decreasing piecewise-linear
    ``f`` through ``(nodes_s, values)``, held constant inside the first node
    and vanishing at ``s = 1``."""
    s = np.concatenate([nodes_s, [1.0]])
    f = np.concatenate([values, [0.0]])
    f = np.minimum.accumulate(f)
    area = math.pi * np.interp(levels, f[::-1], s[::-1])
    return np.where(levels >= f[0], 0.0, area)


def distribution_functions(field, profiles=None, n_levels=TALENTI_LEVELS):
    """``u(h) = |{phi > h}|`` and ``v(h) = |{phi_bar > h}|`` at ring resolution
    on ``n_levels`` uniform levels in ``[0, max phi_bar]``."""
    if profiles is None:
        profiles = poisson_profiles(field)
    sharp, bar = ring_means(profiles.phi, profiles.phi_bar, field.n_r)
    nodes = (np.arange(field.n_r) + 0.5) / field.n_r
    levels = np.linspace(0.0, float(np.max(profiles.phi_bar)), n_levels)
    return DistributionPair(
        levels, _superlevel_area(nodes, sharp, levels), _superlevel_area(nodes, bar, levels)
    )


@dataclass(frozen=True, eq=False)
class TalentiReport:
    energy_gap: float
    linf_gap: float
    ratio: float
    distribution_ok: bool
    distribution: DistributionPair
    shift: tuple
    shift_l1: float

    def to_dict(self):
        return {
            "energy_gap": self.energy_gap,
            "linf_gap": self.linf_gap,
            "ratio": self.ratio,
            "distribution_ok": self.distribution_ok,
        }


def best_shift(field, sharp=None, grid=21, radius=0.5):
    """Translation ``x*`` minimizing the L1 distance between the field and the
    shifted radial rearrangement, searched on a coarse square grid.

    Only a diagnostic: nothing guarantees the search finds a global minimum.
    """
    if sharp is None:
        sharp = rearrange_to_radial(field)
    s_nodes = sharp.area_nodes
    x1, x2 = field.centers()
    best = (np.inf, (0.0, 0.0))
    for c1 in np.linspace(-radius, radius, grid):
        for c2 in np.linspace(-radius, radius, grid):
            if c1 * c1 + c2 * c2 > radius * radius + 1e-12:
                continue
            s = (x1 - c1) ** 2 + (x2 - c2) ** 2
            moved = np.where(
                s <= 1.0, np.interp(s, s_nodes, sharp.values), 0.0
            )
            l1 = field.cell_area * float(np.sum(np.abs(field.values - moved)))
            if l1 < best[0]:
                best = (l1, (float(c1), float(c2)))
    return best[1], best[0]


def talenti_report(field, tol=1e-3, n_levels=TALENTI_LEVELS, shift_grid=21):
    """Energy gap, potential gap and distribution-function check for a field.

    ``shift_grid=0`` skips the translation search.
    """
    if not field.mass_fraction > 0:
        raise DomainError("Talenti comparison needs positive mass")
    profiles = poisson_profiles(field)
    sharp = rearrange_to_radial(field)
    energy_gap = _energy(sharp.values) - greens_energy(field)
    phi_sharp, phi_bar = ring_means(profiles.phi, profiles.phi_bar, field.n_r)
    linf_gap = float(np.max(phi_bar - phi_sharp))
    dist = distribution_functions(field, profiles, n_levels)
    ok = bool(np.all(dist.u <= dist.v + tol))
    ratio = linf_gap / energy_gap if energy_gap > 0 else float("nan")
    if shift_grid:
        shift, l1 = best_shift(field, sharp, grid=shift_grid)
    else:
        shift, l1 = (float("nan"), float("nan")), float("nan")
    return TalentiReport(energy_gap, linf_gap, ratio, ok, dist, shift, l1)
