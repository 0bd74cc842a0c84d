"""Radial vorticity profiles on the unit disk.

Profiles live on an equal-area grid: cell ``i`` covers ``s = r**2`` in
``[i/n, (i+1)/n]`` and is represented by its value at the center
``s_i = (i + 1/2)/n``.  Every cell has area ``pi/n``, so sorting the values
is an exact, measure-preserving rearrangement and all quadratures below are
midpoint rules in ``s`` with uniform weights.

Normalizations follow the disk conventions used throughout the package:

* mass fraction ``m = (1/pi) * int_D omega dx`` (the area mean),
* mass function ``M(r) = int_{B_r} omega dx``,
* kinetic energy ``E = (1/4pi) int_0^1 M(r)**2 / r dr``,
* Boltzmann entropy ``S = -(1/pi) int_D omega log omega dx``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_N = 4096
#: relative mass mismatch above which renormalization is logged
RENORM_LOG_THRESHOLD = 1e-8


class EntropyKind(str, enum.Enum):
    BOLTZMANN = "boltzmann"
    RSM = "rsm"
    TURKINGTON = "turkington"


def area_nodes(n):
    """Cell centers ``s_i = (i + 1/2)/n`` of the equal-area grid."""
    if n < 1:
        raise DomainError(f"grid needs at least one cell, got n={n}")
    return (np.arange(n, dtype=float) + 0.5) / n


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial vorticity sampled on the equal-area grid.

    Use :meth:`from_values` to build one; it validates the bounds and
    rescales to the requested mass fraction.
    """

    values: np.ndarray
    ceiling: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("profile values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise DomainError("profile values must be finite")
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
        """Build a profile, rescaling so that its area mean equals ``mass_fraction``.

        If ``mass_fraction`` is None the mean of ``values`` is kept.
        """
        vals = np.asarray(values, dtype=float)
        if mass_fraction is not None:
            mean = vals.mean()
            if not mean > 0:
                raise DomainError("cannot rescale a profile with zero mass")
            scale = mass_fraction / mean
            if abs(scale - 1.0) > RENORM_LOG_THRESHOLD:
                logger.info("mass renormalization factor %.3e", scale - 1.0)
            vals = vals * scale
        prof = cls(vals, ceiling)
        m = prof.mass_fraction
        if not 0 < m < ceiling:
            raise DomainError(f"mass fraction {m:g} outside (0, L={ceiling:g})")
        return prof

    @classmethod
    def constant(cls, m, n=DEFAULT_N, ceiling=1.0):
        return cls.from_values(np.full(n, float(m)), ceiling)

    @property
    def n(self):
        return self.values.size

    @property
    def area_nodes(self):
        return area_nodes(self.n)

    @property
    def radii(self):
        return np.sqrt(self.area_nodes)

    @property
    def mass_fraction(self):
        return float(self.values.mean())

    def with_values(self, values):
        """Same ceiling, new values (no mass rescaling)."""
        return RadialProfile(values, self.ceiling)

    def __repr__(self):
        return (
            f"RadialProfile(n={self.n}, m={self.mass_fraction:.6g}, "
            f"L={self.ceiling:g})"
        )


@dataclass(frozen=True, eq=False)
class MassFunction:
    """Cumulative mass ``M(r_i)`` at the cell centers of a profile."""

    area_nodes: np.ndarray
    values: np.ndarray
    total: float

    @property
    def radii(self):
        return np.sqrt(self.area_nodes)


# -- raw-array kernels ------------------------------------------------------
# Everything below works on plain arrays so that the solvers can call them in
# tight loops without building profile objects.


def _cum_mass(values):
    """Midpoint cumulative mass at cell centers: (pi/n) * (sum_{j<i} w_j + w_i/2)."""
    n = values.size
    return (np.pi / n) * (np.cumsum(values) - 0.5 * values)


def _tail_integral(g):
    """(1/n) * (sum_{i>j} g_i + g_j/2), the midpoint integral of g over [s_j, 1]."""
    n = g.size
    tail = np.cumsum(g[::-1])[::-1]
    return (tail - 0.5 * g) / n


def _potential(values):
    """``int_{s_j}^1 M(s)/s ds`` on the grid.

    This equals ``2 int_{r_j}^1 M(r)/r dr`` and is ``4n`` times the gradient of
    the discrete kinetic energy with respect to cell values.
    """
    s = area_nodes(values.size)
    return _tail_integral(_cum_mass(values) / s)


def _energy(values):
    n = values.size
    s = area_nodes(n)
    M = _cum_mass(values)
    return float(np.sum(M * M / s) / (8.0 * np.pi * n))


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _boltzmann(values):
    return float(-np.mean(_xlogx(values)))


# -- public operations ------------------------------------------------------


def mass_function(profile):
    vals = profile.values
    return MassFunction(profile.area_nodes, _cum_mass(vals), np.pi * vals.mean())


def stream_function(profile):
    """Radial stream function ``psi(r_i)`` with ``Delta psi = omega``, ``psi(1) = 0``.

    Values are nonpositive; ``-psi`` is the positive Dirichlet potential.
    """
    return -_potential(profile.values) / (4.0 * np.pi)


def kinetic_energy(profile):
    return _energy(profile.values)


def turkington_density(w):
    """Relaxed Turkington integrand ``f_t(w)`` for ``w`` in ``[0, 1]``.

    The inner maximization over densities ``rho`` on ``[0, 1]`` with mean
    ``w`` is solved in the exponential family ``rho(y) = exp(a + b y)``.
    Returns ``-inf`` at ``w`` in ``{0, 1}``.
    """
    w = np.asarray(w, dtype=float)
    if np.any((w < 0) | (w > 1)):
        raise DomainError("Turkington entropy needs values in [0, 1]")
    # f_t is symmetric about 1/2; solve on the lower half where b <= 0
    x = np.minimum(w, 1.0 - w)
    out = np.full(x.shape, -np.inf)
    inner = x > 0
    xi = x[inner]
    lo = -1.0 / np.maximum(xi, 1e-300) - 2.0
    hi = np.zeros_like(xi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        too_high = _exp_mean(mid) > xi
        hi = np.where(too_high, mid, hi)
        lo = np.where(too_high, lo, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(lo))):
            break
    b = 0.5 * (lo + hi)
    out[inner] = _exp_log_norm(b) - b * xi
    return out[()] if out.ndim == 0 else out


def _exp_mean(b):
    """Mean of y under density proportional to exp(b y) on [0, 1], for b <= 0."""
    b = np.asarray(b, dtype=float)
    small = np.abs(b) < 1e-4
    safe = np.where(small, -1.0, b)
    with np.errstate(over="ignore"):
        big = -1.0 / np.expm1(-safe) - 1.0 / safe
    series = 0.5 + b / 12.0 - b**3 / 720.0
    return np.where(small, series, big)


def _exp_log_norm(b):
    """log int_0^1 exp(b y) dy for b <= 0."""
    b = np.asarray(b, dtype=float)
    small = np.abs(b) < 1e-4
    safe = np.where(small, -1.0, b)
    big = np.log(-np.expm1(safe)) - np.log(-safe)
    series = b / 2.0 + b**2 / 24.0
    return np.where(small, series, big)


def entropy(profile, kind=EntropyKind.BOLTZMANN):
    kind = EntropyKind(kind)
    vals = profile.values
    if kind is EntropyKind.BOLTZMANN:
        return _boltzmann(vals)
    if np.any(vals > 1):
        raise DomainError(f"{kind.value} entropy is defined only for values <= 1")
    if kind is EntropyKind.RSM:
        return float(-np.mean(_xlogx(vals) + _xlogx(1.0 - vals)))
    return float(np.mean(turkington_density(vals)))


def free_energy(profile, beta, kind=EntropyKind.BOLTZMANN):
    return entropy(profile, kind) - beta * kinetic_energy(profile)


def rearrange_decreasing(profile):
    """Symmetric decreasing rearrangement (an exact sort on the equal-area grid)."""
    return profile.with_values(np.sort(profile.values)[::-1])


def rearrange_increasing(profile):
    return profile.with_values(np.sort(profile.values))


@dataclass(frozen=True, eq=False)
class ExtremalProfiles:
    omega_min: RadialProfile
    omega_max: RadialProfile
    omega_star: RadialProfile
    e_min: float
    e_max: float
    e_star: float


def energy_star(m):
    return np.pi * m**2 / 16.0


def energy_max(m):
    return np.pi * m**2 / 16.0 + np.pi * m**2 / 8.0 * abs(np.log(m))


def energy_min(m):
    if m == 1:
        return np.pi / 16.0
    return np.pi * m**2 / 16.0 - np.pi / 8.0 * (1 - m) * (m + (1 - m) * np.log1p(-m))


def indicator_profile(m, n=DEFAULT_N, ceiling=1.0, outer=False):
    """Centered ball (or boundary annulus) of height ``ceiling`` and mass ``m``.

    A cell straddling the edge gets the fractional value that makes the mass
    exact.  When ``m n / L`` is an integer the profile takes only the values
    0 and ``L``.
    """
    filled = m / ceiling * n
    if abs(filled - round(filled)) < 1e-9:
        # whole number of cells up to rounding: no partial cell
        filled = float(round(filled))
    k = int(np.floor(filled))
    vals = np.zeros(n)
    vals[:k] = ceiling
    if k < n:
        vals[k] = (filled - k) * ceiling
    if outer:
        vals = vals[::-1].copy()
    return RadialProfile(vals, ceiling)


def extremal_profiles(m, n=DEFAULT_N):
    """Energy-minimizing annulus, energy-maximizing ball and the constant state.

    Energies are the closed forms, not quadratures.
    """
    if not 0 < m < 1:
        raise DomainError(f"mass fraction must lie in (0, 1), got {m}")
    return ExtremalProfiles(
        omega_min=indicator_profile(m, n, outer=True),
        omega_max=indicator_profile(m, n),
        omega_star=RadialProfile.constant(m, n),
        e_min=energy_min(m),
        e_max=energy_max(m),
        e_star=energy_star(m),
    )
