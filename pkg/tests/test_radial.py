import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import quad
from scipy.optimize import brentq

from vortentropy.errors import DomainError
from vortentropy.radial import (
    EntropyKind,
    RadialProfile,
    area_nodes,
    energy_max,
    energy_min,
    energy_star,
    entropy,
    extremal_profiles,
    free_energy,
    indicator_profile,
    kinetic_energy,
    mass_function,
    rearrange_decreasing,
    rearrange_increasing,
    stream_function,
    turkington_density,
)

unit_values = arrays(
    np.float64,
    st.integers(8, 200),
    elements=st.floats(0.0, 1.0, allow_nan=False, allow_subnormal=False),
)


def quad_energy(mass, lo=0.0, hi=1.0, points=None):
    """(1/4pi) int M(r)^2 / r dr written in s = r^2."""
    val = quad(lambda s: mass(s) ** 2 / s, lo, hi, epsabs=0, epsrel=1e-13,
               points=points, limit=200)[0]
    return val / (8 * math.pi)


def test_area_nodes_are_cell_centers():
    np.testing.assert_allclose(area_nodes(4), [0.125, 0.375, 0.625, 0.875])
    with pytest.raises(DomainError):
        area_nodes(0)


def test_profile_validation():
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.5, -0.1]))
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.5, 1.2]))
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.5, np.nan]))
    p = RadialProfile.from_values(np.linspace(1, 2, 10), ceiling=5, mass_fraction=0.3)
    assert p.mass_fraction == pytest.approx(0.3, rel=1e-14)
    with pytest.raises(DomainError):
        RadialProfile.from_values(np.zeros(5), mass_fraction=0.3)


@pytest.mark.parametrize("m", [0.3, 0.5, 0.7])
def test_constant_energy_closed_form(m):
    p = RadialProfile.constant(m)
    assert kinetic_energy(p) == pytest.approx(math.pi * m * m / 16, rel=1e-12)


def test_energy_matches_quadrature_and_converges_second_order():
    exact = quad_energy(lambda s: math.pi * (s - s * s / 4))
    errs = []
    for n in (512, 1024, 2048):
        s = area_nodes(n)
        errs.append(abs(kinetic_energy(RadialProfile(1 - s / 2)) / exact - 1))
    assert errs[-1] < 1e-7
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)


@pytest.mark.parametrize("m", [0.2, 0.5, 0.9])
def test_stream_function_of_constant(m):
    p = RadialProfile.constant(m, 256)
    s = p.area_nodes
    # Delta psi = m with psi(1) = 0
    np.testing.assert_allclose(stream_function(p), m * (s - 1) / 4, atol=1e-15)


def test_mass_function_total():
    p = RadialProfile.from_values(np.linspace(0.2, 0.8, 100))
    mf = mass_function(p)
    assert mf.total == pytest.approx(math.pi * p.mass_fraction)
    assert np.all(np.diff(mf.values) > 0)
    assert mf.values[-1] < mf.total


@pytest.mark.parametrize("m", [0.3, 0.5, 0.7])
def test_extremal_energies_against_quadrature(m):
    e_max = quad_energy(lambda s: math.pi * min(s, m), points=[m])
    e_min = quad_energy(lambda s: math.pi * max(0.0, s - (1 - m)), 1 - m, 1.0)
    assert energy_max(m) == pytest.approx(e_max, rel=1e-10)
    assert energy_min(m) == pytest.approx(e_min, rel=1e-10)
    ext = extremal_profiles(m)
    assert kinetic_energy(ext.omega_max) == pytest.approx(ext.e_max, rel=1e-6)
    assert kinetic_energy(ext.omega_min) == pytest.approx(ext.e_min, rel=1e-6)
    assert ext.e_star == energy_star(m)
    assert ext.e_min < ext.e_star < ext.e_max


def test_indicator_profile_mass_and_values():
    p = indicator_profile(0.3, 1000)
    assert set(np.unique(p.values)) == {0.0, 1.0}
    q = indicator_profile(0.3, 4096)
    assert q.mass_fraction == pytest.approx(0.3, rel=1e-14)
    assert np.count_nonzero((q.values > 0) & (q.values < 1)) == 1


@given(unit_values)
def test_energy_between_radial_rearrangements(v):
    if v.sum() == 0:
        return
    p = RadialProfile(v)
    lo = kinetic_energy(rearrange_increasing(p))
    hi = kinetic_energy(rearrange_decreasing(p))
    e = kinetic_energy(p)
    assert lo <= e * (1 + 1e-12) + 1e-300
    assert e <= hi * (1 + 1e-12) + 1e-300


@given(unit_values)
def test_energy_within_extremal_bounds(v):
    m = float(v.mean())
    if not 0 < m < 1:
        return
    e = kinetic_energy(RadialProfile(v))
    # the discrete mass function obeys the same pointwise envelope
    n = v.size
    assert e <= energy_max(m) + 0.2 / n
    assert e >= energy_min(m) - 0.2 / n


@given(unit_values)
def test_rearrangement_preserves_distribution(v):
    p = RadialProfile(v)
    q = rearrange_decreasing(p)
    assert np.all(np.diff(q.values) <= 0)
    assert np.array_equal(np.sort(p.values), np.sort(q.values))
    assert entropy(q) == pytest.approx(entropy(p), abs=1e-15)


def test_entropy_kinds_on_constant():
    m = 0.3
    p = RadialProfile.constant(m, 64)
    assert entropy(p) == pytest.approx(-m * math.log(m))
    assert entropy(p, "rsm") == pytest.approx(-m * math.log(m) - (1 - m) * math.log(1 - m))
    assert entropy(p, EntropyKind.TURKINGTON) == pytest.approx(float(turkington_density(m)))
    with pytest.raises(DomainError):
        entropy(RadialProfile(np.full(4, 1.5), 2.0), "rsm")


def test_free_energy_definition():
    p = RadialProfile.from_values(np.linspace(0.1, 0.9, 50))
    assert free_energy(p, 3.0) == pytest.approx(entropy(p) - 3.0 * kinetic_energy(p))


def _turkington_oracle(w):
    """Max entropy of a density on [0,1] with mean w, by quadrature."""
    def mean(b):
        z = quad(lambda y: math.exp(b * y), 0, 1)[0]
        return quad(lambda y: y * math.exp(b * y), 0, 1)[0] / z
    b = 0.0 if w == 0.5 else brentq(lambda b: mean(b) - w, -500, 500, xtol=1e-14)
    z = quad(lambda y: math.exp(b * y), 0, 1)[0]
    return math.log(z) - b * w


@pytest.mark.parametrize("w", [0.02, 0.1, 0.3, 0.5, 0.77, 0.95])
def test_turkington_density_matches_quadrature(w):
    assert float(turkington_density(w)) == pytest.approx(_turkington_oracle(w), abs=1e-9)


@given(st.floats(0.001, 0.999))
def test_turkington_symmetric_and_nonpositive(w):
    a, b = float(turkington_density(w)), float(turkington_density(1 - w))
    assert a == pytest.approx(b, abs=1e-12)
    assert a <= 1e-15


def test_turkington_edges():
    assert float(turkington_density(0.5)) == pytest.approx(0.0, abs=1e-15)
    assert turkington_density(0.0) == -np.inf
    with pytest.raises(DomainError):
        turkington_density(1.5)
