import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize

from vortentropy.errors import ConvergenceError, DomainError
from vortentropy.maximizer import (
    certify,
    el_residual,
    onsager_coefficient,
    onsager_density,
    onsager_exact,
    solve_constrained,
    solve_probability,
)
from vortentropy.radial import RadialProfile, _boltzmann, _energy, free_energy


def _slsqp(beta, m, ceiling, n):
    def f(w):
        return -(_boltzmann(np.maximum(w, 1e-300)) - beta * _energy(w))

    res = minimize(
        f, np.full(n, m), method="SLSQP", bounds=[(1e-12, ceiling)] * n,
        constraints=[{"type": "eq", "fun": lambda w: w.mean() - m}],
        options={"maxiter": 3000, "ftol": 1e-15},
    )
    assert res.success
    return -res.fun, res.x


@pytest.mark.filterwarnings("ignore:Values in x were outside bounds")
@pytest.mark.parametrize("beta,m,ceiling", [(-3.0, 0.4, 1.0), (7.0, 0.5, 1.0), (-40.0, 0.3, 1.0)])
def test_matches_generic_optimizer(beta, m, ceiling):
    n = 64
    rep = solve_constrained(beta, m, ceiling, n=n)
    f_ref, w_ref = _slsqp(beta, m, ceiling, n)
    assert rep.free_energy >= f_ref - 1e-10
    assert rep.free_energy == pytest.approx(f_ref, abs=1e-8)
    np.testing.assert_allclose(rep.profile.values, w_ref, atol=1e-3)


def test_beta_zero_is_constant():
    rep = solve_constrained(0.0, 0.35, n=128)
    assert np.all(rep.profile.values == 0.35)
    assert rep.lam == pytest.approx(-math.log(0.35))
    assert rep.residual == 0.0


@pytest.mark.parametrize("beta", [-5.0, -1.0, 2.0, 30.0, -200.0, 200.0])
def test_certified(beta):
    rep = solve_constrained(beta, 0.5, n=1024)
    cert = certify(rep)
    assert cert.ok, cert
    # snapping saturated cells moves the mass by at most the solver tolerance
    assert rep.profile.mass_fraction == pytest.approx(0.5, rel=1e-10)
    assert el_residual(rep.profile, beta, rep.lam).sup < 1e-10


def test_saturated_core_radius():
    rep = solve_constrained(-60.0, 0.3, n=2048)
    assert rep.saturated > 0
    w = rep.profile.values
    assert np.all(w[: rep.saturated] == 1.0)
    assert rep.r_sat == pytest.approx(math.sqrt((rep.saturated - 0.5) / 2048))
    unsat = solve_constrained(-1.0, 0.3, n=2048)
    assert unsat.saturated == 0 and unsat.r_sat == 0.0


def test_warm_start_agrees_with_cold_start():
    cold = solve_constrained(-20.0, 0.5, n=512)
    near = solve_constrained(-18.0, 0.5, n=512)
    warm = solve_constrained(-20.0, 0.5, n=512, init=near.profile.values)
    np.testing.assert_allclose(warm.profile.values, cold.profile.values, atol=1e-9)


def test_errors():
    with pytest.raises(DomainError):
        solve_constrained(1.0, 0.5, kind="rsm")
    with pytest.raises(DomainError):
        solve_constrained(1.0, 1.2)
    with pytest.raises(DomainError):
        solve_constrained(1.0, 0.5, n=16, init=np.ones(8))
    with pytest.raises(ConvergenceError) as exc:
        solve_constrained(-5.0, 0.5, n=256, max_iter=2)
    assert exc.value.iterations == 2
    with pytest.raises(DomainError, match="Dirac"):
        solve_probability(-8 * math.pi)


@given(
    st.floats(-30, 30).filter(lambda b: abs(b) > 1e-3),
    st.integers(0, 2**32 - 1),
)
def test_free_energy_beats_random_competitors(beta, seed):
    n, m = 128, 0.4
    rep = solve_constrained(beta, m, n=n)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        v = rng.uniform(0, 1, n)
        v = np.minimum(1.0, v * (m / v.mean()))
        v *= m / v.mean()
        if v.max() > 1:
            continue
        assert free_energy(RadialProfile(v), beta) <= rep.free_energy + 1e-12


@given(st.floats(-40, 40), st.floats(-40, 40))
def test_energy_strictly_decreasing_in_beta(b1, b2):
    if abs(b1 - b2) < 1e-2:
        return
    e1 = solve_constrained(b1, 0.5, n=256).energy
    e2 = solve_constrained(b2, 0.5, n=256).energy
    assert (b2 - b1) * (e2 - e1) < 0


def test_onsager_closed_form_mass_is_one():
    for beta in (-20.0, -4 * math.pi, 0.0, 8.0, 8 * math.pi):
        mass = quad(lambda r: 2 * math.pi * r * float(onsager_density(beta, r)), 0, 1,
                    epsabs=0, epsrel=1e-13)[0]
        assert abs(mass - 1) <= 1e-10


def test_onsager_coefficient_values():
    assert onsager_coefficient(0.0) == 0.0
    assert onsager_coefficient(8 * math.pi) == pytest.approx(0.5)
    assert onsager_coefficient(-4 * math.pi) == pytest.approx(-1.0)


@pytest.mark.parametrize("beta", [-15.0, -3.0, 5.0])
def test_probability_solver_small_grid(beta):
    rep = solve_probability(beta, n=1024)
    exact = onsager_exact(beta, 1024).values
    assert np.max(np.abs(rep.profile.values - exact)) < 1e-6
    # the extrapolated profile approximates the continuum one, so its cell sum
    # matches the cell sum of the closed form rather than 1
    assert rep.profile.mass_fraction == pytest.approx(exact.mean(), abs=1e-10)
    assert rep.residual < 1e-10
    assert certify(rep).ok


def test_probability_without_extrapolation_is_exact_fixed_point():
    rep = solve_probability(-10.0, n=512, extrapolate=False)
    res = el_residual(rep.profile, -10.0, rep.lam, probability=True)
    assert res.sup < 1e-10
    assert res.sup == pytest.approx(rep.grid_defect)
    assert not rep.extrapolated
    assert math.pi * rep.profile.mass_fraction == pytest.approx(1.0, abs=1e-13)


def test_el_residual_integrated_form_small():
    rep = solve_constrained(-8.0, 0.5, n=4096)
    res = el_residual(rep.profile, -8.0, rep.lam)
    assert res.integrated < 1e-5
