import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_limit.analysis import total_variation
from nonlocal_limit.core_model import Identity, InitialDatum, Power, SimConfig, Square, Tabulated, build_grid
from nonlocal_limit.local_reference import (
    FluxFunction,
    flux_critical_points,
    godunov_flux,
    godunov_flux_array,
    run_local,
)

from oracles import brute_godunov, burgers_like_rarefaction, cell_average

VELOCITIES = [Identity(), Square(), Power(4), Tabulated([0.0, 0.5, 1.0, 2.0], [-0.3, 0.0, 0.8, 1.0])]


def _local(datum, velocity=Identity(), n=1000, x=(-1.0, 2.0), t_end=0.25, **kw):
    return SimConfig(build_grid(*x, n), datum, velocity, t_end, **kw)


def test_degenerate_interval():
    assert godunov_flux(0.3, 0.3, FluxFunction.for_velocity(Identity())) == pytest.approx(0.09, abs=1e-15)


def test_synthetic_square_flux_minimum():
    flux = FluxFunction(lambda u: np.asarray(u) ** 2, lambda u: 2 * np.asarray(u), "u^2")
    assert godunov_flux(-1.0, 1.0, flux) == pytest.approx(brute_godunov(-1.0, 1.0, flux), abs=1e-9)
    assert abs(godunov_flux(-1.0, 1.0, flux)) <= 1e-12


def test_monotone_flux_takes_upwind_endpoint():
    flux = FluxFunction.for_velocity(Identity())
    assert godunov_flux(1.0, -0.5, flux) == pytest.approx(1.0)
    assert brute_godunov(1.0, -0.5, flux) == pytest.approx(1.0)


@pytest.mark.parametrize("velocity", VELOCITIES, ids=lambda v: v.name)
def test_flux_symmetry_and_zero(velocity):
    flux = FluxFunction.for_velocity(velocity)
    u = np.linspace(-2, 2, 101)
    assert float(flux(0.0)) == 0.0
    np.testing.assert_allclose(flux(-u), -flux(u), atol=1e-15)


@pytest.mark.parametrize("velocity", [Identity(), Square(), Power(4)], ids=lambda v: v.name)
def test_nonnegative_velocity_gives_increasing_flux(velocity):
    u = np.linspace(-1.2, 1.2, 1001)
    assert np.all(FluxFunction.for_velocity(velocity).df(u) >= 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.1, 1.1), st.sampled_from(VELOCITIES))
def test_godunov_flux_diagonal(a, velocity):
    flux = FluxFunction.for_velocity(velocity)
    assert godunov_flux(a, a, flux) == float(flux(a))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.1), st.floats(0.0, 1.1))
def test_upwind_consistency(a, b):
    flux = FluxFunction.for_velocity(Square())
    assert godunov_flux(a, b, flux) == pytest.approx(float(flux(a)), abs=1e-12)


@pytest.mark.parametrize("velocity", VELOCITIES, ids=lambda v: v.name)
def test_vectorized_flux_matches_scalar(velocity):
    flux = FluxFunction.for_velocity(velocity)
    rng = np.random.default_rng(7)
    a, b = rng.uniform(-1.1, 1.1, (2, 300))
    crit = flux_critical_points(flux, -1.1, 1.1)
    fast = godunov_flux_array(a, b, flux, crit)
    slow = np.array([godunov_flux(x, y, flux) for x, y in zip(a, b)])
    np.testing.assert_allclose(fast, slow, atol=1e-12, rtol=0)


def test_critical_points_of_nonmonotone_flux():
    flux = FluxFunction.for_velocity(Tabulated([0.0, 1.0], [-1.0, 1.0]))
    # f(u) = u (2u - 1) on u >= 0, f' = 4u - 1 vanishes at 1/4 and (by symmetry) -1/4
    np.testing.assert_allclose(flux_critical_points(flux, -1, 1), [-0.25, 0.25], atol=1e-6)


def test_zero_datum_stays_zero():
    r = run_local(_local(InitialDatum.zero()))
    assert np.all(r.retained_q == 0)


def _front_position(values, x, level=0.5):
    k = int(np.nonzero((values[:-1] >= level) & (values[1:] < level))[0][-1])
    frac = (values[k] - level) / (values[k] - values[k + 1])
    return x[k] + frac * (x[k + 1] - x[k])


@pytest.mark.parametrize("n", [1000, 3000])
def test_shock_speed(n):
    c = _local(InitialDatum([-1.0, 0.0], [1.0]), n=n, x=(-1.5, 1.0))
    q = run_local(c).final
    assert abs(_front_position(q.values, c.grid.centers) - 0.25) <= 2 * c.grid.dx


@pytest.mark.parametrize("n", [1000, 3000])
def test_rarefaction_profile(n):
    c = _local(InitialDatum([0.0, 1.5], [1.0]), n=n, x=(-1.0, 3.0))
    q = run_local(c).final
    exact = cell_average(lambda x: np.where(x < 1.0, burgers_like_rarefaction(x, 0.25), 0.0),
                         c.grid.x_min, c.grid.dx, n)
    window = (c.grid.centers < 0.9)
    err = np.sum(np.abs(q.values - exact)[window]) * c.grid.dx
    assert err <= 10 * c.grid.dx


@pytest.mark.parametrize("velocity", [Identity(), Square()], ids=lambda v: v.name)
def test_conservation_max_principle_tv(velocity):
    c = _local(InitialDatum([-0.5, 0, 0.5], [-0.5, 1]), velocity, n=800, x=(-2, 3), t_end=0.5)
    r = run_local(c)
    d = r.diagnostics.as_arrays()
    assert np.max(np.abs(d["mass"] - 0.25)) <= 1e-12
    assert np.max(d["linf"]) <= 1.0 + 1e-12
    assert np.max(np.diff(d["tv"])) <= 1e-12 * d["tv"][0]


def test_monotone_scheme_ordering():
    # equal sup norms give both runs the same time steps
    lo = InitialDatum([-0.5, 0, 0.5], [-1.0, 0.6])
    hi = InitialDatum([-0.5, 0, 0.5], [-0.2, 1.0])
    ra = run_local(_local(lo, Square(), n=600, x=(-2, 3), t_end=0.4))
    rb = run_local(_local(hi, Square(), n=600, x=(-2, 3), t_end=0.4))
    assert ra.retained_q.shape == rb.retained_q.shape
    assert np.all(ra.retained_q <= rb.retained_q + 1e-14)


def test_local_tv_of_initial():
    c = _local(InitialDatum([-0.5, 0, 0.5], [-0.5, 1]), n=500, x=(-2, 3))
    assert total_variation(run_local(c, retain=False).initial) == pytest.approx(3.0)
