import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import trapezoid

from nonlocal_limit.analysis import (
    EntropyFlux,
    Quadratic,
    SmoothedKruzkov,
    TestBump,
    bump_lattice,
    coarsen,
    entropy_functional,
    l1_distance,
    time_weights,
    total_variation,
)
from nonlocal_limit.core_model import CellField, Identity, InitialDatum, SimConfig, Square, build_grid, sample_datum
from nonlocal_limit.errors import GridMismatch, IncompatibleFactor, InsufficientTrajectoryResolution, ValidationError
from nonlocal_limit.local_reference import FluxFunction, run_local
from nonlocal_limit.results import DiagnosticsSeries, RunResult

from oracles import trapezoid_beta


def _constant_trajectory(c, n_times=201, t_end=1.0, n=600):
    grid = build_grid(-2, 4, n)
    config = SimConfig(grid, InitialDatum([-1.0, 1.0], [c]), Identity(), t_end)
    times = np.linspace(0, t_end, n_times)
    rows = np.tile(sample_datum(config.datum, grid).values, (n_times, 1))
    final = CellField(grid, rows[-1])
    return RunResult(config, "synthetic", [], [], [], DiagnosticsSeries(), times, rows, final, None, n_times - 1)


# ------------------------------------------------------------------- entropies


@pytest.mark.parametrize("pair", [Quadratic(), SmoothedKruzkov(0.2, 1e-2), SmoothedKruzkov()])
def test_alpha_convex(pair):
    u = np.linspace(-2, 2, 2001)
    assert np.all(pair.d2alpha(u) >= 0)
    assert np.all(np.diff(pair.alpha(u), 2) >= -1e-14)


def test_smoothing_delta_must_be_positive():
    with pytest.raises(ValidationError):
        SmoothedKruzkov(delta=0.0)


@pytest.mark.parametrize("velocity", [Identity(), Square()], ids=lambda v: v.name)
@pytest.mark.parametrize("pair", [Quadratic(), SmoothedKruzkov(0.3, 1e-2)], ids=lambda p: p.name)
def test_beta_against_trapezoid(velocity, pair):
    flux = FluxFunction.for_velocity(velocity)
    beta = EntropyFlux(pair, flux, -1.1, 1.1)
    for u in np.linspace(-1, 1, 9):
        assert float(beta(u)) == pytest.approx(trapezoid_beta(pair.dalpha, flux.df, u), abs=1e-8)


def test_beta_zero_and_derivative():
    flux = FluxFunction.for_velocity(Square())
    beta = EntropyFlux(Quadratic(), flux, -1.1, 1.1)
    assert abs(float(beta(0.0))) <= 1e-15
    u = np.linspace(-1, 1, 41)
    h = 1e-5
    fd = (beta(u + h) - beta(u - h)) / (2 * h)
    np.testing.assert_allclose(fd, beta.derivative(u), atol=1e-7)


def test_beta_rejects_out_of_range():
    beta = EntropyFlux(Quadratic(), FluxFunction.for_velocity(Identity()), -1.0, 1.0)
    with pytest.raises(ValidationError):
        beta(1.5)


# ----------------------------------------------------------------------- bumps


def test_bump_profile_and_derivatives():
    b = TestBump(0.5, 0.0, 0.2, 0.4)
    assert float(b.phi(0.5, 0.0)) == 1.0
    assert float(b.phi(0.71, 0.0)) == 0.0
    t, x, h = 0.45, 0.1, 1e-6
    assert float(b.phi_t(t, x)) == pytest.approx(float((b.phi(t + h, x) - b.phi(t - h, x)) / (2 * h)), rel=1e-6)
    assert float(b.phi_x(t, x)) == pytest.approx(float((b.phi(t, x + h) - b.phi(t, x - h)) / (2 * h)), rel=1e-6)


def test_bump_scale_matches_quadrature():
    b = TestBump(0.5, 0.0, 0.2, 0.4)
    t = np.linspace(0.3, 0.7, 801)
    x = np.linspace(-0.4, 0.4, 1601)
    T, X = np.meshgrid(t, x, indexing="ij")
    integrand = np.abs(b.phi_t(T, X)) + np.abs(b.phi_x(T, X))
    total = trapezoid(trapezoid(integrand, x, axis=1), t)
    assert total == pytest.approx(b.scale(), rel=1e-3)


def test_bump_lattice_supports_end_before_t_end():
    bumps = bump_lattice(0.5, -0.5, 1.0)
    assert len(bumps) == 9
    assert all(b.t_support[1] < 0.5 for b in bumps)
    assert {round(b.x0, 12) for b in bumps} == {-0.5, 0.25, 1.0}


def test_time_weights_sum_to_span():
    t = np.array([0.0, 0.1, 0.15, 0.4, 1.0])
    assert time_weights(t).sum() == pytest.approx(1.0)


# ---------------------------------------------------------- entropy functional


def test_zero_trajectory_gives_zero():
    traj = _constant_trajectory(0.0)
    flux = FluxFunction.for_velocity(Identity())
    for b in bump_lattice(1.0, -1.0, 1.0):
        assert entropy_functional(traj, Quadratic(), b, flux) == 0.0


@pytest.mark.parametrize("c", [0.7, -0.4])
def test_constant_trajectory_interior_bump(c):
    traj = _constant_trajectory(c, n_times=801, n=2400)
    flux = FluxFunction.for_velocity(Square())
    e = entropy_functional(traj, Quadratic(), TestBump(0.5, 0.0, 0.3, 0.5), flux)
    assert abs(e) <= 1e-5


def test_linear_in_bump():
    c = SimConfig(build_grid(-1, 2, 600), InitialDatum([-0.5, 0.0], [1.0]), Identity(), 0.5)
    traj = run_local(c)
    flux = FluxFunction.for_velocity(Identity())
    b1 = TestBump(0.2, 0.0, 0.15, 0.3)
    b2 = TestBump(0.3, 0.1, 0.15, 0.3)
    beta = EntropyFlux(Quadratic(), flux, -1.1, 1.1)
    e1 = entropy_functional(traj, Quadratic(), b1, flux, beta)
    e2 = entropy_functional(traj, Quadratic(), b2, flux, beta)

    class Sum(TestBump):
        def phi(self, t, x):
            return b1.phi(t, x) + b2.phi(t, x)

        def phi_t(self, t, x):
            return b1.phi_t(t, x) + b2.phi_t(t, x)

        def phi_x(self, t, x):
            return b1.phi_x(t, x) + b2.phi_x(t, x)

    both = Sum(0.25, 0.05, 0.2, 0.4)  # support covers both bumps
    assert entropy_functional(traj, Quadratic(), both, flux, beta) == pytest.approx(e1 + e2, abs=1e-12)


@pytest.mark.parametrize("n", [1000, 2000])
def test_godunov_shock_entropy(n):
    c = SimConfig(build_grid(-1.5, 1.5, n), InitialDatum([-1.0, 0.0], [1.0]), Identity(), 0.5)
    traj = run_local(c)
    flux = FluxFunction.for_velocity(Identity())
    # straddles the shock path x = t around t = 0.2
    b = TestBump(0.2, 0.2, 0.15, 0.3)
    e = entropy_functional(traj, Quadratic(), b, flux)
    assert e >= -10 * c.grid.dx * b.scale()


def test_trajectory_too_coarse():
    traj = _constant_trajectory(0.5, n_times=11)
    with pytest.raises(InsufficientTrajectoryResolution):
        entropy_functional(traj, Quadratic(), TestBump(0.5, 0.0, 0.3, 0.5), FluxFunction.for_velocity(Identity()))


def test_bump_beyond_trajectory():
    traj = _constant_trajectory(0.5, t_end=0.5)
    with pytest.raises(ValidationError):
        entropy_functional(traj, Quadratic(), TestBump(0.4, 0.0, 0.3, 0.5), FluxFunction.for_velocity(Identity()))


# ------------------------------------------------------------------------ norms


def test_l1_identical():
    g = build_grid(0, 1, 10)
    a = CellField(g, np.arange(10.0))
    assert l1_distance(a, a) == 0.0


def test_l1_indicator_mass():
    g = build_grid(-1, 2, 300)
    a = sample_datum(InitialDatum([0, 1], [1]), g)
    assert l1_distance(a, CellField.zeros(g), (0, 1)) == pytest.approx(1.0, abs=1e-12)


def test_l1_random_matches_direct_sum():
    rng = np.random.default_rng(3)
    g = build_grid(0, 1, 50)
    a = CellField(g, rng.normal(size=50))
    b = CellField(g, rng.normal(size=50))
    direct = 0.0
    for i in range(50):
        direct += abs(a.values[i] - b.values[i]) * g.dx
    assert l1_distance(a, b) == pytest.approx(direct, rel=1e-14)


def test_l1_partial_overlap():
    g = build_grid(0, 1, 4)
    a = CellField(g, [1.0, 1.0, 1.0, 1.0])
    assert l1_distance(a, CellField.zeros(g), (0.1, 0.6)) == pytest.approx(0.5)


def test_l1_grid_mismatch():
    with pytest.raises(GridMismatch):
        l1_distance(CellField.zeros(build_grid(0, 1, 4)), CellField.zeros(build_grid(0, 1, 5)))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 20), elements=st.floats(-10, 10)))
def test_l1_metric(vals):
    g = build_grid(0, 1, 20)
    a, b, c = (CellField(g, v) for v in vals)
    assert l1_distance(a, b) == pytest.approx(l1_distance(b, a), abs=1e-15)
    assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12


def test_total_variation_examples():
    g = build_grid(-2, 3, 500)
    assert total_variation(CellField(g, np.full(500, 2.0))) == 0.0
    assert total_variation(sample_datum(InitialDatum([0, 1], [1]), g)) == pytest.approx(2.0)
    top = sample_datum(InitialDatum([-0.5, 0, 0.5], [-0.5, 1]), g)
    assert total_variation(top) == pytest.approx(0.5 + 1.5 + 1.0)


def test_coarsen_examples():
    g = build_grid(0, 1, 4)
    f = CellField(g, [1.0, 3.0, 5.0, 7.0])
    np.testing.assert_array_equal(coarsen(f, 2).values, [2.0, 6.0])
    np.testing.assert_array_equal(coarsen(f, 1).values, f.values)
    assert np.all(coarsen(CellField(build_grid(0, 1, 12), np.full(12, 0.3)), 4).values == pytest.approx(0.3))


def test_coarsen_incompatible():
    with pytest.raises(IncompatibleFactor):
        coarsen(CellField.zeros(build_grid(0, 1, 10)), 3)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 24, elements=st.floats(-5, 5)), st.sampled_from([1, 2, 3, 4, 6, 8, 12]))
def test_coarsen_conserves_mass(vals, factor):
    f = CellField(build_grid(-1, 1, 24), vals)
    assert coarsen(f, factor).mass() == pytest.approx(f.mass(), abs=1e-12)
