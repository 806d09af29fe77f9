import math

import numpy as np
import pytest
import sympy as sp

from nskorteweg import ModelParams
from nskorteweg.analysis import state_l2
from nskorteweg.dynamics import (Scheme, SolverConfig, etd_weights, nonlinearity_F, picard_solve,
                                 solve, step)
from nskorteweg.errors import NonFiniteError, RegimeError, ShapeError, VacuumError
from nskorteweg.field import Grid, SpectralState, random_state, transform
from nskorteweg.green import propagate
from nskorteweg.model import PowerLaw, validate


def _symbolic_forcing(form):
    """1-D momentum forcing built from the balance law with P(rho) = rho^3."""
    x, eps = sp.symbols("x epsilon", real=True)
    mu, nu, kappa = sp.Rational(1), sp.Rational(1, 2), sp.Rational(3, 10)
    pi = eps * sp.cos(x)
    m = eps * sp.sin(2 * x) / 2
    rho = 1 + pi
    P = lambda r: r**3
    gamma = 3
    d = lambda f, k=1: sp.diff(f, x, k)
    F = -d(m**2 / rho) - (mu + nu) * d(pi * m / rho, 2) - d(P(rho) - P(1) - gamma * pi)
    if form == "physical":
        F += kappa * pi * d(pi, 3)
    else:
        F += -kappa * (pi * d(pi, 3) - 2 * d(pi) * d(pi, 2))
    return sp.lambdify((x, eps), F, "numpy"), (float(mu), float(nu), float(kappa))


@pytest.mark.parametrize("form", ["reformulated", "physical"])
def test_forcing_matches_symbolic_oracle(form):
    fn, (mu, nu, kappa) = _symbolic_forcing(form)
    p = validate(mu, nu, kappa, PowerLaw(1.0, 3.0), n=1)
    g = Grid(1, 32)
    x = g.coords()[0]
    eps = 0.01
    s = SpectralState.from_physical(g, eps * np.cos(x), (eps * np.sin(2 * x) / 2)[None])
    got = transform(nonlinearity_F(s, p, korteweg=form), g, inverse=True).real[0]
    want = fn(x, eps)
    # round-off grows like eps * kmax^3 through the capillary derivatives
    assert np.max(np.abs(got - want)) <= 1e-10 * np.abs(want).max()


def test_forcing_vanishes_at_rest(case1):
    s = SpectralState.zeros(Grid(2, 16))
    assert np.all(nonlinearity_F(s, case1) == 0)


def test_forcing_is_quadratic(case1):
    s = random_state(Grid(2, 32), 1.0, seed=8)
    def size(e):
        u = s.replace(pi_hat=e * s.pi_hat, m_hat=e * s.m_hat)
        return np.abs(nonlinearity_F(u, case1)).max()
    r = size(1e-4) / size(2e-4)
    assert r == pytest.approx(0.25, rel=1e-3)


def test_forcing_keeps_zero_mode_zero(case1):
    s = random_state(Grid(2, 32), 1e-2, seed=1)
    assert np.abs(nonlinearity_F(s, case1)[:, 0, 0]).max() <= 1e-20


def test_forcing_dimension_check(case1):
    with pytest.raises(ShapeError):
        nonlinearity_F(SpectralState.zeros(Grid(1, 16)), case1)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, steps=1)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, steps=1, floor=1.5)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, steps=1, korteweg="other")
    assert SolverConfig(dt=0.1, steps=1, scheme="PicardWindow").scheme is Scheme.PICARD_WINDOW


def test_linear_only_equals_propagator(case1):
    s = random_state(Grid(2, 16), seed=2)
    out = solve(s, case1, SolverConfig(dt=0.1, steps=5, linear_only=True)).final
    ref = propagate(s, 0.5, case1)
    assert np.max(np.abs(out.stacked() - ref.stacked())) <= 1e-15


def test_etd_weights_at_zero_mode(case1):
    h = 0.2
    w1, w2 = etd_weights(Grid(2, 8), case1, h)
    assert w1.trans[0, 0] == pytest.approx(h) and w1.long[0, 0] == pytest.approx(h)
    assert w2.trans[0, 0] == pytest.approx(h / 2) and w2.long[0, 0] == pytest.approx(h / 2)


def _order(scheme, params, state, T=1.0, dts=(0.1, 0.05, 0.025)):
    finals = [solve(state, params, SolverConfig(dt=dt, steps=round(T / dt), scheme=scheme)).final
              for dt in dts]
    return math.log2(state_l2(finals[0] - finals[1]) / state_l2(finals[1] - finals[2]))


def test_scheme_orders():
    p = ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=1, p2=1.0)
    s = random_state(Grid(1, 64), 0.05, seed=3)
    assert _order(Scheme.ETD1, p, s) == pytest.approx(1.0, abs=0.15)
    assert _order(Scheme.PICARD_WINDOW, p, s) == pytest.approx(2.0, abs=0.15)


def test_picard_window_close_to_etd2(case1):
    s = random_state(Grid(2, 16), 1e-3, seed=6)
    a = solve(s, case1, SolverConfig(dt=0.05, steps=10)).final
    b = solve(s, case1, SolverConfig(dt=0.05, steps=10, scheme="PicardWindow")).final
    assert state_l2(a - b) <= 1e-6 * state_l2(s)


def test_spatial_refinement():
    p = ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=1, p2=1.0)
    finals = []
    for N in (64, 128):
        g = Grid(1, N)
        x = g.coords()[0]
        s = SpectralState.from_physical(g, 0.05 * np.cos(x), (0.05 * np.sin(x))[None])
        finals.append(solve(s, p, SolverConfig(dt=0.05, steps=20)).final)
    a, b = finals
    diff = max(np.abs(b.pi_hat[:5] - a.pi_hat[:5]).max(), np.abs(b.m_hat[:, :5] - a.m_hat[:, :5]).max())
    assert diff <= 1e-8


def test_vacuum_halts_with_trajectory(case1):
    g = Grid(2, 16)
    x = g.coords()
    s = SpectralState.from_physical(g, -0.95 * np.cos(x[0]) ** 2, np.zeros((2,) + g.shape))
    with pytest.raises(VacuumError) as info:
        solve(s, case1, SolverConfig(dt=0.01, steps=5))
    traj = info.value.trajectory
    assert traj.status == "vacuum" and len(traj.states) == 1


def test_nonfinite_halts_with_trajectory(case1):
    s = random_state(Grid(2, 16), seed=1)
    s.pi_hat[1, 1] = np.nan
    with pytest.raises(NonFiniteError) as info:
        solve(s, case1, SolverConfig(dt=0.01, steps=5))
    assert info.value.trajectory.status == "nonfinite"


def test_regime_guard():
    s = random_state(Grid(2, 16), seed=1)
    excluded = ModelParams.from_coefficients(1, 1, 2.0, 0.0)
    spinodal = ModelParams.from_coefficients(1, 1, 0.5, -1.0)
    for p in (excluded, spinodal):
        with pytest.raises(RegimeError):
            solve(s, p, SolverConfig(dt=0.01, steps=1))
        with pytest.raises(RegimeError):
            picard_solve(s, p, 0.1, 2, mesh_steps=5)
        solve(s, p, SolverConfig(dt=0.01, steps=1, override=True))


def test_fields_stay_real_and_diagnostics(case1):
    s = random_state(Grid(2, 32), 1e-3, seed=4)
    tr = solve(s, case1, SolverConfig(dt=0.05, steps=20, cadence=5))
    assert len(tr.times) == 5 and tr.times[-1] == pytest.approx(1.0)
    assert max(tr.max_imag) <= 1e-12
    assert len(tr.rows()[0]) == 5
    assert abs(tr.mass[-1] - tr.mass[0]) <= 1e-15


def test_single_step_time_stamp(case1):
    s = random_state(Grid(2, 8), seed=1)
    assert step(s, case1, SolverConfig(dt=0.25, steps=1)).t == 0.25


def test_picard_iterates_contract(case1):
    s = random_state(Grid(2, 16), 1e-3, seed=2)
    res = picard_solve(s, case1, 0.5, 3, mesh_steps=20)
    assert len(res.paths) == 4 and res.differences.shape == (3,)
    assert np.all(res.ratios <= 0.75)
    with pytest.raises(ValueError):
        picard_solve(s, case1, 0.5, 1)
