import math

import mpmath
import numpy as np
import pytest

from nskorteweg import ModelParams
from nskorteweg.errors import NodeError, ShapeError
from nskorteweg.field import Grid, random_state
from nskorteweg.green import (divided_diff_exp, exp_divided_differences, green_coefficients,
                              green_matrix, green_matrix_contour, propagate)
from nskorteweg.oracles import mode_matrix, rk4_propagators
from nskorteweg.spectrum import eigenvalues
from scipy.linalg import expm


def _mp_dd(lp, lm, t):
    mpmath.mp.dps = 50
    lp, lm = mpmath.mpc(lp), mpmath.mpc(lm)
    if lp == lm:
        return complex(t * mpmath.exp(lp * t))
    return complex((mpmath.exp(lp * t) - mpmath.exp(lm * t)) / (lp - lm))


@pytest.mark.parametrize("lp,lm,t", [
    (-1.0, -1.0, 2.0),
    (-1.0 + 1e-9, -1.0, 2.0),
    (-1 + 2j, -1 - 2j, 0.7),
    (0.0, -3.0, 1.0),
    (-4.0, -1e-12, 5.0),
    (-400.0, -0.01, 1.0),
    (-2 + 1e-5j, -2 - 1e-5j, 3.0),
])
def test_divided_difference_matches_high_precision(lp, lm, t):
    ref = _mp_dd(lp, lm, t)
    assert abs(divided_diff_exp(lp, lm, t) - ref) <= 1e-13 * max(abs(ref), 1e-300)


def test_divided_difference_confluent_example():
    assert divided_diff_exp(-1.0, -1.0, 2.0) == pytest.approx(2 * math.exp(-2), rel=1e-15)


def test_divided_difference_rejects_negative_time():
    with pytest.raises(ValueError):
        divided_diff_exp(-1.0, -2.0, -0.1)


def test_divided_difference_vectorised():
    lp = np.array([-1.0, -2.0, -3 + 1j])
    lm = np.array([-1.0, -5.0, -3 - 1j])
    out = divided_diff_exp(lp, lm, 0.5)
    assert out.shape == (3,)
    for a, b, v in zip(lp, lm, out):
        assert abs(v - _mp_dd(a, b, 0.5)) <= 1e-14


def test_exp_divided_differences_against_mpmath(rng):
    mpmath.mp.dps = 100
    pts = rng.uniform(-3, 0, (20, 3)) + 1j * rng.uniform(-1, 1, (20, 3))
    pts[0] = [-1.0, -1.0 + 1e-10, -1.0]
    pts[1] = [0.0, 0.0, 0.0]
    h = 0.8

    def dd(zs):
        if len(zs) == 1:
            return mpmath.exp(h * zs[0])
        return (dd(zs[1:]) - dd(zs[:-1])) / (zs[-1] - zs[0])

    got = exp_divided_differences(pts, h)
    for row, val in zip(pts, got):
        # split coincident nodes far below double precision
        zs = [mpmath.mpc(complex(z)) + j * mpmath.mpf("1e-35") for j, z in enumerate(row)]
        ref = complex(dd(zs))
        assert abs(val - ref) <= 1e-13 * max(1.0, abs(ref))


def test_exp_divided_differences_confluent_closed_form():
    z = -0.7
    got = exp_divided_differences(np.array([[z, z, z]]), 1.5)[0]
    assert got == pytest.approx(1.5**2 * math.exp(1.5 * z) / 2, rel=1e-13)


def test_identity_at_time_zero(case1):
    for xi in ([0.3, -1.2], [2.0, 0.0], [0.0, 0.0]):
        G = green_matrix(case1, xi, 0.0).entries
        assert np.max(np.abs(G - np.eye(3))) <= 1e-15


def test_zero_frequency_is_identity(case1):
    G = green_matrix(case1, [0.0, 0.0], 3.0).entries
    assert np.max(np.abs(G - np.eye(3))) <= 1e-15


def test_wave_vector_dimension_checked(case1):
    with pytest.raises(ShapeError):
        green_matrix(case1, [1.0, 2.0, 3.0], 1.0)


def test_conjugate_symmetry(case1, rng):
    for _ in range(20):
        xi = rng.normal(size=2) * 3
        G = green_matrix(case1, xi, 0.4).entries
        Gm = green_matrix(case1, -xi, 0.4).entries
        assert np.max(np.abs(Gm - np.conj(G))) <= 1e-15


def test_rk4_reference_example(case1):
    xi = np.array([1.0, 0.0])
    R = rk4_propagators(mode_matrix(case1, xi)[None], [0.5], h=1e-5)[0, 0]
    G = green_matrix(case1, xi, 0.5).entries
    assert np.max(np.abs(G - R)) <= 1e-10
    assert np.max(np.abs(G - expm(0.5 * mode_matrix(case1, xi)))) <= 1e-13


def test_generic_directions_against_matrix_exponential(rng):
    p = ModelParams.from_coefficients(0.7, 1.9, 0.4, 1.3, n=3)
    for _ in range(30):
        xi = rng.normal(size=3) * rng.uniform(0.1, 3)
        t = rng.uniform(0.05, 1)
        G = green_matrix(p, xi, t).entries
        E = expm(t * mode_matrix(p, xi))
        assert np.max(np.abs(G - E)) <= 1e-12


def test_contour_matches_closed_form(case1, rng):
    for _ in range(20):
        xi = rng.normal(size=2) * 2
        G = green_matrix(case1, xi, 1.0).entries
        C = green_matrix_contour(case1, xi, 1.0, nodes=128).entries
        assert np.max(np.abs(G - C)) <= 1e-10


def test_contour_node_floor(case1):
    with pytest.raises(NodeError):
        green_matrix_contour(case1, [1.0, 0.0], 1.0, nodes=8)


def test_continuity_across_crossover(case1):
    B = case1.B
    Gs = [green_matrix(case1, [r, 0.0], 1.0).entries for r in (B * (1 - 1e-7), B, B * (1 + 1e-7))]
    assert np.all(np.isfinite(Gs))
    assert np.max(np.abs(Gs[0] - Gs[1])) <= 1e-6
    assert np.max(np.abs(Gs[2] - Gs[1])) <= 1e-6


def test_semigroup_property(case1, rng):
    for _ in range(10):
        xi = rng.normal(size=2) * 2
        a, b = rng.uniform(0, 1, 2)
        lhs = green_matrix(case1, xi, a + b).entries
        rhs = green_matrix(case1, xi, a).entries @ green_matrix(case1, xi, b).entries
        assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_coefficients_are_real_and_stable_at_large_frequency(case1):
    c = green_coefficients(case1, np.array([1e3, 1e4]), 1.0)
    for arr in (c.c_pp, c.dd, c.ddp, c.heat):
        assert np.all(np.isfinite(arr)) and np.isrealobj(arr)


def test_longitudinal_factor_is_root_combination(case1):
    r, t = 0.8, 0.9
    ep = eigenvalues(case1, r)
    lp, lm = ep.lambda_plus, ep.lambda_minus
    want = (lp * np.exp(lp * t) - lm * np.exp(lm * t)) / (lp - lm)
    assert green_coefficients(case1, r, t).ddp == pytest.approx(want.real, rel=1e-13)


def test_propagate_zero_time_is_bitwise_identity(case1):
    s = random_state(Grid(2, 16), seed=3)
    out = propagate(s, 0.0, case1)
    assert np.array_equal(out.pi_hat, s.pi_hat) and np.array_equal(out.m_hat, s.m_hat)


def test_propagate_plane_wave(case1):
    g = Grid(2, 16)
    x = g.coords()
    pi = 1e-3 * np.cos(2 * x[0])
    m = np.zeros((2,) + g.shape)
    from nskorteweg.field import SpectralState
    s = SpectralState.from_physical(g, pi, m)
    out = propagate(s, 0.5, case1)
    G = green_matrix(case1, [2.0, 0.0], 0.5).entries
    assert out.pi_hat[2, 0] == pytest.approx(G[0, 0] * s.pi_hat[2, 0], abs=1e-18)
    assert out.m_hat[0, 2, 0] == pytest.approx(G[1, 0] * s.pi_hat[2, 0], abs=1e-18)
    assert out.t == 0.5


def test_propagate_matches_per_mode_rk4(case1):
    g = Grid(2, 32)
    s = random_state(g, amplitude=1.0, decay=1.0, seed=5)
    t, h = 0.1, 1e-4
    out = propagate(s, t, case1)
    k = g.k_propagator().reshape(2, -1).T
    mats = np.stack([mode_matrix(case1, kv) for kv in k])
    R = rk4_propagators(mats, [t], h=h)[0]
    U0 = s.stacked().reshape(3, -1).T
    ref = np.einsum("bij,bj->bi", R, U0).T.reshape((3,) + g.shape)
    scale = np.abs(s.stacked()).max()
    assert np.max(np.abs(out.stacked() - ref)) <= 1e-7 * scale


def test_propagate_keeps_fields_real(case1):
    s = random_state(Grid(2, 32), seed=9)
    out = propagate(s, 0.7, case1)
    _, _, imag = out.to_physical(return_imag=True)
    assert imag <= 1e-15


def test_propagate_semigroup_on_grid(case1):
    s = random_state(Grid(2, 16), seed=1)
    a = propagate(propagate(s, 0.3, case1), 0.4, case1)
    b = propagate(s, 0.7, case1)
    assert np.max(np.abs(a.stacked() - b.stacked())) <= 1e-15
