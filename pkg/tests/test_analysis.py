import math

import numpy as np
import pytest

from nskorteweg import ModelParams
from nskorteweg.analysis import (Besov, GaussianDatum, Lebesgue, Sobolev, fit_decay, lowfreq_eval,
                                 norm, state_l2, state_sobolev_norm)
from nskorteweg.errors import CaseError, FitError, ShapeError
from nskorteweg.field import Grid, SpectralState, random_state, transform
from nskorteweg.green import green_matrix
from nskorteweg.spectrum import band_abscissa_c0


def test_lebesgue_norms_of_constant():
    g = Grid(2, 16, L=2.0)
    c = transform(np.full(g.shape, 3.0), g)
    assert norm(c, Lebesgue(2), g) == pytest.approx(6.0)
    assert norm(c, Lebesgue(1), g) == pytest.approx(12.0)
    assert norm(c, Lebesgue(math.inf), g) == pytest.approx(3.0)


def test_l2_of_cosine_and_sobolev_weight():
    g = Grid(1, 32)
    x = g.coords()[0]
    c = transform(np.cos(3 * x), g)
    assert norm(c, Lebesgue(2), g) == pytest.approx(math.sqrt(math.pi))
    assert norm(c, Sobolev(1.0), g) == pytest.approx(math.sqrt(10 * math.pi))


def test_vector_fields_use_euclidean_magnitude():
    g = Grid(2, 16)
    x = g.coords()
    v = np.stack([np.cos(x[0]), np.sin(x[0])])
    assert norm(transform(v, g), Lebesgue(math.inf), g) == pytest.approx(1.0)
    assert norm(transform(v, g), Lebesgue(4), g) == pytest.approx(math.sqrt(2 * math.pi))


def test_state_norms_agree_with_generic(rng):
    s = random_state(Grid(2, 16), seed=3)
    assert state_l2(s) == pytest.approx(norm(s, Lebesgue(2)))
    g = s.grid
    w = 1 + g.k2()
    want = math.sqrt(norm(s.pi_hat, Sobolev(2.0), g) ** 2 + norm(s.m_hat, Sobolev(1.0), g) ** 2)
    assert state_sobolev_norm(s, 1.0) == pytest.approx(want)


def test_exponent_validation():
    with pytest.raises(ValueError):
        Lebesgue(0.5)
    with pytest.raises(ValueError):
        Besov(1.0, 2.0, 0.0)
    with pytest.raises(ShapeError):
        norm(np.zeros((3, 4)), Lebesgue(2), Grid(2, 8))


def test_sobolev_monotone_in_s(rng):
    s = random_state(Grid(2, 32), seed=5)
    vals = [norm(s, Sobolev(x)) for x in (-1, 0, 0.5, 1, 2)]
    assert np.all(np.diff(vals) > 0)
    assert vals[1] == pytest.approx(norm(s, Lebesgue(2)))


def test_besov_zero_smoothness_comparable_to_l2():
    for seed in range(5):
        s = random_state(Grid(2, 64), decay=1.0, seed=seed)
        ratio = norm(s, Besov(0.0, 2.0, 2.0)) / norm(s, Lebesgue(2))
        assert 0.5 <= ratio <= 2.0


def test_besov_single_block_weight():
    g = Grid(1, 64)
    x = g.coords()[0]
    c = transform(np.cos(12 * x), g)
    # |k| = 12 lies in blocks j = 3 (8..32) and j = 2 (4..16)
    b0 = norm(c, Besov(0.0, 2.0, math.inf), g)
    b1 = norm(c, Besov(1.0, 2.0, math.inf), g)
    assert 2 <= b1 / b0 <= 8


def test_fit_decay_recovers_power():
    t = np.geomspace(1, 1e3, 10)
    fit = fit_decay(t, 3 * t**-1.5)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3))
    assert fit.max_residual <= 1e-12


def test_fit_decay_errors():
    t = np.geomspace(1, 10, 8)
    with pytest.raises(FitError):
        fit_decay(t[:7], t[:7])
    with pytest.raises(FitError):
        fit_decay(t, -t)
    with pytest.raises(FitError):
        fit_decay(t, np.append(t[:7], np.nan))
    with pytest.raises(FitError):
        fit_decay(t, t[:5])


def test_gaussian_transform_normalisation():
    d = GaussianDatum(sigma=0.7, density=2.0, momentum=(0.0, 1.0))
    v = d.transform(np.zeros((2, 1)))
    assert v[0, 0] == pytest.approx(2 * 2 * math.pi * 0.49)
    with pytest.raises(ShapeError):
        d.transform(np.zeros((3, 1)))


def test_lowfreq_guards(case1):
    d = GaussianDatum()
    with pytest.raises(ValueError):
        lowfreq_eval(case1, d, 0.0, [[0.0, 0.0]])
    with pytest.raises(ShapeError):
        lowfreq_eval(case1, d, 1.0, [[0.0, 0.0, 0.0]])
    p = ModelParams.from_coefficients(1, 1, 1, 0.0)
    with pytest.raises(CaseError):
        lowfreq_eval(p, d, 1.0, [[0.0, 0.0]])


def test_lowfreq_quadrature_refinement(case1):
    d = GaussianDatum()
    pts = np.array([[0.0, 0.0], [3.0, -2.0], [10.0, 5.0]])
    a = lowfreq_eval(case1, d, 100.0, pts, nodes=128)
    b = lowfreq_eval(case1, d, 100.0, pts, nodes=256)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.abs(b).max()


def test_lowfreq_sup_decreases(case1):
    d = GaussianDatum()
    pts = np.array([[x, y] for x in np.linspace(-40, 40, 9) for y in np.linspace(-40, 40, 9)])
    s1 = np.abs(lowfreq_eval(case1, d, 100.0, pts)).max()
    s2 = np.abs(lowfreq_eval(case1, d, 400.0, pts)).max()
    assert s2 < s1


def test_lowfreq_solenoidal_heat_closed_form(case1):
    # a divergence-free Gaussian curl only diffuses: variance grows by 2 mu t
    sigma, t = 1.0, 200.0
    d = GaussianDatum(sigma=sigma, density=0.0, momentum=(0.0, 0.0), solenoidal=1.0)
    pts = np.array([[x, y] for x in np.linspace(-30, 30, 7) for y in np.linspace(-30, 30, 7)])
    got = lowfreq_eval(case1, d, t, pts)
    v = sigma**2 + 2 * case1.mu * t
    G = (sigma**2 / v) * np.exp(-np.sum(pts**2, axis=1) / (2 * v))
    want_m1 = -pts[:, 1] / v * G
    want_m2 = pts[:, 0] / v * G
    scale = np.abs(want_m1).max()
    assert np.abs(got[:, 0]).max() <= 1e-9 * scale
    assert np.abs(got[:, 1] - want_m1).max() <= 1e-9 * scale
    assert np.abs(got[:, 2] - want_m2).max() <= 1e-9 * scale


def test_band_bound_fails_in_operator_norm(case1):
    """Worst-case single-mode amplification against exp(-0.95 c0 t).

    Values frozen from a direct sweep: the constant-free band bound is not a
    pointwise operator statement, which is why the band check uses
    generic band-limited data.
    """
    c0 = band_abscissa_c0(case1)
    t = np.linspace(0, 5 / c0, 2001)
    worst = {}
    for r in (1.0, 1.5):
        worst[r] = max(np.linalg.norm(green_matrix(case1, [r, 0.0], s).entries, 2) * math.exp(0.95 * c0 * s)
                       for s in t)
    assert worst[1.0] == pytest.approx(1.4182, abs=1e-3)
    assert worst[1.5] == pytest.approx(1.2304, abs=1e-3)


def test_bernstein_lp_lq_exponent_uses_dimension():
    """L2 -> L4 growth of a concentrated ball-limited field scales like lambda^(n/4)."""
    from nskorteweg.field import BandSpec, band_profile
    g = Grid(2, 256)
    r = np.sqrt(g.k2())
    lams = np.array([2.0, 4.0, 8.0, 16.0])
    ratios = []
    for lam in lams:
        c = band_profile(BandSpec("dyadic", j=-1), r / lam) + 0j
        q4 = norm(c, Lebesgue(4), g)
        q2 = norm(c, Lebesgue(2), g)
        assert q4 <= 8 * lam ** (g.n * (1 / 2 - 1 / 4)) * q2
        ratios.append(q4 / q2)
    slope = np.polyfit(np.log(lams), np.log(ratios), 1)[0]
    assert slope == pytest.approx(g.n * (1 / 2 - 1 / 4), abs=0.05)
