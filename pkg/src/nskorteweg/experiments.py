"""Reproducible verification experiments.

Each ``check_*`` function runs one experiment and returns a list of records
``{check, value, expected, tolerance, pass}``.  The test suite and the
``verify`` subcommand both consume these.
"""
from __future__ import annotations

import math
import time
from typing import Callable, Dict, List

import numpy as np

from .analysis import GaussianDatum, Lebesgue, fit_decay, lowfreq_eval, norm, state_l2
from .dynamics import SolverConfig, picard_solve, solve
from .errors import RegimeError
from .field import (Band, BandSpec, Grid, SpectralState, apply_symbol, band_profile,
                    random_state)
from .green import green_matrix, green_matrix_contour, propagate
from .model import (ModelParams, Phase, Polynomial, PowerLaw, VanDerWaals, classify_phase,
                    eval_pressure, helmholtz_W)
from .oracles import mode_matrix, rk4_propagators
from .spectrum import band_abscissa_c0, roots

__all__ = ["CHECKS", "run_checks", "reference_params"]


def _rec(check, value, expected, tolerance, passed):
    return {"check": check, "value": float(value), "expected": expected,
            "tolerance": tolerance, "pass": bool(passed)}


def reference_params(n: int = 2, p2: float = 0.0) -> ModelParams:
    """Case 1 reference: mu = nu = 1, kappa = 1/2, gamma = 2 (so B = 2)."""
    return ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=n, p2=p2)


def _draw_params(rng, case: int, n: int) -> ModelParams:
    floor = max((n - 2) / n, 0.0)
    mu = rng.uniform(0.2, 2.0)
    nu = rng.uniform(floor * mu + 0.05, 2.0)
    A2 = (0.5 * (mu + nu)) ** 2
    kappa = {1: A2 * rng.uniform(0.1, 0.9), 2: A2 * rng.uniform(1.1, 3.0), 3: A2,
             4: A2 * rng.uniform(0.1, 0.9), 5: A2 * rng.uniform(1.1, 3.0), 6: A2}[case]
    gamma = rng.uniform(0.5, 3.0) if case <= 3 else 0.0
    return ModelParams.from_coefficients(mu, nu, kappa, gamma, n=n)


def _entry_rel(G, R):
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(R == 0, np.where(G == 0, 0.0, np.inf), np.abs(G - R) / np.abs(R))
    return float(rel.max())


# --------------------------------------------------------------------------
def check_green_oracle(draws: int = 50, seed: int = 2024, h: float = 1e-5) -> List[dict]:
    """Green matrix against RK4 on the Fourier system.

    Wave vectors lie along a random coordinate axis so that the transverse
    block is exactly decoupled in floating point; along a generic direction
    the RK4 oracle leaks the slowly decaying transverse mode into entries
    that are smaller by ``exp(-(A - mu)|xi|^2 t)`` and cannot resolve them.
    """
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    cases = [1, 2, 3, 4, 5, 6]
    items = []
    for i in range(draws):
        n = int(rng.integers(1, 4))
        p = _draw_params(rng, cases[i % 6], n)
        r = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        xi = np.zeros(n)
        xi[rng.integers(n)] = r * rng.choice([-1.0, 1.0])
        items.append((p, xi))
    times = [0.1, 1.0]
    worst = 0.0
    for n in (1, 2, 3):
        idx = [i for i, (p, _) in enumerate(items) if p.n == n]
        if not idx:
            continue
        ref = rk4_propagators(np.array([mode_matrix(*items[i]) for i in idx]), times, h)
        for j, t in enumerate(times):
            for b, i in enumerate(idx):
                worst = max(worst, _entry_rel(green_matrix(*items[i], t).entries, ref[j, b]))
    elapsed = time.perf_counter() - start
    return [_rec("green_vs_rk4_max_rel_error", worst, 0.0, 1e-8, worst <= 1e-8),
            _rec("green_vs_rk4_runtime_s", elapsed, 0.0, 60.0, elapsed <= 60.0)]


def check_crossing(nodes: int = 128) -> List[dict]:
    p = reference_params()
    B = p.B
    fin, agree, indep = True, 0.0, 0.0
    for r in (B, B * (1 - 1e-6), B * (1 + 1e-6)):
        for direction in ((1.0, 0.0), (0.6, 0.8)):
            xi = r * np.array(direction)
            G = green_matrix(p, xi, 1.0).entries
            C = green_matrix_contour(p, xi, 1.0, nodes=nodes).entries
            C2 = green_matrix_contour(p, xi, 1.0, nodes=nodes, radius_factor=3.0).entries
            fin &= bool(np.all(np.isfinite(G)))
            agree = max(agree, float(np.abs(G - C).max()))
            indep = max(indep, float(np.abs(C - C2).max()))
    return [_rec("crossing_finite", float(fin), 1.0, 0.0, fin),
            _rec("crossing_contour_agreement", agree, 0.0, 1e-8, agree <= 1e-8),
            _rec("contour_radius_independence", indep, 0.0, 1e-9, indep <= 1e-9)]


def check_characteristic_ode(modes: int = 100, seed: int = 7) -> List[dict]:
    """Five-point residual of the scalar second-order equation for the density."""
    rng = np.random.default_rng(seed)
    worst_ode, worst_cont = 0.0, 0.0
    cases = [1, 2, 3, 4, 6]
    for i in range(modes):
        n = int(rng.integers(1, 4))
        p = _draw_params(rng, cases[i % 5], n)
        d = rng.standard_normal(n)
        r = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        xi = r * d / np.linalg.norm(d)
        U0 = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        t = rng.uniform(0.1, 2.0)
        lam = max(abs(complex(z)) for z in roots(p, r))
        h = 1e-2 / max(1.0, lam)

        def phi(s):
            return green_matrix(p, xi, s).entries @ U0

        f = [phi(t + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0][0] - 8 * f[1][0] + 8 * f[3][0] - f[4][0]) / (12 * h)
        d2 = (-f[0][0] + 16 * f[1][0] - 30 * f[2][0] + 16 * f[3][0] - f[4][0]) / (12 * h * h)
        s = p.gamma + p.kappa * r * r
        terms = (d2, (p.mu + p.nu) * r * r * d1, s * r * r * f[2][0])
        scale = max(abs(x) for x in terms)
        if scale > 0:
            worst_ode = max(worst_ode, abs(sum(terms)) / scale)
        rhs = -1j * (xi @ f[2][1:])
        cscale = max(abs(d1), r * np.linalg.norm(f[2][1:]))
        worst_cont = max(worst_cont, abs(d1 - rhs) / cscale)
    return [_rec("char_ode_rel_residual", worst_ode, 0.0, 1e-6, worst_ode <= 1e-6),
            _rec("continuity_rel_residual", worst_cont, 0.0, 1e-6, worst_cont <= 1e-6)]


def check_transverse(seed: int = 11) -> List[dict]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3):
        for case in (1, 2, 4, 6):
            p = _draw_params(rng, case, n)
            for _ in range(5):
                xi = rng.uniform(-5, 5, n)
                v = rng.standard_normal(n)
                v -= (v @ xi) / (xi @ xi) * xi
                t = rng.uniform(0.05, 2.0)
                out = green_matrix(p, xi, t).entries @ np.concatenate([[0.0], v])
                exact = math.exp(-p.mu * (xi @ xi) * t) * v
                worst = max(worst, float(np.abs(out[1:] - exact).max()), abs(out[0]))
    # plane wave on a grid
    p = reference_params()
    g = Grid(2, 16)
    s = SpectralState.zeros(g)
    s.m_hat[1, 3, 0] = 0.5
    s.m_hat[1, -3, 0] = 0.5
    out = propagate(s, 0.3, p)
    exact = 0.5 * math.exp(-p.mu * 9 * 0.3)
    grid_err = max(abs(out.m_hat[1, 3, 0] - exact), abs(out.m_hat[1, -3, 0] - exact),
                   float(np.abs(out.pi_hat).max()), float(np.abs(out.m_hat[0]).max()))
    worst = max(worst, grid_err)
    return [_rec("transverse_decoupling_error", worst, 0.0, 1e-12, worst <= 1e-12)]


def decay_samples(params: ModelParams, t: float, points_per_axis: int = 13,
                  ring_angles: int = 16) -> np.ndarray:
    """Sample points for the sup norm: a heat-scale patch and the sound ring."""
    y = np.linspace(-3.0, 3.0, points_per_axis)
    patch = np.stack(np.meshgrid(y, y, indexing="ij")).reshape(2, -1).T * math.sqrt(t)
    th = np.linspace(0.0, 2 * math.pi, ring_angles, endpoint=False)
    rad = math.sqrt(max(params.gamma, 0.0)) * t + math.sqrt(t) * y
    ring = np.stack([np.outer(rad, np.cos(th)).ravel(), np.outer(rad, np.sin(th)).ravel()]).T
    return np.vstack([patch, ring])


def lowfreq_sup_series(params, datum, times):
    sups = []
    for t in times:
        v = lowfreq_eval(params, datum, t, decay_samples(params, t))
        sups.append(float(np.sqrt((v**2).sum(axis=1)).max()))
    return np.array(sups)


def check_lowfreq_decay(samples: int = 9, tmin: float = 1e2, tmax: float = 1e4,
                        expected: float = -1.0, tol: float = 0.1,
                        datum: GaussianDatum = GaussianDatum(1.0, 1.0, (1.0, 1.0))) -> List[dict]:
    p = reference_params()
    start = time.perf_counter()
    times = np.geomspace(tmin, tmax, samples)
    fit = fit_decay(times, lowfreq_sup_series(p, datum, times))
    elapsed = time.perf_counter() - start
    return [_rec("lowfreq_linf_slope", fit.slope, expected, tol, abs(fit.slope - expected) <= tol),
            _rec("lowfreq_runtime_s", elapsed, 0.0, 300.0, elapsed <= 300.0)]


def check_band_decay(seeds=(0, 1, 2, 3), eps: float = 0.05) -> List[dict]:
    """``||T(t) U0|| / ||U0||`` against ``exp(-c0 (1 - eps) t)`` on ``[0, 5/c0]``."""
    p = reference_params()
    c0 = band_abscissa_c0(p)
    g = Grid(2, 64, 8 * math.pi)
    ts = np.linspace(0.0, 5.0 / c0, 101)
    out = []
    for kind in ("medium", "high"):
        worst = 0.0
        for seed in seeds:
            s = apply_symbol(random_state(g, 1.0, 0.0, seed), Band(BandSpec(kind, scale=p.B)))
            n0 = state_l2(s)
            for t in ts:
                worst = max(worst, state_l2(propagate(s, t, p)) / n0 * math.exp(c0 * (1 - eps) * t))
        out.append(_rec(f"{kind}_band_decay_ratio", worst, 1.0, 0.0, worst <= 1.0))
    return out


def _means(state):
    zero = (0,) * state.grid.n
    return np.concatenate([[state.pi_hat[zero]], state.m_hat[(slice(None),) + zero]])


def check_solver() -> List[dict]:
    out = []
    # (a) self-convergence
    p1 = ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=1, p2=1.0)
    s = random_state(Grid(1, 64), 0.05, seed=3)
    finals = [solve(s, p1, SolverConfig(dt=dt, steps=round(1.0 / dt))).final
              for dt in (0.1, 0.05, 0.025)]
    order = math.log2(state_l2(finals[0] - finals[1]) / state_l2(finals[1] - finals[2]))
    out.append(_rec("etd2_self_convergence_order", order, 2.0, 0.1, 1.9 <= order <= 2.1))
    # (b) zero modes over 1000 steps
    p2 = reference_params(p2=1.0)
    s = random_state(Grid(2, 32), 1e-3, seed=4)
    tr = solve(s, p2, SolverConfig(dt=0.01, steps=1000, cadence=1000))
    drift = float(np.abs(_means(tr.final) - _means(s)).max())
    out.append(_rec("zero_mode_drift", drift, 0.0, 1e-12, drift <= 1e-12))
    # (c), (d) 64^2 small-data run
    s = random_state(Grid(2, 64), 1e-3, seed=5)
    tr = solve(s, p2, SolverConfig(dt=0.05, steps=200, cadence=20))
    ratio = tr.l2[-1] / tr.l2[0]
    out.append(_rec("l2_final_over_initial", ratio, 1.0, 0.0, ratio < 1.0))
    imag = max(tr.max_imag)
    out.append(_rec("max_imaginary_part", imag, 0.0, 1e-12, imag <= 1e-12))
    return out


def check_picard() -> List[dict]:
    p = reference_params(p2=1.0)
    s = random_state(Grid(2, 32), 1e-3, seed=5)
    res = picard_solve(s, p, 1.0, 4, mesh_steps=50)
    ratios = res.ratios
    out = [_rec(f"picard_ratio_d{j + 2}_d{j + 1}", ratios[j], 0.0, 0.75, ratios[j] <= 0.75)
           for j in (0, 1)]
    tr = solve(s, p, SolverConfig(dt=0.02, steps=50))
    gap = max(state_l2(a - b) for a, b in zip(res.paths[-1], tr.states)) / state_l2(s)
    out.append(_rec("picard_limit_vs_etd2", gap, 0.0, 1e-6, gap <= 1e-6))
    return out


def _fd_identity(law, rho, h=1e-5):
    dW = (helmholtz_W(law, rho + h) - helmholtz_W(law, rho - h)) / (2 * h)
    return abs(rho * dW - helmholtz_W(law, rho) - eval_pressure(law, rho)[0])


def check_thermo() -> List[dict]:
    laws = [PowerLaw(1.0, 1.0), PowerLaw(1.0, 2.0), PowerLaw(2.0, 1.4), PowerLaw(0.5, 3.0),
            VanDerWaals(1.0, 1.0, 3.0), VanDerWaals(1.0, 1.0, 3.0, "classical"),
            Polynomial((0.2, 1.0, -0.3, 0.1))]
    worst = max(_fd_identity(law, rho) for law in laws for rho in (0.5, 1.0, 2.0))
    vdw = VanDerWaals(1.0, 1.0, 3.0)
    rep = classify_phase(vdw, 1.0)
    phases = [classify_phase(vdw, r).phase for r in (0.1, 1.0, 2.5)]
    ok_phase = phases == [Phase.VAPOR, Phase.SPINODAL, Phase.LIQUID]
    return [_rec("helmholtz_identity_error", worst, 0.0, 1e-8, worst <= 1e-8),
            _rec("vdw_a1", rep.a1, 0.190, 0.01, abs(rep.a1 - 0.190) <= 0.01),
            _rec("vdw_a2", rep.a2, 2.17, 0.01, abs(rep.a2 - 2.17) <= 0.01),
            _rec("vdw_phase_labels", float(ok_phase), 1.0, 0.0, ok_phase)]


def check_regime() -> List[dict]:
    g = Grid(2, 32)
    s = random_state(g, 1e-3, seed=6)
    cfg = SolverConfig(dt=0.05, steps=4)
    refused = 0
    for p in (ModelParams.from_coefficients(1.0, 1.0, 2.0, 0.0),
              ModelParams.from_coefficients(1.0, 1.0, 0.5, -2.0)):
        try:
            solve(s, p, cfg)
        except RegimeError:
            refused += 1
    spin = ModelParams.from_coefficients(1.0, 1.0, 0.5, -2.0)
    tr = solve(s, spin, SolverConfig(dt=0.05, steps=40, cadence=40, override=True))
    a0 = np.abs(s.pi_hat)
    a1 = np.abs(tr.final.pi_hat)
    live = a0 > 1e-3 * a0.max()
    growth = float((a1[live] / a0[live]).max())
    return [_rec("regime_refusals", refused, 2.0, 0.0, refused == 2),
            _rec("spinodal_max_mode_growth", growth, 1.0, 0.0, growth > 1.0)]


def check_bernstein(N: int = 256, seed: int = 12) -> List[dict]:
    g = Grid(2, N)
    rng = np.random.default_rng(seed)
    k = g.k_odd()
    r = np.sqrt(g.k2())
    lo_worst, hi_worst = math.inf, 0.0
    for lam_exp in (1, 2, 3, 4):
        lam = 2.0**lam_exp
        f = apply_symbol(random_state(g, 1.0, 0.0, int(rng.integers(1 << 30))).pi_hat,
                         Band(BandSpec("dyadic", j=lam_exp)), g)
        # ball of radius 2 lam
        ball = random_state(g, 1.0, 0.0, int(rng.integers(1 << 30))).pi_hat * \
            band_profile(BandSpec("dyadic", j=-1), r / lam)
        for q in (2.0, 4.0):
            ratio = norm(1j * k * f, Lebesgue(q), g) / norm(f, Lebesgue(q), g)
            lo_worst = min(lo_worst, ratio / lam)
            hi_worst = max(hi_worst, ratio / lam)
            ratio_b = norm(1j * k * ball, Lebesgue(q), g) / norm(ball, Lebesgue(q), g)
            hi_worst = max(hi_worst, ratio_b / lam)
    return [_rec("bernstein_lower_ratio_over_lambda", lo_worst, 1 / 8, 0.0, lo_worst >= 1 / 8),
            _rec("bernstein_upper_ratio_over_lambda", hi_worst, 8.0, 0.0, hi_worst <= 8.0)]


CHECKS: Dict[str, Callable[[], List[dict]]] = {
    "green_oracle": check_green_oracle,
    "crossing": check_crossing,
    "characteristic_ode": check_characteristic_ode,
    "transverse": check_transverse,
    "lowfreq_decay": check_lowfreq_decay,
    "band_decay": check_band_decay,
    "solver": check_solver,
    "picard": check_picard,
    "thermo": check_thermo,
    "regime": check_regime,
    "bernstein": check_bernstein,
}

QUICK = ("green_oracle", "crossing", "characteristic_ode", "transverse", "thermo", "bernstein")


def run_checks(level: str = "quick") -> List[dict]:
    names = QUICK if level == "quick" else tuple(CHECKS)
    out = []
    for name in names:
        out.extend(CHECKS[name]())
    return out
