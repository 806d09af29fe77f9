"""Nonlinear forcing, exponential time stepping and Picard iteration.

The state ``U = (pi, m)`` evolves by ``U' = L U + N(U)`` where ``L`` is the
linear operator whose exact flow is :func:`nskorteweg.green.propagate` and
``N(U) = (0, F(pi, m))``.  Steps discretise

    U(t + h) = E(h) U(t) + int_0^h E(h - s) N(U(t + s)) ds.

ETD weights are matrix functions of the same per-mode block as the Green
matrix, evaluated as divided differences of ``exp`` at the characteristic
roots (see :func:`nskorteweg.green.exp_divided_differences`).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .analysis import state_sobolev_norm, state_l2
from .errors import NonFiniteError, RegimeError, ShapeError, VacuumError
from .field import Grid, SpectralState, dealias_mask, transform
from .green import exp_divided_differences, mode_coefficients, propagate
from .model import ModelParams
from .spectrum import roots

__all__ = [
    "Scheme",
    "SolverConfig",
    "Trajectory",
    "PicardResult",
    "nonlinearity_F",
    "etd_weights",
    "step",
    "solve",
    "picard_solve",
]


class Scheme(enum.Enum):
    ETD1 = "ETD1"
    ETD2 = "ETD2"
    PICARD_WINDOW = "PicardWindow"


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping settings.

    ``korteweg`` selects the capillary nonlinearity: ``"reformulated"`` uses
    the rewritten capillary tensor of this model, ``"physical"`` is the one
    obtained by expanding ``rho grad(lap rho)`` about ``rho = 1``.
    ``linear_only`` suppresses ``F`` entirely.
    """

    dt: float
    steps: int
    scheme: Scheme = Scheme.ETD2
    dealias: bool = True
    floor: float = 0.1
    cadence: int = 1
    override: bool = False
    korteweg: str = "reformulated"
    sobolev_s: float = 1.0
    linear_only: bool = False
    picard_tol: float = 1e-14
    picard_max: int = 50

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if not 0 < self.floor < 1:
            raise ValueError(f"density floor must lie in (0, 1), got {self.floor}")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        if self.korteweg not in ("reformulated", "physical"):
            raise ValueError(f"korteweg form must be 'reformulated' or 'physical', got {self.korteweg!r}")
        if not isinstance(self.scheme, Scheme):
            object.__setattr__(self, "scheme", Scheme(self.scheme))


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[SpectralState] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    momentum: List[np.ndarray] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    hs: List[float] = field(default_factory=list)
    min_density: List[float] = field(default_factory=list)
    max_imag: List[float] = field(default_factory=list)
    status: str = "ok"

    @property
    def final(self) -> SpectralState:
        return self.states[-1]

    def record(self, state: SpectralState, s: float):
        g = state.grid
        pi, _, imag = state.to_physical(return_imag=True)
        self.times.append(float(state.t))
        self.states.append(state)
        zero = (0,) * g.n
        self.mass.append(float(state.pi_hat[zero].real) * g.volume)
        self.momentum.append(state.m_hat[(slice(None),) + zero].real.copy())
        self.l2.append(state_l2(state))
        self.hs.append(state_sobolev_norm(state, s))
        self.min_density.append(1.0 + float(pi.min()))
        self.max_imag.append(imag)

    def rows(self):
        """Diagnostics as tuples ``(t, mass, l2, hs, min_density)``."""
        return list(zip(self.times, self.mass, self.l2, self.hs, self.min_density))


# --------------------------------------------------------------------------
# nonlinearity
# --------------------------------------------------------------------------
def _spec(values, grid, mask):
    c = transform(values, grid)
    return c * mask if mask is not None else c


def _phys(coeffs, grid):
    return transform(coeffs, grid, inverse=True).real


def nonlinearity_F(state: SpectralState, params: ModelParams, *, dealias: bool = True,
                   floor: float = 0.1, korteweg: str = "reformulated") -> np.ndarray:
    """Fourier coefficients of the momentum forcing ``F(pi, m)``.

    Products are formed in physical space and truncated by the two-thirds
    rule right after each one.  The pressure term is assembled as
    ``-grad(P(1+pi) - P(1) - gamma pi)``, which equals
    ``-(G(pi) + P''(1) pi) grad pi`` and keeps the zero mode exactly zero.
    """
    g = state.grid
    if g.n != params.n:
        raise ShapeError(f"state dimension {g.n} != params.n {params.n}")
    n = g.n
    k = g.k_odd()
    mask = dealias_mask(g) if dealias else None
    pi = _phys(state.pi_hat, g)
    m = _phys(state.m_hat, g)
    rho = 1.0 + pi
    if not np.all(np.isfinite(rho)):
        raise NonFiniteError("non-finite density in nonlinearity")
    low = float(rho.min())
    if low <= floor:
        raise VacuumError(f"min density {low:.6g} <= floor {floor}")
    q = 1.0 / rho

    out = np.zeros((n,) + g.shape, dtype=complex)
    # convective: -div(m m^T / rho)
    for i in range(n):
        for j in range(i, n):
            T = _spec(m[i] * m[j] * q, g, mask)
            out[i] -= 1j * k[j] * T
            if j != i:
                out[j] -= 1j * k[i] * T
    # viscous corrections on w = (pi/rho) m
    w_hat = _spec(pi * q * m, g, mask)
    k2 = g.k2()
    kdw = np.einsum("i...,i...->...", k, w_hat)
    out += params.mu * k2 * w_hat + params.nu * k * kdw
    # pressure
    law = params.law
    H = law.pressure(rho) - float(law.pressure(1.0)) - params.gamma * pi
    out -= 1j * k * _spec(H, g, mask)
    # capillarity
    grad = _phys(1j * k * state.pi_hat, g)
    lap = _phys(-k2 * state.pi_hat, g)
    half_sq = 0.5 * np.einsum("i...,i...->...", grad, grad)
    if korteweg == "reformulated":
        S = _spec(pi * lap, g, mask) - _spec(half_sq, g, mask)
        sign = -1.0
    else:
        S = _spec(pi * lap, g, mask) + _spec(half_sq, g, mask)
        sign = 1.0
    div = 1j * k * S
    for i in range(n):
        for j in range(i, n):
            T = _spec(grad[i] * grad[j], g, mask)
            div[i] -= 1j * k[j] * T
            if j != i:
                div[j] -= 1j * k[i] * T
    out += sign * params.kappa * div
    if mask is not None:
        out *= mask
    return out


# --------------------------------------------------------------------------
# ETD weights
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ModeWeights:
    """Gathered per-mode factors of one weight function ``f(hL)``."""

    a1: np.ndarray     # density <- longitudinal momentum, times -i k
    trans: np.ndarray  # transverse momentum
    long: np.ndarray   # longitudinal momentum


@functools.lru_cache(maxsize=32)
def _etd_weights(grid: Grid, params: ModelParams, h: float):
    k2 = grid.k2_propagator()
    shells, inverse = np.unique(k2, return_inverse=True)
    inv = inverse.reshape(k2.shape)
    r = np.sqrt(shells)
    lp, lm = roots(params, r)
    z = np.zeros_like(lp)
    heat = -params.mu * shells + 0j

    def dd(*cols):
        return exp_divided_differences(np.stack(cols, axis=-1), h).real

    def gather(a):
        out = np.asarray(a)[inv]
        out.setflags(write=False)
        return out

    w1 = ModeWeights(gather(dd(lp, lm, z)), gather(dd(heat, z)), gather(dd(lp, lm)))
    w2 = ModeWeights(gather(dd(lp, lm, z, z) / h), gather(dd(heat, z, z) / h),
                     gather(dd(lp, lm, z) / h))
    return w1, w2


def etd_weights(grid: Grid, params: ModelParams, h: float):
    """``(W1, W2)`` per-mode weights for step ``h``.

    ``W1 = int_0^h E(s) ds`` and ``W2 = h^-2 int_0^h E(h - s) s ds``, the
    weights of the constant and linear parts of an interpolated forcing.
    """
    return _etd_weights(grid, params, float(h))


def _apply_weight(w: ModeWeights, grid: Grid, F: np.ndarray):
    phi, m = _kernels.apply_block(None, w.a1, None, w.trans, w.long, grid.k_propagator(), None, F)
    return phi, m


def _combine(state, lin, parts, t):
    pi = lin.pi_hat.copy()
    m = lin.m_hat.copy()
    for phi_c, m_c in parts:
        pi += phi_c
        m += m_c
    return state.replace(pi_hat=pi, m_hat=m, t=t)


def _check_finite(state):
    if not (np.all(np.isfinite(state.pi_hat)) and np.all(np.isfinite(state.m_hat))):
        raise NonFiniteError(f"non-finite coefficients at t={state.t:.6g}")


def _forcing(state, params, config):
    if config.linear_only:
        return None
    return nonlinearity_F(state, params, dealias=config.dealias, floor=config.floor,
                          korteweg=config.korteweg)


def step(state: SpectralState, params: ModelParams, config: SolverConfig) -> SpectralState:
    """Advance one step of size ``config.dt``."""
    h = config.dt
    t_new = state.t + h
    lin = propagate(state, h, params)
    F0 = _forcing(state, params, config)
    if F0 is None:
        return lin
    g = state.grid
    w1, w2 = etd_weights(g, params, h)
    base = _apply_weight(w1, g, F0)
    a = _combine(state, lin, [base], t_new)
    if config.scheme is Scheme.ETD1:
        out = a
    elif config.scheme is Scheme.ETD2:
        _check_finite(a)
        F1 = _forcing(a, params, config)
        out = _combine(state, a, [_apply_weight(w2, g, F1 - F0)], t_new)
    else:
        out = a
        for _ in range(config.picard_max):
            _check_finite(out)
            F1 = _forcing(out, params, config)
            new = _combine(state, a, [_apply_weight(w2, g, F1 - F0)], t_new)
            delta = state_l2(new - out)
            out = new
            if delta <= config.picard_tol * max(state_l2(out), 1e-300):
                break
    _check_finite(out)
    return out


def _check_regime(params: ModelParams, config: SolverConfig):
    if params.globally_admissible or config.override:
        return
    why = "Case 5 (gamma = 0, A^2 < kappa)" if params.excluded else "spinodal reference (gamma < 0)"
    raise RegimeError(f"{why} has no global small-data theory; set override to run anyway")


def solve(initial: SpectralState, params: ModelParams, config: SolverConfig) -> Trajectory:
    """Iterate :func:`step`, recording diagnostics every ``config.cadence`` steps.

    On vacuum or non-finite values the raised error carries the partial
    trajectory as ``err.trajectory``.
    """
    _check_regime(params, config)
    if initial.grid.n != params.n:
        raise ShapeError(f"state dimension {initial.grid.n} != params.n {params.n}")
    traj = Trajectory()
    state = initial
    traj.record(state, config.sobolev_s)
    for i in range(1, config.steps + 1):
        try:
            state = step(state, params, config)
        except (VacuumError, NonFiniteError) as err:
            traj.status = "vacuum" if isinstance(err, VacuumError) else "nonfinite"
            err.trajectory = traj
            raise
        if i % config.cadence == 0 or i == config.steps:
            traj.record(state, config.sobolev_s)
    return traj


# --------------------------------------------------------------------------
# Picard iteration over a whole window
# --------------------------------------------------------------------------
@dataclass
class PicardResult:
    times: np.ndarray
    paths: List[List[SpectralState]]
    differences: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        d = self.differences
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]


def picard_solve(initial: SpectralState, params: ModelParams, horizon: float, iterations: int,
                 mesh_steps: int = 100, config: Optional[SolverConfig] = None) -> PicardResult:
    """Successive approximations of the Duhamel fixed point on ``[0, horizon]``.

    Iterate 0 is the linear flow.  Iterate ``j+1`` evaluates the Duhamel
    integral of ``N(U^(j))`` by composite exponential quadrature with the
    forcing interpolated linearly on each mesh interval.
    ``differences[j-1] = max_i ||U^(j)(t_i) - U^(j-1)(t_i)||_L2``.
    """
    if iterations < 2:
        raise ValueError("need at least two Picard iterations")
    h = horizon / mesh_steps
    if config is None:
        config = SolverConfig(dt=h, steps=mesh_steps)
    _check_regime(params, config)
    g = initial.grid
    times = h * np.arange(mesh_steps + 1)
    w1, w2 = etd_weights(g, params, h)

    path = [initial]
    for _ in range(mesh_steps):
        path.append(propagate(path[-1], h, params))
    paths = [path]
    diffs = []
    for _ in range(iterations):
        prev = paths[-1]
        forcing = [_forcing(s, params, config) for s in prev]
        new = [initial]
        for i in range(1, mesh_steps + 1):
            lin = propagate(new[-1], h, params)
            parts = [_apply_weight(w1, g, forcing[i - 1]),
                     _apply_weight(w2, g, forcing[i] - forcing[i - 1])]
            s = _combine(new[-1], lin, parts, times[i])
            _check_finite(s)
            new.append(s)
        diffs.append(max(state_l2(a - b) for a, b in zip(new, prev)))
        paths.append(new)
    return PicardResult(times, paths, np.array(diffs))
