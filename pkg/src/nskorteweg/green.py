"""Exact per-mode propagator of the linearised system.

Every entry of the Green matrix is built from two scalars of the
longitudinal pair ``lam_+/-``,

    dd(t)  = (e^{lam_+ t} - e^{lam_- t}) / (lam_+ - lam_-)
    ddp(t) = d/dt dd(t) = (lam_+ e^{lam_+ t} - lam_- e^{lam_- t}) / (lam_+ - lam_-)

plus the transverse heat factor ``e^{-mu r^2 t}``.  Writing ``dd`` as
``e^{c t} sinh(delta t)/delta`` with ``c`` the mean root and ``delta`` the half
gap keeps it finite and accurate through the collision ``lam_+ = lam_-``,
so Case 6 and ``|xi| = B`` share the generic code path.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .errors import NodeError, ShapeError
from .model import ModelParams
from .spectrum import half_gap

__all__ = [
    "GreenMatrix",
    "GreenCoefficients",
    "divided_diff_exp",
    "exp_divided_differences",
    "green_coefficients",
    "green_matrix",
    "green_matrix_contour",
    "propagate",
    "mode_coefficients",
]

SERIES_SWITCH = 1e-3
# beyond this |Re(delta t)| the sinh/cosh factors would overflow; use exponentials
_EXP_SWITCH = 20.0


@dataclass(frozen=True)
class GreenMatrix:
    entries: np.ndarray
    xi: np.ndarray
    t: float


@dataclass(frozen=True)
class GreenCoefficients:
    """Real scalar factors of the Green matrix for a set of radii."""

    c_pp: np.ndarray   # density -> density
    dd: np.ndarray     # divided difference of exp
    ddp: np.ndarray    # its time derivative (longitudinal momentum factor)
    heat: np.ndarray   # transverse factor exp(-mu r^2 t)
    s: np.ndarray      # gamma + kappa r^2


def _sinhc_cosh(z):
    """``(sinh(z)/z, cosh(z))`` with a five-term series near zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_SWITCH
    z2 = z * z
    s_ser = 1 + z2 / 6 * (1 + z2 / 20 * (1 + z2 / 42 * (1 + z2 / 72)))
    c_ser = 1 + z2 / 2 * (1 + z2 / 12 * (1 + z2 / 30 * (1 + z2 / 56)))
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        zs = np.where(small, 1.0, z)
        s_dir = np.sinh(zs) / zs
        c_dir = np.cosh(zs)
    return np.where(small, s_ser, s_dir), np.where(small, c_ser, c_dir)


def _dd_pair(center, delta, t):
    """``(e^{ct} sinh(delta t)/delta, e^{ct} cosh(delta t))``, overflow-safe."""
    center = np.asarray(center, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    z = delta * t
    sc, ch = _sinhc_cosh(z)
    with np.errstate(invalid="ignore", over="ignore"):
        ect = np.exp(center * t)
        dd = ect * sc * t
        ech = ect * ch
    big = np.abs(z.real) > _EXP_SWITCH
    if np.any(big):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ep = np.exp((center + delta) * t)
            em = np.exp((center - delta) * t)
            safe = np.where(big, delta, 1.0)
            dd = np.where(big, (ep - em) / (2 * safe), dd)
            ech = np.where(big, 0.5 * (ep + em), ech)
    return dd, ech


def divided_diff_exp(lp, lm, t):
    """First divided difference ``(e^{lp t} - e^{lm t}) / (lp - lm)``.

    Equals ``t e^{lp t}`` when ``lp == lm``.  Uses the sinh(z)/z series
    when ``|delta t| < 1e-3``; vectorised over ``lp``/``lm``.
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    lp = np.asarray(lp, dtype=complex)
    lm = np.asarray(lm, dtype=complex)
    dd, _ = _dd_pair(0.5 * (lp + lm), 0.5 * (lp - lm), t)
    return complex(dd) if dd.ndim == 0 else dd


def exp_divided_differences(points, h=1.0):
    """Divided differences of ``z -> exp(h z)`` over rows of ``points``.

    ``points`` has shape ``(..., m+1)``; returns ``exp_h[z_0, ..., z_m]``.
    Computed as the corner entry of the exponential of the bidiagonal
    matrix ``h diag(z) + superdiag(1)``, scaled by ``h^m``; accurate for
    coalescing and vanishing nodes alike.
    """
    pts = np.asarray(points, dtype=complex)
    m = pts.shape[-1] - 1
    mats = np.zeros(pts.shape[:-1] + (m + 1, m + 1), dtype=complex)
    idx = np.arange(m + 1)
    mats[..., idx, idx] = h * pts
    mats[..., idx[:-1], idx[1:]] = 1.0
    return expm(mats)[..., 0, m] * h**m


def green_coefficients(params: ModelParams, r, t: float) -> GreenCoefficients:
    """Scalar Green factors for radii ``r`` at time ``t`` (vectorised)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    r = np.asarray(r, dtype=float)
    r2 = r * r
    center = -params.A * r2
    delta = half_gap(params, r)
    dd, ech = _dd_pair(center, delta, t)
    dd = dd.real
    ech = ech.real
    ddp = center * dd + ech
    c_pp = ech - center * dd
    heat = np.exp(-params.mu * r2 * t)
    s = params.gamma + params.kappa * r2
    return GreenCoefficients(c_pp, dd, ddp, heat, s)


def _assemble(c_pp, dd, ddp, heat, s, xi):
    n = xi.size
    r2 = float(xi @ xi)
    G = np.zeros((n + 1, n + 1), dtype=complex)
    G[0, 0] = c_pp
    G[0, 1:] = -1j * dd * xi
    G[1:, 0] = -1j * dd * s * xi
    if r2 > 0:
        P = np.outer(xi, xi) / r2
        G[1:, 1:] = heat * (np.eye(n) - P) + ddp * P
    else:
        G[1:, 1:] = heat * np.eye(n)
    return G


def green_matrix(params: ModelParams, xi, t: float) -> GreenMatrix:
    """``(n+1) x (n+1)`` matrix mapping ``(phi0, u0)^`` to ``(phi, u)^`` at time ``t``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size != params.n:
        raise ShapeError(f"wave vector has {xi.size} components, params.n = {params.n}")
    c = green_coefficients(params, math.sqrt(float(xi @ xi)), t)
    G = _assemble(float(c.c_pp), float(c.dd), float(c.ddp), float(c.heat), float(c.s), xi)
    return GreenMatrix(G, xi, float(t))


def green_matrix_contour(params: ModelParams, xi, t: float, nodes: int = 64,
                         radius_factor: float = 1.5) -> GreenMatrix:
    """Green matrix from the Cauchy-integral representation.

    Trapezoidal rule with ``nodes`` points on a circle centred at the mean
    root ``-(mu+nu)|xi|^2/2`` with radius ``radius_factor * max(1, |delta|)``,
    which encloses both roots of ``det``.  Independent of
    :func:`green_matrix` apart from sharing the root centre.
    """
    if nodes < 16:
        raise NodeError(f"contour quadrature needs at least 16 nodes, got {nodes}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size != params.n:
        raise ShapeError(f"wave vector has {xi.size} components, params.n = {params.n}")
    r2 = float(xi @ xi)
    center = -params.A * r2
    # |delta| from the discriminant directly, not from half_gap
    disc = (params.A * r2) ** 2 - (params.gamma + params.kappa * r2) * r2
    radius = radius_factor * max(1.0, math.sqrt(abs(disc)))
    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    z = center + w
    det = z * z + (params.mu + params.nu) * r2 * z + (params.gamma + params.kappa * r2) * r2
    base = np.exp(z * t) / det * w
    I0 = base.mean()
    I1 = (z * base).mean()
    c_pp = I1 + 2 * params.A * r2 * I0
    heat = math.exp(-params.mu * r2 * t)
    s = params.gamma + params.kappa * r2
    G = _assemble(c_pp, I0, I1, heat, s, xi)
    return GreenMatrix(G, xi, float(t))


# --------------------------------------------------------------------------
# grid propagation
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ModeCoefficients:
    """Per-mode (gathered) propagator factors on a grid."""

    c_pp: np.ndarray
    c_pu: np.ndarray
    c_up: np.ndarray
    heat: np.ndarray
    long: np.ndarray


@functools.lru_cache(maxsize=64)
def _grid_coefficients(grid, params: ModelParams, t: float) -> ModeCoefficients:
    k2 = grid.k2_propagator()
    shells, inverse = np.unique(k2, return_inverse=True)
    c = green_coefficients(params, np.sqrt(shells), t)
    inv = inverse.reshape(k2.shape)

    def gather(a):
        out = np.asarray(a)[inv]
        out.setflags(write=False)
        return out

    return ModeCoefficients(gather(c.c_pp), gather(c.dd), gather(c.dd * c.s),
                            gather(c.heat), gather(c.ddp))


def mode_coefficients(grid, params: ModelParams, t: float) -> ModeCoefficients:
    """Cached Green factors for every mode of ``grid``, shared across |k|^2 shells."""
    return _grid_coefficients(grid, params, float(t))


def propagate(state, t: float, params: ModelParams):
    """Apply the exact linear solution operator for time ``t`` to a spectral state."""
    if state.grid.n != params.n:
        raise ShapeError(f"state dimension {state.grid.n} != params.n {params.n}")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return state.copy()
    c = mode_coefficients(state.grid, params, t)
    phi, m = _kernels.apply_block(c.c_pp, c.c_pu, c.c_up, c.heat, c.long,
                                  state.grid.k_propagator(), state.pi_hat, state.m_hat)
    return state.replace(pi_hat=phi, m_hat=m, t=state.t + t)
