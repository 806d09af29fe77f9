"""Norms, whole-space low-frequency evaluation and decay fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import CaseError, FitError, ShapeError
from .field import BandSpec, Grid, SpectralState, band_profile, transform
from .green import green_coefficients
from .model import Case, ModelParams

__all__ = [
    "Lebesgue",
    "Sobolev",
    "Besov",
    "NormSpec",
    "norm",
    "state_l2",
    "state_sobolev_norm",
    "GaussianDatum",
    "LowFreqPlan",
    "plan_lowfreq",
    "lowfreq_eval",
    "DecayFit",
    "fit_decay",
]


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------
def _check_exp(name, v):
    if not (v >= 1):
        raise ValueError(f"{name} must be >= 1 (or inf), got {v}")


@dataclass(frozen=True)
class Lebesgue:
    q: float = 2.0

    def __post_init__(self):
        _check_exp("q", self.q)


@dataclass(frozen=True)
class Sobolev:
    s: float
    q: float = 2.0

    def __post_init__(self):
        _check_exp("q", self.q)


@dataclass(frozen=True)
class Besov:
    s: float
    q: float = 2.0
    p: float = 2.0

    def __post_init__(self):
        _check_exp("q", self.q)
        _check_exp("p", self.p)


NormSpec = (Lebesgue, Sobolev, Besov)


def _as_components(x, grid):
    if isinstance(x, SpectralState):
        return x.stacked(), x.grid
    if grid is None:
        raise ShapeError("a grid is required for raw coefficient arrays")
    arr = np.asarray(x)
    if arr.shape == grid.shape:
        return arr[None], grid
    if arr.ndim == grid.n + 1 and arr.shape[1:] == grid.shape:
        return arr, grid
    raise ShapeError(f"coefficient shape {arr.shape} does not fit grid {grid.shape}")


def _lebesgue_phys(values, grid: Grid, q: float) -> float:
    mag = np.sqrt(np.sum(np.abs(values) ** 2, axis=0))
    if math.isinf(q):
        return float(mag.max())
    cell = grid.dx**grid.n
    return float((cell * np.sum(mag**q)) ** (1.0 / q))


def _lebesgue(coeffs, grid, q):
    if q == 2:
        return math.sqrt(grid.volume * float(np.sum(np.abs(coeffs) ** 2)))
    return _lebesgue_phys(transform(coeffs, grid, inverse=True), grid, q)


def _dyadic_count(grid: Grid) -> int:
    kmax = math.sqrt(grid.n) * (grid.N // 2) * 2 * math.pi / grid.L
    return max(0, int(math.ceil(math.log2(max(kmax, 1.0)))))


def norm(x, spec, grid: Optional[Grid] = None) -> float:
    """Norm of a coefficient array or state.

    Multi-component input is measured through the pointwise Euclidean
    magnitude.  ``q = inf`` is the grid maximum; ``q = 2`` is evaluated
    exactly in coefficient space by Parseval.
    """
    coeffs, grid = _as_components(x, grid)
    if isinstance(spec, Lebesgue):
        return _lebesgue(coeffs, grid, spec.q)
    r = np.sqrt(grid.k2())
    if isinstance(spec, Sobolev):
        return _lebesgue(coeffs * (1.0 + r * r) ** (spec.s / 2.0), grid, spec.q)
    if isinstance(spec, Besov):
        terms = []
        for j in range(-1, _dyadic_count(grid) + 1):
            block = band_profile(BandSpec("dyadic", j=j), r)
            weight = 2.0 ** (j * spec.s) if j >= 0 else 1.0
            terms.append(weight * _lebesgue(coeffs * block, grid, spec.q))
        terms = np.array(terms)
        if math.isinf(spec.p):
            return float(terms.max())
        return float(np.sum(terms**spec.p) ** (1.0 / spec.p))
    raise TypeError(f"unknown norm spec {spec!r}")


def state_l2(state: SpectralState) -> float:
    g = state.grid
    tot = np.sum(np.abs(state.pi_hat) ** 2) + np.sum(np.abs(state.m_hat) ** 2)
    return math.sqrt(g.volume * float(tot))


def state_sobolev_norm(state: SpectralState, s: float = 1.0) -> float:
    """Data norm ``(||pi||_{H^{s+1}}^2 + ||m||_{H^s}^2)^{1/2}``."""
    g = state.grid
    w = 1.0 + g.k2()
    tot = np.sum(w ** (s + 1) * np.abs(state.pi_hat) ** 2) + np.sum(w**s * np.abs(state.m_hat) ** 2)
    return math.sqrt(g.volume * float(tot))


# --------------------------------------------------------------------------
# whole-space low-frequency evaluation
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class GaussianDatum:
    """Gaussian initial data on R^n with closed-form transform.

    Density ``density * g(x)``, momentum ``momentum[i] * g(x)`` plus,
    for ``n = 2``, a divergence-free part ``solenoidal * (d2 g, -d1 g)``,
    with ``g(x) = exp(-|x|^2 / (2 sigma^2))``.
    """

    sigma: float = 1.0
    density: float = 1.0
    momentum: Sequence[float] = (1.0, 1.0)
    solenoidal: float = 0.0

    def transform(self, xi: np.ndarray) -> np.ndarray:
        """``U0^(xi) = int e^{-i x.xi} U0(x) dx`` for nodes ``xi`` of shape ``(n, J)``."""
        n = xi.shape[0]
        if len(self.momentum) != n:
            raise ShapeError(f"momentum has {len(self.momentum)} components, dimension {n}")
        r2 = np.sum(xi * xi, axis=0)
        g = (2 * math.pi * self.sigma**2) ** (n / 2) * np.exp(-0.5 * self.sigma**2 * r2)
        out = np.empty((n + 1, xi.shape[1]), dtype=complex)
        out[0] = self.density * g
        for i in range(n):
            out[i + 1] = self.momentum[i] * g
        if self.solenoidal:
            if n != 2:
                raise ShapeError("solenoidal part is defined for n = 2")
            out[1] += self.solenoidal * 1j * xi[1] * g
            out[2] -= self.solenoidal * 1j * xi[0] * g
        return out

    @property
    def width(self) -> float:
        return 12.0 * self.sigma


@dataclass(frozen=True)
class LowFreqPlan:
    radius: float
    spacing: float
    nodes_per_axis: int


def plan_lowfreq(params: ModelParams, datum: GaussianDatum, t: float, xmax: float,
                 cutoff: Optional[float] = None, min_nodes: int = 128,
                 envelope: float = 45.0) -> LowFreqPlan:
    """Choose the trapezoid box and spacing for :func:`lowfreq_eval`.

    The box half-width is the smaller of the cutoff support and the radius
    where ``exp(-A r^2 t)`` drops below ``exp(-envelope)``.  The spacing
    makes the implied spatial period exceed twice the distance reachable
    from the sample points by sound and diffusion, so periodic images of
    the solution do not overlap the samples.
    """
    if cutoff is None:
        if params.case != Case.CASE1:
            raise CaseError("low-frequency cutoff needs B (Case 1) or an explicit radius")
        cutoff = params.B
    support = cutoff / math.sqrt(2)
    decay = math.sqrt(envelope / (params.A * t)) if t > 0 else math.inf
    R = min(support, decay)
    speed = math.sqrt(max(params.gamma, 0.0))
    period = 2.0 * (xmax + speed * t + 12.0 * math.sqrt((params.mu + params.nu) * t) + datum.width)
    h = 2 * math.pi / period
    half = int(math.ceil(R / h))
    count = 2 * half + 1
    if count < min_nodes:
        half = (min_nodes + 1) // 2
        count = 2 * half + 1
        h = R / half
    return LowFreqPlan(R, h, count)


def lowfreq_eval(params: ModelParams, datum: GaussianDatum, t: float, points,
                 cutoff: Optional[float] = None, min_nodes: int = 128,
                 nodes: Optional[int] = None) -> np.ndarray:
    """Evaluate ``(T1(t) U0)(x)`` at physical ``points`` of shape ``(P, n)``.

    ``T1`` is the linear flow restricted by the low-frequency cutoff of
    radius ``B`` (or ``cutoff``).  The inverse transform on R^n is computed
    by tensor trapezoid quadrature; returns real values of shape ``(P, n+1)``.
    ``nodes`` forces the node count per axis.
    """
    if params.gamma < 0:
        raise CaseError("low-frequency evaluation needs gamma >= 0")
    if t <= 0:
        raise ValueError("t must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = params.n
    if pts.shape[1] != n:
        raise ShapeError(f"points must have {n} columns")
    xmax = float(np.max(np.abs(pts))) * math.sqrt(n)
    plan = plan_lowfreq(params, datum, t, xmax, cutoff, min_nodes)
    scale = cutoff if cutoff is not None else params.B
    if nodes is not None:
        half = nodes // 2
        h = plan.radius / half
    else:
        half = plan.nodes_per_axis // 2
        h = plan.spacing
    axis = h * np.arange(-half, half + 1)
    xi = np.stack([a.ravel() for a in np.meshgrid(*([axis] * n), indexing="ij")])
    r = np.sqrt(np.sum(xi * xi, axis=0))
    cut = band_profile(BandSpec("low", scale=scale), r)
    live = cut > 0
    xi, r, cut = xi[:, live], r[live], cut[live]
    c = green_coefficients(params, r, t)
    U0 = datum.transform(xi)
    phi, m = _kernels.apply_block_numpy(c.c_pp, c.dd, c.dd * c.s, c.heat, c.ddp, xi, U0[0], U0[1:])
    weight = cut * (h / (2 * math.pi)) ** n
    values = np.concatenate([phi[None], m]) * weight
    out = _kernels.fourier_sum(pts, np.ascontiguousarray(xi.T), values)
    return out.real


# --------------------------------------------------------------------------
# decay fits
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    max_residual: float


def fit_decay(times, values) -> DecayFit:
    """Least-squares line through ``(log t, log value)``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise FitError("times and values must be equal-length 1-D sequences")
    if t.size < 8:
        raise FitError(f"need at least 8 samples, got {t.size}")
    if np.any(v <= 0) or np.any(t <= 0) or not np.all(np.isfinite(v)):
        raise FitError("times and values must be positive and finite")
    X = np.log(t)
    Y = np.log(v)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    return DecayFit(float(slope), float(intercept), float(np.abs(resid).max()))
