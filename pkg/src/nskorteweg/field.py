"""Periodic spectral grid, transforms, Fourier symbols and band cutoffs.

Coefficients are Fourier-series coefficients: ``f(x) = sum_k c_k e^{i k.x}``
with ``k = 2 pi j / L``.  A constant field ``c`` therefore has the single
coefficient ``c`` and ``||f||_{L^2(box)}^2 = L^n sum |c_k|^2``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ShapeError

__all__ = [
    "Grid",
    "SpectralState",
    "BandSpec",
    "Gradient",
    "Divergence",
    "Laplacian",
    "BesselPotential",
    "Band",
    "transform",
    "apply_symbol",
    "band_profile",
    "dealias",
    "dealias_mask",
    "smoothstep",
    "random_state",
]


@dataclass(frozen=True)
class Grid:
    n: int
    N: int
    L: float = 2 * math.pi

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ShapeError(f"grid dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 4 or self.N & (self.N - 1):
            raise ShapeError(f"modes per axis must be a power of two >= 4, got {self.N}")
        if not self.L > 0:
            raise ShapeError("box length must be positive")

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    @property
    def dx(self) -> float:
        return self.L / self.N

    def indices(self) -> np.ndarray:
        """Integer mode indices per axis, fft ordering (Nyquist is ``-N/2``)."""
        return np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)

    @functools.cached_property
    def _kmesh(self):
        k1 = 2 * np.pi / self.L * self.indices()
        mesh = np.stack(np.meshgrid(*([k1] * self.n), indexing="ij"))
        k_odd = mesh.copy()
        nyq = np.stack(np.meshgrid(*([self.indices() == -self.N // 2] * self.n), indexing="ij"))
        k_odd[nyq] = 0.0
        for a in (mesh, k_odd):
            a.setflags(write=False)
        return mesh, k_odd

    def k(self) -> np.ndarray:
        """Wave vectors, shape ``(n, N, ..., N)``."""
        return self._kmesh[0]

    def k_odd(self) -> np.ndarray:
        """Wave vectors with the Nyquist component zeroed (odd symbols)."""
        return self._kmesh[1]

    def k2(self) -> np.ndarray:
        return np.einsum("i...,i...->...", self.k(), self.k())

    # the propagator treats each mode as the ODE for wave vector k_odd, which
    # keeps Nyquist rows real and the per-mode system self-consistent
    def k_propagator(self) -> np.ndarray:
        return self.k_odd()

    def k2_propagator(self) -> np.ndarray:
        ko = self.k_odd()
        return np.einsum("i...,i...->...", ko, ko)

    def coords(self) -> np.ndarray:
        x1 = self.L * np.arange(self.N) / self.N
        return np.stack(np.meshgrid(*([x1] * self.n), indexing="ij"))


def transform(values, grid: Grid, inverse: bool = False):
    """Forward (physical -> coefficients) or inverse transform over the last ``n`` axes."""
    arr = np.asarray(values)
    if arr.shape[-grid.n:] != grid.shape:
        raise ShapeError(f"trailing shape {arr.shape[-grid.n:]} != grid {grid.shape}")
    axes = tuple(range(-grid.n, 0))
    if inverse:
        return np.fft.ifftn(arr, axes=axes, norm="forward")
    return np.fft.fftn(arr, axes=axes, norm="forward")


@dataclass
class SpectralState:
    """Fourier coefficients of density perturbation and momentum."""

    grid: Grid
    pi_hat: np.ndarray
    m_hat: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.pi_hat = np.asarray(self.pi_hat, dtype=complex)
        self.m_hat = np.asarray(self.m_hat, dtype=complex)
        if self.pi_hat.shape != self.grid.shape or self.m_hat.shape != (self.grid.n,) + self.grid.shape:
            raise ShapeError(
                f"state arrays {self.pi_hat.shape}, {self.m_hat.shape} do not match grid {self.grid}"
            )

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0):
        return cls(grid, np.zeros(grid.shape, complex), np.zeros((grid.n,) + grid.shape, complex), t)

    @classmethod
    def from_physical(cls, grid: Grid, pi, m, t: float = 0.0):
        return cls(grid, transform(pi, grid), transform(m, grid), t)

    def to_physical(self, return_imag: bool = False):
        """Real physical fields ``(pi, m)``; optionally the largest discarded imaginary part."""
        p = transform(self.pi_hat, self.grid, inverse=True)
        m = transform(self.m_hat, self.grid, inverse=True)
        if return_imag:
            imag = max(float(np.abs(p.imag).max()), float(np.abs(m.imag).max()))
            return p.real, m.real, imag
        return p.real, m.real

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.pi_hat[None], self.m_hat])

    def copy(self):
        return SpectralState(self.grid, self.pi_hat.copy(), self.m_hat.copy(), self.t)

    def replace(self, **kw):
        return replace(self, **kw)

    def __add__(self, other):
        return self.replace(pi_hat=self.pi_hat + other.pi_hat, m_hat=self.m_hat + other.m_hat)

    def __sub__(self, other):
        return self.replace(pi_hat=self.pi_hat - other.pi_hat, m_hat=self.m_hat - other.m_hat)


# --------------------------------------------------------------------------
# band cutoffs
# --------------------------------------------------------------------------
def smoothstep(s, smoothness: float = 1.0):
    """C-infinity ramp: 0 for ``s <= 0``, 1 for ``s >= 1``, built from ``exp(-a/s)``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(s > 0, np.exp(-smoothness / np.where(s > 0, s, 1.0)), 0.0)
        g = np.where(s < 1, np.exp(-smoothness / np.where(s < 1, 1 - s, 1.0)), 0.0)
        out = f / (f + g)
    return np.where(s <= 0, 0.0, np.where(s >= 1, 1.0, out))


@dataclass(frozen=True)
class BandSpec:
    """Frequency band.  ``kind`` is ``low``, ``medium``, ``high`` or ``dyadic``.

    ``scale`` is the crossover radius ``B`` for the three-band split; ``j`` is
    the dyadic index (``-1`` is the low-frequency ball) for ``dyadic``.
    """

    kind: str
    scale: float = 1.0
    j: int = 0
    smoothness: float = 1.0

    def __post_init__(self):
        if self.kind not in ("low", "medium", "high", "dyadic"):
            raise ValueError(f"unknown band kind {self.kind!r}")


def _low(r, B, a):
    return 1.0 - smoothstep((r - B / 2) / (B / math.sqrt(2) - B / 2), a)


def _high_edges(B):
    lo = max(1.0, math.sqrt(2) * B)
    if lo >= 2 * B:
        # max(1, sqrt(2) B) >= 2B when B <= 1/2; the ramp needs lo < 2B
        lo = math.sqrt(2) * B
    return lo, 2 * B


def _high(r, B, a):
    lo, hi = _high_edges(B)
    return smoothstep((r - lo) / (hi - lo), a)


def _ball(r, a):
    # 1 on r <= 1, 0 on r >= 2
    return 1.0 - smoothstep(r - 1.0, a)


def band_profile(spec: BandSpec, r):
    """Radial profile of a band evaluated at radii ``r``."""
    r = np.asarray(r, dtype=float)
    a = spec.smoothness
    if spec.kind == "low":
        return _low(r, spec.scale, a)
    if spec.kind == "high":
        return _high(r, spec.scale, a)
    if spec.kind == "medium":
        return 1.0 - _low(r, spec.scale, a) - _high(r, spec.scale, a)
    if spec.j < 0:
        return _ball(r, a)
    return _ball(r / 2.0 ** (spec.j + 1), a) - _ball(r / 2.0**spec.j, a)


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------
class Gradient:
    pass


class Divergence:
    pass


class Laplacian:
    pass


@dataclass(frozen=True)
class BesselPotential:
    s: float


@dataclass(frozen=True)
class Band:
    spec: BandSpec


def _scalar_symbol(symbol, grid: Grid):
    if isinstance(symbol, Laplacian):
        return -grid.k2()
    if isinstance(symbol, BesselPotential):
        return (1.0 + grid.k2()) ** (symbol.s / 2.0)
    if isinstance(symbol, Band):
        return band_profile(symbol.spec, np.sqrt(grid.k2()))
    raise TypeError(f"unknown symbol {symbol!r}")


def apply_symbol(x, symbol, grid: Optional[Grid] = None):
    """Multiply coefficients by a Fourier symbol.

    ``x`` is a :class:`SpectralState` or a coefficient array (scalar field of
    the grid shape, or a stack of them).  Gradient maps a scalar to ``n``
    components, Divergence maps ``n`` components to a scalar, the remaining
    symbols act componentwise.
    """
    if isinstance(x, SpectralState):
        if isinstance(x, SpectralState) and isinstance(symbol, Divergence):
            return apply_symbol(x.m_hat, symbol, x.grid)
        if isinstance(symbol, Gradient):
            raise ShapeError("gradient of a full state is ambiguous; apply it to pi_hat")
        mult = _scalar_symbol(symbol, x.grid)
        return x.replace(pi_hat=x.pi_hat * mult, m_hat=x.m_hat * mult)
    if grid is None:
        raise ShapeError("a grid is required for raw coefficient arrays")
    x = np.asarray(x)
    if x.shape[-grid.n:] != grid.shape:
        raise ShapeError(f"trailing shape {x.shape[-grid.n:]} != grid {grid.shape}")
    if isinstance(symbol, Gradient):
        if x.shape != grid.shape:
            raise ShapeError("gradient needs a scalar field")
        return 1j * grid.k_odd() * x
    if isinstance(symbol, Divergence):
        if x.shape != (grid.n,) + grid.shape:
            raise ShapeError(f"divergence needs {grid.n} components")
        return 1j * np.einsum("i...,i...->...", grid.k_odd(), x)
    return x * _scalar_symbol(symbol, grid)


def dealias_mask(grid: Grid) -> np.ndarray:
    """True on retained modes: every index satisfies ``|j| <= N/3``."""
    keep = np.abs(grid.indices()) <= grid.N / 3
    return functools.reduce(np.logical_and.outer, [keep] * grid.n) if grid.n > 1 else keep


def dealias(x, grid: Optional[Grid] = None):
    """Two-thirds rule truncation of a state or coefficient array."""
    if isinstance(x, SpectralState):
        mask = dealias_mask(x.grid)
        return x.replace(pi_hat=x.pi_hat * mask, m_hat=x.m_hat * mask)
    return np.asarray(x) * dealias_mask(grid)


def random_state(grid: Grid, amplitude: float = 1e-3, decay: float = 2.0, seed: int = 0,
                 t: float = 0.0) -> SpectralState:
    """Seeded real random data with spectrum ``(1+|k|^2)^(-decay)``.

    Nyquist modes are left empty and each physical component is scaled to
    sup-norm ``amplitude``.
    """
    rng = np.random.default_rng(seed)
    shape = (grid.n + 1,) + grid.shape
    noise = transform(rng.standard_normal(shape), grid)
    noise *= (1.0 + grid.k2()) ** (-decay)
    nyq = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.n):
        idx = [slice(None)] * grid.n
        idx[axis] = grid.N // 2
        nyq[tuple(idx)] = True
    noise[:, nyq] = 0.0
    phys = transform(noise, grid, inverse=True).real
    peak = np.abs(phys).reshape(grid.n + 1, -1).max(axis=1)
    phys *= (amplitude / np.where(peak > 0, peak, 1.0)).reshape((-1,) + (1,) * grid.n)
    return SpectralState.from_physical(grid, phys[0], phys[1:], t)
