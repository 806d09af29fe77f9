"""Characteristic roots of the linearised Fourier system.

For a mode of radius ``r = |xi|`` the longitudinal block has characteristic
polynomial ``lam^2 + (mu+nu) r^2 lam + (gamma + kappa r^2) r^2``.  Its roots
are written ``lam = -A r^2 +/- delta`` with ``A = (mu+nu)/2``; every routine
here goes through :func:`half_gap`, which evaluates ``delta`` from the
closed form of the parameter case so that no subtraction of nearly equal
quantities happens near a double root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import CaseError
from .model import Case, ModelParams

__all__ = [
    "EigenPair",
    "half_gap",
    "roots",
    "eigenvalues",
    "char_poly",
    "crossover_B",
    "asymptotics",
    "band_abscissa_c0",
]


@dataclass(frozen=True)
class EigenPair:
    lambda_plus: complex
    lambda_minus: complex
    degenerate: bool
    case: Case


def _csqrt(x):
    return np.sqrt(np.asarray(x, dtype=complex))


def half_gap(params: ModelParams, r):
    """``delta(r) = (lam_+ - lam_-)/2`` as a complex array.

    The principal branch makes ``Re delta >= 0`` and ``Im delta >= 0``, so
    ``Re lam_+ >= Re lam_-`` with ties broken by the imaginary part.
    """
    r = np.asarray(r, dtype=float)
    A, kappa, gamma = params.A, params.kappa, params.gamma
    d = A * A - kappa
    case = params.case
    if case == Case.CASE1:
        B = params.B
        inside = 1j * math.sqrt(gamma) * r * np.sqrt(np.clip((B - r) * (B + r), 0, None)) / B
        outside = math.sqrt(d) * r * np.sqrt(np.clip((r - B) * (r + B), 0, None))
        return np.where(r < B, inside, outside + 0j)
    if case == Case.CASE2:
        return 1j * r * np.sqrt(-d * r * r + gamma)
    if case == Case.CASE3:
        return 1j * math.sqrt(gamma) * r + 0 * r
    if case == Case.CASE4:
        return math.sqrt(d) * r * r + 0j
    if case == Case.CASE5:
        return 1j * math.sqrt(-d) * r * r
    if case == Case.CASE6:
        return np.zeros_like(r, dtype=complex)
    # spinodal reference: gamma < 0
    if d < 0:
        Bs = math.sqrt(-gamma / -d)
        return r * _csqrt(-d * (Bs - r) * (Bs + r))
    return r * np.sqrt(d * r * r - gamma) + 0j


def roots(params: ModelParams, r):
    """Vectorised ``(lam_+, lam_-)`` on an array of radii."""
    r = np.asarray(r, dtype=float)
    center = -params.A * r * r
    delta = half_gap(params, r)
    lp, lm = center + delta, center - delta
    # real pair: center + delta cancels, so take the small root from the product
    real = (delta.imag == 0) & (delta.real != 0) & (lm != 0)
    if np.any(real):
        prod = (params.gamma + params.kappa * r * r) * r * r
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.where(real, prod / np.where(real, lm, 1.0), lp)
    return lp, lm


def char_poly(params: ModelParams, r, lam):
    """``det(lam)`` for radius ``r``."""
    r2 = np.asarray(r, dtype=float) ** 2
    return lam * lam + (params.mu + params.nu) * r2 * lam + (params.gamma + params.kappa * r2) * r2


def eigenvalues(params: ModelParams, rho: float) -> EigenPair:
    """Roots of the characteristic polynomial at ``|xi| = rho``."""
    if rho < 0:
        raise ValueError("|xi| must be non-negative")
    lp, lm = roots(params, float(rho))
    lp, lm = complex(lp), complex(lm)
    return EigenPair(lp, lm, lp == lm, params.case)


def crossover_B(params: ModelParams) -> float:
    """Radius where the two roots collide (Case 1 only)."""
    if params.case != Case.CASE1:
        raise CaseError(f"crossover radius defined only in Case 1, got {params.case.name}")
    return params.B


def asymptotics(params: ModelParams, rho: float, regime: str):
    """Leading-order expansions of ``(lam_+, lam_-)`` near zero or infinity.

    ``regime`` is ``"low"`` or ``"high"``.  Case 1 low frequency keeps terms
    through ``r^3`` (remainder ``O(r^5)``); high frequency keeps the
    constant term (remainder ``O(r^-2)``).  Case 2 analogues likewise.
    """
    regime = regime.lower()
    if regime not in ("low", "high", "lowfreq", "highfreq"):
        raise ValueError(f"regime must be 'low' or 'high', got {regime!r}")
    low = regime.startswith("low")
    A, kappa, gamma = params.A, params.kappa, params.gamma
    r = float(rho)
    sg = math.sqrt(gamma) if gamma > 0 else 0.0
    if params.case == Case.CASE1:
        B = params.B
        if low:
            lp = 1j * sg * r - A * r**2 - 1j * sg / (2 * B**2) * r**3
            lm = -1j * sg * r - A * r**2 + 1j * sg / (2 * B**2) * r**3
        else:
            root = math.sqrt(1 - kappa / A**2)
            lp = -A * (1 - root) * r**2 - sg * B / 2
            lm = -A * (1 + root) * r**2 + sg * B / 2
        return complex(lp), complex(lm)
    if params.case == Case.CASE2:
        e = kappa - A * A
        if low:
            lp = 1j * sg * r - A * r**2 + 1j * e / (2 * sg) * r**3
        else:
            lp = -A * r**2 + 1j * math.sqrt(e) * r**2 + 1j * gamma / (2 * math.sqrt(e))
        lp = complex(lp)
        return lp, lp.conjugate()
    raise CaseError(f"asymptotic expansions exist for Cases 1 and 2 only, got {params.case.name}")


def band_abscissa_c0(params: ModelParams, band=None, samples: int = 20001) -> float:
    """``c0 = -max Re lam_+ / 2`` over a band of radii.

    The default band is ``[B/2, 2B]`` and needs Case 1; other cases must pass
    ``band=(lo, hi)``.  Dense sampling is followed by a bounded scalar
    refinement around the best sample, so ``max Re lam <= -2 c0`` on the band.
    """
    if band is None:
        if params.case != Case.CASE1:
            raise CaseError("default band [B/2, 2B] needs Case 1; pass band=(lo, hi)")
        B = params.B
        band = (0.5 * B, 2.0 * B)
    lo, hi = map(float, band)
    if not (0 <= lo < hi and np.isfinite(hi)):
        raise CaseError(f"degenerate band {band!r}")
    grid = np.linspace(lo, hi, max(int(samples), 10_000))
    re = roots(params, grid)[0].real
    i = int(np.argmax(re))
    best = re[i]
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if b > a:
        res = optimize.minimize_scalar(lambda x: -float(roots(params, x)[0].real), bounds=(a, b),
                                       method="bounded", options={"xatol": 1e-13})
        best = max(best, -res.fun)
    return -0.5 * float(best)
