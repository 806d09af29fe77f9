"""Pressure laws, Helmholtz energy, phase classification and parameter checks.

All densities are measured relative to the reference state, which is fixed
at ``rho = 1``.  A law whose natural reference density sits elsewhere must be
rescaled by the caller before it is handed to :func:`validate`.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, ParamError, QuadratureError

__all__ = [
    "VanDerWaals",
    "PowerLaw",
    "Polynomial",
    "PressureLaw",
    "Phase",
    "PhaseReport",
    "Case",
    "ModelParams",
    "eval_pressure",
    "pressure_nonlinearity_G",
    "helmholtz_W",
    "classify_phase",
    "validate",
]

CASE_RTOL = 1e-14
W_TOL = 1e-10
ROOT_XTOL = 1e-12


# --------------------------------------------------------------------------
# pressure laws
# --------------------------------------------------------------------------
class _LawBase:
    """Shared evaluation helpers.  Subclasses provide ``_p``, ``_dp``, ``_d2p``."""

    def domain(self) -> Tuple[float, float]:
        return 0.0, math.inf

    def check_domain(self, rho) -> None:
        lo, hi = self.domain()
        arr = np.asarray(rho, dtype=float)
        if arr.size == 0:
            return
        if not (np.all(np.isfinite(arr)) and arr.min() > lo and arr.max() < hi):
            raise DomainError(
                f"density outside ({lo}, {hi}) for {self.describe()['type']}: "
                f"range [{arr.min():.6g}, {arr.max():.6g}]"
            )

    def pressure(self, rho):
        self.check_domain(rho)
        return self._p(np.asarray(rho, dtype=float))

    def dpressure(self, rho):
        self.check_domain(rho)
        return self._dp(np.asarray(rho, dtype=float))

    def d2pressure(self, rho):
        self.check_domain(rho)
        return self._d2p(np.asarray(rho, dtype=float))

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class VanDerWaals(_LawBase):
    """``P = RT b/(b - rho) - a rho^2`` on ``0 < rho < b``.

    ``variant="classical"`` switches the repulsive term to
    ``RT rho b/(b - rho)``, the textbook form with the density in the
    numerator.
    """

    RT: float
    a: float
    b: float
    variant: str = "reduced"

    def __post_init__(self):
        if self.RT <= 0 or self.a <= 0 or self.b <= 0:
            raise ParamError("van der Waals constants RT, a, b must be positive")
        if self.variant not in ("reduced", "classical"):
            raise ParamError(f"unknown van der Waals variant {self.variant!r}")

    def domain(self):
        return 0.0, float(self.b)

    def _p(self, rho):
        gap = self.b - rho
        if self.variant == "reduced":
            rep = self.RT * self.b / gap
        else:
            rep = self.RT * rho * self.b / gap
        return rep - self.a * rho**2

    def _dp(self, rho):
        gap = self.b - rho
        if self.variant == "reduced":
            rep = self.RT * self.b / gap**2
        else:
            rep = self.RT * self.b**2 / gap**2
        return rep - 2.0 * self.a * rho

    def _d2p(self, rho):
        gap = self.b - rho
        if self.variant == "reduced":
            rep = 2.0 * self.RT * self.b / gap**3
        else:
            rep = 2.0 * self.RT * self.b**2 / gap**3
        return rep - 2.0 * self.a

    def describe(self):
        return {"type": "vdw", "RT": self.RT, "a": self.a, "b": self.b, "variant": self.variant}


@dataclass(frozen=True)
class PowerLaw(_LawBase):
    """``P = K rho^g`` with ``K > 0`` and ``g >= 1``."""

    K: float
    g: float

    def __post_init__(self):
        if self.K <= 0:
            raise ParamError("power-law coefficient K must be positive")
        if self.g < 1:
            raise ParamError("power-law exponent g must be >= 1")

    def _p(self, rho):
        return self.K * rho**self.g

    def _dp(self, rho):
        return self.K * self.g * rho ** (self.g - 1.0)

    def _d2p(self, rho):
        if self.g == 1:
            return np.zeros_like(rho)
        return self.K * self.g * (self.g - 1.0) * rho ** (self.g - 2.0)

    def describe(self):
        return {"type": "power", "K": self.K, "g": self.g}


@dataclass(frozen=True)
class Polynomial(_LawBase):
    """``P = sum_i c_i rho^i``; coefficients in increasing degree."""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.coefficients:
            raise ParamError("polynomial pressure needs at least one coefficient")

    @property
    def _poly(self):
        return np.polynomial.Polynomial(self.coefficients)

    def _p(self, rho):
        return self._poly(rho)

    def _dp(self, rho):
        return self._poly.deriv(1)(rho)

    def _d2p(self, rho):
        return self._poly.deriv(2)(rho)

    def describe(self):
        return {"type": "polynomial", "coefficients": list(self.coefficients)}


PressureLaw = Union[VanDerWaals, PowerLaw, Polynomial]


def eval_pressure(law: PressureLaw, rho: float) -> Tuple[float, float, float]:
    """Return ``(P, P', P'')`` at ``rho``; raises DomainError outside the law's domain."""
    law.check_domain(rho)
    r = np.asarray(rho, dtype=float)
    return float(law._p(r)), float(law._dp(r)), float(law._d2p(r))


def pressure_nonlinearity_G(law: PressureLaw, theta):
    """``G(theta) = P'(1 + theta) - P'(1) - P''(1) theta``.

    Vectorised over ``theta``.  ``G`` vanishes to second order at zero.
    """
    theta = np.asarray(theta, dtype=float)
    _, gamma, p2 = eval_pressure(law, 1.0)
    out = law.dpressure(1.0 + theta) - gamma - p2 * theta
    return float(out) if out.ndim == 0 else out


def helmholtz_W(law: PressureLaw, rho: float) -> float:
    """Helmholtz energy ``W(rho) = rho * (int_1^rho P/s^2 ds - P(1))``.

    This normalisation satisfies ``rho W' - W = P`` exactly.
    """
    law.check_domain(rho)
    law.check_domain(1.0)
    p1 = float(law._p(np.asarray(1.0)))
    if rho == 1.0:
        return -p1

    def integrand(s):
        return float(law._p(np.asarray(s))) / (s * s)

    val, err = integrate.quad(integrand, 1.0, float(rho), epsabs=1e-13, epsrel=1e-13, limit=200)
    if not np.isfinite(val) or err > W_TOL * max(1.0, abs(val)):
        raise QuadratureError(f"W({rho}) quadrature error estimate {err:.3g} exceeds {W_TOL}")
    return float(rho) * (val - p1)


# --------------------------------------------------------------------------
# phases
# --------------------------------------------------------------------------
class Phase(enum.Enum):
    VAPOR = "vapor"
    SPINODAL = "spinodal"
    LIQUID = "liquid"
    SINGLE = "single-phase"


@dataclass(frozen=True)
class PhaseReport:
    phase: Phase
    a1: Optional[float] = None
    a2: Optional[float] = None


def _spinodal_boundaries(law: PressureLaw, rho_hint: float, samples: int = 4000):
    lo, hi = law.domain()
    if math.isinf(hi):
        hi = max(10.0, 10.0 * rho_hint)
        grid = np.geomspace(1e-6, hi, samples)
    else:
        span = hi - lo
        grid = np.linspace(lo + 1e-6 * span, hi - 1e-6 * span, samples)
    dp = law._dp(grid)
    roots = []
    for i in np.flatnonzero(np.sign(dp[:-1]) * np.sign(dp[1:]) < 0):
        roots.append(optimize.brentq(lambda x: float(law._dp(np.asarray(x))), grid[i], grid[i + 1],
                                     xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
    return roots


def classify_phase(law: PressureLaw, rho: float) -> PhaseReport:
    """Classify ``rho`` as vapor, spinodal or liquid from the sign structure of ``P'``.

    ``a1``/``a2`` are the densities where ``P'`` changes sign.  A monotone law
    yields ``Phase.SINGLE`` with no boundaries.
    """
    law.check_domain(rho)
    roots = _spinodal_boundaries(law, rho)
    if not roots:
        return PhaseReport(Phase.SINGLE)
    a1 = roots[0]
    a2 = roots[1] if len(roots) > 1 else None
    if a2 is not None:
        if rho <= a1:
            phase = Phase.VAPOR
        elif rho < a2:
            phase = Phase.SPINODAL
        else:
            phase = Phase.LIQUID
    else:
        # one sign change: the negative side is spinodal
        if float(law._dp(np.asarray(rho))) < 0:
            phase = Phase.SPINODAL
        else:
            phase = Phase.VAPOR if rho <= a1 else Phase.LIQUID
    return PhaseReport(phase, a1, a2)


# --------------------------------------------------------------------------
# model parameters
# --------------------------------------------------------------------------
class Case(enum.IntEnum):
    """Eigenvalue taxonomy.  ``SPINODAL`` marks a reference state with ``P'(1) < 0``."""

    SPINODAL = 0
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4
    CASE5 = 5
    CASE6 = 6


def _classify_case(A: float, kappa: float, gamma: float) -> Case:
    scale = max(A * A, kappa, 1e-300)
    diff = A * A - kappa
    if abs(diff) <= CASE_RTOL * scale:
        diff = 0.0
    g = 0.0 if abs(gamma) <= CASE_RTOL * scale else gamma
    if g < 0:
        return Case.SPINODAL
    if g > 0:
        return Case.CASE1 if diff > 0 else (Case.CASE2 if diff < 0 else Case.CASE3)
    return Case.CASE4 if diff > 0 else (Case.CASE5 if diff < 0 else Case.CASE6)


@dataclass(frozen=True)
class ModelParams:
    """Validated coefficients of the linearised system around ``(rho, m) = (1, 0)``."""

    mu: float
    nu: float
    kappa: float
    n: int
    gamma: float
    p2: float
    law: PressureLaw = field(compare=True)
    case: Case = Case.CASE1

    @property
    def A(self) -> float:
        return 0.5 * (self.mu + self.nu)

    @property
    def B(self) -> Optional[float]:
        if self.case != Case.CASE1:
            return None
        return math.sqrt(self.gamma / (self.A**2 - self.kappa))

    @property
    def excluded(self) -> bool:
        """Case 5: gamma = 0 with A^2 < kappa."""
        return self.case == Case.CASE5

    @property
    def spinodal(self) -> bool:
        return self.case == Case.SPINODAL

    @property
    def globally_admissible(self) -> bool:
        return not (self.excluded or self.spinodal)

    @classmethod
    def from_coefficients(cls, mu, nu, kappa, gamma, n=2, p2=0.0):
        """Build parameters from ``gamma = P'(1)`` and ``P''(1)`` directly.

        The implied pressure law is the quadratic Taylor polynomial about 1.
        """
        half = 0.5 * p2
        law = Polynomial((half - gamma, gamma - p2, half))
        return _build(mu, nu, kappa, n, law, float(gamma), float(p2))

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "nu": self.nu,
            "kappa": self.kappa,
            "n": self.n,
            "gamma": self.gamma,
            "p2": self.p2,
            "law": self.law.describe(),
        }

    def digest(self) -> bytes:
        """SHA-256 of the canonical JSON form; stored in snapshot headers."""
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).digest()


def _check_coefficients(mu, nu, kappa, n):
    if n not in (1, 2, 3):
        raise ParamError(f"dimension n must be 1, 2 or 3, got {n}")
    if not mu > 0:
        raise ParamError(f"mu must be positive, got {mu}")
    if not kappa > 0:
        raise ParamError(f"kappa must be positive, got {kappa}")
    bound = (n - 2) / n * mu
    if not nu > bound:
        raise ParamError(f"nu must exceed (n-2)/n * mu = {bound:g}, got {nu}")


def _build(mu, nu, kappa, n, law, gamma, p2) -> ModelParams:
    mu, nu, kappa = float(mu), float(nu), float(kappa)
    _check_coefficients(mu, nu, kappa, n)
    A = 0.5 * (mu + nu)
    return ModelParams(mu, nu, kappa, int(n), gamma, p2, law, _classify_case(A, kappa, gamma))


def validate(mu, nu, kappa, law: PressureLaw, n: int = 2) -> ModelParams:
    """Check admissibility and derive ``gamma = P'(1)``, ``P''(1)`` and the case tag.

    Raises ParamError when ``mu > 0``, ``kappa > 0``, ``nu > (n-2) mu / n``
    fails.  A spinodal reference (``gamma < 0``) or Case 5 is accepted and
    flagged; the solver refuses such parameters without an explicit override.
    """
    _, gamma, p2 = eval_pressure(law, 1.0)
    return _build(mu, nu, kappa, n, law, gamma, p2)
