"""Independent reference computations used by the verification suite."""
from __future__ import annotations

import numpy as np

from .model import ModelParams

__all__ = ["mode_matrix", "rk4_propagators"]


def mode_matrix(params: ModelParams, xi) -> np.ndarray:
    """Generator ``M(xi)`` of the linear Fourier system ``d/dt (phi, u)^ = M (phi, u)^``."""
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    r2 = float(xi @ xi)
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[0, 1:] = -1j * xi
    M[1:, 0] = -1j * (params.gamma + params.kappa * r2) * xi
    M[1:, 1:] = -params.mu * r2 * np.eye(n) - params.nu * np.outer(xi, xi)
    return M


def rk4_propagators(mats, times, h: float = 1e-5) -> np.ndarray:
    """Classical RK4 for ``Y' = M Y``, ``Y(0) = I`` on a batch of generators.

    ``mats`` has shape ``(B, d, d)``; returns ``(len(times), B, d, d)`` with
    the integrated propagator at each requested time (multiples of ``h``).
    """
    mats = np.asarray(mats, dtype=complex)
    d = mats.shape[-1]
    targets = [int(round(t / h)) for t in times]
    if any(abs(k * h - t) > 1e-9 * max(t, 1) for k, t in zip(targets, times)):
        raise ValueError("times must be integer multiples of h")
    Y = np.broadcast_to(np.eye(d, dtype=complex), mats.shape).copy()
    out = np.empty((len(times),) + mats.shape, dtype=complex)
    done = {}
    for i in range(1, max(targets) + 1):
        k1 = mats @ Y
        k2 = mats @ (Y + 0.5 * h * k1)
        k3 = mats @ (Y + 0.5 * h * k2)
        k4 = mats @ (Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if i in targets:
            done[i] = Y.copy()
    for j, k in enumerate(targets):
        out[j] = done[k] if k else np.eye(d)
    return out
