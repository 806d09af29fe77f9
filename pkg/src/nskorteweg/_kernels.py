"""Mode-wise kernels with a numba path and a numpy twin.

``apply_block`` applies the per-mode propagator structure

    phi' = c_pp phi - i c_pu (k . m)
    m'   = -i c_up k phi + heat (m - p) + long p,   p = k (k . m) / |k|^2

to flattened spectral arrays.  ``fourier_sum`` evaluates trapezoidal
inverse-Fourier sums at scattered physical points.  Which twin is exported
is decided by :mod:`nskorteweg._backend`.
"""
import numpy as np

from ._backend import USE_JIT, njit, prange

__all__ = ["apply_block", "apply_block_numpy", "apply_block_jit",
           "fourier_sum", "fourier_sum_numpy", "fourier_sum_jit", "USE_JIT"]


def _inv_k2(k):
    k2 = np.einsum("i...,i...->...", k, k)
    out = np.zeros_like(k2)
    nz = k2 > 0
    out[nz] = 1.0 / k2[nz]
    return out


def apply_block_numpy(cpp, cpu, cup, heat, long_, k, phi, m):
    """Numpy twin.  ``phi`` may be ``None`` (pure momentum forcing)."""
    inv = _inv_k2(k)
    kdotm = np.einsum("i...,i...->...", k, m)
    phi_out = -1j * cpu * kdotm
    par = (inv * kdotm) * k
    m_out = heat * (m - par) + long_ * par
    if phi is not None:
        phi_out = phi_out + cpp * phi
        m_out = m_out - 1j * (cup * phi) * k
    return phi_out, m_out


@njit(cache=True, parallel=False, fastmath=False)
def _apply_block_loop(cpp, cpu, cup, heat, long_, k, phi, m, has_phi, phi_out, m_out):
    n = k.shape[0]
    M = k.shape[1]
    for j in prange(M):
        k2 = 0.0
        kdm = 0j
        for a in range(n):
            k2 += k[a, j] * k[a, j]
            kdm += k[a, j] * m[a, j]
        proj = 0j
        if k2 > 0.0:
            proj = kdm / k2
        po = -1j * cpu[j] * kdm
        if has_phi:
            po += cpp[j] * phi[j]
        phi_out[j] = po
        for a in range(n):
            par = proj * k[a, j]
            v = heat[j] * (m[a, j] - par) + long_[j] * par
            if has_phi:
                v -= 1j * cup[j] * phi[j] * k[a, j]
            m_out[a, j] = v


def apply_block_jit(cpp, cpu, cup, heat, long_, k, phi, m):
    """Numba twin; same contract as :func:`apply_block_numpy`."""
    shape = m.shape
    n = shape[0]
    kf = np.ascontiguousarray(k.reshape(n, -1), dtype=np.float64)
    mf = np.ascontiguousarray(m.reshape(n, -1), dtype=np.complex128)
    M = kf.shape[1]

    def flat(c):
        return np.ascontiguousarray(np.broadcast_to(c, shape[1:]).reshape(-1), dtype=np.float64)

    has_phi = phi is not None
    pf = (np.ascontiguousarray(phi.reshape(-1), dtype=np.complex128) if has_phi
          else np.zeros(M, dtype=np.complex128))
    phi_out = np.empty(M, dtype=np.complex128)
    m_out = np.empty((n, M), dtype=np.complex128)
    zero = np.zeros(M)
    _apply_block_loop(flat(cpp) if has_phi else zero, flat(cpu), flat(cup) if has_phi else zero,
                      flat(heat), flat(long_), kf, pf, mf,
                      has_phi, phi_out, m_out)
    return phi_out.reshape(shape[1:]), m_out.reshape(shape)


def fourier_sum_numpy(points, nodes, values, chunk=16384):
    """``out[p, c] = sum_j exp(i x_p . xi_j) values[c, j]`` (numpy twin).

    points: (P, n) real; nodes: (J, n) real; values: (C, J) complex.
    """
    P = points.shape[0]
    C = values.shape[0]
    out = np.zeros((P, C), dtype=complex)
    for s in range(0, nodes.shape[0], chunk):
        phase = points @ nodes[s:s + chunk].T
        out += np.exp(1j * phase) @ values[:, s:s + chunk].T
    return out


@njit(cache=True, parallel=False)
def _fourier_sum_loop(points, nodes, values, out):
    P, n = points.shape
    J = nodes.shape[0]
    C = values.shape[0]
    for p in prange(P):
        for j in range(J):
            ph = 0.0
            for a in range(n):
                ph += points[p, a] * nodes[j, a]
            e = np.cos(ph) + 1j * np.sin(ph)
            for c in range(C):
                out[p, c] += e * values[c, j]


def fourier_sum_jit(points, nodes, values):
    """Numba twin of :func:`fourier_sum_numpy`."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.complex128)
    out = np.zeros((points.shape[0], values.shape[0]), dtype=np.complex128)
    _fourier_sum_loop(points, nodes, values, out)
    return out


if USE_JIT:
    apply_block = apply_block_jit
    fourier_sum = fourier_sum_jit
else:
    apply_block = apply_block_numpy
    fourier_sum = fourier_sum_numpy
