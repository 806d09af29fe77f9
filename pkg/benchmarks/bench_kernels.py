"""Compare the numba and numpy twins of the mode-wise kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 64 128 256]
"""
import argparse
import timeit

import numpy as np

from nskorteweg import ModelParams, _backend, _kernels
from nskorteweg.field import Grid, random_state
from nskorteweg.green import mode_coefficients


def bench_apply_block(N, repeat):
    p = ModelParams.from_coefficients(1.0, 1.0, 0.5, 2.0, n=2)
    g = Grid(2, N)
    s = random_state(g, seed=0)
    c = mode_coefficients(g, p, 0.1)
    args = (c.c_pp, c.c_pu, c.c_up, c.heat, c.long, g.k_propagator(), s.pi_hat, s.m_hat)
    _kernels.apply_block_jit(*args)  # compile
    ref = _kernels.apply_block_numpy(*args)
    got = _kernels.apply_block_jit(*args)
    err = max(np.abs(ref[0] - got[0]).max(), np.abs(ref[1] - got[1]).max())
    t_np = min(timeit.repeat(lambda: _kernels.apply_block_numpy(*args), number=10, repeat=repeat)) / 10
    t_jit = min(timeit.repeat(lambda: _kernels.apply_block_jit(*args), number=10, repeat=repeat)) / 10
    return t_np, t_jit, err


def bench_fourier_sum(nodes, repeat):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(100, 2)) * 10
    xi = rng.normal(size=(nodes, 2))
    vals = rng.normal(size=(3, nodes)) + 1j * rng.normal(size=(3, nodes))
    _kernels.fourier_sum_jit(pts, xi, vals)
    err = np.abs(_kernels.fourier_sum_numpy(pts, xi, vals) - _kernels.fourier_sum_jit(pts, xi, vals)).max()
    t_np = min(timeit.repeat(lambda: _kernels.fourier_sum_numpy(pts, xi, vals), number=1, repeat=repeat))
    t_jit = min(timeit.repeat(lambda: _kernels.fourier_sum_jit(pts, xi, vals), number=1, repeat=repeat))
    return t_np, t_jit, err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--nodes", type=int, nargs="+", default=[4096, 16384])
    args = ap.parse_args()
    if not _backend.HAVE_NUMBA:
        raise SystemExit("numba is not available (or NSKORTEWEG_JIT=0); nothing to compare")
    print(f"{'kernel':<14}{'size':>8}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for N in args.sizes:
        a, b, e = bench_apply_block(N, args.repeat)
        print(f"{'apply_block':<14}{N:>8}{1e3 * a:>14.3f}{1e3 * b:>14.3f}{a / b:>10.2f}{e:>12.2e}")
    for m in args.nodes:
        a, b, e = bench_fourier_sum(m, args.repeat)
        print(f"{'fourier_sum':<14}{m:>8}{1e3 * a:>14.3f}{1e3 * b:>14.3f}{a / b:>10.2f}{e:>12.2e}")


if __name__ == "__main__":
    main()
