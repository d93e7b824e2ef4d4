"""Compare the compiled and numpy twisted-product kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times raw products of random elements with growing support, and a Neumann
inversion of 3 + U + U^-1 + V + V^-1 (scaled) through each backend.
"""

import argparse
import timeit

import numpy as np

from ncgeom import kernels
from ncgeom._kernels_py import twisted_mul as py_mul
from ncgeom.algebra import AlgebraElement, DeformationMatrix, invert

try:
    from ncgeom._kernels import twisted_mul as cy_mul
except ImportError:
    cy_mul = None


def random_operands(rng, radius, n=2):
    side = 2 * radius + 1
    grid = np.stack(np.meshgrid(*[np.arange(-radius, radius + 1)] * n, indexing="ij"), -1).reshape(-1, n)
    modes = np.ascontiguousarray(grid, dtype=np.int64)
    coeffs = rng.normal(size=side**n) + 1j * rng.normal(size=side**n)
    return modes, coeffs


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    theta = DeformationMatrix.torus(0.25).theta
    print(f"{'case':<28}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}")
    for radius in (2, 8, 16, 32):
        ma, ca = random_operands(rng, radius)
        mb, cb = random_operands(rng, radius)
        t_py = bench(lambda: py_mul(ma, ca, mb, cb, theta), args.repeat)
        row = f"{f'mul, {len(ca)} x {len(cb)} terms':<28}{t_py * 1e3:>12.2f}"
        if cy_mul is not None:
            t_cy = bench(lambda: cy_mul(ma, ca, mb, cb, theta), args.repeat)
            row += f"{t_cy * 1e3:>13.2f}{t_py / t_cy:>10.1f}"
        print(row)

    amb = DeformationMatrix.torus(0.25)
    U = AlgebraElement.monomial(amb, (1, 0))
    V = AlgebraElement.monomial(amb, (0, 1))
    k = AlgebraElement.scalar(amb, 5.0) + U + U.star() + V + V.star()
    saved = kernels.twisted_mul
    try:
        kernels.twisted_mul = py_mul
        t_py = bench(lambda: invert(k, 1e-12), args.repeat)
        row = f"{'invert, 2D, eps 1e-12':<28}{t_py * 1e3:>12.2f}"
        if cy_mul is not None:
            kernels.twisted_mul = cy_mul
            t_cy = bench(lambda: invert(k, 1e-12), args.repeat)
            row += f"{t_cy * 1e3:>13.2f}{t_py / t_cy:>10.1f}"
    finally:
        kernels.twisted_mul = saved
    print(row)
    if cy_mul is None:
        print("compiled extension not built; numpy timings only")


if __name__ == "__main__":
    main()
