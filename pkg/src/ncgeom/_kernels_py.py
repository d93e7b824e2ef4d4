"""Pure numpy implementation of the twisted-convolution kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
baseline in ``benchmarks/bench_kernels.py``.
"""

import numpy as np


def canonicalize(modes, coeffs):
    """Merge duplicate modes, drop exact zeros, sort modes lexicographically."""
    modes = np.asarray(modes, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if modes.ndim != 2:
        raise ValueError("modes must be a 2-d integer array")
    n = modes.shape[1]
    if coeffs.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=np.complex128)
    keys, lo, shape = _linear_keys(modes)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    coeffs = coeffs[order]
    uniq, start = np.unique(keys, return_index=True)
    summed = np.add.reduceat(coeffs, start)
    keep = summed != 0
    uniq = uniq[keep]
    summed = summed[keep]
    out = np.stack(np.unravel_index(uniq, shape), axis=1).astype(np.int64) + lo
    return out.reshape(-1, n), summed


def twisted_mul(ma, ca, mb, cb, theta):
    """Twisted product of two canonical coefficient maps.

    Returns the canonical form of sum_{r,s} exp(i*pi*<r, theta s>) a_r b_s W_{r+s}.
    """
    n = ma.shape[1]
    if ca.shape[0] == 0 or cb.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=np.complex128)
    phase = np.exp(1j * np.pi * pair_exponents(ma, mb, theta))
    prod = (ca[:, None] * cb[None, :]) * phase
    modes = (ma[:, None, :] + mb[None, :, :]).reshape(-1, n)
    return canonicalize(modes, prod.reshape(-1))


def pair_exponents(ma, mb, theta):
    """<r, theta s> for every pair, summed over i < j only.

    Integer cross terms r_i s_j - r_j s_i are formed before scaling, so the
    exponent is exactly antisymmetric under r <-> s and exactly zero for
    parallel modes.
    """
    n = ma.shape[1]
    out = np.zeros((ma.shape[0], mb.shape[0]))
    for i in range(n):
        for j in range(i + 1, n):
            t = theta[i, j]
            if t != 0.0:
                cross = np.outer(ma[:, i], mb[:, j]) - np.outer(ma[:, j], mb[:, i])
                out += t * cross
    return out


def _linear_keys(modes):
    lo = modes.min(axis=0)
    shape = tuple(int(x) for x in (modes.max(axis=0) - lo + 1))
    keys = np.ravel_multi_index(tuple((modes - lo).T), shape)
    return keys, lo, shape
