# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twisted-convolution kernel.

Same contract as ``_kernels_py.twisted_mul``. Products whose result fits a
dense bounding box of at most ``MAX_BOX`` cells are accumulated in place;
larger ones fall back to pairwise expansion plus sort-based reduction.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

from ._kernels_py import canonicalize

cnp.import_array()

MAX_BOX = 1 << 22


def twisted_mul(const cnp.int64_t[:, ::1] ma, const double complex[::1] ca,
                const cnp.int64_t[:, ::1] mb, const double complex[::1] cb,
                const double[:, ::1] theta):
    cdef Py_ssize_t na = ma.shape[0], nb = mb.shape[0], n = ma.shape[1]
    cdef Py_ssize_t i, j, d, e, cell, box = 1
    cdef double ang, acc
    cdef double complex w

    if na == 0 or nb == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=np.complex128)

    lo_np = np.asarray(ma).min(axis=0) + np.asarray(mb).min(axis=0)
    hi_np = np.asarray(ma).max(axis=0) + np.asarray(mb).max(axis=0)
    ext_np = (hi_np - lo_np + 1).astype(np.int64)
    for d in range(n):
        box *= ext_np[d]
        if box > MAX_BOX:
            break

    # nonzero upper-triangular entries of theta
    pairs = [(i, j, theta[i, j]) for i in range(n) for j in range(i + 1, n)
             if theta[i, j] != 0.0]
    cdef Py_ssize_t npairs = len(pairs), k
    cdef cnp.int64_t[::1] pi_ = np.array([p[0] for p in pairs], dtype=np.int64)
    cdef cnp.int64_t[::1] pj_ = np.array([p[1] for p in pairs], dtype=np.int64)
    cdef double[::1] pt = np.array([p[2] for p in pairs], dtype=np.float64)

    cdef cnp.int64_t[::1] lo = lo_np.astype(np.int64)
    cdef cnp.int64_t[::1] stride = np.ones(n, dtype=np.int64)
    cdef double complex[::1] acc_buf
    cdef cnp.int64_t[:, ::1] pm
    cdef double complex[::1] pc

    if box <= MAX_BOX:
        for d in range(n - 2, -1, -1):
            stride[d] = stride[d + 1] * ext_np[d + 1]
        acc_buf = np.zeros(box, dtype=np.complex128)
        for i in range(na):
            for j in range(nb):
                ang = 0.0
                cell = 0
                for k in range(npairs):
                    ang += pt[k] * <double>(ma[i, pi_[k]] * mb[j, pj_[k]]
                                            - ma[i, pj_[k]] * mb[j, pi_[k]])
                for d in range(n):
                    cell += (ma[i, d] + mb[j, d] - lo[d]) * stride[d]
                ang *= M_PI
                w = ca[i] * cb[j]
                acc_buf[cell] += w * (cos(ang) + 1j * sin(ang))
        buf = np.asarray(acc_buf)
        idx = np.flatnonzero(buf)
        modes = np.stack(np.unravel_index(idx, tuple(ext_np)), axis=1).astype(np.int64)
        return modes.reshape(-1, n) + lo_np, buf[idx]

    pm = np.empty((na * nb, n), dtype=np.int64)
    pc = np.empty(na * nb, dtype=np.complex128)
    for i in range(na):
        for j in range(nb):
            ang = 0.0
            e = i * nb + j
            for k in range(npairs):
                ang += pt[k] * <double>(ma[i, pi_[k]] * mb[j, pj_[k]]
                                        - ma[i, pj_[k]] * mb[j, pi_[k]])
            for d in range(n):
                pm[e, d] = ma[i, d] + mb[j, d]
            ang *= M_PI
            pc[e] = ca[i] * cb[j] * (cos(ang) + 1j * sin(ang))
    return canonicalize(np.asarray(pm), np.asarray(pc))
