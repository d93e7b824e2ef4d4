"""Riemann, Ricci and scalar curvature from Christoffel symbols."""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, invert
from .forms import GeometrySpace
from .levi_civita import Connection
from .metric import PseudoMetric


class RiemannComponents:
    """r[i, j, k, l] = r^i_jkl, antisymmetric in (k, l)."""

    __slots__ = ("r",)

    def __init__(self, r: np.ndarray):
        r.setflags(write=False)
        self.r = r

    def __getitem__(self, idx) -> AlgebraElement:
        return self.r[idx]

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.r.reshape(-1))


class RicciTensor:
    """ric[j, l] = Ric(e_j, e_l)."""

    __slots__ = ("ric",)

    def __init__(self, ric: np.ndarray):
        ric.setflags(write=False)
        self.ric = ric

    def __getitem__(self, idx) -> AlgebraElement:
        return self.ric[idx]

    @property
    def n(self) -> int:
        return self.ric.shape[0]

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.ric.reshape(-1))

    def distance(self, other: "RicciTensor") -> float:
        return max((a - b).l1norm() for a, b in zip(self.ric.reshape(-1), other.ric.reshape(-1)))


def _nz(x: AlgebraElement) -> bool:
    return not x.is_zero()


def riemann(space: GeometrySpace, c: Connection) -> RiemannComponents:
    """r^i_jkl = sum_p (G^p_jk G^i_pl - G^p_jl G^i_pk) - d_l G^i_jk + d_k G^i_jl."""
    n = space.n
    G = c.gamma
    dG = np.empty((n, n, n, n), dtype=object)  # dG[m, i, j, k] = d_m G^i_jk
    for m in range(n):
        for idx in np.ndindex(n, n, n):
            dG[(m,) + idx] = space.partial(m, G[idx])
    r = np.empty((n,) * 4, dtype=object)
    for i, j, k in np.ndindex(n, n, n):
        for l in range(n):
            if l < k:
                r[i, j, k, l] = -r[i, j, l, k]
                continue
            acc = dG[k, i, j, l] - dG[l, i, j, k]
            for p in range(n):
                if _nz(G[p, j, k]) and _nz(G[i, p, l]):
                    acc = acc + G[p, j, k] * G[i, p, l]
                if _nz(G[p, j, l]) and _nz(G[i, p, k]):
                    acc = acc - G[p, j, l] * G[i, p, k]
            r[i, j, k, l] = acc
    return RiemannComponents(r)


def ricci(space: GeometrySpace, c: Connection) -> RicciTensor:
    """Ric(e_j, e_l) = sum_i r^i_jil."""
    R = riemann(space, c)
    n = space.n
    ric = np.empty((n, n), dtype=object)
    for j in range(n):
        for l in range(n):
            acc = space.zero()
            for i in range(n):
                acc = acc + R[i, j, i, l]
            ric[j, l] = acc
    return RicciTensor(ric)


def scalar(space: GeometrySpace, g: PseudoMetric, ric: RicciTensor) -> AlgebraElement:
    """Scal = sum_jl g(e_j (x) e_l) Ric(e_j, e_l), metric on the left."""
    acc = space.zero()
    for j in range(space.n):
        for l in range(space.n):
            gjl = g.entry(j, l)
            if _nz(gjl) and _nz(ric[j, l]):
                acc = acc + gjl * ric[j, l]
    return acc


def torus_closed_form_ric_scal(space: GeometrySpace, k: AlgebraElement, eps: float = 1e-12):
    """Closed-form Ricci tensor and scalar curvature of k * identity on the 2-torus."""
    if space.n != 2:
        raise ValueError("closed forms are for the 2-torus")
    d1 = lambda a: space.partial(0, a)
    d2 = lambda a: space.partial(1, a)
    ki = invert(k, eps)
    lap = d1(d1(k)) + d2(d2(k))
    cross = d1(ki) * d1(k) + d2(ki) * d2(k)
    diag = (ki * lap + cross) * -0.5
    off = (d1(ki) * d2(k) - d2(ki) * d1(k)) * 0.5
    ric = np.empty((2, 2), dtype=object)
    ric[0, 0] = ric[1, 1] = diag
    ric[0, 1] = off
    ric[1, 0] = -off
    scal = -lap - k * (d2(ki) * d2(k) + d1(ki) * d1(k))
    return RicciTensor(ric), scal
