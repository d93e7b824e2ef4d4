"""Pseudo-Riemannian metrics on the free module of one-forms.

Three variants share the ``entry(i, j) = g(e_i (x) e_j)`` interface:

* ``CentralMetric``: constant symmetric invertible complex matrix G0, i.e.
  a bi-metric with values in the scalars.
* ``ConformalMetric``: k * G0 for a certified-invertible algebra element k.
* ``GeneralMetric``: arbitrary symmetric matrix of algebra elements (only
  the truncated solver accepts it).
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, AlgebraError, DeformationMatrix, invert_with_bound
from .errors import ValidationError
from .forms import GeometrySpace, OneForm, Tensor2, Tensor3, d_zero_form

MAX_CONDITION = 1e12


class MetricError(ValidationError):
    pass


class PseudoMetric:
    kind = "abstract"

    def __init__(self, ambient: DeformationMatrix, n: int):
        self.ambient = ambient
        self.n = n

    def entry(self, i: int, j: int) -> AlgebraElement:
        raise NotImplementedError

    def matrix(self):
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.n)]


class CentralMetric(PseudoMetric):
    kind = "central"

    def __init__(self, ambient: DeformationMatrix, G0):
        G0 = np.array(G0, dtype=np.complex128)
        if G0.ndim != 2 or G0.shape[0] != G0.shape[1]:
            raise MetricError("G0 must be square")
        super().__init__(ambient, G0.shape[0])
        if G0.shape[0] != ambient.n:
            raise MetricError("G0 size differs from the module rank")
        if not np.array_equal(G0, G0.T):
            raise MetricError("G0 must be symmetric")
        try:
            cond = np.linalg.cond(G0)
            inv = np.linalg.inv(G0)
        except np.linalg.LinAlgError as exc:
            raise MetricError("G0 is singular") from exc
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise MetricError(f"G0 is numerically singular (condition {cond:.3g})")
        G0.setflags(write=False)
        inv.setflags(write=False)
        self.G0 = G0
        self.G0_inv = inv

    @classmethod
    def identity(cls, ambient: DeformationMatrix) -> "CentralMetric":
        return cls(ambient, np.eye(ambient.n))

    def entry(self, i, j):
        return AlgebraElement.scalar(self.ambient, self.G0[i, j])

    def is_identity(self) -> bool:
        return np.array_equal(self.G0, np.eye(self.n))

    def nondegeneracy_residual(self) -> float:
        return float(np.abs(self.G0 @ self.G0_inv - np.eye(self.n)).max())


class ConformalMetric(PseudoMetric):
    """g(e_i (x) e_j) = k G0_ij with the inverse of k cached at construction."""

    kind = "conformal"

    def __init__(self, k: AlgebraElement, base: CentralMetric, eps: float = 1e-12, max_terms: int = 2000):
        if k.ambient != base.ambient:
            raise AlgebraError("k and the base metric live in different algebras")
        super().__init__(base.ambient, base.n)
        self.k = k
        self.base = base
        self.k_inv, self.inverse_tail, self.inverse_terms = invert_with_bound(k, eps, max_terms)
        self.eps = eps

    def entry(self, i, j):
        return self.k * complex(self.base.G0[i, j])

    def inverse_residual(self) -> float:
        one = AlgebraElement.unit(self.ambient)
        return max((self.k * self.k_inv - one).l1norm(), (self.k_inv * self.k - one).l1norm())


class GeneralMetric(PseudoMetric):
    kind = "general"

    def __init__(self, G):
        G = [list(row) for row in G]
        n = len(G)
        if n == 0 or any(len(row) != n for row in G):
            raise MetricError("G must be a square matrix of algebra elements")
        super().__init__(G[0][0].ambient, n)
        for i in range(n):
            for j in range(n):
                if G[i][j] != G[j][i]:
                    raise MetricError("G must be symmetric")
        self.G = tuple(tuple(row) for row in G)

    def entry(self, i, j):
        return self.G[i][j]


def metric_apply(g: PseudoMetric, t: Tensor2) -> AlgebraElement:
    """g(sum e_i (x) e_j a_ij) = sum_ij g(e_i (x) e_j) a_ij."""
    if t.n != g.n:
        raise MetricError("rank mismatch between metric and tensor")
    acc = AlgebraElement.zero(g.ambient)
    for i in range(g.n):
        for j in range(g.n):
            a = t[i, j]
            if not a.is_zero():
                acc = acc + g.entry(i, j) * a
    return acc


def contract_first(g: PseudoMetric, t: Tensor3) -> OneForm:
    """(g (x) id)(sum e_a (x) e_b (x) e_c t_abc) = sum_c e_c sum_ab g_ab t_abc."""
    n = g.n
    out = []
    for c in range(n):
        acc = AlgebraElement.zero(g.ambient)
        for a in range(n):
            for b in range(n):
                x = t[a, b, c]
                if not x.is_zero():
                    acc = acc + g.entry(a, b) * x
        out.append(acc)
    return OneForm(out)


def conformal_deform(k: AlgebraElement, g0: CentralMetric, eps: float = 1e-12) -> ConformalMetric:
    if not isinstance(g0, CentralMetric):
        raise MetricError("conformal deformation needs a central base metric")
    return ConformalMetric(k, g0, eps)


def d_of_metric(space: GeometrySpace, g: PseudoMetric, i: int, j: int) -> OneForm:
    if isinstance(g, CentralMetric):
        return OneForm.zeros(space.theta, space.n)
    return d_zero_form(space, g.entry(i, j))


def omega(g0: CentralMetric) -> Tensor2:
    """Omega = sum_ij e_i (x) e_j (G0^-1)_ij."""
    if not isinstance(g0, CentralMetric):
        raise MetricError("Omega is defined here for central metrics only")
    n = g0.n
    inv = g0.G0_inv
    return Tensor2([[AlgebraElement.scalar(g0.ambient, inv[i, j]) for j in range(n)] for i in range(n)])
