"""Free centered bimodule of one-forms and its tensor powers.

A one-form is sum_i e_i a_i with right coefficients in the central basis
e_1..e_n, and E (x) E, E (x) E (x) E are stored as n x n, n x n x n arrays of
coefficients. Because the basis is central, a (x) b of coefficient arrays is
the entrywise twisted product and left multiplication acts on coefficients.

Two-forms are the antisymmetric part of E (x) E, with wedge map m = 1 - sigma.
Indices are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraError, DeformationMatrix, DerivationRule, derive, l1norm


class _CoeffArray:
    """Immutable array of algebra coefficients of fixed tensor rank."""

    rank = 0
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, np.ndarray) and coeffs.dtype == object:
            arr = coeffs.copy()
        else:
            arr = _nested_to_object(coeffs, self.rank)
        if arr.ndim != self.rank or len(set(arr.shape)) != 1:
            raise AlgebraError(f"{type(self).__name__} needs a cubical array of rank {self.rank}, got {arr.shape}")
        flat = arr.reshape(-1)
        amb = flat[0].ambient
        for c in flat:
            if not isinstance(c, AlgebraElement):
                raise TypeError(f"coefficients must be AlgebraElement, got {type(c).__name__}")
            if c.ambient != amb:
                raise AlgebraError("coefficients live in different algebras")
        arr.setflags(write=False)
        self.coeffs = arr

    @classmethod
    def zeros(cls, ambient: DeformationMatrix, n: int):
        z = AlgebraElement.zero(ambient)
        arr = np.empty((n,) * cls.rank, dtype=object)
        arr.reshape(-1)[:] = [z] * arr.size
        return cls(arr)

    @classmethod
    def _wrap(cls, arr):
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj.coeffs = arr
        return obj

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def ambient(self) -> DeformationMatrix:
        return self.coeffs.reshape(-1)[0].ambient

    def __getitem__(self, idx):
        return self.coeffs[idx]

    def _binary(self, other, op):
        if type(other) is not type(self):
            return NotImplemented
        if other.n != self.n:
            raise AlgebraError("rank mismatch")
        out = np.empty(self.coeffs.shape, dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = op(self.coeffs[idx], other.coeffs[idx])
        return type(self)._wrap(out)

    def _map(self, f):
        out = np.empty(self.coeffs.shape, dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = f(self.coeffs[idx])
        return type(self)._wrap(out)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self):
        return self._map(lambda a: -a)

    def __mul__(self, a):
        """Right multiplication by an algebra element or scalar."""
        if isinstance(a, (AlgebraElement, int, float, complex, np.number)):
            return self._map(lambda c: c * a)
        return NotImplemented

    def __rmul__(self, a):
        if isinstance(a, (int, float, complex, np.number)):
            return self._map(lambda c: c * a)
        return NotImplemented

    def lmul(self, a: AlgebraElement):
        """Left multiplication; legitimate coefficientwise since the basis is central."""
        return self._map(lambda c: a * c)

    def l1norm(self) -> float:
        return float(sum(l1norm(c) for c in self.coeffs.reshape(-1)))

    def distance(self, other) -> float:
        return (self - other).l1norm()

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and all(
            a == b for a, b in zip(self.coeffs.reshape(-1), other.coeffs.reshape(-1))
        )

    __hash__ = None

    def tolist(self):
        return self.coeffs.tolist()

    def __repr__(self):
        nz = [(idx, c) for idx, c in np.ndenumerate(self.coeffs) if not c.is_zero()]
        return f"{type(self).__name__}({dict(nz)!r})"


def _nested_to_object(nested, rank):
    arr = np.empty(_shape_of(nested, rank), dtype=object)
    for idx in np.ndindex(arr.shape):
        v = nested
        for i in idx:
            v = v[i]
        arr[idx] = v
    return arr


def _shape_of(nested, rank):
    shape = []
    v = nested
    for _ in range(rank):
        shape.append(len(v))
        v = v[0]
    return tuple(shape)


class OneForm(_CoeffArray):
    """sum_i e_i a_i."""

    rank = 1


class Tensor2(_CoeffArray):
    """sum_{ij} e_i (x) e_j a_ij."""

    rank = 2


class Tensor3(_CoeffArray):
    rank = 3


class TwoForm(_CoeffArray):
    """Antisymmetric coefficient array: c[i][i] = 0 and c[j][i] = -c[i][j]."""

    rank = 2

    def __init__(self, coeffs):
        super().__init__(coeffs)
        c = self.coeffs
        for i in range(self.n):
            if not c[i, i].is_zero():
                raise AlgebraError("two-form has a nonzero diagonal coefficient")
            for j in range(i + 1, self.n):
                if c[j, i] != -c[i, j]:
                    raise AlgebraError("two-form coefficients are not antisymmetric")

    def l1norm(self) -> float:
        """l1 norm over the independent components i < j."""
        n = self.n
        return float(sum(l1norm(self.coeffs[i, j]) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def from_upper(cls, ambient, n, upper: dict):
        """Build from {(i, j): a} with i < j."""
        z = AlgebraElement.zero(ambient)
        arr = np.empty((n, n), dtype=object)
        arr.reshape(-1)[:] = [z] * arr.size
        for (i, j), a in upper.items():
            if not i < j:
                raise ValueError("from_upper expects i < j")
            arr[i, j] = a
            arr[j, i] = -a
        return cls(arr)


@dataclass(frozen=True, eq=False)
class GeometrySpace:
    """Free module of one-forms with central basis e_1..e_n over C[Z^n]_theta.

    ``basis_differentials[i]`` is d(e_i) as a two-form.
    """

    n: int
    theta: DeformationMatrix
    derivations: tuple
    basis_differentials: tuple
    name: str = "custom"
    generators: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("rank must be at least 1")
        if self.theta.n != self.n:
            raise ValueError("theta size differs from the module rank")
        if len(self.derivations) != self.n or len(self.basis_differentials) != self.n:
            raise ValueError("need one derivation and one d(e_i) per basis element")
        for r in self.derivations:
            if not isinstance(r, DerivationRule):
                raise TypeError("derivations must be DerivationRule instances")

    def partial(self, j: int, a: AlgebraElement) -> AlgebraElement:
        return derive(self.derivations[j], j, a)

    def scalar(self, c: complex) -> AlgebraElement:
        return AlgebraElement.scalar(self.theta, c)

    def unit(self) -> AlgebraElement:
        return AlgebraElement.unit(self.theta)

    def zero(self) -> AlgebraElement:
        return AlgebraElement.zero(self.theta)

    def basis_form(self, i: int, a: AlgebraElement | None = None) -> OneForm:
        """e_i a (a defaults to 1)."""
        f = [self.zero()] * self.n
        f[i] = self.unit() if a is None else a
        return OneForm(f)

    def basis_tensor(self, *idx: int, a: AlgebraElement | None = None):
        """e_{i1} (x) ... (x) e_{ik} a for k = 2 or 3."""
        cls = {2: Tensor2, 3: Tensor3}[len(idx)]
        arr = np.empty((self.n,) * len(idx), dtype=object)
        arr.reshape(-1)[:] = [self.zero()] * arr.size
        arr[tuple(idx)] = self.unit() if a is None else a
        return cls(arr)


def outer(w: OneForm, v: OneForm) -> Tensor2:
    """w (x) v for one-forms with central basis."""
    n = w.n
    return Tensor2([[w[i] * v[j] for j in range(n)] for i in range(n)])


def outer3(t: Tensor2, v: OneForm) -> Tensor3:
    n = t.n
    return Tensor3([[[t[i, j] * v[k] for k in range(n)] for j in range(n)] for i in range(n)])


def sigma(t: Tensor2) -> Tensor2:
    """Canonical flip e_i (x) e_j a -> e_j (x) e_i a."""
    return Tensor2._wrap(t.coeffs.T.copy())


def sigma12(t: Tensor3) -> Tensor3:
    return Tensor3._wrap(np.transpose(t.coeffs, (1, 0, 2)).copy())


def sigma23(t: Tensor3) -> Tensor3:
    return Tensor3._wrap(np.transpose(t.coeffs, (0, 2, 1)).copy())


def p_sym(t: Tensor2) -> Tensor2:
    return (t + sigma(t)) * 0.5


def wedge_m(t: Tensor2) -> TwoForm:
    """m = 1 - sigma, landing in the antisymmetric two-forms."""
    d = t - sigma(t)
    return TwoForm._wrap(d.coeffs.copy())


def as_tensor(w: TwoForm) -> Tensor2:
    return Tensor2._wrap(w.coeffs.copy())


def decompose(t: Tensor2) -> tuple[Tensor2, Tensor2]:
    """Split t = P_sym(t) + (1 - sigma)(t)/2 into Ker(m) and Ran(1 - sigma) parts."""
    return p_sym(t), (t - sigma(t)) * 0.5


def d_zero_form(space: GeometrySpace, a: AlgebraElement) -> OneForm:
    """d a = sum_j e_j partial_j(a)."""
    return OneForm([space.partial(j, a) for j in range(space.n)])


def d_one_form(space: GeometrySpace, w: OneForm) -> TwoForm:
    """d(sum_i e_i a_i) = sum_i d(e_i) a_i + m(e_i (x) d a_i)."""
    n = space.n
    acc = TwoForm.zeros(space.theta, n)
    for i in range(n):
        a = w[i]
        if a.is_zero():
            continue
        acc = acc + space.basis_differentials[i] * a
        acc = acc + wedge_m(outer(space.basis_form(i), d_zero_form(space, a)))
    return TwoForm._wrap(acc.coeffs.copy())


def _perm_matrix(n: int, perm: Sequence[int]) -> np.ndarray:
    dim = n**3
    P = np.zeros((dim, dim))
    for idx in itertools.product(range(n), repeat=3):
        src = np.ravel_multi_index(idx, (n,) * 3)
        dst = np.ravel_multi_index(tuple(idx[p] for p in perm), (n,) * 3)
        P[dst, src] = 1.0
    return P


def symmetrization_rank(n: int) -> tuple[int, int, int]:
    """Rank of P12 restricted to Ran(P23) on scalar n^3 coefficient arrays.

    Returns ``(rank, dim Ran(P23), dim Ran(P12))``; the restriction is an
    isomorphism onto Ran(P12) exactly when all three agree.
    """
    eye = np.eye(n**3)
    p12 = 0.5 * (eye + _perm_matrix(n, (1, 0, 2)))
    p23 = 0.5 * (eye + _perm_matrix(n, (0, 2, 1)))
    w, v = np.linalg.eigh(p23)
    basis = v[:, w > 0.5]
    rank = int(np.linalg.matrix_rank(p12 @ basis))
    return rank, basis.shape[1], int(np.linalg.matrix_rank(p12))
