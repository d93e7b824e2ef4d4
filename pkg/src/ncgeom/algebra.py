"""Twisted group algebra C[Z^n]_theta.

Elements are finitely supported coefficient maps on Z^n. The product of
monomials is W_r x W_s = chi(r, s) W_{r+s} with the bicharacter
chi(r, s) = exp(pi i <r, theta s>); for n = 2 and theta = [[0, t], [-t, 0]]
the generators U = W_(1,0), V = W_(0,1) satisfy UV = exp(2 pi i t) VU.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InversionError, InversionToleranceError, ValidationError


class AlgebraError(ValidationError):
    """Dimension or ambient mismatch between algebra operands."""


class DeformationMatrix:
    """Skew-symmetric real n x n matrix theta, stored read-only."""

    __slots__ = ("theta",)

    def __init__(self, theta):
        arr = np.array(theta, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise AlgebraError(f"theta must be a square matrix, got shape {arr.shape}")
        if not np.array_equal(arr.T, -arr):
            raise AlgebraError("theta must be exactly skew-symmetric")
        arr = arr + 0.0  # normalise -0.0 on the diagonal
        arr.setflags(write=False)
        self.theta = arr

    @classmethod
    def torus(cls, t: float) -> "DeformationMatrix":
        return cls([[0.0, t], [-t, 0.0]])

    @classmethod
    def zero(cls, n: int) -> "DeformationMatrix":
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, DeformationMatrix):
            return NotImplemented
        return np.array_equal(self.theta, other.theta)

    def __hash__(self):
        return hash(self.theta.tobytes())

    def __repr__(self):
        return f"DeformationMatrix({self.theta.tolist()!r})"


def bicharacter(theta: DeformationMatrix, r: Sequence[int], s: Sequence[int]) -> complex:
    """exp(pi i <r, theta s>)."""
    r = np.asarray(r, dtype=np.int64).reshape(1, -1)
    s = np.asarray(s, dtype=np.int64).reshape(1, -1)
    if r.shape[1] != theta.n or s.shape[1] != theta.n:
        raise AlgebraError(f"lattice points must have length {theta.n}")
    ang = kernels.pair_exponents(r, s, theta.theta)[0, 0]
    return complex(math.cos(math.pi * ang), math.sin(math.pi * ang))


class AlgebraElement:
    """Immutable element sum_m a_m W_m of the twisted group algebra.

    The canonical form keeps modes sorted lexicographically with no exact
    zero coefficients, so equality is array identity.
    """

    __slots__ = ("ambient", "_modes", "_coeffs")

    def __init__(self, ambient: DeformationMatrix, terms: Mapping[Sequence[int], complex] | None = None):
        n = ambient.n
        if terms:
            modes = np.array([tuple(m) for m in terms.keys()], dtype=np.int64)
            if modes.shape[1] != n:
                raise AlgebraError(f"modes must have length {n}")
            coeffs = np.array([complex(v) for v in terms.values()], dtype=np.complex128)
        else:
            modes = np.zeros((0, n), dtype=np.int64)
            coeffs = np.zeros(0, dtype=np.complex128)
        modes, coeffs = kernels.canonicalize(modes, coeffs)
        self._set(ambient, modes, coeffs)

    def _set(self, ambient, modes, coeffs):
        modes = np.ascontiguousarray(modes, dtype=np.int64)
        coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
        modes.setflags(write=False)
        coeffs.setflags(write=False)
        self.ambient = ambient
        self._modes = modes
        self._coeffs = coeffs

    @classmethod
    def _from_canonical(cls, ambient, modes, coeffs) -> "AlgebraElement":
        obj = cls.__new__(cls)
        obj._set(ambient, modes, coeffs)
        return obj

    @classmethod
    def from_arrays(cls, ambient: DeformationMatrix, modes, coeffs) -> "AlgebraElement":
        modes = np.asarray(modes, dtype=np.int64).reshape(-1, ambient.n)
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if modes.shape[0] != coeffs.shape[0]:
            raise AlgebraError("modes and coefficients differ in length")
        return cls._from_canonical(ambient, *kernels.canonicalize(modes, coeffs))

    @classmethod
    def zero(cls, ambient: DeformationMatrix) -> "AlgebraElement":
        return cls(ambient)

    @classmethod
    def scalar(cls, ambient: DeformationMatrix, c: complex) -> "AlgebraElement":
        return cls(ambient, {(0,) * ambient.n: c})

    @classmethod
    def unit(cls, ambient: DeformationMatrix) -> "AlgebraElement":
        return cls.scalar(ambient, 1.0)

    @classmethod
    def monomial(cls, ambient: DeformationMatrix, mode: Sequence[int], c: complex = 1.0) -> "AlgebraElement":
        return cls(ambient, {tuple(mode): c})

    # -- inspection --------------------------------------------------------

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def terms(self) -> dict:
        return {tuple(int(x) for x in m): complex(c) for m, c in zip(self._modes, self._coeffs)}

    def __len__(self):
        return self._coeffs.shape[0]

    def coeff(self, mode: Sequence[int]) -> complex:
        mode = np.asarray(mode, dtype=np.int64)
        hit = np.flatnonzero((self._modes == mode).all(axis=1))
        return complex(self._coeffs[hit[0]]) if hit.size else 0j

    def is_zero(self) -> bool:
        return self._coeffs.shape[0] == 0

    def is_scalar(self) -> bool:
        return self.is_zero() or (len(self) == 1 and not self._modes[0].any())

    def chop(self, tol: float) -> "AlgebraElement":
        """Drop coefficients with modulus <= tol."""
        keep = np.abs(self._coeffs) > tol
        return AlgebraElement._from_canonical(self.ambient, self._modes[keep], self._coeffs[keep])

    def max_degree(self) -> int:
        """Largest |m_j| over the support (0 for the zero element)."""
        return int(np.abs(self._modes).max()) if len(self) else 0

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if self.ambient != other.ambient:
            raise AlgebraError("operands live in different twisted algebras")

    def _coerce(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return AlgebraElement.scalar(self.ambient, complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AlgebraElement.from_arrays(
            self.ambient,
            np.concatenate([self._modes, other._modes]),
            np.concatenate([self._coeffs, other._coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement._from_canonical(self.ambient, self._modes, -self._coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: complex) -> "AlgebraElement":
        c = complex(c)
        if c == 0:
            return AlgebraElement.zero(self.ambient)
        return AlgebraElement.from_arrays(self.ambient, self._modes, self._coeffs * c)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(1.0 / complex(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = AlgebraElement.unit(self.ambient)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and np.array_equal(self._modes, other._modes)
            and np.array_equal(self._coeffs, other._coeffs)
        )

    def __hash__(self):
        return hash((self.ambient, self._modes.tobytes(), self._coeffs.tobytes()))

    def __repr__(self):
        if self.is_zero():
            return "AlgebraElement(0)"
        body = " + ".join(f"({c:.6g})W{tuple(int(x) for x in m)}" for m, c in zip(self._modes, self._coeffs))
        return f"AlgebraElement({body})"

    # -- named operations --------------------------------------------------

    def star(self) -> "AlgebraElement":
        return star(self)

    def trace(self) -> complex:
        return trace(self)

    def l1norm(self) -> float:
        return l1norm(self)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Twisted product a x_theta b."""
    a._check(b)
    modes, coeffs = kernels.twisted_mul(a._modes, a._coeffs, b._modes, b._coeffs, a.ambient.theta)
    return AlgebraElement._from_canonical(a.ambient, modes, coeffs)


def star(a: AlgebraElement) -> AlgebraElement:
    # W_m^* = W_{-m} because chi(m, -m) = 1
    return AlgebraElement.from_arrays(a.ambient, -a._modes, np.conj(a._coeffs))


def trace(a: AlgebraElement) -> complex:
    """Coefficient of the zero mode."""
    return a.coeff((0,) * a.n)


def l1norm(a: AlgebraElement) -> float:
    return float(np.abs(a._coeffs).sum())


def distance(a: AlgebraElement, b: AlgebraElement) -> float:
    """l1 norm of a - b."""
    return l1norm(a - b)


@dataclass(frozen=True)
class DerivationRule:
    """How the coordinate derivations act on the algebra.

    ``lattice``: d_j multiplies the coefficient of W_m by i*m_j.
    ``trivial``: every element is mapped to zero; ``structure_constants``
    c[k, i, j] record [d_i, d_j] = sum_k c[k, i, j] d_k as metadata.
    """

    kind: str = "lattice"
    structure_constants: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("lattice", "trivial"):
            raise ValueError(f"unknown derivation rule {self.kind!r}")
        if self.structure_constants is not None:
            c = np.asarray(self.structure_constants, dtype=np.float64)
            if c.ndim != 3 or not np.array_equal(c, -np.swapaxes(c, 1, 2)):
                raise ValueError("structure constants must be antisymmetric in the lower indices")


def derive(rule: DerivationRule, j: int, a: AlgebraElement) -> AlgebraElement:
    """Apply the j-th derivation (0-based) to a."""
    if not 0 <= j < a.n:
        raise IndexError(f"derivation index {j} out of range for n={a.n}")
    if rule.kind == "trivial":
        return AlgebraElement.zero(a.ambient)
    return AlgebraElement.from_arrays(a.ambient, a._modes, a._coeffs * (1j * a._modes[:, j]))


def invert(a: AlgebraElement, eps: float = 1e-12, max_terms: int = 2000) -> AlgebraElement:
    return invert_with_bound(a, eps, max_terms)[0]


def invert_with_bound(a: AlgebraElement, eps: float = 1e-12, max_terms: int = 2000):
    """Invert a certified-invertible element.

    Returns ``(inverse, tail_bound, terms)``. A scalar multiple of a
    monomial is inverted exactly (tail 0). Otherwise a = lam (1 + x) with
    lam the zero-mode coefficient must satisfy q = |x|_1 < 1; the Neumann
    sum lam^-1 sum_{t<T} (-x)^t is used with T the least integer such that
    q**T <= eps, and ``a x inverse - 1 = -(-x)^T`` has l1 norm at most q**T.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if a.is_zero():
        raise InversionError("zero element is not invertible")
    amb = a.ambient
    if len(a) == 1:
        return AlgebraElement.from_arrays(amb, -a._modes, 1.0 / a._coeffs), 0.0, 1
    lam = trace(a)
    if lam == 0:
        raise InversionError("element has no zero-mode term and is not a monomial")
    x = a.scale(1.0 / lam) - AlgebraElement.unit(amb)
    q = l1norm(x)
    if q >= 1.0:
        raise InversionError(f"Neumann ratio |x|_1/|lambda| = {q:.6g} is not below 1")
    if q == 0.0:
        return AlgebraElement.scalar(amb, 1.0 / lam), 0.0, 1
    terms = max(1, math.ceil(math.log(eps) / math.log(q)))
    while q**terms > eps:  # guard against log rounding
        terms += 1
    if terms > max_terms:
        raise InversionToleranceError(f"tolerance {eps:g} needs {terms} Neumann terms (max_terms={max_terms})")
    one = AlgebraElement.unit(amb)
    neg_x = -x
    acc = one
    for _ in range(terms - 1):
        acc = one + neg_x * acc
    return acc.scale(1.0 / lam), q**terms, terms
