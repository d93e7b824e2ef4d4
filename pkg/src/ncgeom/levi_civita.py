"""Levi-Civita connections on free modules with central basis.

A connection is stored through its Christoffel array: nabla(e_i) =
sum_{j,k} e_j (x) e_k Gamma[i, j, k]. Given a torsion-free reference
connection nabla0, the Levi-Civita connection is nabla0 + L where L is the
unique symmetric solution of Phi_g(L) = S_g(nabla0) = dg - Pi_g(nabla0).

Conventions
-----------
``strict`` evaluates Pi_g and Phi_g exactly as
(g (x) id) sigma_23 (nabla (x) id)(1 + sigma). ``paper`` halves Pi_g on the
reference connection only and solves the same Phi_g(L) equation, which is
the convention behind the published quantum Heisenberg numbers. Both agree
whenever Pi_g(nabla0) = 0, in particular on every torus preset.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import AlgebraElement, invert
from .errors import NonUniqueError, ToleranceError, ValidationError, WindowOverflowError
from .forms import GeometrySpace, OneForm, Tensor2, d_zero_form, outer, outer3, sigma23, wedge_m
from .kernels import pair_exponents
from .metric import (
    CentralMetric,
    ConformalMetric,
    MetricError,
    PseudoMetric,
    contract_first,
    d_of_metric,
    metric_apply,
    omega,
)

SOLVER_TOL = 1e-10
TRUNCATED_TOL = 1e-9
DENSE_LIMIT = 1200


class Convention(str, Enum):
    STRICT = "strict"
    PAPER = "paper"


def _convention(flag) -> Convention:
    try:
        return Convention(flag)
    except ValueError:
        raise ValidationError(f"unknown convention {flag!r}; expected 'strict' or 'paper'") from None


class Connection:
    """Christoffel array Gamma[i, j, k] of a connection on the free module."""

    __slots__ = ("space", "gamma")

    def __init__(self, space: GeometrySpace, gamma):
        n = space.n
        arr = np.empty((n, n, n), dtype=object)
        for idx in np.ndindex(arr.shape):
            v = gamma[idx] if isinstance(gamma, np.ndarray) else gamma[idx[0]][idx[1]][idx[2]]
            if not isinstance(v, AlgebraElement):
                v = space.scalar(v)
            arr[idx] = v
        arr.setflags(write=False)
        self.space = space
        self.gamma = arr

    @classmethod
    def zero(cls, space: GeometrySpace) -> "Connection":
        z = space.zero()
        return cls(space, [[[z] * space.n for _ in range(space.n)] for _ in range(space.n)])

    @classmethod
    def from_values(cls, space: GeometrySpace, values: dict) -> "Connection":
        """Build from {(i, j, k): value} with 0-based indices; missing entries are zero."""
        gamma = np.empty((space.n,) * 3, dtype=object)
        gamma.reshape(-1)[:] = [space.zero()] * gamma.size
        for idx, v in values.items():
            gamma[idx] = v if isinstance(v, AlgebraElement) else space.scalar(v)
        return cls(space, gamma)

    @property
    def n(self) -> int:
        return self.space.n

    def __getitem__(self, idx) -> AlgebraElement:
        return self.gamma[idx]

    def on_basis(self, i: int) -> Tensor2:
        """nabla(e_i)."""
        return Tensor2(self.gamma[i])

    def _combine(self, other, op):
        out = np.empty(self.gamma.shape, dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = op(self.gamma[idx], other.gamma[idx])
        return Connection(self.space, out)

    def __add__(self, other: "Connection") -> "Connection":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "Connection") -> "Connection":
        return self._combine(other, lambda a, b: a - b)

    def distance(self, other: "Connection") -> float:
        """Max over (i, j, k) of the l1 distance between Christoffel symbols."""
        return max((a - b).l1norm() for a, b in zip(self.gamma.reshape(-1), other.gamma.reshape(-1)))

    def is_symmetric(self) -> bool:
        n = self.n
        return all(self.gamma[i, j, k] == self.gamma[i, k, j] for i in range(n) for j in range(n) for k in range(n))

    def __repr__(self):
        nz = {idx: g for idx, g in np.ndenumerate(self.gamma) if not g.is_zero()}
        return f"Connection({nz!r})"


@dataclass(frozen=True)
class CompatRhs:
    """entries[i][j] is the one-form value of a symmetric map on e_i (x) e_j."""

    entries: tuple

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def coefficient(self, m: int, i: int, j: int) -> AlgebraElement:
        """C^m_ij, the e_m component of entry (i, j)."""
        return self.entries[i][j][m]


def reference_connection(space: GeometrySpace) -> Connection:
    """Torsion-free nabla0 read off d(e_i).

    nabla0(e_i) is the strictly upper-triangular part of d(e_i), so that
    m(nabla0(e_i)) = d(e_i); this is zero when every d(e_i) vanishes.
    """
    n = space.n
    values = {}
    for i in range(n):
        de = space.basis_differentials[i]
        for j in range(n):
            for k in range(j + 1, n):
                if not de[j, k].is_zero():
                    values[(i, j, k)] = de[j, k]
    return Connection.from_values(space, values)


def apply_connection(c: Connection, w: OneForm) -> Tensor2:
    """nabla(sum_i e_i a_i) = sum_i nabla(e_i) a_i + e_i (x) d(a_i)."""
    space = c.space
    n = space.n
    if w.n != n:
        raise ValidationError("rank mismatch between connection and one-form")
    acc = Tensor2.zeros(space.theta, n)
    for i in range(n):
        a = w[i]
        if a.is_zero():
            continue
        acc = acc + c.on_basis(i) * a + outer(space.basis_form(i), d_zero_form(space, a))
    return acc


def _pi_direct(g: PseudoMetric, c: Connection, i: int, j: int) -> OneForm:
    space = c.space
    t = outer3(c.on_basis(i), space.basis_form(j)) + outer3(c.on_basis(j), space.basis_form(i))
    return contract_first(g, sigma23(t))


def pi_g(g: PseudoMetric, c: Connection, i: int, j: int, flag="strict") -> OneForm:
    """(g (x) id) sigma_23 (nabla(e_i) (x) e_j + nabla(e_j) (x) e_i); halved in paper mode."""
    out = _pi_direct(g, c, i, j)
    if _convention(flag) is Convention.PAPER:
        out = out * 0.5
    return out


def phi_g(g: PseudoMetric, L: Connection, i: int, j: int) -> OneForm:
    """Component form: q-th coefficient is sum_p g_pj L^i_pq + g_pi L^j_pq."""
    n = L.n
    out = []
    for q in range(n):
        acc = L.space.zero()
        for p in range(n):
            a, b = L[i, p, q], L[j, p, q]
            if not a.is_zero():
                acc = acc + g.entry(p, j) * a
            if not b.is_zero():
                acc = acc + g.entry(p, i) * b
        out.append(acc)
    return OneForm(out)


def s_g(space: GeometrySpace, g: PseudoMetric, c: Connection, flag="strict") -> CompatRhs:
    """S_g(nabla)(e_i (x) e_j) = dg(e_i (x) e_j) - Pi_g(nabla)(e_i (x) e_j), exactly symmetric."""
    n = space.n
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = d_of_metric(space, g, i, j) - pi_g(g, c, i, j, flag)
            rows[i][j] = rows[j][i] = v
    return CompatRhs(tuple(tuple(r) for r in rows))


def torsion_residual(space: GeometrySpace, c: Connection) -> float:
    """max_i |m(nabla(e_i)) - d(e_i)| over independent two-form components."""
    return max((wedge_m(c.on_basis(i)) - space.basis_differentials[i]).l1norm() for i in range(space.n))


def compatibility_residual(space: GeometrySpace, g: PseudoMetric, c: Connection, flag="strict") -> float:
    """max_ij |Pi_g(nabla)(e_i (x) e_j) - dg(e_i (x) e_j)|.

    In paper mode Pi_g(nabla) is read as half of Pi_g on the reference
    connection plus Phi_g of the correction nabla - nabla0.
    """
    flag = _convention(flag)
    n = space.n
    if flag is Convention.PAPER:
        nabla0 = reference_connection(space)
        corr = c - nabla0
    worst = 0.0
    for i in range(n):
        for j in range(i, n):
            if flag is Convention.STRICT:
                lhs = pi_g(g, c, i, j, flag)
            else:
                lhs = pi_g(g, nabla0, i, j, flag) + phi_g(g, corr, i, j)
            worst = max(worst, (lhs - d_of_metric(space, g, i, j)).l1norm())
    return worst


# -- closed-form backends ----------------------------------------------------


def congruence_factor(G0) -> tuple[np.ndarray, np.ndarray]:
    """Factor a complex symmetric invertible G0 as B^T B; returns (B, B^-1).

    Symmetric Gaussian elimination P^T G0 P = D with diagonal pivoting; when
    every remaining diagonal entry vanishes, a column is added to its partner
    to create a nonzero pivot.
    """
    A = np.array(G0, dtype=np.complex128)
    n = A.shape[0]
    P = np.eye(n, dtype=np.complex128)
    scale = max(np.abs(A).max(), 1.0)
    tiny = 1e-14 * scale
    for k in range(n):
        if abs(A[k, k]) <= tiny:
            rest = [j for j in range(k + 1, n) if abs(A[j, j]) > tiny]
            if rest:
                j = max(rest, key=lambda r: abs(A[r, r]))
                A[[k, j]] = A[[j, k]]
                A[:, [k, j]] = A[:, [j, k]]
                P[:, [k, j]] = P[:, [j, k]]
            else:
                partners = [j for j in range(k + 1, n) if abs(A[k, j]) > tiny]
                if not partners:
                    raise MetricError("G0 is singular")
                j = partners[0]
                A[:, k] += A[:, j]
                A[k, :] += A[j, :]
                P[:, k] += P[:, j]
        piv = A[k, k]
        for j in range(k + 1, n):
            f = A[k, j] / piv
            if f != 0:
                A[:, j] -= f * A[:, k]
                A[j, :] -= f * A[k, :]
                P[:, j] -= f * P[:, k]
    root = np.sqrt(np.diag(A))
    B_inv = P / root[None, :]
    B = np.linalg.inv(B_inv)
    return B, B_inv


def _combo(space, terms):
    acc = space.zero()
    for coef, x in terms:
        if coef != 0 and not x.is_zero():
            acc = acc + x * coef
    return acc


def _koszul_identity(space, C):
    """L^j_im = (C^m_ij + C^i_jm - C^j_mi) / 2 for C[m][i][j] symmetric in (i, j)."""
    n = space.n
    L = np.empty((n, n, n), dtype=object)
    for j in range(n):
        for i in range(n):
            for m in range(i, n):
                v = (C[m][i][j] + C[i][j][m] - C[j][m][i]) * 0.5
                L[j, i, m] = L[j, m, i] = v
    return Connection(space, L)


def solve_koszul(space: GeometrySpace, g: PseudoMetric, nabla0: Connection, flag="strict", check=True) -> Connection:
    """Levi-Civita connection via the cyclic (Koszul) formula.

    g must be central or conformal over a central base. For a non-identity
    G0 the basis is congruence-transformed to make the metric the identity.
    """
    if isinstance(g, ConformalMetric):
        base, k_inv = g.base, g.k_inv
    elif isinstance(g, CentralMetric):
        base, k_inv = g, None
    else:
        raise MetricError("Koszul backend needs a central or conformal metric")
    n = space.n
    S = s_g(space, g, nabla0, flag)
    # C[m][i][j] = k^-1 S(e_i (x) e_j)_m
    C = [[[S.coefficient(m, i, j) for j in range(n)] for i in range(n)] for m in range(n)]
    if k_inv is not None:
        C = [[[k_inv * C[m][i][j] for j in range(n)] for i in range(n)] for m in range(n)]
    if base.is_identity():
        L = _koszul_identity(space, C)
    else:
        B, P = congruence_factor(base.G0)
        r = range(n)
        Cp = [[[_combo(space, [(B[c, m] * P[i, a] * P[j, b], C[m][i][j]) for m in r for i in r for j in r])
                for b in r] for a in r] for c in r]
        Lp = _koszul_identity(space, Cp)
        gamma = np.empty((n, n, n), dtype=object)
        for i in r:
            for p in r:
                for q in range(p, n):
                    v = _combo(space, [(P[p, a] * P[q, c] * B[b, i], Lp[b, a, c]) for a in r for b in r for c in r])
                    gamma[i, p, q] = gamma[i, q, p] = v
        L = Connection(space, gamma)
    nabla = nabla0 + L
    if check:
        _verify(space, g, nabla, flag, "koszul")
    return nabla


def solve_conformal(space: GeometrySpace, g0: CentralMetric, k: AlgebraElement, nabla0: Connection,
                    eps: float = 1e-12, check=True) -> Connection:
    """nabla(w) = nabla0(w) + (beta (x) w + w (x) beta)/2 - Omega g0(beta (x) w)/2, beta = k^-1 dk.

    nabla0 must be the Levi-Civita connection of g0.
    """
    if not isinstance(g0, CentralMetric):
        raise MetricError("conformal backend needs a central base metric")
    if compatibility_residual(space, g0, nabla0, "strict") > SOLVER_TOL or torsion_residual(space, nabla0) > SOLVER_TOL:
        raise ValidationError("nabla0 is not the Levi-Civita connection of g0")
    k_inv = invert(k, eps)
    beta = d_zero_form(space, k).lmul(k_inv)
    om = omega(g0)
    gamma = np.empty((space.n,) * 3, dtype=object)
    for i in range(space.n):
        ei = space.basis_form(i)
        t = (
            nabla0.on_basis(i)
            + outer(beta, ei) * 0.5
            + outer(ei, beta) * 0.5
            - om * metric_apply(g0, outer(beta, ei)) * 0.5
        )
        gamma[i] = t.coeffs
    nabla = Connection(space, gamma)
    if check:
        _verify(space, ConformalMetric(k, g0, eps), nabla, "strict", "conformal")
    return nabla


def _verify(space, g, nabla, flag, backend):
    tor = torsion_residual(space, nabla)
    comp = compatibility_residual(space, g, nabla, flag)
    if tor > SOLVER_TOL or comp > SOLVER_TOL:
        raise ToleranceError(f"{backend} solution fails verification: torsion {tor:.3g}, compatibility {comp:.3g}")


# -- truncated oracle ----------------------------------------------------------


@dataclass(frozen=True)
class TruncatedInfo:
    window: int
    unknowns: int
    rank: int
    residual: float
    windows_tried: tuple = ()


def _window_modes(n, B):
    axes = [np.arange(-B, B + 1)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return grid.reshape(-1, n).astype(np.int64)


def _left_mult_block(a: AlgebraElement, modes, B):
    """Sparse (W x W) matrix of x -> a x restricted to the window modes."""
    n = modes.shape[1]
    W = modes.shape[0]
    if a.is_zero():
        return sp.csr_matrix((W, W), dtype=np.complex128)
    side = 2 * B + 1
    rows, cols, vals = [], [], []
    cols_all = np.arange(W)
    phase_all = np.exp(1j * np.pi * pair_exponents(a.modes, modes, a.ambient.theta))
    for t in range(len(a)):
        target = modes + a.modes[t]
        inside = np.all(np.abs(target) <= B, axis=1)
        tgt = target[inside] + B
        rows.append(np.ravel_multi_index(tuple(tgt.T), (side,) * n))
        cols.append(cols_all[inside])
        vals.append(a.coeffs[t] * phase_all[t, inside])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(W, W)
    )


def assemble_phi(space: GeometrySpace, g: PseudoMetric, window: int):
    """Phi_g on symmetric unknowns L^i_pq (p <= q) over the window [-B, B]^n.

    Rows are indexed by (i <= j, q, mode), columns by (i, p <= q, mode).
    Returns ``(matrix, modes, unknown_index, equation_index)``.
    """
    n = space.n
    modes = _window_modes(n, window)
    W = modes.shape[0]
    pairs = [(p, q) for p in range(n) for q in range(p, n)]
    unk = {(i, p, q): u for u, (i, (p, q)) in enumerate((i, pq) for i in range(n) for pq in pairs)}
    eqs = {(i, j, q): e for e, (i, j, q) in enumerate((i, j, q) for (i, j) in pairs for q in range(n))}
    blocks = {}

    def block(p, j):
        if (p, j) not in blocks:
            blocks[(p, j)] = _left_mult_block(g.entry(p, j), modes, window)
        return blocks[(p, j)]

    grid = [[None] * len(unk) for _ in range(len(eqs))]
    for (i, j, q), e in eqs.items():
        for p in range(n):
            for upper, metric_col in ((i, j), (j, i)):
                u = unk[(upper, min(p, q), max(p, q))]
                m = block(p, metric_col)
                grid[e][u] = m if grid[e][u] is None else grid[e][u] + m
    for e in range(len(eqs)):
        for u in range(len(unk)):
            if grid[e][u] is None:
                grid[e][u] = sp.csr_matrix((W, W), dtype=np.complex128)
    return sp.bmat(grid, format="csc"), modes, unk, eqs


def _check_window(x: AlgebraElement, window: int, what: str):
    if x.max_degree() > window:
        raise WindowOverflowError(f"{what} has modes outside the window [-{window}, {window}]")


def _solve_window(space, g, S, window, prune):
    n = space.n
    for i in range(n):
        for j in range(n):
            _check_window(g.entry(i, j), window, "metric")
            for q in range(n):
                _check_window(S.coefficient(q, i, j), window, "right-hand side")
    A, modes, unk, eqs = assemble_phi(space, g, window)
    W = modes.shape[0]
    side = 2 * window + 1
    b = np.zeros(A.shape[0], dtype=np.complex128)
    for (i, j, q), e in eqs.items():
        c = S.coefficient(q, i, j)
        if len(c):
            loc = np.ravel_multi_index(tuple((c.modes + window).T), (side,) * n)
            b[e * W + loc] = c.coeffs
    size = A.shape[0]
    if size <= DENSE_LIMIT:
        dense = A.toarray()
        rank = int(np.linalg.matrix_rank(dense))
        if rank < size:
            raise NonUniqueError(f"Phi_g is rank deficient on the window: rank {rank} < {size}")
        x = np.linalg.solve(dense, b)
    else:
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise NonUniqueError(f"Phi_g is singular on the window: {exc}") from None
        piv = np.abs(lu.U.diagonal())
        if piv.min() <= 1e-13 * piv.max():
            raise NonUniqueError("Phi_g is numerically rank deficient on the window")
        rank = size
        x = lu.solve(b)
    residual = float(np.abs(A @ x - b).sum())
    gamma = np.empty((n, n, n), dtype=object)
    for (i, p, q), u in unk.items():
        coeffs = x[u * W:(u + 1) * W]
        v = AlgebraElement.from_arrays(space.theta, modes, coeffs).chop(prune)
        gamma[i, p, q] = gamma[i, q, p] = v
    return Connection(space, gamma), TruncatedInfo(window, size, rank, residual)


def solve_truncated(space: GeometrySpace, g: PseudoMetric, nabla0: Connection, window: int = 32, flag="strict",
                    adaptive=False, max_window: int = 64, prune: float = 1e-16, full_output=False):
    """Levi-Civita connection from a finite linear solve of Phi_g(L) = S_g(nabla0).

    Unknowns are the Fourier coefficients of L^i_pq (p <= q) on [-B, B]^n.
    Rank deficiency raises NonUniqueError. With ``adaptive`` the window
    doubles from ``window`` until Gamma changes by at most 1e-10.
    """
    if window < 0:
        raise ValidationError("window must be non-negative")
    S = s_g(space, g, nabla0, flag)
    L, info = _solve_window(space, g, S, window, prune)
    tried = [window]
    if adaptive:
        B = window
        while True:
            nxt = max(1, 2 * B)
            if nxt > max_window:
                raise ToleranceError(f"truncated solve did not settle by window {max_window}")
            L2, info2 = _solve_window(space, g, S, nxt, prune)
            tried.append(nxt)
            change = L2.distance(L)
            L, info, B = L2, info2, nxt
            if change <= SOLVER_TOL:
                break
    if info.residual > TRUNCATED_TOL:
        raise ToleranceError(f"truncated solve residual {info.residual:.3g} exceeds {TRUNCATED_TOL:g}")
    nabla = nabla0 + L
    if full_output:
        return nabla, TruncatedInfo(info.window, info.unknowns, info.rank, info.residual, tuple(tried))
    return nabla


def heisenberg_phi_rank(space: GeometrySpace, g: PseudoMetric) -> tuple[int, int]:
    """(rank, size) of the window-0 Phi_g system, for scalar-coefficient presets."""
    A = assemble_phi(space, g, 0)[0].toarray()
    return int(np.linalg.matrix_rank(A)), A.shape[0]


def torus_christoffel_closed_form(space: GeometrySpace, k: AlgebraElement, eps: float = 1e-12) -> Connection:
    """Gamma^i_jl = (d_il k^-1 dj k + d_ij k^-1 dl k - d_jl k^-1 di k) / 2 for g = k * identity."""
    n = space.n
    k_inv = invert(k, eps)
    dk = [k_inv * space.partial(j, k) for j in range(n)]
    z = space.zero()
    gamma = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            for l in range(n):
                v = z
                if i == l:
                    v = v + dk[j]
                if i == j:
                    v = v + dk[l]
                if j == l:
                    v = v - dk[i]
                gamma[i, j, l] = v * 0.5
    return Connection(space, gamma)
