"""Residual and invariant suites behind ``verify`` and ``selftest``."""

from __future__ import annotations

import numpy as np

from . import algebra as alg
from .curvature import ricci, scalar, torus_closed_form_ric_scal
from .forms import Tensor2, Tensor3, p_sym, sigma, sigma12, sigma23, symmetrization_rank, wedge_m
from .levi_civita import (
    SOLVER_TOL,
    compatibility_residual,
    heisenberg_phi_rank,
    reference_connection,
    solve_conformal,
    solve_koszul,
    solve_truncated,
    torsion_residual,
    torus_christoffel_closed_form,
)
from .metric import ConformalMetric
from .presets import heisenberg, nc_torus
from .report import Check

AGREE_TOL = 1e-9
EXACT_TOL = 1e-12


def _check(name, value, tol):
    value = float(value)
    return Check(name, value, tol, bool(value <= tol))


def torus_checks(theta: float, k, window: int = 32, eps: float = 1e-12):
    """Residuals of all three backends plus closed-form agreement for g = k * identity."""
    space, g0 = nc_torus(theta)
    gk = ConformalMetric(k, g0, eps)
    nabla0 = reference_connection(space)
    out = [_check("reference torsion", torsion_residual(space, nabla0), EXACT_TOL)]
    out.append(_check("inversion residual", gk.inverse_residual(), eps + gk.inverse_tail))
    kz = solve_koszul(space, gk, nabla0, check=False)
    cf = solve_conformal(space, g0, k, nabla0, eps, check=False)
    tr, info = solve_truncated(space, gk, nabla0, window=window, full_output=True)
    for name, c in (("koszul", kz), ("conformal", cf), ("truncated", tr)):
        out.append(_check(f"{name} torsion", torsion_residual(space, c), SOLVER_TOL))
        out.append(_check(f"{name} compatibility", compatibility_residual(space, gk, c), SOLVER_TOL))
    out.append(_check("truncated rank deficit", info.unknowns - info.rank, 0))
    direct = torus_christoffel_closed_form(space, k, eps)
    out.append(_check("koszul vs conformal", kz.distance(cf), AGREE_TOL))
    out.append(_check("koszul vs truncated", kz.distance(tr), AGREE_TOL))
    out.append(_check("conformal vs truncated", cf.distance(tr), AGREE_TOL))
    out.append(_check("koszul vs direct Christoffel formula", kz.distance(direct), AGREE_TOL))
    ric = ricci(space, kz)
    ric_cf, scal_cf = torus_closed_form_ric_scal(space, k, eps)
    out.append(_check("Ricci vs closed form", ric.distance(ric_cf), AGREE_TOL))
    out.append(_check("Scal vs closed form", (scalar(space, gk, ric) - scal_cf).l1norm(), AGREE_TOL))
    out.append(_check("Ricci off-diagonal antisymmetry", (ric[0, 1] + ric[1, 0]).l1norm(), EXACT_TOL))
    return out


def heisenberg_checks(convention: str = "paper"):
    space, g, nabla0 = heisenberg()
    out = [_check("reference torsion", torsion_residual(space, nabla0), EXACT_TOL)]
    c = solve_koszul(space, g, nabla0, convention)
    out.append(_check("torsion", torsion_residual(space, c), EXACT_TOL))
    out.append(_check(f"{convention} compatibility", compatibility_residual(space, g, c, convention), EXACT_TOL))
    rank, size = heisenberg_phi_rank(space, g)
    out.append(_check("Phi_g rank deficit", size - rank, 0))
    tr = solve_truncated(space, g, nabla0, window=0, flag=convention)
    out.append(_check("koszul vs truncated", c.distance(tr), EXACT_TOL))
    return out


def _random_element(rng, amb, terms=4, deg=2):
    modes = rng.integers(-deg, deg + 1, size=(terms, amb.n))
    coeffs = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    return alg.AlgebraElement.from_arrays(amb, modes, coeffs)


def algebra_checks(seed: int = 0, trials: int = 25):
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("associativity", "involution", "leibniz", "trace", "bicharacter"), 0.0)
    rule = alg.DerivationRule("lattice")
    for _ in range(trials):
        amb = alg.DeformationMatrix.torus(float(rng.uniform(-1, 1)))
        a, b, c = (_random_element(rng, amb) for _ in range(3))
        worst["associativity"] = max(worst["associativity"], alg.distance((a * b) * c, a * (b * c)))
        worst["involution"] = max(worst["involution"], alg.distance((a * b).star(), b.star() * a.star()))
        for j in range(2):
            lhs = alg.derive(rule, j, a * b)
            rhs = alg.derive(rule, j, a) * b + a * alg.derive(rule, j, b)
            worst["leibniz"] = max(worst["leibniz"], alg.distance(lhs, rhs))
        worst["trace"] = max(worst["trace"], abs((a * b).trace() - (b * a).trace()))
        r, s, t = (tuple(rng.integers(-3, 4, size=2)) for _ in range(3))
        rs = tuple(x + y for x, y in zip(r, s))
        chi = lambda u, v: alg.bicharacter(amb, u, v)
        worst["bicharacter"] = max(worst["bicharacter"], abs(chi(rs, t) - chi(r, t) * chi(s, t)))
    return [_check(name, v, EXACT_TOL) for name, v in worst.items()]


def structure_checks(seed: int = 0):
    rng = np.random.default_rng(seed)
    amb = alg.DeformationMatrix.torus(0.3)
    n = 2
    t2 = Tensor2([[_random_element(rng, amb) for _ in range(n)] for _ in range(n)])
    t3 = Tensor3([[[_random_element(rng, amb) for _ in range(n)] for _ in range(n)] for _ in range(n)])
    out = [
        _check("sigma squared", (sigma(sigma(t2)) - t2).l1norm(), 0),
        _check("braid relation", (sigma12(sigma23(sigma12(t3))) - sigma23(sigma12(sigma23(t3)))).l1norm(), 0),
        _check("P_sym idempotent", (p_sym(p_sym(t2)) - p_sym(t2)).l1norm(), EXACT_TOL),
        _check("m kills P_sym", wedge_m(p_sym(t2)).l1norm(), EXACT_TOL),
    ]
    for m in (2, 3, 4):
        rank, dim23, dim12 = symmetrization_rank(m)
        expected = m * m * (m + 1) // 2
        out.append(_check(f"symmetrization rank n={m}", abs(rank - expected) + abs(dim23 - rank) + abs(dim12 - rank), 0))
    return out


def selftest_checks():
    """Full invariant suite at reduced sizes."""
    out = algebra_checks() + structure_checks()
    for conv, scal_expected in (("paper", -0.125), ("strict", -0.5)):
        out += [Check(f"heisenberg {conv}: {c.name}", c.value, c.tolerance, c.passed) for c in heisenberg_checks(conv)]
        space, g, nabla0 = heisenberg()
        c = solve_koszul(space, g, nabla0, conv)
        sc = scalar(space, g, ricci(space, c))
        out.append(_check(f"heisenberg {conv}: Scal", abs(sc.coeff((0, 0, 0)) - scal_expected) + (len(sc) - 1), EXACT_TOL))
    for theta in (0.0, 0.25):
        space, _ = nc_torus(theta)
        U = alg.AlgebraElement.monomial(space.theta, (1, 0))
        k = space.scalar(3) + U + U.star()
        out += [Check(f"torus theta={theta}: {c.name}", c.value, c.tolerance, c.passed)
                for c in torus_checks(theta, k)]
    return out
