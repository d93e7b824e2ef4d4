import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncgeom.algebra import (
    AlgebraElement,
    AlgebraError,
    DeformationMatrix,
    DerivationRule,
    bicharacter,
    derive,
    distance,
    invert,
    invert_with_bound,
)
from ncgeom.errors import InversionError, InversionToleranceError, ToleranceError, ValidationError

from oracles import brute_mul, terms_distance

modes2 = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
coef = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
thetas = st.floats(-1, 1, allow_nan=False)


@st.composite
def elements(draw, amb):
    return AlgebraElement(amb, draw(st.dictionaries(modes2, coef, max_size=5)))


@st.composite
def triples(draw):
    amb = DeformationMatrix.torus(draw(thetas))
    return amb, draw(elements(amb)), draw(elements(amb)), draw(elements(amb))


def _tol(*xs):
    return 1e-12 * max(1.0, math.prod(1 + x.l1norm() for x in xs))


@settings(max_examples=150, deadline=None)
@given(triples())
def test_associativity(tr):
    _, a, b, c = tr
    assert distance((a * b) * c, a * (b * c)) <= _tol(a, b, c)


@settings(max_examples=150, deadline=None)
@given(triples())
def test_distributivity(tr):
    _, a, b, c = tr
    assert distance(a * (b + c), a * b + a * c) <= _tol(a, b, c)


@settings(max_examples=150, deadline=None)
@given(triples())
def test_involution_anti_multiplicative(tr):
    _, a, b, _ = tr
    assert distance((a * b).star(), b.star() * a.star()) <= _tol(a, b)
    assert a.star().star() == a


@settings(max_examples=150, deadline=None)
@given(triples())
def test_leibniz(tr):
    _, a, b, _ = tr
    rule = DerivationRule("lattice")
    for j in range(2):
        lhs = derive(rule, j, a * b)
        rhs = derive(rule, j, a) * b + a * derive(rule, j, b)
        assert distance(lhs, rhs) <= 10 * _tol(a, b)


@settings(max_examples=150, deadline=None)
@given(triples())
def test_trace_is_tracial(tr):
    _, a, b, _ = tr
    assert abs((a * b).trace() - (b * a).trace()) <= _tol(a, b)


@settings(max_examples=100, deadline=None)
@given(t=thetas, r=modes2, s=modes2, u=modes2)
def test_bicharacter_laws(t, r, s, u):
    amb = DeformationMatrix.torus(t)
    chi = lambda x, y: bicharacter(amb, x, y)
    add = lambda x, y: tuple(p + q for p, q in zip(x, y))
    neg = lambda x: tuple(-p for p in x)
    assert abs(chi(add(r, s), u) - chi(r, u) * chi(s, u)) <= 1e-12
    assert abs(chi(r, add(s, u)) - chi(r, s) * chi(r, u)) <= 1e-12
    assert abs(chi(r, s) * chi(s, r) - 1) <= 1e-12
    assert chi(r, neg(r)) == 1
    assert abs(abs(chi(r, s)) - 1) <= 1e-15


@settings(max_examples=100, deadline=None)
@given(t=thetas, a=st.dictionaries(modes2, coef, max_size=5), b=st.dictionaries(modes2, coef, max_size=5))
def test_product_matches_direct_convolution(t, a, b):
    amb = DeformationMatrix.torus(t)
    got = (AlgebraElement(amb, a) * AlgebraElement(amb, b)).terms
    want = brute_mul({k: v for k, v in a.items() if v}, {k: v for k, v in b.items() if v}, amb.theta)
    assert terms_distance(got, want) <= 1e-12 * (1 + sum(abs(v) for v in a.values()) * sum(abs(v) for v in b.values()))


@pytest.mark.parametrize("t", [0.0, 0.25, 0.71, -0.3])
def test_commutation_relation(t):
    amb = DeformationMatrix.torus(t)
    U = AlgebraElement.monomial(amb, (1, 0))
    V = AlgebraElement.monomial(amb, (0, 1))
    assert distance(U * V, (V * U) * cmath.exp(2j * math.pi * t)) <= 1e-12


def test_uv_phase_at_quarter():
    amb = DeformationMatrix.torus(0.25)
    UV = AlgebraElement.monomial(amb, (1, 0)) * AlgebraElement.monomial(amb, (0, 1))
    assert abs(UV.coeff((1, 1)) - cmath.exp(1j * math.pi / 4)) <= 1e-15


def test_canonical_form_and_equality():
    amb = DeformationMatrix.zero(2)
    a = AlgebraElement(amb, {(1, 0): 1, (0, 0): 2, (0, 1): 0})
    assert a.modes.tolist() == [[0, 0], [1, 0]]
    assert a == AlgebraElement(amb, {(0, 0): 2, (1, 0): 1})
    assert (a - a).is_zero() and len(a - a) == 0
    assert hash(a) == hash(AlgebraElement(amb, {(1, 0): 1, (0, 0): 2}))


def test_element_is_immutable():
    a = AlgebraElement.monomial(DeformationMatrix.zero(2), (1, 2))
    with pytest.raises(ValueError):
        a.coeffs[0] = 5


def test_power_and_scalar_ops():
    amb = DeformationMatrix.torus(0.3)
    U = AlgebraElement.monomial(amb, (1, 0))
    assert U**3 == AlgebraElement.monomial(amb, (3, 0))
    assert (U / 2).coeff((1, 0)) == 0.5
    assert (2 + U) - U == AlgebraElement.scalar(amb, 2)
    with pytest.raises(ValueError):
        U ** -1


def test_chop_and_degree():
    amb = DeformationMatrix.zero(2)
    a = AlgebraElement(amb, {(0, 0): 1, (5, -7): 1e-20})
    assert a.max_degree() == 7
    assert a.chop(1e-15) == AlgebraElement.unit(amb)


def test_theta_validation():
    with pytest.raises(AlgebraError):
        DeformationMatrix([[0, 0.1], [0.2, 0]])
    with pytest.raises(AlgebraError):
        DeformationMatrix([[1.0]])
    with pytest.raises(ValidationError):
        DeformationMatrix([0, 1])


def test_ambient_mismatch():
    a = AlgebraElement.unit(DeformationMatrix.torus(0.1))
    b = AlgebraElement.unit(DeformationMatrix.torus(0.2))
    with pytest.raises(AlgebraError):
        a * b
    with pytest.raises(AlgebraError):
        a + b
    with pytest.raises(AlgebraError):
        AlgebraElement(DeformationMatrix.zero(2), {(1, 2, 3): 1})


def test_derivation_rules():
    amb = DeformationMatrix.torus(0.2)
    a = AlgebraElement(amb, {(2, -1): 3.0, (0, 0): 7.0})
    lat = DerivationRule("lattice")
    assert derive(lat, 0, a) == AlgebraElement(amb, {(2, -1): 6j})
    assert derive(lat, 1, a) == AlgebraElement(amb, {(2, -1): -3j})
    assert derive(DerivationRule("trivial"), 0, a).is_zero()
    with pytest.raises(IndexError):
        derive(lat, 2, a)
    with pytest.raises(ValueError):
        DerivationRule("bogus")
    with pytest.raises(ValueError):
        DerivationRule("trivial", structure_constants=(((0.0, 1.0), (1.0, 0.0)),) * 2)


def _k(amb):
    U = AlgebraElement.monomial(amb, (1, 0))
    return 3 + U + U.star()


@pytest.mark.parametrize("t", [0.0, 0.25, 0.71])
def test_inversion_contract(t):
    amb = DeformationMatrix.torus(t)
    k = _k(amb)
    inv, tail, terms = invert_with_bound(k, 1e-12)
    q = 2 / 3
    assert terms == math.ceil(math.log(1e-12) / math.log(q))
    assert abs(tail - q**terms) <= 1e-24
    one = AlgebraElement.unit(amb)
    assert (k * inv - one).l1norm() <= 1e-12 + tail
    assert (inv * k - one).l1norm() <= 1e-12 + tail


def test_inverse_against_closed_form_fourier_coefficients():
    # (3 + 2 cos x)^-1 = sum_m r^|m| e^{imx} / sqrt(5), r = (sqrt5 - 3)/2
    amb = DeformationMatrix.zero(2)
    inv = invert(_k(amb), 1e-14)
    r = (math.sqrt(5) - 3) / 2
    for m in range(-10, 11):
        assert abs(inv.coeff((m, 0)) - r ** abs(m) / math.sqrt(5)) <= 1e-13


def test_monomial_and_scalar_inverses_exact():
    amb = DeformationMatrix.torus(0.37)
    w = AlgebraElement.monomial(amb, (2, -3), 1 + 2j)
    inv, tail, terms = invert_with_bound(w)
    assert tail == 0 and terms == 1
    assert distance(w * inv, AlgebraElement.unit(amb)) <= 1e-15
    assert invert(AlgebraElement.scalar(amb, 4.0)) == AlgebraElement.scalar(amb, 0.25)


def test_inversion_errors():
    amb = DeformationMatrix.torus(0.1)
    U = AlgebraElement.monomial(amb, (1, 0))
    with pytest.raises(InversionError):
        invert(AlgebraElement.zero(amb))
    with pytest.raises(InversionError):
        invert(1 + U)  # ratio exactly 1
    with pytest.raises(InversionError):
        invert(U + U.star())  # no zero mode
    with pytest.raises(InversionToleranceError) as exc:
        invert(1 + 0.999 * U, 1e-12, max_terms=100)
    assert isinstance(exc.value, ToleranceError)
    with pytest.raises(ValueError):
        invert(2 + U, eps=0)


def test_random_neumann_dominated_inverses():
    rng = np.random.default_rng(11)
    for _ in range(10):
        amb = DeformationMatrix.torus(float(rng.uniform(-1, 1)))
        lam = complex(rng.normal(), rng.normal())
        modes = rng.integers(-1, 2, size=(3, 2))
        modes = modes[np.any(modes != 0, axis=1)]
        if not len(modes):
            continue
        c = rng.normal(size=len(modes)) + 1j * rng.normal(size=len(modes))
        c *= rng.uniform(0.1, 0.6) * abs(lam) / np.abs(c).sum()
        a = AlgebraElement.scalar(amb, lam) + AlgebraElement.from_arrays(amb, modes, c)
        inv, tail, _ = invert_with_bound(a)
        assert (a * inv - AlgebraElement.unit(amb)).l1norm() <= 1e-12 + tail
