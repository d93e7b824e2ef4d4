import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncgeom import _kernels_py, kernels
from ncgeom.algebra import AlgebraElement, DeformationMatrix

from oracles import brute_mul, terms_distance

try:
    from ncgeom import _kernels as compiled
except ImportError:
    compiled = None

BACKENDS = [pytest.param(_kernels_py.twisted_mul, id="python")]
BACKENDS.append(pytest.param(compiled.twisted_mul if compiled else None, id="cython",
                             marks=pytest.mark.skipif(compiled is None, reason="extension not built")))

mode2 = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
term_dicts = st.dictionaries(mode2, coef, max_size=6)


def _arrays(terms):
    el = AlgebraElement(DeformationMatrix.zero(2), terms)
    return el.modes, el.coeffs


@pytest.mark.parametrize("mul", BACKENDS)
@settings(max_examples=100, deadline=None)
@given(a=term_dicts, b=term_dicts, t=st.floats(-2, 2))
def test_twisted_mul_matches_brute_force(mul, a, b, t):
    theta = DeformationMatrix.torus(t).theta
    ma, ca = _arrays(a)
    mb, cb = _arrays(b)
    modes, coeffs = mul(ma, ca, mb, cb, theta)
    got = {tuple(m): c for m, c in zip(modes.tolist(), coeffs)}
    want = brute_mul({k: v for k, v in a.items() if v != 0}, {k: v for k, v in b.items() if v != 0}, theta)
    assert terms_distance(got, want) <= 1e-9 * (1 + sum(map(abs, want.values())))
    # canonical: sorted, unique, no zeros
    assert [tuple(m) for m in modes.tolist()] == sorted(set(tuple(m) for m in modes.tolist()))
    assert np.all(coeffs != 0)


@pytest.mark.skipif(compiled is None, reason="extension not built")
def test_backends_agree_on_large_support():
    rng = np.random.default_rng(3)
    grid = np.stack(np.meshgrid(np.arange(-20, 21), np.arange(-20, 21), indexing="ij"), -1).reshape(-1, 2)
    ma = np.ascontiguousarray(grid, dtype=np.int64)
    ca = rng.normal(size=len(ma)) + 1j * rng.normal(size=len(ma))
    theta = DeformationMatrix.torus(0.71).theta
    m1, c1 = _kernels_py.twisted_mul(ma, ca, ma, ca[::-1].copy(), theta)
    m2, c2 = compiled.twisted_mul(ma, ca, ma, ca[::-1].copy(), theta)
    assert np.array_equal(m1, m2)
    assert np.abs(c1 - c2).max() <= 1e-10


@pytest.mark.skipif(compiled is None, reason="extension not built")
def test_compiled_sparse_path_for_wide_support():
    # support spread over a huge box forces the non-dense branch
    ma = np.array([[-5000, 0], [5000, 3]], dtype=np.int64)
    ca = np.array([1 + 1j, 2.0 + 0j])
    mb = np.array([[0, -4000], [1, 4000]], dtype=np.int64)
    cb = np.array([0.5 + 0j, -1j])
    theta = DeformationMatrix.torus(0.3).theta
    m1, c1 = _kernels_py.twisted_mul(ma, ca, mb, cb, theta)
    m2, c2 = compiled.twisted_mul(ma, ca, mb, cb, theta)
    assert np.array_equal(m1, m2) and np.allclose(c1, c2, atol=1e-14)


def test_canonicalize_merges_and_drops_zeros():
    modes = np.array([[1, 0], [0, 0], [1, 0], [2, 2]], dtype=np.int64)
    coeffs = np.array([1.0, 2.0, -1.0, 3.0], dtype=complex)
    m, c = kernels.canonicalize(modes, coeffs)
    assert m.tolist() == [[0, 0], [2, 2]]
    assert c.tolist() == [2.0, 3.0]


def test_backend_selection_reported():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython"


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = (
        "from ncgeom import kernels, heisenberg, solve_koszul, ricci, scalar\n"
        "s, g, n0 = heisenberg()\n"
        "c = solve_koszul(s, g, n0, 'paper')\n"
        "print(kernels.BACKEND, scalar(s, g, ricci(s, c)).trace().real)\n"
    )
    env = dict(os.environ, NCGEOM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    assert out.split() == ["python", "-0.125"]
