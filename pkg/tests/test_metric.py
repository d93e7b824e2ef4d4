import numpy as np
import pytest

from ncgeom.algebra import AlgebraElement, DeformationMatrix
from ncgeom.errors import InversionError
from ncgeom.forms import Tensor3
from ncgeom.levi_civita import congruence_factor
from ncgeom.metric import (
    CentralMetric,
    ConformalMetric,
    GeneralMetric,
    MetricError,
    contract_first,
    conformal_deform,
    d_of_metric,
    metric_apply,
    omega,
)
from ncgeom.presets import nc_torus

AMB = DeformationMatrix.torus(0.25)


def test_central_metric_validation():
    with pytest.raises(MetricError):
        CentralMetric(AMB, [[1, 2], [3, 1]])
    with pytest.raises(MetricError):
        CentralMetric(AMB, [[1, 1], [1, 1]])
    with pytest.raises(MetricError):
        CentralMetric(AMB, np.eye(3))
    with pytest.raises(MetricError):
        CentralMetric(AMB, [[1, 0], [0, 1e-14]])
    g = CentralMetric(AMB, [[0, 1j], [1j, 0]])
    assert g.nondegeneracy_residual() <= 1e-15
    assert not g.is_identity()
    assert CentralMetric.identity(AMB).is_identity()


def test_conformal_entries_and_inverse():
    U = AlgebraElement.monomial(AMB, (1, 0))
    k = 3 + U + U.star()
    g = conformal_deform(k, CentralMetric(AMB, [[2, 1], [1, 3]]))
    assert g.entry(0, 1) == k
    assert g.entry(1, 1) == k * 3
    assert g.inverse_residual() <= 1e-12 + g.inverse_tail
    with pytest.raises(InversionError):
        ConformalMetric(U + U.star(), CentralMetric.identity(AMB))
    with pytest.raises(MetricError):
        conformal_deform(k, g)


def test_general_metric_symmetry():
    one = AlgebraElement.unit(AMB)
    U = AlgebraElement.monomial(AMB, (1, 0))
    with pytest.raises(MetricError):
        GeneralMetric([[one, U], [U.star(), one]])
    g = GeneralMetric([[one, U], [U, one]])
    assert g.entry(1, 0) == U


def test_metric_apply_puts_metric_on_the_left():
    U = AlgebraElement.monomial(AMB, (1, 0))
    V = AlgebraElement.monomial(AMB, (0, 1))
    g = conformal_deform(3 + U + U.star(), CentralMetric.identity(AMB))
    space, _ = nc_torus(0.25)
    t = space.basis_tensor(0, 0, a=V)
    assert metric_apply(g, t) == g.entry(0, 0) * V


def test_contract_first_component_formula():
    rng = np.random.default_rng(2)
    G0 = np.array([[1.5, 0.2], [0.2, -0.7]])
    g = CentralMetric(AMB, G0)
    arr = [[[AlgebraElement.scalar(AMB, complex(rng.normal())) for _ in range(2)] for _ in range(2)] for _ in range(2)]
    out = contract_first(g, Tensor3(arr))
    for c in range(2):
        want = sum(G0[a, b] * arr[a][b][c].trace() for a in range(2) for b in range(2))
        assert abs(out[c].trace() - want) <= 1e-14


def test_dg_vanishes_for_central_metric():
    space, g = nc_torus(0.1)
    assert d_of_metric(space, g, 0, 1).l1norm() == 0


def test_omega_is_inverse_matrix():
    G0 = np.array([[2.0, 1.0], [1.0, 3.0]])
    om = omega(CentralMetric(AMB, G0))
    inv = np.linalg.inv(G0)
    assert all(abs(om[i, j].trace() - inv[i, j]) <= 1e-15 for i in range(2) for j in range(2))


@pytest.mark.parametrize(
    "G0",
    [
        np.eye(3),
        np.array([[2.0, 1.0], [1.0, 3.0]]),
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        np.array([[1.0, 0, 0], [0, 0, 2j], [0, 2j, 0]]),
        np.diag([1.0, -1.0, -4.0]),
    ],
)
def test_congruence_factor(G0):
    B, B_inv = congruence_factor(G0)
    assert np.abs(B.T @ B - G0).max() <= 1e-12
    assert np.abs(B @ B_inv - np.eye(len(G0))).max() <= 1e-12
