"""The geometries computed on: noncommutative torus and quantum Heisenberg manifold."""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, DeformationMatrix, DerivationRule
from .forms import GeometrySpace, TwoForm
from .metric import CentralMetric

PRESET_IDS = ("nc-torus", "classical-torus", "heisenberg")

# [d_1, d_2] = d_3, all other brackets zero
HEISENBERG_STRUCTURE = np.zeros((3, 3, 3))
HEISENBERG_STRUCTURE[2, 0, 1] = 1.0
HEISENBERG_STRUCTURE[2, 1, 0] = -1.0


def nc_torus(theta: float, name: str = "nc-torus"):
    """Noncommutative 2-torus: UV = exp(2 pi i theta) VU, d(e_i) = 0, g0 = identity."""
    amb = DeformationMatrix.torus(float(theta))
    rule = DerivationRule("lattice")
    zero2 = TwoForm.zeros(amb, 2)
    space = GeometrySpace(
        n=2,
        theta=amb,
        derivations=(rule, rule),
        basis_differentials=(zero2, zero2),
        name=name,
        generators=("U", "V"),
    )
    return space, CentralMetric.identity(amb)


def classical_torus():
    return nc_torus(0.0, name="classical-torus")


def heisenberg():
    """Quantum Heisenberg manifold restricted to scalar coefficients.

    Returns ``(space, g, nabla0)`` with d(e_3) = -m(e_1 (x) e_2), the
    identity metric, and the reference connection nabla0(e_3) = -e_1 (x) e_2.
    """
    from .levi_civita import reference_connection

    amb = DeformationMatrix.zero(3)
    rule = DerivationRule("trivial", structure_constants=_nested_tuple(HEISENBERG_STRUCTURE))
    zero = TwoForm.zeros(amb, 3)
    de3 = TwoForm.from_upper(amb, 3, {(0, 1): AlgebraElement.scalar(amb, -1.0)})
    space = GeometrySpace(
        n=3,
        theta=amb,
        derivations=(rule, rule, rule),
        basis_differentials=(zero, zero, de3),
        name="heisenberg",
        generators=(),
    )
    return space, CentralMetric.identity(amb), reference_connection(space)


def _nested_tuple(arr):
    if np.ndim(arr) == 0:
        return float(arr)
    return tuple(_nested_tuple(a) for a in arr)


def preset(preset_id: str, theta: float = 0.0):
    """Space and base metric for a preset id."""
    if preset_id == "nc-torus":
        return nc_torus(theta)
    if preset_id == "classical-torus":
        return classical_torus()
    if preset_id == "heisenberg":
        return heisenberg()[:2]
    raise ValueError(f"unknown preset {preset_id!r}; expected one of {', '.join(PRESET_IDS)}")
