"""Levi-Civita connections and curvature on twisted group algebras."""

from .algebra import (
    AlgebraElement,
    DeformationMatrix,
    DerivationRule,
    bicharacter,
    derive,
    invert,
    invert_with_bound,
)
from .curvature import ricci, riemann, scalar, torus_closed_form_ric_scal
from .errors import NCGeomError, NonUniqueError, ToleranceError, ValidationError
from .expr import parse_element, parse_expr
from .kernels import BACKEND
from .levi_civita import (
    Connection,
    compatibility_residual,
    reference_connection,
    solve_conformal,
    solve_koszul,
    solve_truncated,
    torsion_residual,
)
from .metric import CentralMetric, ConformalMetric, GeneralMetric
from .presets import classical_torus, heisenberg, nc_torus, preset

__all__ = [
    "AlgebraElement", "DeformationMatrix", "DerivationRule", "bicharacter", "derive", "invert",
    "invert_with_bound", "ricci", "riemann", "scalar", "torus_closed_form_ric_scal", "NCGeomError",
    "NonUniqueError", "ToleranceError", "ValidationError", "parse_element", "parse_expr", "BACKEND",
    "Connection", "compatibility_residual", "reference_connection", "solve_conformal", "solve_koszul",
    "solve_truncated", "torsion_residual", "CentralMetric", "ConformalMetric", "GeneralMetric",
    "classical_torus", "heisenberg", "nc_torus", "preset",
]
