"""Deterministic JSON and table rendering of curvature reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, DeformationMatrix
from .errors import ValidationError

REQUEST_KEYS = ("command", "preset", "theta", "k", "convention", "method", "window", "neumann_eps")


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x!r}")
    s = format(x, ".17g")
    if not any(c in s for c in ".e"):
        s += ".0"
    return s


def element_to_json(a: AlgebraElement) -> dict:
    # canonical form already keeps modes lexicographically sorted
    return {
        "terms": [
            {"mode": [int(m) for m in mode], "re": float(c.real), "im": float(c.imag)}
            for mode, c in zip(a.modes, a.coeffs)
        ]
    }


def element_from_json(obj: dict, ambient: DeformationMatrix) -> AlgebraElement:
    terms = obj["terms"]
    if not terms:
        return AlgebraElement.zero(ambient)
    modes = np.array([t["mode"] for t in terms], dtype=np.int64).reshape(len(terms), ambient.n)
    coeffs = np.array([complex(t["re"], t["im"]) for t in terms])
    return AlgebraElement.from_arrays(ambient, modes, coeffs)


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class ReportDocument:
    """Request echo, results and verification data of one CLI run.

    ``gamma`` and ``ric`` are nested lists of algebra elements (or None),
    ``residuals`` and ``agreement`` map names to floats.
    """

    request: dict
    ambient: DeformationMatrix
    gamma: list | None = None
    ric: list | None = None
    scal: AlgebraElement | None = None
    residuals: dict = field(default_factory=dict)
    backends: list = field(default_factory=list)
    agreement: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __eq__(self, other):
        if not isinstance(other, ReportDocument):
            return NotImplemented
        return to_plain(self) == to_plain(other)


def _nested(x, f):
    if x is None:
        return None
    if isinstance(x, AlgebraElement):
        return f(x)
    return [_nested(y, f) for y in x]


def to_plain(doc: ReportDocument) -> dict:
    """Ordered plain-data view; the single source of key order."""
    return {
        "request": {k: doc.request.get(k) for k in REQUEST_KEYS},
        "theta_matrix": doc.ambient.theta.tolist(),
        "backends": list(doc.backends),
        "gamma": _nested(doc.gamma, element_to_json),
        "ric": _nested(doc.ric, element_to_json),
        "scal": None if doc.scal is None else element_to_json(doc.scal),
        "residuals": {k: float(doc.residuals[k]) for k in sorted(doc.residuals)},
        "agreement": {k: float(doc.agreement[k]) for k in sorted(doc.agreement)},
        "checks": [
            {"name": c.name, "value": float(c.value), "tolerance": float(c.tolerance), "passed": bool(c.passed)}
            for c in doc.checks
        ],
    }


def _emit(x, indent, out):
    pad = "  " * indent
    if x is None:
        out.append("null")
    elif isinstance(x, bool):
        out.append("true" if x else "false")
    elif isinstance(x, int):
        out.append(str(x))
    elif isinstance(x, float):
        out.append(format_float(x))
    elif isinstance(x, str):
        out.append(json.dumps(x))
    elif isinstance(x, dict):
        if not x:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(x.items()):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(x) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(x, list):
        # leaf lists (modes, theta rows) stay on one line
        if all(isinstance(y, (int, float)) and not isinstance(y, bool) for y in x):
            out.append("[" + ", ".join(str(y) if isinstance(y, int) else format_float(y) for y in x) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(x):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(x) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(x).__name__}")


def serialize(doc: ReportDocument) -> str:
    out: list[str] = []
    _emit(to_plain(doc), 0, out)
    return "".join(out) + "\n"


def deserialize(text: str) -> ReportDocument:
    obj = json.loads(text)
    amb = DeformationMatrix(np.array(obj["theta_matrix"], dtype=float))
    to_el = lambda o: element_from_json(o, amb)

    def nested(x, depth):
        if x is None:
            return None
        if depth == 0:
            return to_el(x)
        return [nested(y, depth - 1) for y in x]

    return ReportDocument(
        request=dict(obj["request"]),
        ambient=amb,
        gamma=nested(obj["gamma"], 3),
        ric=nested(obj["ric"], 2),
        scal=None if obj["scal"] is None else to_el(obj["scal"]),
        residuals=dict(obj["residuals"]),
        backends=list(obj["backends"]),
        agreement=dict(obj["agreement"]),
        checks=[Check(**c) for c in obj["checks"]],
    )


def format_element(a: AlgebraElement) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for mode, c in zip(a.modes, a.coeffs):
        coef = f"{c.real:.12g}" if c.imag == 0 else f"({c.real:.12g}{c.imag:+.12g}i)"
        parts.append(coef if not mode.any() else f"{coef}*W{tuple(int(m) for m in mode)}")
    return " + ".join(parts)


def render_table(doc: ReportDocument) -> str:
    """Plain-text layout; Gamma^i_jk listed in lexicographic (i, j, k) order, 1-based."""
    lines = []
    req = {k: doc.request.get(k) for k in REQUEST_KEYS if doc.request.get(k) is not None}
    lines.append("request: " + ", ".join(f"{k}={v}" for k, v in req.items()))
    if doc.backends:
        lines.append("backends: " + ", ".join(doc.backends))
    if doc.gamma is not None:
        lines.append("Christoffel symbols Gamma^i_jk:")
        n = len(doc.gamma)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lines.append(f"  {i + 1} {j + 1} {k + 1}  {format_element(doc.gamma[i][j][k])}")
    if doc.ric is not None:
        lines.append("Ricci Ric(e_j, e_l):")
        for j, row in enumerate(doc.ric):
            for l, v in enumerate(row):
                lines.append(f"  {j + 1} {l + 1}  {format_element(v)}")
    if doc.scal is not None:
        lines.append(f"Scal: {format_element(doc.scal)}")
    for title, d in (("residuals", doc.residuals), ("agreement", doc.agreement)):
        if d:
            lines.append(f"{title}:")
            lines.extend(f"  {k}: {d[k]:.3e}" for k in sorted(d))
    if doc.checks:
        lines.append("checks:")
        for c in doc.checks:
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.value:.3e} (tol {c.tolerance:.0e})")
    return "\n".join(lines) + "\n"
