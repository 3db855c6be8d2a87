"""Closed-form analysis of the purely linear switched system.

Both quadrant matrices have eigenvalues -a +/- i*sqrt(b*c), so each
subsystem is a stable clockwise spiral.  Quarter-turn section maps
between consecutive semi-axes compose into the return map on the
positive x1-axis, which is multiplication by the stability index

    delta = (b/c)**2 * exp(-2*pi*a / sqrt(b*c)).

The origin of the switched system is asymptotically stable iff
delta < 1, unstable iff delta > 1, and surrounded by a ring of
periodic orbits iff delta == 1 -- even though every individual
subsystem is stable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SideError
from .model import Quadrant, SystemParams

__all__ = [
    "SectionMapValue",
    "OriginClass",
    "flow_linear",
    "section_map",
    "delta",
    "delta_prime",
    "classify_origin",
    "poincare_linear",
]

#: |delta - 1| below this counts as the periodic-family boundary case.
DELTA_ONE_TOL = 1e-12


@dataclass(frozen=True)
class SectionMapValue:
    """One quarter-turn section-map application."""

    exit_value: float
    transit_time: float


class OriginClass(enum.Enum):
    PeriodicFamily = "PeriodicFamily"
    AsymptoticallyStable = "AsymptoticallyStable"
    Unstable = "Unstable"


def _bc(params: SystemParams, lam: float) -> tuple[float, float]:
    params.check_lambda(lam)
    return params.b.value_at(lam), params.c.value_at(lam)


def flow_linear(q: Quadrant, x0, t: float, params: SystemParams, lam: float) -> np.ndarray:
    """Exact solution of the linear flow of region ``q`` after time ``t``.

    Uses the rotation-scaling form

        x1(t) = e^{-a t} (x10 cos(w t) + s x20 sin(w t))
        x2(t) = e^{-a t} (-(x10/s) sin(w t) + x20 cos(w t))

    with w = sqrt(b c) and s = sqrt(b/c) for regions 1, 3
    (s = sqrt(c/b) for regions 2, 4), which is free of the branch
    ambiguities of an amplitude-phase representation.
    """
    b, c = _bc(params, lam)
    a = params.a
    w = math.sqrt(b * c)
    if Quadrant(q) in (Quadrant.Q1, Quadrant.Q3):
        s = math.sqrt(b / c)
    else:
        s = math.sqrt(c / b)
    x10, x20 = float(x0[0]), float(x0[1])
    damp = math.exp(-a * t)
    cw, sw = math.cos(w * t), math.sin(w * t)
    return np.array([
        damp * (x10 * cw + s * x20 * sw),
        damp * (-(x10 / s) * sw + x20 * cw),
    ])


#: Map index -> (entry coordinate sign required, exit sign), clockwise order.
#: Map 1: +x2-axis -> +x1-axis;  map 2: +x1-axis -> -x2-axis;
#: map 3: -x2-axis -> -x1-axis;  map 4: -x1-axis -> +x2-axis.
_SECTION_SIGNS = {1: (+1, +1), 2: (+1, -1), 3: (-1, -1), 4: (-1, +1)}


def section_map(i: int, entry: float, params: SystemParams, lam: float) -> SectionMapValue:
    """Quarter-turn map ``i`` applied to a coordinate on its source semi-axis.

    Every map scales the entry magnitude by sqrt(b/c) *
    exp(-a*pi / (2*sqrt(b*c))) and takes time pi / (2*sqrt(b*c)).
    Raises SideError if ``entry`` does not lie on the source open
    semi-axis for map ``i``.
    """
    if i not in _SECTION_SIGNS:
        raise ValueError(f"section map index must be 1..4, got {i}")
    entry_sign, exit_sign = _SECTION_SIGNS[i]
    if entry * entry_sign <= 0.0:
        want = "positive" if entry_sign > 0 else "negative"
        raise SideError(f"section map {i} takes a {want} entry coordinate, got {entry}")
    b, c = _bc(params, lam)
    w = math.sqrt(b * c)
    factor = math.sqrt(b / c) * math.exp(-params.a * math.pi / (2.0 * w))
    return SectionMapValue(exit_value=exit_sign * abs(entry) * factor,
                           transit_time=math.pi / (2.0 * w))


def delta(params: SystemParams, lam: float) -> float:
    """Stability index: the linear full-revolution return ratio."""
    b, c = _bc(params, lam)
    return (b / c) ** 2 * math.exp(-2.0 * math.pi * params.a / math.sqrt(b * c))


def delta_prime(params: SystemParams, lam: float) -> float:
    """d(delta)/d(lam), by logarithmic differentiation.

    delta' = delta * [2 (b'/b - c'/c) + pi a (b' c + b c') / (b c)^{3/2}],
    which avoids the cancellation-prone expanded product form.
    """
    b, c = _bc(params, lam)
    bp = params.b.deriv_at(lam)
    cp = params.c.deriv_at(lam)
    a = params.a
    log_deriv = 2.0 * (bp / b - cp / c) + math.pi * a * (bp * c + b * cp) / (b * c) ** 1.5
    return delta(params, lam) * log_deriv


def classify_origin(params: SystemParams, lam: float, tol: float = DELTA_ONE_TOL) -> OriginClass:
    """Trichotomy of the linear switched system by the stability index."""
    d = delta(params, lam)
    if abs(d - 1.0) <= tol:
        return OriginClass.PeriodicFamily
    return OriginClass.AsymptoticallyStable if d < 1.0 else OriginClass.Unstable


def poincare_linear(x1: float, params: SystemParams, lam: float) -> float:
    """Linear return map on the x1-axis: x1 -> delta(lam) * x1 (either sign)."""
    return delta(params, lam) * x1
