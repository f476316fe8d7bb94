"""Reference-domain transformation.

Maps the moving fluid subdomains (-1, h) and (h, 1) onto the fixed intervals
[-1, 0] and [0, 1] and evaluates the transformed Burgers operator, the
velocity-gradient jump at the particle and the physical integrals.

Spatial integrals are exact for the piecewise-linear interpolant of the nodal
values, so discrete Cauchy-Schwarz, trace and Poincare inequalities hold to
round-off.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import GeometryError, State

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class TransformedCoefficients:
    """Jacobians and reference mesh velocities for a particle at ``h`` moving with ``g``."""
    JL: float
    JR: float
    g: float

    @classmethod
    def at(cls, h: float, g: float) -> "TransformedCoefficients":
        _require_inside(h)
        return cls(1.0 + h, 1.0 - h, g)

    def mesh_velocity_left(self, xi):
        return -self.g * (1.0 + np.asarray(xi)) / self.JL

    def mesh_velocity_right(self, xi):
        return -self.g * (1.0 - np.asarray(xi)) / self.JR


class Integrals(NamedTuple):
    l2_v: float
    diss: float
    diss_left: float
    diss_right: float


def _require_inside(h: float, guard: float = 0.0, t: float | None = None):
    if not abs(h) < 1.0:
        raise GeometryError(f"particle position {h!r} is outside (-1,1)", t=t, h=h)
    if min(1.0 - h, 1.0 + h) < guard:
        raise GeometryError(
            f"particle at h={h!r} is within {guard!r} of a wall", t=t, h=h)


def to_reference(y: float, h: float) -> tuple[str, float]:
    """Map physical ``y`` to ``(side, xi)``; the interface maps to the left side."""
    _require_inside(h)
    if y <= h:
        return LEFT, (y - h) / (1.0 + h)
    return RIGHT, (y - h) / (1.0 - h)


def from_reference(side: str, xi: float, h: float) -> float:
    _require_inside(h)
    if side == LEFT:
        return h + xi * (1.0 + h)
    if side == RIGHT:
        return h + xi * (1.0 - h)
    raise ValueError(f"unknown side {side!r}")


def spacings(state: State) -> tuple[float, float]:
    return 1.0 / (len(state.wL) - 1), 1.0 / (len(state.wR) - 1)


def reference_nodes(state: State) -> tuple[np.ndarray, np.ndarray]:
    nL, nR = len(state.wL) - 1, len(state.wR) - 1
    return np.arange(nL + 1) / nL - 1.0, np.arange(nR + 1) / nR


def transformed_rhs(state: State, guard: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of the interior fluid nodes.

    Left:  w_t = g(1+xi)/(1+h) w_xi - w w_xi/(1+h) + w_xixi/(1+h)^2
    Right: w_t = g(1-xi)/(1-h) w_xi - w w_xi/(1-h) + w_xixi/(1-h)^2

    with second-order central differences.

    Returns
    - (dL, dR): arrays of length nL-1 and nR-1.
    """
    _require_inside(state.h, guard, state.t)
    coef = TransformedCoefficients.at(state.h, state.g)
    jl, jr = coef.JL, coef.JR
    dl, dr = spacings(state)
    xl, xr = reference_nodes(state)
    wl, wr = state.wL, state.wR

    wl_xi = (wl[2:] - wl[:-2]) / (2.0 * dl)
    wl_xixi = (wl[2:] - 2.0 * wl[1:-1] + wl[:-2]) / dl ** 2
    wr_xi = (wr[2:] - wr[:-2]) / (2.0 * dr)
    wr_xixi = (wr[2:] - 2.0 * wr[1:-1] + wr[:-2]) / dr ** 2

    dL = -(coef.mesh_velocity_left(xl[1:-1]) + wl[1:-1] / jl) * wl_xi + wl_xixi / jl ** 2
    dR = -(coef.mesh_velocity_right(xr[1:-1]) + wr[1:-1] / jr) * wr_xi + wr_xixi / jr ** 2
    return dL, dR


def one_sided_slopes(state: State) -> tuple[float, float]:
    """Second-order one-sided reference slopes w_xi(0-) and w_xi(0+)."""
    dl, dr = spacings(state)
    wl, wr = state.wL, state.wR
    left = (3.0 * wl[-1] - 4.0 * wl[-2] + wl[-3]) / (2.0 * dl)
    right = (-3.0 * wr[0] + 4.0 * wr[1] - wr[2]) / (2.0 * dr)
    return left, right


def jump_vy(state: State, guard: float = 0.0) -> float:
    """Velocity-gradient jump v_y(h+) - v_y(h-)."""
    _require_inside(state.h, guard, state.t)
    jl, jr = state.jacobians
    left, right = one_sided_slopes(state)
    return float(right / jr - left / jl)


def mass(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    """Exact integral of the product of two piecewise-linear interpolants."""
    return float(dx / 6.0 * np.sum(
        2.0 * a[:-1] * b[:-1] + a[:-1] * b[1:] + a[1:] * b[:-1] + 2.0 * a[1:] * b[1:]))


def stiffness(w: np.ndarray, dx: float) -> float:
    """Exact integral of the squared slope of a piecewise-linear interpolant."""
    return float(np.sum(np.diff(w) ** 2) / dx)


def physical_integrals(state: State) -> Integrals:
    """Return the integrals of v^2 and v_y^2 over (-1, 1) in physical units."""
    jl, jr = state.jacobians
    dl, dr = spacings(state)
    l2_v = jl * mass(state.wL, state.wL, dl) + jr * mass(state.wR, state.wR, dr)
    diss_left = stiffness(state.wL, dl) / jl
    diss_right = stiffness(state.wR, dr) / jr
    return Integrals(l2_v, diss_left + diss_right, diss_left, diss_right)
