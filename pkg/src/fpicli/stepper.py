"""IMEX time stepping of the coupled fluid-particle system.

One step:

1. h <- h + dt * g (explicit).
2. Jacobians frozen at the new position.
3. Advection and mesh-motion terms explicit, from the old fluid values and g.
4. Diffusion implicit; Newton's law implicit through the velocity-gradient jump.
5. One banded solve for [wL interior, g, wR interior].

The interface row couples g to the two nodes on each side (3-point one-sided
slopes), so the matrix is tridiagonal plus two entries in that row.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .diagnostics import Trajectory, TrajectoryRecorder
from .domain import (GeometryError, Grid, NumericalError, SolverConfig, State,
                     SystemParams, initial_state)
from .signals import InputSignal
from .stability import compute_constants, make_envelope

TINY = 1e-300
RESIDUAL_TOL = 1e-10

WALL_PROXIMITY = "wall-proximity"
NUMERICAL_ERROR = "numerical-error"


@dataclass
class BorderedTridiagonalSystem:
    """A x = b with A tridiagonal except row ``m``, which also has entries at m-2 and m+2.

    Attributes
    - sub, diag, sup: the three bands; ``sub[i] = A[i+1, i]``, ``sup[i] = A[i, i+1]``.
    - m: index of the interface row.
    - far_left, far_right: A[m, m-2] and A[m, m+2].
    """
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    m: int
    far_left: float
    far_right: float

    @property
    def size(self) -> int:
        return len(self.diag)

    def banded(self) -> np.ndarray:
        """Matrix in the (2, 2) diagonal-ordered form of ``scipy.linalg.solve_banded``."""
        n, m = self.size, self.m
        ab = np.zeros((5, n))
        ab[1, 1:] = self.sup
        ab[2, :] = self.diag
        ab[3, :-1] = self.sub
        ab[4, m - 2] = self.far_left
        ab[0, m + 2] = self.far_right
        return ab

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        y[self.m] += self.far_left * x[self.m - 2] + self.far_right * x[self.m + 2]
        return y

    def solve(self, b: np.ndarray, t: float | None = None, h: float | None = None) -> np.ndarray:
        """Solve and verify ||Ax - b||_inf <= 1e-10 ||b||_inf.

        Raises
        - NumericalError: zero diagonal, singular matrix or inaccurate solution.
        """
        n, m = self.size, self.m
        if not (len(self.sub) == len(self.sup) == n - 1 and 2 <= m <= n - 3 and len(b) == n):
            raise NumericalError("inconsistent bordered system dimensions", t=t, h=h)
        if np.any(self.diag == 0.0):
            raise NumericalError("zero diagonal entry in bordered system", t=t, h=h)
        try:
            x = linalg.solve_banded((2, 2), self.banded(), b)
        except (linalg.LinAlgError, ValueError) as e:
            raise NumericalError(f"bordered solve failed: {e}", t=t, h=h) from e
        residual = np.max(np.abs(self.matvec(x) - b))
        if not residual <= RESIDUAL_TOL * max(np.max(np.abs(b)), TINY):
            raise NumericalError(f"bordered solve residual {residual:.3e} too large", t=t, h=h)
        return x


def _check_guard(h: float, guard: float, t: float):
    if not abs(h) < 1.0 or min(1.0 - h, 1.0 + h) < guard:
        raise GeometryError(f"particle at h={h!r} is within {guard!r} of a wall", t=t, h=h)


def stable_dt(state: State, grid: Grid, cfg: SolverConfig) -> float:
    """dt = min(dt_max, cfl * min dxi * min J / (max|w| + |g| + tiny))."""
    _check_guard(state.h, cfg.boundary_guard, state.t)
    speed = max(np.max(np.abs(state.wL)), np.max(np.abs(state.wR))) + abs(state.g) + TINY
    min_dxi = min(grid.dxi_left, grid.dxi_right)
    return min(cfg.dt_max, cfg.cfl * min_dxi * state.wall_distance() / speed)


def _explicit_terms(w: np.ndarray, g: float, weight: np.ndarray, J: float, dxi: float) -> np.ndarray:
    # (g * weight - w) * w_xi / J at interior nodes
    w_xi = (w[2:] - w[:-2]) / (2.0 * dxi)
    return (g * weight - w[1:-1]) * w_xi / J


def assemble(state: State, dt: float, u_val: float, params: SystemParams,
             h_new: float) -> tuple[BorderedTridiagonalSystem, np.ndarray]:
    """Build the implicit system of one step with Jacobians frozen at ``h_new``."""
    nL, nR = len(state.wL) - 1, len(state.wR) - 1
    dl, dr = 1.0 / nL, 1.0 / nR
    JL, JR = 1.0 + h_new, 1.0 - h_new
    xi_l = np.arange(1, nL) / nL - 1.0
    xi_r = np.arange(1, nR) / nR
    m = nL - 1
    a = dt / (JL * dl) ** 2
    b = dt / (JR * dr) ** 2
    cl = dt / (dl * JL)
    cr = dt / (dr * JR)

    diag = np.concatenate((np.full(nL - 1, 1.0 + 2.0 * a),
                           [1.0 + 1.5 * cl + 1.5 * cr],
                           np.full(nR - 1, 1.0 + 2.0 * b)))
    sup = np.concatenate((np.full(nL - 1, -a), [-2.0 * cr], np.full(nR - 2, -b)))
    sub = np.concatenate((np.full(nL - 2, -a), [-2.0 * cl], np.full(nR - 1, -b)))

    rhs = np.concatenate((
        state.wL[1:-1] + dt * _explicit_terms(state.wL, state.g, 1.0 + xi_l, JL, dl),
        [state.g + dt * (params.K * (params.h1 - h_new) + u_val)],
        state.wR[1:-1] + dt * _explicit_terms(state.wR, state.g, 1.0 - xi_r, JR, dr),
    ))
    # wall nodes are zero, so only the interface couples off the fluid blocks
    system = BorderedTridiagonalSystem(sub, diag, sup, m, 0.5 * cl, 0.5 * cr)
    return system, rhs


def step(state: State, dt: float, u_val: float, params: SystemParams,
         guard: float = 1e-3) -> State:
    """Advance ``state`` by ``dt`` with input value ``u_val = u(t + dt)``.

    Raises
    - GeometryError: the particle is, or would be, inside the wall guard band.
    - NumericalError: the linear solve failed.
    """
    if not dt > 0:
        raise NumericalError(f"time step must be > 0, got {dt!r}", t=state.t, h=state.h)
    _check_guard(state.h, guard, state.t)
    t_new = state.t + dt
    h_new = state.h + dt * state.g
    _check_guard(h_new, guard, t_new)

    system, rhs = assemble(state, dt, u_val, params, h_new)
    x = system.solve(rhs, t=t_new, h=h_new)
    m = system.m
    g_new = float(x[m])
    wL = np.concatenate(([0.0], x[:m], [g_new]))
    wR = np.concatenate(([g_new], x[m + 1:], [0.0]))
    if not (math.isfinite(g_new) and np.all(np.isfinite(x))):
        raise NumericalError("non-finite values after step", t=t_new, h=h_new)
    return State(t_new, h_new, g_new, wL, wR)


def simulate(params: SystemParams, grid: Grid, cfg: SolverConfig, sig: InputSignal) -> Trajectory:
    """Run from t = 0 to ``cfg.t_end``.

    Samples every ``cfg.sample_stride`` steps and at the end. Geometry and
    numerical failures end the run and become its termination record.
    """
    constants = compute_constants(params, sig, cfg.eps_override)
    recorder = TrajectoryRecorder(params, grid, sig, constants.eps,
                                  make_envelope(params, sig), cfg)
    state = initial_state(params, grid)
    recorder.start(state)
    steps = 0
    try:
        while state.t < cfg.t_end:
            dt = stable_dt(state, grid, cfg)
            last = state.t + dt >= cfg.t_end
            if last:
                dt = cfg.t_end - state.t
            u_val = sig.eval(state.t + dt)
            state = step(state, dt, u_val, params, cfg.boundary_guard)
            if last:
                state.t = cfg.t_end
            recorder.advance(state, u_val)
            steps += 1
            if steps % cfg.sample_stride == 0:
                recorder.sample()
    except GeometryError as e:
        recorder.sample()
        return recorder.finish(WALL_PROXIMITY, str(e))
    except NumericalError as e:
        recorder.sample()
        return recorder.finish(NUMERICAL_ERROR, str(e))
    recorder.sample()
    return recorder.finish()
