"""Reference solver: forward Euler on the transformed equations.

Used only to produce reference trajectories for the stepper. Fluid nodes are
advanced with :func:`fpicli.transform.transformed_rhs`; the particle velocity
with the explicit Newton row using :func:`fpicli.transform.jump_vy` and u(t).
"""

import numpy as np

from .diagnostics import Trajectory, TrajectoryRecorder
from .domain import GeometryError, Grid, NumericalError, State, SystemParams, initial_state
from .signals import InputSignal
from .stability import compute_constants, make_envelope
from .transform import jump_vy, transformed_rhs

DIFFUSION_LIMIT = 0.2


def diffusion_limit(n: int, h: float) -> float:
    """Largest stable forward-Euler step 0.2 * dxi^2 * min(1-h, 1+h)^2."""
    return DIFFUSION_LIMIT * (min(1.0 - h, 1.0 + h) / n) ** 2


def oracle_dt(n: int, h0: float, safety: float = 0.75, travel: float = 0.8) -> float:
    """Step size for a run starting at ``h0``, leaving room for the particle to approach a wall."""
    return safety * DIFFUSION_LIMIT * (travel * min(1.0 - h0, 1.0 + h0) / n) ** 2


def oracle_step(state: State, dt: float, u_now: float, params: SystemParams,
                guard: float = 0.0) -> State:
    """One forward Euler step with u evaluated at the start of the interval."""
    dL, dR = transformed_rhs(state, guard)
    accel = jump_vy(state, guard) + params.K * (params.h1 - state.h) + u_now
    g_new = state.g + dt * accel
    wL = state.wL.copy()
    wR = state.wR.copy()
    wL[1:-1] += dt * dL
    wR[1:-1] += dt * dR
    wL[-1] = g_new
    wR[0] = g_new
    return State(state.t + dt, state.h + dt * state.g, g_new, wL, wR)


def oracle_simulate(params: SystemParams, n: int, dt: float, t_end: float, sig: InputSignal,
                    sample_stride: int = 100, guard: float = 1e-3,
                    eps_override: float | None = None) -> Trajectory:
    """Explicit reference run on n cells per side.

    The stability limit is checked before every step; a violation ends the run
    with a ``numerical-error`` termination naming the step.
    """
    grid = Grid(n, n)
    constants = compute_constants(params, sig, eps_override)
    recorder = TrajectoryRecorder(params, grid, sig, constants.eps, make_envelope(params, sig))
    state = initial_state(params, grid)
    recorder.start(state)
    k = 0
    try:
        while state.t < t_end:
            step_dt = min(dt, t_end - state.t)
            limit = diffusion_limit(n, state.h)
            if step_dt > limit:
                raise NumericalError(
                    f"step {k}: dt={step_dt:.3e} exceeds the explicit diffusion limit {limit:.3e}",
                    t=state.t, h=state.h)
            u_now = sig.eval(state.t)
            last = state.t + step_dt >= t_end
            state = oracle_step(state, step_dt, u_now, params, guard)
            if last:
                state.t = t_end
            if not (np.all(np.isfinite(state.wL)) and np.all(np.isfinite(state.wR))):
                raise NumericalError(f"step {k}: non-finite values", t=state.t, h=state.h)
            recorder.advance(state, sig.eval(state.t))
            k += 1
            if k % sample_stride == 0:
                recorder.sample()
    except GeometryError as e:
        recorder.sample()
        return recorder.finish("wall-proximity", str(e))
    except NumericalError as e:
        recorder.sample()
        return recorder.finish("numerical-error", str(e))
    recorder.sample()
    return recorder.finish()
