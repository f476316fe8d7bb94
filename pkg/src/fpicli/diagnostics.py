"""Analytic functionals evaluated on states and trajectories.

E is the energy, P the test-function momentum, A1/A2 the mesh-motion and
convective parts of dP/dt and V_eps the Lyapunov functional. The two residual
operations check the energy equality and the log-mass identity along a
recorded trajectory.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .domain import Grid, SolverConfig, State, SystemParams
from .signals import InputSignal
from .transform import mass, physical_integrals, reference_nodes, spacings

CSV_FIELDS = ("t", "h", "g", "E", "P", "A1", "A2", "V_eps", "diss", "cum_diss",
              "cum_gu", "cum_u", "cum_spring", "c1", "c2")

NAN = math.nan

# rates integrated at the new time level
RIGHT_ENDPOINT = frozenset(("diss", "gu"))


@dataclass
class SampleRecord:
    """One diagnostics sample.

    The first fifteen fields are the serialized columns; the rest are kept in
    memory only and read back as NaN.
    """
    t: float
    h: float
    g: float
    E: float
    P: float
    A1: float
    A2: float
    V_eps: float
    diss: float
    cum_diss: float
    cum_gu: float
    cum_u: float
    cum_spring: float
    c1: float
    c2: float
    u: float = NAN
    l2_v: float = NAN
    diss_left: float = NAN
    diss_right: float = NAN
    a1_left: float = NAN
    a1_right: float = NAN
    cum_a1: float = NAN
    cum_a2: float = NAN

    def row(self) -> list[float]:
        return [getattr(self, name) for name in CSV_FIELDS]


@dataclass
class Trajectory:
    """Time-sampled diagnostics of one run plus echoes of its inputs.

    ``termination`` is one of ``completed``, ``wall-proximity`` or
    ``numerical-error``.
    """
    params: SystemParams
    grid: Grid | None
    signal: InputSignal
    samples: list[SampleRecord] = field(default_factory=list)
    termination: str = "completed"
    message: str = ""
    eps: float = 0.0
    solver: SolverConfig | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def completed(self) -> bool:
        return self.termination == "completed"


class Functionals(NamedTuple):
    P: float
    a1_left: float
    a1_right: float
    A2: float


def _convective(w: np.ndarray, phi: np.ndarray) -> float:
    # per cell: slope * exact integral of phi * w
    return float(np.sum(np.diff(w) / 6.0 * (
        2.0 * phi[:-1] * w[:-1] + phi[:-1] * w[1:] + phi[1:] * w[:-1] + 2.0 * phi[1:] * w[1:])))


def functionals(state: State) -> Functionals:
    jl, jr = state.jacobians
    dl, dr = spacings(state)
    xl, xr = reference_nodes(state)
    phi_l, phi_r = 1.0 + xl, 1.0 - xr
    mom_l = mass(phi_l, state.wL, dl)
    mom_r = mass(phi_r, state.wR, dr)
    return Functionals(
        P=jl * mom_l + jr * mom_r + state.g,
        a1_left=-state.g * mom_l,
        a1_right=state.g * mom_r,
        A2=_convective(state.wL, phi_l) + _convective(state.wR, phi_r),
    )


def energy(state: State, params: SystemParams) -> float:
    """E = int v^2 dy + g^2 + K (h - h1)^2."""
    return physical_integrals(state).l2_v + state.g ** 2 + params.K * (state.h - params.h1) ** 2


def p_functional(state: State) -> float:
    return functionals(state).P


def a1_functional(state: State) -> float:
    f = functionals(state)
    return f.a1_left + f.a1_right


def a2_functional(state: State) -> float:
    return functionals(state).A2


def lyapunov(state: State, params: SystemParams, eps: float) -> float:
    """V_eps = E - eps (h1 - h) P."""
    if eps < 0:
        raise ValueError("eps must be ≥ 0")
    return energy(state, params) - eps * (params.h1 - state.h) * p_functional(state)


class TrajectoryRecorder:
    """Accumulates running integrals at step granularity and stores samples.

    Usage::

        rec = TrajectoryRecorder(params, grid, signal, eps, envelope)
        rec.start(state)
        ... rec.advance(new_state, u_new) after every step ...
        ... rec.sample() every ``sample_stride`` steps ...
        traj = rec.finish("completed")

    The dissipation and input-power integrals use the right-endpoint rule,
    matching the implicit step; the other running integrals use the trapezoid
    rule between consecutive steps.
    """

    def __init__(self, params: SystemParams, grid: Grid | None, signal: InputSignal,
                 eps: float, envelope: Callable[[float], tuple[float, float]] | None = None,
                 solver: SolverConfig | None = None):
        self.params = params
        self.grid = grid
        self.signal = signal
        self.eps = eps
        self.envelope = envelope
        self.solver = solver
        self.samples = []
        self.cum = dict.fromkeys(("diss", "gu", "u", "spring", "a1", "a2"), 0.0)
        self._point = None

    def _evaluate(self, state: State, u_val: float) -> dict:
        ints = physical_integrals(state)
        fn = functionals(state)
        params = self.params
        E = ints.l2_v + state.g ** 2 + params.K * (state.h - params.h1) ** 2
        return {
            "state": state, "u": u_val, "ints": ints, "fn": fn, "E": E,
            "rates": {
                "diss": ints.diss,
                "gu": state.g * u_val,
                "u": u_val,
                "spring": params.K * (params.h1 - state.h),
                "a1": fn.a1_left + fn.a1_right,
                "a2": fn.A2,
            },
        }

    def start(self, state: State):
        self._point = self._evaluate(state, self.signal.eval(state.t))
        self.sample()

    def advance(self, state: State, u_val: float):
        prev = self._point
        point = self._evaluate(state, u_val)
        dt = state.t - prev["state"].t
        for key, rate in point["rates"].items():
            if key in RIGHT_ENDPOINT:
                self.cum[key] += dt * rate
            else:
                self.cum[key] += 0.5 * dt * (prev["rates"][key] + rate)
        self._point = point

    def sample(self):
        point = self._point
        state, ints, fn = point["state"], point["ints"], point["fn"]
        if self.samples and self.samples[-1].t >= state.t:
            return
        c1, c2 = self.envelope(state.t) if self.envelope else (NAN, NAN)
        V = point["E"] - self.eps * (self.params.h1 - state.h) * fn.P
        self.samples.append(SampleRecord(
            t=state.t, h=state.h, g=state.g, E=point["E"], P=fn.P,
            A1=fn.a1_left + fn.a1_right, A2=fn.A2, V_eps=V, diss=ints.diss,
            cum_diss=self.cum["diss"], cum_gu=self.cum["gu"], cum_u=self.cum["u"],
            cum_spring=self.cum["spring"], c1=c1, c2=c2,
            u=point["u"], l2_v=ints.l2_v, diss_left=ints.diss_left,
            diss_right=ints.diss_right, a1_left=fn.a1_left, a1_right=fn.a1_right,
            cum_a1=self.cum["a1"], cum_a2=self.cum["a2"],
        ))

    def finish(self, termination: str = "completed", message: str = "") -> Trajectory:
        return Trajectory(self.params, self.grid, self.signal, self.samples,
                          termination, message, self.eps, self.solver)


def energy_residual(traj: Trajectory, source_factor: float = 2.0) -> np.ndarray:
    """R_E(t) = E(t) - E(0) + 2 cum_diss(t) - source_factor * cum_gu(t).

    ``source_factor=2`` is the derived identity; 1 is the literal statement,
    kept for comparison.
    """
    E = traj.column("E")
    return E - E[0] + 2.0 * traj.column("cum_diss") - source_factor * traj.column("cum_gu")


def logmass_residual(traj: Trajectory) -> np.ndarray:
    """Residual of the log-mass identity obtained from the test function phi.

    ln((1+h)/(1+h0)) - ln((1-h)/(1-h0))
        = cum_spring + cum_u + P(0) - P(t) + cum_A1 - cum_A2
    """
    h = traj.column("h")
    h0 = h[0]
    lhs = np.log((1.0 + h) / (1.0 + h0)) - np.log((1.0 - h) / (1.0 - h0))
    P = traj.column("P")
    rhs = (traj.column("cum_spring") + traj.column("cum_u") + P[0] - P
           + traj.column("cum_a1") - traj.column("cum_a2"))
    return lhs - rhs
