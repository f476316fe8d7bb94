"""Shared domain types for the fluid-particle interaction system.

The fluid occupies (-1, h) and (h, 1) around a point particle at ``h``. Fluid
values are stored on two fixed reference grids:

- left:  xi in [-1, 0], physical y = h + xi * (1 + h)
- right: xi in [0, 1],  physical y = h + xi * (1 - h)

Usage:
- Build a :class:`SystemParams`, pass it through :func:`validate`.
- Call :func:`initial_state` with a :class:`Grid` to get the t = 0 :class:`State`.

Viscosity and densities are fixed to 1.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate


class FpiError(Exception):
    """Base class for every error raised by fpicli."""


class DomainError(FpiError):
    """A parameter or state invariant is violated.

    Attributes
    - problems (list[str]): every violated invariant, in check order.
    """

    def __init__(self, problems: list[str] | str):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        super().__init__("; ".join(self.problems))


class GeometryError(FpiError):
    """The particle reached the wall guard band (or left (-1, 1))."""

    def __init__(self, message: str, t: float | None = None, h: float | None = None):
        self.t = t
        self.h = h
        super().__init__(message)


class NumericalError(FpiError):
    """A linear solve or an explicit update failed; carries ``t`` and ``h``."""

    def __init__(self, message: str, t: float | None = None, h: float | None = None):
        self.t = t
        self.h = h
        super().__init__(message)


class NotApplicableError(FpiError):
    """A hypothesis of the estimate being evaluated does not hold."""


class InsufficientDataError(FpiError):
    """Too few usable samples for a fit."""


class ConfigError(FpiError):
    """Configuration text could not be parsed or validated."""


class Profile(ABC):
    """Initial fluid velocity v0 on (-1, 1).

    Subclasses implement ``_raw``; :meth:`evaluate` clamps the result to 0 at
    y = -1 and y = 1 so the discrete Dirichlet rows always hold.
    """

    kind: str = ""

    @abstractmethod
    def _raw(self, y: np.ndarray) -> np.ndarray:
        pass

    def _breakpoints(self) -> list[float]:
        return []

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        values = np.asarray(self._raw(y), dtype=float)
        values = np.where(np.abs(y) >= 1.0, 0.0, values)
        return values if values.ndim else float(values)

    def l2_norm_sq(self) -> float:
        """Return the squared L2(-1, 1) norm of the profile."""
        points = [p for p in self._breakpoints() if -1.0 < p < 1.0]
        value, _ = integrate.quad(
            lambda y: self.evaluate(y) ** 2, -1.0, 1.0,
            points=points or None, limit=400,
        )
        return float(value)

    @abstractmethod
    def to_dict(self) -> dict:
        pass


@dataclass(frozen=True)
class ZeroProfile(Profile):
    kind: str = field(default="zero", init=False)

    def _raw(self, y):
        return np.zeros_like(y)

    def l2_norm_sq(self) -> float:
        return 0.0

    def to_dict(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class SineMode(Profile):
    """a * sin(m * pi * (y + 1) / 2). Even modes are odd about y = 0."""
    amplitude: float
    mode: int
    kind: str = field(default="sine", init=False)

    def _raw(self, y):
        return self.amplitude * np.sin(self.mode * np.pi * (y + 1.0) / 2.0)

    def l2_norm_sq(self) -> float:
        return float(self.amplitude ** 2)

    def to_dict(self):
        return {"type": "sine", "amplitude": self.amplitude, "mode": self.mode}


@dataclass(frozen=True)
class Bump(Profile):
    """a * cos^2(pi * (y - c) / (2w)) on |y - c| < w, zero elsewhere."""
    amplitude: float
    center: float
    width: float
    kind: str = field(default="bump", init=False)

    def _raw(self, y):
        s = (y - self.center) / self.width
        return np.where(np.abs(s) < 1.0, self.amplitude * np.cos(np.pi * s / 2.0) ** 2, 0.0)

    def _breakpoints(self):
        return [self.center - self.width, self.center, self.center + self.width]

    def to_dict(self):
        return {"type": "bump", "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


@dataclass(frozen=True)
class SampledProfile(Profile):
    """Piecewise-linear interpolation through (y, v) pairs, zero outside."""
    y: tuple[float, ...]
    v: tuple[float, ...]
    kind: str = field(default="samples", init=False)

    def _raw(self, y):
        return np.interp(y, self.y, self.v, left=0.0, right=0.0)

    def _breakpoints(self):
        return list(self.y)

    def to_dict(self):
        return {"type": "samples", "y": list(self.y), "v": list(self.v)}


@dataclass(frozen=True)
class SystemParams:
    """Physical constants and initial data.

    Attributes
    - K (float): spring gain, K >= 0.
    - h1 (float): spring target in (-1, 1).
    - h0 (float): initial particle position in (-1, 1).
    - g0 (float): initial particle velocity.
    - v0 (Profile): initial fluid velocity.
    """
    K: float
    h1: float
    h0: float
    g0: float
    v0: Profile = field(default_factory=ZeroProfile)

    def to_dict(self):
        return {"K": self.K, "h1": self.h1, "h0": self.h0, "g0": self.g0,
                "v0": self.v0.to_dict()}


@dataclass(frozen=True)
class Grid:
    nL: int
    nR: int

    @property
    def dxi_left(self) -> float:
        return 1.0 / self.nL

    @property
    def dxi_right(self) -> float:
        return 1.0 / self.nR

    @property
    def xi_left(self) -> np.ndarray:
        return np.arange(self.nL + 1) / self.nL - 1.0

    @property
    def xi_right(self) -> np.ndarray:
        return np.arange(self.nR + 1) / self.nR

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.nL * factor, self.nR * factor)

    def to_dict(self):
        return {"nL": self.nL, "nR": self.nR}


@dataclass
class State:
    """Solution snapshot: time, particle position/velocity and fluid nodes."""
    t: float
    h: float
    g: float
    wL: np.ndarray
    wR: np.ndarray

    @property
    def jacobians(self) -> tuple[float, float]:
        return 1.0 + self.h, 1.0 - self.h

    def wall_distance(self) -> float:
        return min(1.0 - self.h, 1.0 + self.h)

    def copy(self) -> "State":
        return State(self.t, self.h, self.g, self.wL.copy(), self.wR.copy())


@dataclass(frozen=True)
class SolverConfig:
    dt_max: float = 1e-3
    cfl: float = 0.4
    t_end: float = 20.0
    sample_stride: int = 10
    boundary_guard: float = 1e-3
    eps_override: float | None = None

    def to_dict(self):
        return {"dt_max": self.dt_max, "cfl": self.cfl, "t_end": self.t_end,
                "sample_stride": self.sample_stride,
                "boundary_guard": self.boundary_guard, "eps": self.eps_override}


def _check_profile(profile: Profile) -> list[str]:
    problems = []
    match profile:
        case SineMode(mode=mode) if not (isinstance(mode, int) and mode >= 1):
            problems.append("v0.mode must be a positive integer")
        case Bump(width=width) if not width > 0:
            problems.append("v0.width must be > 0")
        case SampledProfile(y=ys, v=vs):
            if len(ys) != len(vs) or len(ys) < 2:
                problems.append("v0 samples need equal-length y and v lists with at least 2 entries")
            elif any(b <= a for a, b in zip(ys, ys[1:])):
                problems.append("v0 sample positions must be strictly increasing")
            elif ys[0] < -1.0 or ys[-1] > 1.0:
                problems.append("v0 sample positions must lie in [-1,1]")
            elif not all(np.isfinite(vs)):
                problems.append("v0 sample values must be finite")
    return problems


def validate(params: SystemParams) -> SystemParams:
    """Check every :class:`SystemParams` invariant.

    Returns
    - SystemParams: ``params`` unchanged when all invariants hold.

    Raises
    - DomainError: listing each violated invariant.
    """
    problems = []
    if not (np.isfinite(params.K) and params.K >= 0):
        problems.append("spring_gain must be ≥ 0")
    if not (np.isfinite(params.h1) and abs(params.h1) < 1):
        problems.append("target must lie in (-1,1)")
    if not (np.isfinite(params.h0) and abs(params.h0) < 1):
        problems.append("initial_position must lie in (-1,1)")
    if not np.isfinite(params.g0):
        problems.append("initial_velocity must be finite")
    if not isinstance(params.v0, Profile):
        problems.append("initial_profile must be a profile descriptor")
    else:
        problems.extend(_check_profile(params.v0))
    if problems:
        raise DomainError(problems)
    return params


def validate_grid(grid: Grid) -> Grid:
    problems = []
    if not (isinstance(grid.nL, int) and grid.nL >= 4):
        problems.append("grid.nL must be an integer ≥ 4")
    if not (isinstance(grid.nR, int) and grid.nR >= 4):
        problems.append("grid.nR must be an integer ≥ 4")
    if problems:
        raise DomainError(problems)
    return grid


def validate_solver(cfg: SolverConfig) -> SolverConfig:
    problems = []
    if not cfg.dt_max > 0:
        problems.append("solver.dt_max must be > 0")
    if not 0 < cfg.cfl <= 1:
        problems.append("solver.cfl must lie in (0,1]")
    if not cfg.t_end > 0:
        problems.append("solver.t_end must be > 0")
    if not (isinstance(cfg.sample_stride, int) and cfg.sample_stride >= 1):
        problems.append("solver.sample_stride must be a positive integer")
    if not 0 < cfg.boundary_guard < 1:
        problems.append("solver.boundary_guard must lie in (0,1)")
    if cfg.eps_override is not None and not cfg.eps_override >= 0:
        problems.append("solver.eps must be ≥ 0")
    if problems:
        raise DomainError(problems)
    return cfg


def check_state(state: State) -> State:
    """Raise if any :class:`State` invariant fails; return the state otherwise."""
    problems = []
    if state.wL[0] != 0.0 or state.wR[-1] != 0.0:
        problems.append("wall nodes must be zero")
    if state.wL[-1] != state.g or state.wR[0] != state.g:
        problems.append("interface nodes must equal the particle velocity")
    if not abs(state.h) < 1:
        problems.append("particle position must lie in (-1,1)")
    if not (np.all(np.isfinite(state.wL)) and np.all(np.isfinite(state.wR))
            and np.isfinite(state.g) and np.isfinite(state.t)):
        problems.append("state values must be finite")
    if problems:
        raise DomainError(problems)
    return state


def initial_state(params: SystemParams, grid: Grid) -> State:
    """Sample v0 on both reference grids; the interface node carries g0."""
    h0, g0 = params.h0, params.g0
    wL = params.v0.evaluate(h0 + grid.xi_left * (1.0 + h0))
    wR = params.v0.evaluate(h0 + grid.xi_right * (1.0 - h0))
    wL[0] = 0.0
    wR[-1] = 0.0
    wL[-1] = g0
    wR[0] = g0
    return check_state(State(0.0, h0, g0, wL, wR))
