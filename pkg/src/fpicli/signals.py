"""Open-loop input signals u(t) with closed-form L1 and L2 norms.

Every signal has a finite L2(0, inf) norm. ``is_l1`` tells whether the L1(0, inf)
norm is finite, which decides whether the confinement constant alpha applies.
Norms accept an optional ``horizon`` T and then integrate over [0, T] only.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainError

INF = math.inf


def _horizon(horizon: float | None) -> float:
    if horizon is None:
        return INF
    if horizon < 0:
        raise DomainError("horizon must be ≥ 0")
    return float(horizon)


class InputSignal(ABC):
    """Base class for closed-form signals.

    Subclasses implement ``values`` (vectorized), ``l2_norm_sq`` and ``l1_norm``.
    """

    kind: str = ""

    @abstractmethod
    def values(self, t: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def l2_norm_sq(self, horizon: float | None = None) -> float:
        pass

    @abstractmethod
    def l1_norm(self, horizon: float | None = None) -> float:
        pass

    @property
    @abstractmethod
    def is_l1(self) -> bool:
        pass

    @property
    def zero_after(self) -> float:
        """Time after which the signal vanishes identically (inf if never)."""
        return INF

    @abstractmethod
    def to_dict(self) -> dict:
        pass

    def eval(self, t: float) -> float:
        """Pointwise value u(t); raises :class:`DomainError` for t < 0."""
        if t < 0:
            raise DomainError(f"signal evaluated at negative time {t!r}")
        return float(self.values(np.asarray([t], dtype=float))[0])

    def l2_norm(self, horizon: float | None = None) -> float:
        return math.sqrt(self.l2_norm_sq(horizon))


@dataclass(frozen=True)
class ZeroSignal(InputSignal):
    kind: str = field(default="zero", init=False)

    def values(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def l2_norm_sq(self, horizon=None):
        _horizon(horizon)
        return 0.0

    def l1_norm(self, horizon=None):
        _horizon(horizon)
        return 0.0

    @property
    def is_l1(self):
        return True

    @property
    def zero_after(self):
        return 0.0

    def to_dict(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class ExpDecay(InputSignal):
    """u(t) = a * exp(-lam * t)."""
    a: float
    lam: float
    kind: str = field(default="expdecay", init=False)

    def values(self, t):
        return self.a * np.exp(-self.lam * np.asarray(t, dtype=float))

    def l2_norm_sq(self, horizon=None):
        T = _horizon(horizon)
        return self.a ** 2 * -math.expm1(-2.0 * self.lam * T) / (2.0 * self.lam) if T < INF \
            else self.a ** 2 / (2.0 * self.lam)

    def l1_norm(self, horizon=None):
        T = _horizon(horizon)
        return abs(self.a) * -math.expm1(-self.lam * T) / self.lam if T < INF \
            else abs(self.a) / self.lam

    @property
    def is_l1(self):
        return True

    def to_dict(self):
        return {"type": "expdecay", "a": self.a, "lam": self.lam}


@dataclass(frozen=True)
class RectPulse(InputSignal):
    """u(t) = a on [t0, t1), zero elsewhere."""
    a: float
    t0: float
    t1: float
    kind: str = field(default="rectpulse", init=False)

    def values(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= self.t0) & (t < self.t1), self.a, 0.0)

    def _support(self, T):
        return max(0.0, min(self.t1, T) - max(self.t0, 0.0))

    def l2_norm_sq(self, horizon=None):
        return self.a ** 2 * self._support(_horizon(horizon))

    def l1_norm(self, horizon=None):
        return abs(self.a) * self._support(_horizon(horizon))

    @property
    def is_l1(self):
        return True

    @property
    def zero_after(self):
        return self.t1

    def to_dict(self):
        return {"type": "rectpulse", "a": self.a, "t0": self.t0, "t1": self.t1}


@dataclass(frozen=True)
class PowerTail(InputSignal):
    """u(t) = a / (1 + t)^p with p > 1/2; in L1 only for p > 1."""
    a: float
    p: float
    kind: str = field(default="powertail", init=False)

    def values(self, t):
        return self.a / (1.0 + np.asarray(t, dtype=float)) ** self.p

    def l2_norm_sq(self, horizon=None):
        T = _horizon(horizon)
        q = 2.0 * self.p - 1.0
        if T == INF:
            return self.a ** 2 / q
        return self.a ** 2 * -math.expm1(-q * math.log1p(T)) / q

    def l1_norm(self, horizon=None):
        T = _horizon(horizon)
        if T == INF:
            return abs(self.a) / (self.p - 1.0) if self.p > 1.0 else INF
        if self.p == 1.0:
            return abs(self.a) * math.log1p(T)
        q = self.p - 1.0
        return abs(self.a) * -math.expm1(-q * math.log1p(T)) / q

    @property
    def is_l1(self):
        return self.p > 1.0

    def to_dict(self):
        return {"type": "powertail", "a": self.a, "p": self.p}


@dataclass(frozen=True)
class SampledSignal(InputSignal):
    """Zero-order hold: u = values[i] on [times[i], times[i+1]).

    The last value must be 0, so the signal has compact support [times[0], times[-1]).
    """
    times: tuple[float, ...]
    vals: tuple[float, ...]
    kind: str = field(default="sampled", init=False)

    def values(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        held = np.asarray(self.vals)[np.clip(idx, 0, len(self.vals) - 1)]
        return np.where(idx >= 0, held, 0.0)

    def _hold_sum(self, T, power):
        times = np.asarray(self.times)
        vals = np.abs(np.asarray(self.vals[:-1])) ** power
        starts = np.clip(times[:-1], 0.0, T)
        ends = np.clip(times[1:], 0.0, T)
        return float(np.sum(vals * (ends - starts)))

    def l2_norm_sq(self, horizon=None):
        return self._hold_sum(_horizon(horizon), 2)

    def l1_norm(self, horizon=None):
        return self._hold_sum(_horizon(horizon), 1)

    @property
    def is_l1(self):
        return True

    @property
    def zero_after(self):
        return self.times[-1]

    def to_dict(self):
        return {"type": "sampled", "times": list(self.times), "values": list(self.vals)}


def validate_signal(sig: InputSignal) -> InputSignal:
    """Check the variant invariants; raises :class:`DomainError`."""
    problems = []
    match sig:
        case ExpDecay(lam=lam) if not lam > 0:
            problems.append("signal.lam must be > 0")
        case RectPulse(t0=t0, t1=t1) if not 0 <= t0 < t1:
            problems.append("signal pulse needs 0 ≤ t0 < t1")
        case PowerTail(p=p) if not p > 0.5:
            problems.append("signal.p must be > 1/2")
        case SampledSignal(times=times, vals=vals):
            if len(times) != len(vals) or len(times) < 2:
                problems.append("signal needs equal-length times and values with at least 2 entries")
            elif any(b <= a for a, b in zip(times, times[1:])) or times[0] < 0:
                problems.append("signal times must be nonnegative and strictly increasing")
            elif vals[-1] != 0:
                problems.append("signal last value must be 0 (compact support)")
    if problems:
        raise DomainError(problems)
    return sig
