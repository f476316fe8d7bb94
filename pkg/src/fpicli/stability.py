"""Explicit stability constants and the checks evaluated on trajectories.

Constants: the global constant C, the two-sided confinement constant alpha,
the Lyapunov weight eps, the decay rate eta and the local-eISS constants.

Checks compare two sides of an inequality at every sample and report the
worst margin. A check's status is ``pass``, ``fail`` or ``na`` (hypothesis
unmet); only ``gating`` checks decide the exit code.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import Trajectory, energy_residual, logmass_residual
from .domain import InsufficientDataError, NotApplicableError, DomainError, SystemParams
from .filters import filter_above_floor, filter_since
from .signals import InputSignal

PASS = "pass"
FAIL = "fail"
NA = "na"

TOLERANCE = 1e-9
POINCARE = math.pi ** 2 / 4.0
K0_RATE = 0.25


@dataclass
class StabilityConstants:
    c_global: float
    alpha: float | None
    eps: float
    eta: float | None
    alpha_local: float | None
    eta_local: float | None
    u_l2: float
    u_l1: float


@dataclass
class CheckResult:
    name: str
    margin: float | None
    time: float | None
    status: str
    gating: bool = True


@dataclass
class DecayFit:
    rate: float
    window: tuple[float, float]
    residual: float


@dataclass
class StabilityReport:
    constants: StabilityConstants
    checks: list[CheckResult] = field(default_factory=list)
    fit: DecayFit | None = None
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks if c.gating)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.gating and c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "constants": asdict(self.constants),
            "checks": [asdict(c) for c in self.checks],
            "fit": None if self.fit is None else {
                "rate": self.fit.rate, "window": list(self.fit.window),
                "residual": self.fit.residual},
            "meta": dict(self.meta),
        }


def data_size(params: SystemParams, u_l2: float) -> float:
    """S = ||v0||^2 + g0^2 + K (h1 - h0)^2 + ||u||^2."""
    return (params.v0.l2_norm_sq() + params.g0 ** 2
            + params.K * (params.h1 - params.h0) ** 2 + u_l2 ** 2)


def c_global(params: SystemParams, u_l2: float) -> float:
    """C = 10 (S + sqrt(S))."""
    S = data_size(params, u_l2)
    return 10.0 * (S + math.sqrt(S))


def _wall_gap(prefactor: float, exponent: float) -> float:
    # 2 / (1 + prefactor * exp(exponent)), zero once exp overflows
    try:
        return 2.0 / (1.0 + prefactor * math.exp(exponent))
    except OverflowError:
        return 0.0


def confinement_envelope(t: float, params: SystemParams, u_l2_upto_t: float,
                         u_l2: float | None = None) -> tuple[float, float]:
    """Time-dependent wall distances (c1, c2): -1 + c1 <= h(t) <= 1 - c2.

    Uses exp(C + 2Kt + sqrt(t) ||u||_{L2(0,t)}), with C from the full-horizon
    norm ``u_l2`` when given.
    """
    if t < 0:
        raise DomainError("envelope time must be ≥ 0")
    h0 = params.h0
    exponent = (c_global(params, u_l2_upto_t if u_l2 is None else u_l2)
                + 2.0 * params.K * t + math.sqrt(t) * u_l2_upto_t)
    c1 = _wall_gap(max(2.0, (1.0 - h0) / (1.0 + h0)), exponent)
    c2 = _wall_gap(max(2.0, (1.0 + h0) / (1.0 - h0)), exponent)
    return c1, c2


def make_envelope(params: SystemParams, sig: InputSignal):
    """Return ``t -> (c1, c2)`` for one run, with C from the full-horizon input norm."""
    u_l2 = sig.l2_norm()

    def envelope(t: float) -> tuple[float, float]:
        return confinement_envelope(t, params, sig.l2_norm(t), u_l2)

    return envelope


def alpha_bound(params: SystemParams, u_l2: float, u_l1: float) -> float:
    """Uniform confinement constant: -1 + alpha <= h(t) <= 1 - alpha.

    Raises
    - NotApplicableError: the input is not in L1(0, inf).
    """
    if not math.isfinite(u_l1):
        raise NotApplicableError("alpha needs u in L1(0,inf)")
    h0, h1 = params.h0, params.h1
    exponent = c_global(params, u_l2) + u_l1
    upper = max((1.0 + h1) / (1.0 - h1), (1.0 + h0) / (1.0 - h0))
    lower = max((1.0 - h1) / (1.0 + h1), (1.0 - h0) / (1.0 + h0))
    return min(_wall_gap(upper, exponent), _wall_gap(lower, exponent), 1.0)


def _rate_base(K: float, alpha: float) -> float:
    if K <= 0:
        raise NotApplicableError("eps and eta need K > 0")
    if not 0 <= alpha <= 1:
        raise DomainError("alpha must lie in [0,1]")
    scale = K * alpha * alpha
    return 34.0 + 2.0 / scale if scale > 0 else math.inf


def in_eps_window(K: float, eps: float) -> bool:
    """0 <= eps <= min(1/8, K/8), where V_eps is equivalent to E."""
    return 0.0 <= eps <= min(0.125, K / 8.0)


def epsilon_choice(K: float, alpha: float) -> float:
    """eps = 1 / (16 (34 + 2 / (K alpha^2)))."""
    eps = 1.0 / (16.0 * _rate_base(K, alpha))
    if not in_eps_window(K, eps):
        raise DomainError(f"eps={eps:g} is outside [0, min(1/8, K/8)]")
    return eps


def eta_rate(K: float, alpha: float) -> float:
    """eta = 1/4 min{1 / (34 + 2 / (K alpha^2)), 3 K eps / 4}."""
    base = _rate_base(K, alpha)
    return 0.25 * min(1.0 / base, 0.75 * K * epsilon_choice(K, alpha))


def local_alpha(params: SystemParams, u_l2: float) -> float:
    """alpha for the local eISS regime, or NotApplicableError when its conditions fail."""
    h0, h1, K = params.h0, params.h1, params.K
    gap = abs(h0 - h1)
    if not 0 < gap < min(1.0 - h1, 1.0 + h1) / (2.0 * math.sqrt(2.0)):
        raise NotApplicableError("local eISS needs 0 < |h0-h1| < min(1-h1,1+h1)/(2*sqrt(2))")
    if not K > (params.v0.l2_norm_sq() + params.g0 ** 2 + u_l2 ** 2) / gap ** 2:
        raise NotApplicableError("local eISS needs K > (||v0||^2+g0^2+||u||^2)/|h0-h1|^2")
    return 0.5 * min(1.0 - h1, 1.0 + h1)


def compute_constants(params: SystemParams, sig: InputSignal,
                      eps_override: float | None = None) -> StabilityConstants:
    u_l2, u_l1 = sig.l2_norm(), sig.l1_norm()
    alpha = alpha_bound(params, u_l2, u_l1) if sig.is_l1 else None
    if params.K > 0:
        eps = epsilon_choice(params.K, alpha) if alpha is not None else 0.0
        eta = eta_rate(params.K, alpha) if alpha is not None else None
    else:
        eps, eta = 0.0, K0_RATE
    if eps_override is not None:
        eps = eps_override
    try:
        a_loc = local_alpha(params, u_l2)
        e_loc = eta_rate(params.K, a_loc)
    except NotApplicableError:
        a_loc = e_loc = None
    return StabilityConstants(c_global(params, u_l2), alpha, eps, eta, a_loc, e_loc, u_l2, u_l1)


def not_applicable(name: str, gating: bool = True) -> CheckResult:
    return CheckResult(name, None, None, NA, gating)


def bound_check(name: str, times, lhs, rhs, gating: bool = True,
                tol: float = TOLERANCE) -> CheckResult:
    """Check lhs <= rhs at every sample with relative tolerance ``tol``."""
    times, lhs, rhs = (np.asarray(a, dtype=float) for a in (times, lhs, rhs))
    if times.size == 0 or not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        return not_applicable(name, gating)
    margin = rhs - lhs
    slack = tol * np.maximum(np.abs(lhs), np.abs(rhs))
    worst = int(np.argmin(margin + slack))
    status = PASS if margin[worst] + slack[worst] >= 0 else FAIL
    return CheckResult(name, float(margin[worst]), float(times[worst]), status, gating)


def pointwise_checks(traj: Trajectory) -> list[CheckResult]:
    """Sample-wise functional bounds.

    The V_eps equivalence is checked only for K > 0 and 0 < eps <= min(1/8, K/8);
    outside that window it is ``na``.
    """
    t = traj.column("t")
    diss, l2, g = traj.column("diss"), traj.column("l2_v"), traj.column("g")
    E, V = traj.column("E"), traj.column("V_eps")
    checks = [
        bound_check("a2_bound", t, np.abs(traj.column("A2")), 4.0 * diss),
        bound_check("a1_bound", t, np.abs(traj.column("A1")), 12.0 * diss),
        bound_check("a1_left_bound", t, np.abs(traj.column("a1_left")),
                    6.0 * traj.column("diss_left")),
        bound_check("a1_right_bound", t, np.abs(traj.column("a1_right")),
                    6.0 * traj.column("diss_right")),
        bound_check("p_bound", t, traj.column("P") ** 2, 4.0 * (l2 + g ** 2)),
        bound_check("trace_bound", t, g ** 2, 2.0 * diss),
        bound_check("poincare_bound", t, POINCARE * l2, diss),
    ]
    K, eps = traj.params.K, traj.eps
    if K > 0 and eps > 0 and in_eps_window(K, eps):
        checks.append(bound_check("norm_equiv_lower", t, 0.25 * E, V))
        checks.append(bound_check("norm_equiv_upper", t, V, 2.0 * E))
    else:
        checks.append(not_applicable("norm_equiv_lower"))
        checks.append(not_applicable("norm_equiv_upper"))
    return checks


def termination_check(traj: Trajectory) -> CheckResult:
    last_t = traj.samples[-1].t if traj.samples else None
    if traj.completed:
        return CheckResult("termination", 0.0, last_t, PASS)
    if traj.termination == "wall-proximity" and not traj.signal.is_l1:
        return CheckResult("termination", None, last_t, NA)
    return CheckResult("termination", None, last_t, FAIL)


def confinement_checks(traj: Trajectory, constants: StabilityConstants) -> list[CheckResult]:
    """Envelope and uniform confinement, written as distances to the walls.

    ``alpha_sharpness`` reports min_t min(1-h, 1+h) / alpha - 1, the relative
    room left under the analytic alpha.
    """
    t, h = traj.column("t"), traj.column("h")
    c1, c2 = traj.column("c1"), traj.column("c2")
    ones = np.ones_like(h)
    checks = [bound_check("confinement_envelope", t, np.maximum(c2 + h, c1 - h), ones)]
    if constants.alpha is None:
        checks.append(not_applicable("confinement_alpha"))
        checks.append(not_applicable("alpha_sharpness", gating=False))
        return checks
    alpha = constants.alpha
    checks.append(bound_check("confinement_alpha", t, alpha + np.abs(h), ones))
    measured = np.minimum(1.0 - h, 1.0 + h)
    if alpha <= 0 or measured.size == 0:
        checks.append(not_applicable("alpha_sharpness", gating=False))
        return checks
    worst = int(np.argmin(measured))
    room = float(measured[worst] / alpha - 1.0)
    checks.append(CheckResult("alpha_sharpness", room, float(t[worst]),
                              PASS if room >= -TOLERANCE else FAIL, gating=False))
    return checks


def _u_sq(sig: InputSignal, times: np.ndarray) -> np.ndarray:
    return np.array([sig.l2_norm_sq(float(s)) for s in times])


def iss_check(traj: Trajectory, constants: StabilityConstants,
              sig: InputSignal) -> list[CheckResult]:
    """Exponential envelopes of the ISS-type estimates at every sample.

    Gating gains are 4 (state) and 2 (Lyapunov); the literal gains 3/2, 1/2
    and the unsquared input norm are logged as non-gating entries.
    """
    t = traj.column("t")
    if t.size == 0:
        return [not_applicable("energy_decay")]
    E, V = traj.column("E"), traj.column("V_eps")
    uu = _u_sq(sig, t)
    if traj.params.K == 0:
        decay = np.exp(-K0_RATE * t)
        return [
            bound_check("velocity_decay", t, E, decay * E[0] + 4.0 * uu),
            bound_check("velocity_decay_literal", t, E, decay * E[0] + 0.5 * uu, gating=False),
            bound_check("velocity_decay_literal_unsquared", t, E,
                        16.0 * decay * E[0] + 16.0 * np.sqrt(uu), gating=False),
        ]
    if constants.eta is None:
        return [not_applicable(name, gating) for name, gating in (
            ("energy_decay", True), ("lyapunov_decay", True),
            ("energy_decay_literal", False), ("lyapunov_decay_literal", False),
            ("energy_decay_literal_unsquared", False))]
    decay = np.exp(-constants.eta * t)
    return [
        bound_check("energy_decay", t, E, 16.0 * decay * E[0] + 4.0 * uu),
        bound_check("lyapunov_decay", t, V, decay * V[0] + 2.0 * uu),
        bound_check("energy_decay_literal", t, E, 16.0 * decay * E[0] + 1.5 * uu, gating=False),
        bound_check("lyapunov_decay_literal", t, V, decay * V[0] + 1.5 * uu, gating=False),
        bound_check("energy_decay_literal_unsquared", t, E,
                    16.0 * decay * E[0] + 1.5 * np.sqrt(uu), gating=False),
    ]


def local_eiss_check(params: SystemParams, sig: InputSignal,
                     traj: Trajectory) -> list[CheckResult]:
    """Position and decay checks of the local eISS regime, ``na`` when its conditions fail."""
    try:
        alpha = local_alpha(params, sig.l2_norm())
    except NotApplicableError:
        return [not_applicable("local_eiss_position"), not_applicable("local_eiss_decay"),
                not_applicable("local_eiss_decay_literal", gating=False)]
    eta = eta_rate(params.K, alpha)
    t, h, E = traj.column("t"), traj.column("h"), traj.column("E")
    uu = _u_sq(sig, t)
    decay = np.exp(-eta * t)
    return [
        bound_check("local_eiss_position", t, np.abs(h - params.h1),
                    np.full_like(h, math.sqrt(2.0) * abs(params.h0 - params.h1))),
        bound_check("local_eiss_decay", t, E, 16.0 * decay * E[0] + 4.0 * uu),
        bound_check("local_eiss_decay_literal", t, E, 16.0 * decay * E[0] + 1.5 * uu,
                    gating=False),
    ]


def fit_decay_rate(traj: Trajectory) -> DecayFit:
    """Least-squares decay rate of ln E over the u = 0 tail of the run.

    Raises
    - NotApplicableError: the input never vanishes identically.
    - InsufficientDataError: fewer than 4 samples above 1e-12 E(0).
    """
    tail = traj.signal.zero_after
    if not math.isfinite(tail):
        raise NotApplicableError("decay fit needs an input that vanishes after some time")
    if not traj.samples:
        raise InsufficientDataError("trajectory has no samples")
    floor = 1e-12 * traj.samples[0].E
    usable = list(filter_above_floor(filter_since(traj.samples, tail), "E", floor))
    if len(usable) < 4:
        raise InsufficientDataError(f"only {len(usable)} usable samples for the decay fit")
    t = np.array([s.t for s in usable])
    logE = np.log([s.E for s in usable])
    (slope, intercept), res, *_ = np.polyfit(t, logE, 1, full=True)
    residual = math.sqrt(float(res[0]) / len(t)) if len(res) else 0.0
    return DecayFit(float(-slope), (float(t[0]), float(t[-1])), residual)


def rate_check(traj: Trajectory, constants: StabilityConstants) -> tuple[DecayFit | None, CheckResult]:
    """Fitted decay rate against the certified rate (eta, or 1/4 for K = 0)."""
    gating = traj.params.K > 0
    if constants.eta is None:
        return None, not_applicable("rate_certificate", gating)
    try:
        fit = fit_decay_rate(traj)
    except (NotApplicableError, InsufficientDataError):
        return None, not_applicable("rate_certificate", gating)
    margin = fit.rate - constants.eta
    status = PASS if margin >= 0 else FAIL
    return fit, CheckResult("rate_certificate", margin, fit.window[1], status, gating)


def identity_checks(traj: Trajectory, tolerance: float) -> list[CheckResult]:
    """Energy and log-mass residuals against a resolution-dependent tolerance (non-gating)."""
    t = traj.column("t")
    checks = []
    for name, residual in (("energy_identity", energy_residual(traj)),
                           ("energy_identity_factor1", energy_residual(traj, 1.0)),
                           ("logmass_identity", logmass_residual(traj))):
        checks.append(bound_check(name, t, np.abs(residual), np.full_like(t, tolerance),
                                  gating=False, tol=0.0))
    return checks


def build_report(traj: Trajectory, constants: StabilityConstants, sig: InputSignal,
                 local: bool = False, identity_tol: float | None = None) -> StabilityReport:
    """Run every applicable check on a trajectory."""
    checks = [termination_check(traj)]
    checks += pointwise_checks(traj)
    checks += confinement_checks(traj, constants)
    checks += iss_check(traj, constants, sig)
    fit, rate = rate_check(traj, constants)
    checks.append(rate)
    if local:
        checks += local_eiss_check(traj.params, sig, traj)
    if identity_tol is not None:
        checks += identity_checks(traj, identity_tol)
    meta = {"termination": traj.termination, "message": traj.message,
            "samples": len(traj.samples)}
    return StabilityReport(constants, checks, fit, meta)
