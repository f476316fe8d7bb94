import math
import unittest
import numpy as np
from fpicli.diagnostics import SampleRecord, Trajectory
from fpicli.domain import (DomainError, Grid, InsufficientDataError, NotApplicableError,
                           SolverConfig, SystemParams)
from fpicli.signals import ExpDecay, PowerTail, RectPulse, ZeroSignal
from fpicli.stability import (FAIL, NA, PASS, alpha_bound, bound_check, build_report,
                              c_global, compute_constants, confinement_envelope, epsilon_choice,
                              eta_rate, fit_decay_rate, in_eps_window, local_alpha,
                              termination_check)
from fpicli.stepper import simulate


def decaying(times, values, sig=None) -> Trajectory:
    params = SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0)
    samples = [SampleRecord(t, *([0.0] * 2), E, *([0.0] * 11)) for t, E in zip(times, values)]
    return Trajectory(params, None, sig or ZeroSignal(), samples)


class TestConstants(unittest.TestCase):

    def test_c_global(self):
        self.assertEqual(c_global(SystemParams(K=0.0, h1=0.0, h0=0.0, g0=1.0), 0.0), 20.0)
        self.assertEqual(c_global(SystemParams(K=0.0, h1=0.0, h0=0.0, g0=2.0), 0.0), 60.0)
        self.assertEqual(c_global(SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0), 0.0), 0.0)

    def test_envelope_for_zero_data(self):
        c1, c2 = confinement_envelope(0.0, SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0), 0.0)
        self.assertAlmostEqual(c1, 2.0 / 3.0, places=15)
        self.assertAlmostEqual(c2, 2.0 / 3.0, places=15)

    def test_envelope_shrinks_with_time_and_underflows(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.3, g0=1.0)
        gaps = [confinement_envelope(t, params, 0.0)[0] for t in (0.0, 1.0, 10.0)]
        self.assertEqual(gaps, sorted(gaps, reverse=True))
        self.assertEqual(confinement_envelope(1e6, params, 0.0), (0.0, 0.0))

    def test_alpha(self):
        self.assertEqual(alpha_bound(SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0), 0.0, 0.0), 1.0)
        self.assertAlmostEqual(
            alpha_bound(SystemParams(K=0.0, h1=0.5, h0=0.0, g0=0.0), 0.0, 0.0), 0.5, places=15)
        with self.assertRaises(NotApplicableError):
            alpha_bound(SystemParams(K=1.0, h1=0.0, h0=0.0, g0=0.0), 1.0, math.inf)

    def test_alpha_decreases_with_data(self):
        values = [alpha_bound(SystemParams(K=1.0, h1=0.1, h0=-0.2, g0=g0), 0.0, 0.0)
                  for g0 in (0.0, 0.5, 1.0, 2.0)]
        self.assertEqual(values, sorted(values, reverse=True))
        self.assertGreater(values[-1], 0.0)

    def test_eps_and_eta(self):
        self.assertAlmostEqual(epsilon_choice(1.0, 1.0), 1.0 / 576.0, places=15)
        self.assertAlmostEqual(eta_rate(1.0, 1.0), 1.0 / 3072.0, places=15)
        self.assertAlmostEqual(epsilon_choice(8.0, 1.0), 1.0 / 548.0, places=15)
        for K in (1e-3, 0.1, 1.0, 100.0):
            for alpha in (1e-3, 0.5, 1.0):
                eps = epsilon_choice(K, alpha)
                self.assertLessEqual(eps, min(0.125, K / 8.0))
                self.assertLessEqual(eta_rate(K, alpha), 1.0 / 136.0)
        with self.assertRaises(NotApplicableError):
            epsilon_choice(0.0, 1.0)

    def test_eps_window(self):
        self.assertTrue(in_eps_window(1.0, 0.125))
        self.assertTrue(in_eps_window(0.5, 0.0625))
        self.assertFalse(in_eps_window(0.5, 0.07))
        self.assertFalse(in_eps_window(0.5, 3.0))
        self.assertFalse(in_eps_window(1.0, -1e-3))
        with self.assertRaises(DomainError):
            epsilon_choice(1.0, 1.5)

    def test_vanishing_alpha(self):
        self.assertEqual(epsilon_choice(1.0, 0.0), 0.0)
        self.assertEqual(eta_rate(1.0, 0.0), 0.0)

    def test_local_alpha(self):
        self.assertEqual(local_alpha(SystemParams(K=1.0, h1=0.0, h0=0.1, g0=0.0), 0.0), 0.5)
        with self.assertRaises(NotApplicableError):
            local_alpha(SystemParams(K=1.0, h1=0.0, h0=0.1, g0=1.0), 0.0)
        with self.assertRaises(NotApplicableError):
            local_alpha(SystemParams(K=1.0, h1=0.0, h0=0.0, g0=0.0), 0.0)
        with self.assertRaises(NotApplicableError):
            local_alpha(SystemParams(K=1.0, h1=0.0, h0=0.5, g0=0.0), 0.0)

    def test_compute_constants(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.0, g0=0.0)
        constants = compute_constants(params, ZeroSignal())
        self.assertEqual(constants.alpha, 1.0)
        self.assertAlmostEqual(constants.eps, 1.0 / 576.0, places=15)
        self.assertIsNone(constants.alpha_local)
        tail = compute_constants(params, PowerTail(0.1, 0.75))
        self.assertIsNone(tail.alpha)
        self.assertIsNone(tail.eta)
        self.assertEqual(tail.eps, 0.0)
        self.assertEqual(compute_constants(params, ZeroSignal(), 0.01).eps, 0.01)
        free = compute_constants(SystemParams(K=0.0, h1=0.0, h0=0.0, g0=1.0), ZeroSignal())
        self.assertEqual((free.eps, free.eta), (0.0, 0.25))


class TestChecks(unittest.TestCase):

    def test_bound_check(self):
        check = bound_check("x", [0.0, 1.0], [1.0, 2.0], [2.0, 2.0])
        self.assertEqual((check.status, check.margin, check.time), (PASS, 0.0, 1.0))
        check = bound_check("x", [0.0, 1.0], [1.0, 3.0], [2.0, 2.0])
        self.assertEqual((check.status, check.margin, check.time), (FAIL, -1.0, 1.0))
        self.assertEqual(bound_check("x", [], [], []).status, NA)
        self.assertEqual(bound_check("x", [0.0], [math.nan], [1.0]).status, NA)

    def test_relative_tolerance(self):
        self.assertEqual(bound_check("x", [0.0], [1.0 + 1e-12], [1.0]).status, PASS)
        self.assertEqual(bound_check("x", [0.0], [1.0 + 1e-12], [1.0], tol=0.0).status, FAIL)

    def test_termination(self):
        traj = decaying([0.0], [1.0])
        self.assertEqual(termination_check(traj).status, PASS)
        traj.termination = "wall-proximity"
        self.assertEqual(termination_check(traj).status, FAIL)
        traj.signal = PowerTail(1.0, 0.75)
        self.assertEqual(termination_check(traj).status, NA)
        traj.termination = "numerical-error"
        self.assertEqual(termination_check(traj).status, FAIL)


class TestDecayFit(unittest.TestCase):

    def test_exponential(self):
        t = np.linspace(0.0, 5.0, 51)
        fit = fit_decay_rate(decaying(t, np.exp(-2.0 * t)))
        self.assertAlmostEqual(fit.rate, 2.0, places=9)
        self.assertEqual(fit.window, (0.0, 5.0))
        self.assertAlmostEqual(fit.residual, 0.0, places=9)

    def test_fit_starts_after_the_input(self):
        t = np.linspace(0.0, 5.0, 51)
        E = np.where(t < 1.0, 1.0, np.exp(-3.0 * (t - 1.0)))
        fit = fit_decay_rate(decaying(t, E, RectPulse(1.0, 0.0, 1.0)))
        self.assertAlmostEqual(fit.rate, 3.0, places=9)
        self.assertEqual(fit.window[0], 1.0)

    def test_equilibrium(self):
        with self.assertRaises(InsufficientDataError):
            fit_decay_rate(decaying(np.linspace(0.0, 1.0, 11), np.zeros(11)))

    def test_input_never_vanishes(self):
        with self.assertRaises(NotApplicableError):
            fit_decay_rate(decaying([0.0, 1.0, 2.0, 3.0], [1.0, 0.5, 0.25, 0.125],
                                    ExpDecay(1.0, 1.0)))


class TestReport(unittest.TestCase):

    def test_spring_run_passes(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.2, g0=0.5)
        sig = ZeroSignal()
        traj = simulate(params, Grid(20, 20), SolverConfig(t_end=2.0), sig)
        report = build_report(traj, compute_constants(params, sig), sig)
        self.assertEqual(report.failures(), [])
        self.assertTrue(report.passed)
        statuses = {c.name: c.status for c in report.checks}
        self.assertEqual(statuses["termination"], PASS)
        self.assertEqual(statuses["energy_decay"], PASS)
        self.assertEqual(statuses["norm_equiv_lower"], PASS)
        self.assertNotIn("local_eiss_position", statuses)
        self.assertGreater(report.fit.rate, report.constants.eta)

    def test_particle_at_rest_is_exactly_alpha_from_the_wall(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.2, g0=0.0)
        sig = ZeroSignal()
        traj = simulate(params, Grid(10, 10), SolverConfig(dt_max=0.01, t_end=0.5), sig)
        constants = compute_constants(params, sig)
        self.assertAlmostEqual(constants.alpha, 0.8, places=15)
        np.testing.assert_array_equal(traj.column("h"), 0.2)
        report = build_report(traj, constants, sig)
        statuses = {c.name: c.status for c in report.checks}
        self.assertEqual(statuses["confinement_alpha"], PASS)
        self.assertEqual(statuses["confinement_envelope"], PASS)
        self.assertEqual(statuses["alpha_sharpness"], PASS)
        self.assertTrue(report.passed)

    def test_norm_equivalence_only_inside_eps_window(self):
        params = SystemParams(K=0.5, h1=0.0, h0=0.2, g0=0.3)
        sig = ZeroSignal()
        for eps, expected in ((3.0, NA), (0.01, PASS)):
            traj = simulate(params, Grid(10, 10),
                            SolverConfig(dt_max=0.01, t_end=0.5, eps_override=eps), sig)
            self.assertEqual(traj.eps, eps)
            report = build_report(traj, compute_constants(params, sig, eps), sig)
            statuses = {c.name: c.status for c in report.checks}
            self.assertEqual(statuses["norm_equiv_lower"], expected)
            self.assertEqual(statuses["norm_equiv_upper"], expected)

    def test_non_l1_input_has_no_alpha_checks(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.0, g0=0.0)
        sig = PowerTail(0.1, 0.75)
        traj = simulate(params, Grid(10, 10), SolverConfig(t_end=0.2), sig)
        report = build_report(traj, compute_constants(params, sig), sig)
        statuses = {c.name: c.status for c in report.checks}
        self.assertEqual(statuses["confinement_alpha"], NA)
        self.assertEqual(statuses["confinement_envelope"], PASS)
        self.assertEqual(statuses["energy_decay"], NA)
        self.assertTrue(report.passed)
