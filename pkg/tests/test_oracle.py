import unittest
import numpy as np
from fpicli.domain import Grid, SineMode, SolverConfig, SystemParams
from fpicli.oracle import diffusion_limit, oracle_dt, oracle_simulate
from fpicli.signals import ZeroSignal
from fpicli.stepper import simulate


class TestLimits(unittest.TestCase):

    def test_diffusion_limit(self):
        self.assertAlmostEqual(diffusion_limit(10, 0.0), 0.002, places=15)
        self.assertAlmostEqual(diffusion_limit(10, 0.5), 5e-4, places=15)
        self.assertAlmostEqual(diffusion_limit(10, -0.5), 5e-4, places=15)

    def test_default_step_is_below_limit(self):
        for n in (10, 40, 200):
            for h0 in (-0.5, 0.0, 0.3):
                self.assertLess(oracle_dt(n, h0), diffusion_limit(n, h0))


class TestOracleRuns(unittest.TestCase):

    def test_equilibrium(self):
        params = SystemParams(K=1.0, h1=0.2, h0=0.2, g0=0.0)
        traj = oracle_simulate(params, 10, oracle_dt(10, 0.2), 0.05, ZeroSignal(), sample_stride=10)
        self.assertTrue(traj.completed)
        self.assertEqual(traj.samples[-1].t, 0.05)
        self.assertFalse(np.any(traj.column("E")))
        np.testing.assert_array_equal(traj.column("h"), 0.2)

    def test_odd_symmetry(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0, v0=SineMode(0.5, 2))
        traj = oracle_simulate(params, 20, oracle_dt(20, 0.0), 0.2, ZeroSignal())
        self.assertTrue(traj.completed)
        self.assertLess(np.max(np.abs(traj.column("h"))), 1e-10)

    def test_oversized_step(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.0, g0=0.0)
        traj = oracle_simulate(params, 10, 1.0, 2.0, ZeroSignal())
        self.assertEqual(traj.termination, "numerical-error")
        self.assertIn("step 0", traj.message)
        self.assertEqual(len(traj.samples), 1)

    def test_agrees_with_stepper(self):
        params = SystemParams(K=1.0, h1=0.3, h0=0.0, g0=0.5, v0=SineMode(0.5, 1))
        t_end = 0.2
        reference = oracle_simulate(params, 40, oracle_dt(40, 0.0), t_end, ZeroSignal())
        traj = simulate(params, Grid(40, 40), SolverConfig(dt_max=1e-4, t_end=t_end), ZeroSignal())
        self.assertTrue(reference.completed and traj.completed)
        last, ref = traj.samples[-1], reference.samples[-1]
        self.assertEqual((last.t, ref.t), (t_end, t_end))
        self.assertAlmostEqual(last.h, ref.h, delta=5e-3)
        self.assertAlmostEqual(last.g, ref.g, delta=5e-3)
        self.assertAlmostEqual(last.E, ref.E, delta=5e-3)
