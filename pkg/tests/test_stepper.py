import unittest
import numpy as np
from fpicli.domain import (GeometryError, Grid, NumericalError, SineMode, SolverConfig, State,
                           SystemParams)
from fpicli.signals import RectPulse, ZeroSignal
from fpicli.stepper import (NUMERICAL_ERROR, WALL_PROXIMITY, BorderedTridiagonalSystem, assemble,
                            simulate, stable_dt, step)


def rest(n: int, h: float = 0.0, g: float = 0.0) -> State:
    wL = np.zeros(n + 1)
    wR = np.zeros(n + 1)
    wL[-1] = wR[0] = g
    return State(0.0, h, g, wL, wR)


class TestStableDt(unittest.TestCase):

    def test_examples(self):
        cfg = SolverConfig(dt_max=0.01, cfl=0.4)
        self.assertEqual(stable_dt(rest(10), Grid(10, 10), cfg), 0.01)
        # speed counts the interface node and g: 0.4 * 0.1 * 1 / 20
        self.assertAlmostEqual(stable_dt(rest(10, g=10.0), Grid(10, 10), cfg), 0.002, places=15)
        self.assertAlmostEqual(stable_dt(rest(10, h=0.99, g=10.0), Grid(10, 10), cfg), 2e-5, places=15)

    def test_guard(self):
        with self.assertRaises(GeometryError):
            stable_dt(rest(10, h=0.9995), Grid(10, 10), SolverConfig())


class TestBorderedSystem(unittest.TestCase):

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(11)
        n, m = 9, 4
        system = BorderedTridiagonalSystem(
            sub=rng.uniform(-1, 0, n - 1), diag=rng.uniform(4, 5, n), sup=rng.uniform(-1, 0, n - 1),
            m=m, far_left=0.3, far_right=-0.2)
        dense = np.diag(system.diag) + np.diag(system.sup, 1) + np.diag(system.sub, -1)
        dense[m, m - 2] = 0.3
        dense[m, m + 2] = -0.2
        b = rng.normal(size=n)
        np.testing.assert_allclose(system.solve(b), np.linalg.solve(dense, b), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(system.matvec(b), dense @ b, rtol=1e-14, atol=1e-14)

    def test_zero_diagonal(self):
        system = BorderedTridiagonalSystem(np.ones(4), np.array([1.0, 1.0, 0.0, 1.0, 1.0]),
                                           np.ones(4), 2, 0.0, 0.0)
        with self.assertRaises(NumericalError):
            system.solve(np.ones(5))

    def test_assembled_interface_row(self):
        system, rhs = assemble(rest(4, g=1.0), 0.1, 0.0, SystemParams(K=0.0, h1=0.0, h0=0.0, g0=1.0), 0.0)
        # cl = cr = dt / dxi = 0.4
        self.assertAlmostEqual(system.diag[3], 1.0 + 1.5 * 0.4 + 1.5 * 0.4, places=15)
        self.assertAlmostEqual(system.sub[2], -0.8, places=15)
        self.assertAlmostEqual(system.sup[3], -0.8, places=15)
        self.assertAlmostEqual(system.far_left, 0.2, places=15)
        self.assertEqual(rhs[3], 1.0)


class TestStep(unittest.TestCase):

    def test_equilibrium_is_fixed(self):
        params = SystemParams(K=2.0, h1=0.3, h0=0.3, g0=0.0)
        state = step(rest(8, h=0.3), 0.01, 0.0, params)
        self.assertEqual(state.h, 0.3)
        self.assertEqual(state.g, 0.0)
        self.assertFalse(np.any(state.wL) or np.any(state.wR))
        self.assertEqual(state.t, 0.01)

    def test_spring_pulls_towards_target(self):
        params = SystemParams(K=2.0, h1=0.0, h0=0.3, g0=0.0)
        state = step(rest(8, h=0.3), 0.01, 0.0, params)
        self.assertLess(state.g, 0.0)
        self.assertEqual(state.wL[-1], state.g)
        self.assertEqual(state.wR[0], state.g)
        self.assertEqual((state.wL[0], state.wR[-1]), (0.0, 0.0))

    def test_input_pushes(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0)
        self.assertGreater(step(rest(8), 0.01, 1.0, params).g, 0.0)

    def test_rejects_bad_step(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0)
        with self.assertRaises(NumericalError):
            step(rest(8), 0.0, 0.0, params)
        with self.assertRaises(GeometryError):
            step(rest(8, h=0.99, g=10.0), 0.01, 0.0, params, guard=1e-3)


class TestSimulate(unittest.TestCase):

    def test_equilibrium_run(self):
        params = SystemParams(K=1.0, h1=-0.4, h0=-0.4, g0=0.0)
        traj = simulate(params, Grid(8, 8), SolverConfig(dt_max=0.01, t_end=0.5, sample_stride=5),
                        ZeroSignal())
        self.assertTrue(traj.completed)
        self.assertEqual(traj.samples[-1].t, 0.5)
        self.assertFalse(np.any(traj.column("E")))
        np.testing.assert_array_equal(traj.column("h"), -0.4)

    def test_odd_symmetry_keeps_particle_still(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.0, g0=0.0, v0=SineMode(0.5, 2))
        traj = simulate(params, Grid(40, 40), SolverConfig(t_end=0.5), ZeroSignal())
        self.assertTrue(traj.completed)
        self.assertLess(np.max(np.abs(traj.column("h"))), 1e-8)

    def test_energy_does_not_grow_without_input(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.2, g0=0.5, v0=SineMode(0.5, 1))
        traj = simulate(params, Grid(20, 20), SolverConfig(t_end=1.0, sample_stride=1), ZeroSignal())
        E = traj.column("E")
        self.assertTrue(np.all(np.diff(E) <= 1e-6 * E[0]))

    def test_samples_include_start_and_end(self):
        params = SystemParams(K=1.0, h1=0.0, h0=0.2, g0=0.0)
        traj = simulate(params, Grid(8, 8), SolverConfig(dt_max=0.01, t_end=0.105, sample_stride=4),
                        ZeroSignal())
        t = traj.column("t")
        self.assertEqual(t[0], 0.0)
        self.assertEqual(t[-1], 0.105)
        self.assertTrue(np.all(np.diff(t) > 0))
        self.assertFalse(np.isnan(traj.samples[-1].c1))

    def test_wall_proximity(self):
        params = SystemParams(K=0.0, h1=0.0, h0=0.8, g0=0.0)
        traj = simulate(params, Grid(20, 20),
                        SolverConfig(t_end=1.0, boundary_guard=0.05), RectPulse(50.0, 0.0, 1.0))
        self.assertEqual(traj.termination, WALL_PROXIMITY)
        self.assertIn("wall", traj.message)
        self.assertGreater(traj.samples[-1].h, 0.9)

    def test_termination_names(self):
        self.assertEqual((WALL_PROXIMITY, NUMERICAL_ERROR), ("wall-proximity", "numerical-error"))
