import math
import unittest
import numpy as np
from fpicli.domain import GeometryError, Grid, SineMode, State, SystemParams, initial_state
from fpicli.transform import (LEFT, RIGHT, TransformedCoefficients, from_reference, jump_vy,
                              physical_integrals, to_reference, transformed_rhs)


def tent(n: int, h: float = 0.0, peak: float = 1.0) -> State:
    xi_l = np.arange(n + 1) / n - 1.0
    xi_r = np.arange(n + 1) / n
    return State(0.0, h, peak, peak * (1.0 + xi_l), peak * (1.0 - xi_r))


def sine_state(n: int, mode: int, h: float = 0.0, amplitude: float = 1.0) -> State:
    profile = SineMode(amplitude, mode)
    g0 = float(profile.evaluate(h))
    return initial_state(SystemParams(K=0.0, h1=0.0, h0=h, g0=g0, v0=profile), Grid(n, n))


class TestReferenceMaps(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(to_reference(0.3, 0.3), (LEFT, 0.0))
        self.assertEqual(to_reference(-1.0, 0.5), (LEFT, -1.0))
        self.assertEqual(to_reference(0.75, 0.5), (RIGHT, 0.5))

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        for y, h in zip(rng.uniform(-1, 1, 1000), rng.uniform(-0.99, 0.99, 1000)):
            side, xi = to_reference(y, h)
            self.assertAlmostEqual(from_reference(side, xi, h), y, delta=1e-14)

    def test_outside_domain(self):
        with self.assertRaises(GeometryError):
            to_reference(0.0, 1.0)
        with self.assertRaises(GeometryError):
            TransformedCoefficients.at(-1.2, 0.0)

    def test_mesh_velocity_vanishes_at_walls(self):
        coeffs = TransformedCoefficients.at(0.3, 2.0)
        self.assertEqual(coeffs.mesh_velocity_left(-1.0), 0.0)
        self.assertEqual(coeffs.mesh_velocity_right(1.0), 0.0)
        self.assertAlmostEqual(coeffs.mesh_velocity_left(0.0), -2.0 / 1.3)


class TestTransformedRhs(unittest.TestCase):

    def test_rest_state(self):
        state = State(0.0, 0.1, 0.0, np.zeros(11), np.zeros(11))
        dL, dR = transformed_rhs(state)
        self.assertFalse(np.any(dL))
        self.assertFalse(np.any(dR))

    def test_constant_field(self):
        state = State(0.0, 0.0, 0.0, np.full(11, 0.7), np.full(11, 0.7))
        dL, dR = transformed_rhs(state)
        self.assertFalse(np.any(dL))
        self.assertFalse(np.any(dR))

    def test_field_carried_by_the_mesh(self):
        # w = g (1 +- xi) moves with the reference nodes, so only round-off remains
        dL, dR = transformed_rhs(tent(10, h=0.3, peak=0.8))
        np.testing.assert_allclose(dL, 0.0, atol=1e-12)
        np.testing.assert_allclose(dR, 0.0, atol=1e-12)

    def test_matches_analytic_derivatives(self):
        n = 400
        state = sine_state(n, 2)
        dL, dR = transformed_rhs(state)
        xi_l = np.arange(1, n) / n - 1.0
        xi_r = np.arange(1, n) / n
        for xi, computed in ((xi_l, dL), (xi_r, dR)):
            v = np.sin(np.pi * (xi + 1.0))
            v_y = np.pi * np.cos(np.pi * (xi + 1.0))
            v_yy = -np.pi ** 2 * v
            np.testing.assert_allclose(computed, v_yy - v * v_y, atol=1e-3)

    def test_guard(self):
        state = State(0.0, 0.9995, 0.0, np.zeros(5), np.zeros(5))
        with self.assertRaises(GeometryError):
            transformed_rhs(state, guard=1e-3)


class TestJump(unittest.TestCase):

    def test_zero_state(self):
        self.assertEqual(jump_vy(State(0.0, 0.0, 0.0, np.zeros(9), np.zeros(9))), 0.0)

    def test_odd_state(self):
        self.assertAlmostEqual(jump_vy(sine_state(50, 2)), 0.0, places=9)

    def test_linear_data_is_exact(self):
        self.assertAlmostEqual(jump_vy(tent(10)), -2.0, places=12)
        # v = (y+1)/1.5 on the left, (1-y)/0.5 on the right of h = 0.5
        self.assertAlmostEqual(jump_vy(tent(10, h=0.5)), -2.0 - 2.0 / 3.0, places=12)

    def test_second_order_on_smooth_state(self):
        # smooth profile: the exact jump is zero
        errors = [abs(jump_vy(sine_state(n, 1, h=0.2))) for n in (160, 320)]
        self.assertGreater(math.log2(errors[0] / errors[1]), 1.9)


class TestPhysicalIntegrals(unittest.TestCase):

    def test_zero_state(self):
        ints = physical_integrals(State(0.0, 0.2, 0.0, np.zeros(9), np.zeros(9)))
        self.assertEqual((ints.l2_v, ints.diss), (0.0, 0.0))

    def test_tent(self):
        ints = physical_integrals(tent(8))
        self.assertAlmostEqual(ints.l2_v, 2.0 / 3.0, places=12)
        self.assertAlmostEqual(ints.diss, 2.0, places=12)
        self.assertAlmostEqual(ints.diss_left, 1.0, places=12)

    def test_sine_mode(self):
        ints = physical_integrals(sine_state(200, 1))
        self.assertAlmostEqual(ints.l2_v, 1.0, delta=1e-3)
        self.assertAlmostEqual(ints.diss, math.pi ** 2 / 4.0, delta=1e-3)

    def test_poincare_on_random_states(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            h = rng.uniform(-0.9, 0.9)
            g = rng.normal()
            wL = np.concatenate(([0.0], rng.normal(size=15), [g]))
            wR = np.concatenate(([g], rng.normal(size=11), [0.0]))
            ints = physical_integrals(State(0.0, h, g, wL, wR))
            self.assertGreaterEqual(ints.diss * (1 + 1e-12), math.pi ** 2 / 4.0 * ints.l2_v)
            self.assertLessEqual(g ** 2, 2.0 * ints.diss * (1 + 1e-12))
