# Copyright (C) 2024 The doubleritz Developers
#
# This library is free software; you can redistribute it and/or
# modify it under the terms of the GNU Lesser General Public
# License as published by the Free Software Foundation; either
# version 2.1 of the License, or any later version.
#
# This library is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
# Lesser General Public License for more details.
#
# You should have received a copy of the GNU Lesser General Public
# License along with this library; If not, see <http://www.gnu.org/licenses/>.

""" Tests for networks and boundary masks. """

# isort: STDLIB
import unittest

# isort: THIRDPARTY
import numpy as np

# isort: LOCAL
from doubleritz import (
    BoundaryMasks,
    Combination,
    MaskedNetwork,
    Networks,
    NetworkSpec,
    RitzUnsupportedError,
    RitzValueError,
    Tape,
    TrialTestPair,
)


def _pass_through():
    """
    tau(x, u) = u, as a one unit linear network.
    """
    spec = NetworkSpec(2, (1,), "linear")
    params = spec.zeros()
    params.block(1, "weight")[...] = [[0.0, 1.0]]
    params.block(2, "weight")[...] = [[1.0]]
    return spec, params


class NetworkSpecTestCase(unittest.TestCase):
    """Tests for network shapes."""

    def test_parameter_count(self):
        """
        Hidden layers carry biases, the output layer does not.
        """
        spec = NetworkSpec(1, (20, 20))
        self.assertEqual(spec.parameter_count(), 480)
        self.assertEqual(spec.layer_shapes()[-1], (3, "weight", (1, 20)))

    def test_initialize(self):
        """
        Glorot uniform weights, zero biases, reproducible from the seed.
        """
        spec = NetworkSpec(2, (7, 5))
        params = spec.initialize(4)
        np.testing.assert_array_equal(params.values, spec.initialize(4).values)
        for layer, name, shape in spec.layer_shapes():
            block = params.block(layer, name)
            if name == "bias":
                np.testing.assert_array_equal(block, np.zeros(shape))
            else:
                limit = np.sqrt(6.0 / sum(shape))
                self.assertTrue(np.all(np.abs(block) <= limit))

    def test_exceptions(self):
        """
        Test exceptions.
        """
        with self.assertRaises(RitzValueError):
            NetworkSpec(1, (20,), "relu")
        with self.assertRaises(RitzValueError):
            NetworkSpec(1, ())
        with self.assertRaises(RitzValueError):
            NetworkSpec(0, (3,))
        spec = NetworkSpec(1, (3,))
        with self.assertRaises(RitzValueError):
            MaskedNetwork(spec, NetworkSpec(1, (4,)).zeros())
        with self.assertRaises(RitzValueError):
            Networks.forward_eval(spec, spec.zeros(), np.zeros((3, 2)), 0)


class MaskTestCase(unittest.TestCase):
    """Tests for boundary masks."""

    def test_interval(self):
        """
        The interval mask vanishes at both ends.
        """
        spec = NetworkSpec(1, (5,))
        net = MaskedNetwork(spec, spec.initialize(0), BoundaryMasks.INTERVAL)
        np.testing.assert_array_equal(Networks.values(net, [0.0, 1.0]), [0.0, 0.0])

    def test_outflow(self):
        """
        The outflow mask vanishes at 1 only.
        """
        spec = NetworkSpec(1, (5,))
        params = spec.initialize(0)
        params.values += 0.1
        net = MaskedNetwork(spec, params, BoundaryMasks.OUTFLOW)
        self.assertEqual(Networks.values(net, [1.0])[0], 0.0)

    def test_corner(self):
        """
        The corner mask vanishes on both inflow edges.
        """
        spec = NetworkSpec(2, (5,))
        net = MaskedNetwork(spec, spec.initialize(0), BoundaryMasks.CORNER)
        edge = np.linspace(0.0, 1.0, 5)
        points = np.vstack(
            [np.column_stack([np.zeros(5), edge]), np.column_stack([edge, np.zeros(5)])]
        )
        np.testing.assert_array_equal(Networks.values(net, points), np.zeros(10))

    def test_masked_derivative(self):
        """
        The product rule through the mask agrees with central differences.
        """
        spec = NetworkSpec(1, (8,))
        net = MaskedNetwork(spec, spec.initialize(2), BoundaryMasks.INTERVAL)
        x = np.linspace(0.1, 0.9, 5)
        step = 1e-4
        jet = Networks.jet(net, x, 1)
        estimate = (
            Networks.values(net, x + step) - Networks.values(net, x - step)
        ) / (2.0 * step)
        np.testing.assert_allclose(jet.gradient[:, 0], estimate, atol=1e-6)
        self.assertIsNone(jet.second)


class CompositionTestCase(unittest.TestCase):
    """Tests for the composed test network."""

    def test_pass_through(self):
        """
        If tau(x, u) = u, the composition is the trial network.
        """
        spec = NetworkSpec(1, (6,))
        trial = MaskedNetwork(spec, spec.initialize(3), BoundaryMasks.INTERVAL)
        tau_spec, tau_params = _pass_through()
        pair = TrialTestPair(trial, tau_spec, tau_params)
        x = np.linspace(0.05, 0.95, 11)
        composed = Networks.jet(pair, x, 2)
        direct = Networks.jet(trial, x, 2)
        np.testing.assert_allclose(composed.value, direct.value, rtol=1e-14, atol=1e-16)
        np.testing.assert_allclose(
            composed.gradient, direct.gradient, rtol=1e-14, atol=1e-16
        )
        np.testing.assert_allclose(composed.second, direct.second, rtol=1e-14, atol=1e-16)

    def test_shared_tape(self):
        """
        One tape records the trial and the composition; tau's gradient is
        available from it.
        """
        spec = NetworkSpec(1, (4,))
        trial = MaskedNetwork(spec, spec.initialize(0))
        tau_spec = NetworkSpec(2, (4,))
        pair = TrialTestPair(trial, tau_spec, tau_spec.initialize(1))
        tape = Tape()
        dual = Networks.eval_test_composition(pair, np.linspace(0, 1, 5), 1, tape)
        gradient = tape.gradient(dual.value, pair.tau_params)
        self.assertEqual(gradient.shape, (tau_spec.parameter_count(),))
        self.assertTrue(np.any(gradient != 0.0))

    def test_input_dim(self):
        """
        tau takes the coordinates and the trial value.
        """
        spec = NetworkSpec(1, (4,))
        trial = MaskedNetwork(spec, spec.zeros())
        with self.assertRaises(RitzValueError):
            TrialTestPair(trial, spec, spec.zeros())

    def test_combination(self):
        """
        A linear combination of fields.
        """
        spec = NetworkSpec(1, (4,))
        net = MaskedNetwork(spec, spec.initialize(0))
        x = np.linspace(0, 1, 5)
        combined = Networks.values(Combination([(2.0, net), (-1.0, net)]), x)
        np.testing.assert_allclose(combined, Networks.values(net, x), atol=1e-15)

    def test_eval_order(self):
        """
        Evaluation orders above two are refused.
        """
        spec = NetworkSpec(1, (4,))
        net = MaskedNetwork(spec, spec.zeros())
        with self.assertRaises(RitzUnsupportedError):
            Networks.eval_masked(net, np.zeros(2), 3)
