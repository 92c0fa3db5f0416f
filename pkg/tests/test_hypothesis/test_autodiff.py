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

""" Property tests for network differentiation. """

# isort: STDLIB
import unittest
from os import sys

# isort: THIRDPARTY
import numpy as np
from hypothesis import given, settings, strategies

# isort: LOCAL
from doubleritz import (
    BoundaryMasks,
    Functionals,
    Gradients,
    MaskedNetwork,
    Networks,
    Problems,
    Quadrature,
    SamplingPlan,
    Tape,
)

# isort considers this third party, but it is not
from tests.test_hypothesis._utils import build_seed, build_spec  # isort:skip

if sys.gettrace() is not None:
    settings.load_profile("tracing")

_SMOOTH = Problems.poisson_weak_smooth()
_BATCH = Quadrature.sample_batch(SamplingPlan.uniform(40), 0)


class GradientTestCase(unittest.TestCase):
    """Tests for parameter gradients of arbitrary networks."""

    @given(build_spec(), build_seed())
    def test_directional(self, spec, seed):
        """
        Tape gradients agree with central differences.
        """

        def build(tape, params):
            trial = MaskedNetwork(spec, params, BoundaryMasks.INTERVAL)
            return Functionals.loss_ritz_T(_SMOOTH.problem, trial, _BATCH, tape).node

        self.assertLess(Gradients.directional_check(spec.initialize(seed), build), 1e-4)

    @given(build_spec(), build_seed(), strategies.floats(min_value=-4.0, max_value=4.0))
    def test_scaling(self, spec, seed, scale):
        """
        Scaling a loss scales its gradient.
        """
        params = spec.initialize(seed)
        trial = MaskedNetwork(spec, params, BoundaryMasks.INTERVAL)
        tape = Tape()
        loss = Functionals.loss_ritz_T(_SMOOTH.problem, trial, _BATCH, tape).node
        base = tape.gradient(loss, params)
        scaled = tape.gradient(loss * scale, params)
        tolerance = 1e-10 * abs(scale) * float(np.max(np.abs(base)))
        np.testing.assert_allclose(scaled, scale * base, rtol=1e-12, atol=tolerance)


class MaskTestCase(unittest.TestCase):
    """Tests for masks on arbitrary networks."""

    @given(build_spec(), build_seed())
    def test_interval(self, spec, seed):
        """
        Interval masked networks vanish at 0 and 1.
        """
        net = MaskedNetwork(spec, spec.initialize(seed), BoundaryMasks.INTERVAL)
        jet = Networks.jet(net, np.array([0.0, 1.0]), 1)
        np.testing.assert_array_equal(jet.value, [0.0, 0.0])

    @given(build_spec(input_dim=2), build_seed(), strategies.floats(0.0, 1.0))
    def test_corner(self, spec, seed, coordinate):
        """
        Corner masked networks vanish on both inflow edges.
        """
        net = MaskedNetwork(spec, spec.initialize(seed), BoundaryMasks.CORNER)
        points = np.array([[0.0, coordinate], [coordinate, 0.0]])
        np.testing.assert_array_equal(Networks.values(net, points), [0.0, 0.0])
