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

""" Property tests for losses and error measures. """

# isort: STDLIB
import unittest
from os import sys

# isort: THIRDPARTY
from hypothesis import given, settings, strategies

# isort: LOCAL
from doubleritz import (
    Functionals,
    MaskedNetwork,
    Metrics,
    Norms,
    Problems,
    Quadrature,
    SamplingPlan,
)

# isort considers this third party, but it is not
from tests.test_hypothesis._utils import build_seed, build_spec  # isort:skip

if sys.gettrace() is not None:
    settings.load_profile("tracing")

_SMOOTH = Problems.poisson_weak_smooth()
_DELTA = Problems.poisson_weak_delta()


class EnergyTestCase(unittest.TestCase):
    """Tests for the Ritz energy of arbitrary trials."""

    @given(
        build_spec(),
        build_seed(),
        build_seed(),
        strategies.sampled_from([_SMOOTH, _DELTA]),
    )
    def test_gap_identity(self, spec, seed, batch_seed, instance):
        """
        F(u) - F(u*) = 1/2 |u - u*|^2 on every batch.
        """
        trial = MaskedNetwork(spec, spec.initialize(seed), instance.trial_mask)
        batch = Quadrature.sample_batch(SamplingPlan.uniform(50), batch_seed)
        left, right = Functionals.ritz_gap_check(instance.problem, trial, batch)
        self.assertGreaterEqual(right, 0.0)
        self.assertLess(abs(left - right), 1e-9 * max(1.0, right))

    @given(
        build_spec(),
        build_seed(),
        build_spec(),
        build_seed(),
        strategies.floats(min_value=0.1, max_value=10.0),
    )
    def test_residual_scale(self, trial_spec, trial_seed, test_spec, test_seed, scale):
        """
        The normalized residual does not depend on the size of v.
        """
        trial = MaskedNetwork(trial_spec, trial_spec.initialize(trial_seed), _SMOOTH.trial_mask)
        params = test_spec.initialize(test_seed)
        test = MaskedNetwork(test_spec, params, _SMOOTH.test_mask)
        scaled_params = params.copy()
        scaled_params.block(test_spec.depth + 1, "weight")[...] *= scale
        scaled = MaskedNetwork(test_spec, scaled_params, _SMOOTH.test_mask)
        batch = Quadrature.sample_batch(_SMOOTH.plan, 0)
        first = Functionals.loss_wan(_SMOOTH.problem, trial, test, batch).value
        second = Functionals.loss_wan(_SMOOTH.problem, trial, scaled, batch).value
        self.assertLess(abs(first - second), 1e-9 * max(1.0, abs(first)))


class ErrorTestCase(unittest.TestCase):
    """Tests for relative errors."""

    @given(strategies.floats(min_value=1e-3, max_value=2.0), strategies.booleans())
    def test_scaled_exact(self, offset, negative):
        """
        (1 + c) u* is 100 |c| percent off.
        """
        offset = -offset if negative else offset
        exact = _SMOOTH.problem.exact_u
        batch = Quadrature.sample_batch(SamplingPlan.uniform(100), 0)
        error = Metrics.relative_error(exact * (1.0 + offset), exact, Norms.H1, batch)
        self.assertLess(abs(error - 100.0 * abs(offset)), 1e-8)
