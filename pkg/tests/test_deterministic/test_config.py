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

""" Tests for experiment files. """

# isort: STDLIB
import unittest

# isort: LOCAL
from doubleritz import (
    AdamConfig,
    ExperimentConfig,
    Experiments,
    NetworkConfig,
    Problems,
    RitzValueError,
    SamplingPlan,
)


class ExperimentConfigTestCase(unittest.TestCase):
    """Tests for experiment configurations."""

    def test_round_trip(self):
        """
        Serializing a parsed document reproduces it exactly.
        """
        for problem, method, alpha in (
            ("poisson_weak_smooth", "drm", None),
            ("poisson_weak_alpha", "d2rm", 0.7),
            ("convection2d_strong", "d2rm", None),
            ("convection_ultraweak", "adjoint_drm", None),
        ):
            text = Experiments.default_config(problem, method, alpha, "out").dumps()
            config = ExperimentConfig.loads(text)
            self.assertEqual(config.dumps(), text)
            self.assertEqual(config.alpha, alpha)
            self.assertEqual(config.plan, Problems.lookup(problem, alpha).plan)

    def test_values(self):
        """
        Values survive a round trip.
        """
        config = ExperimentConfig(
            "poisson_weak_smooth",
            "wan",
            SamplingPlan.uniform(30),
            output="somewhere",
            outer_iters=7,
            inner_per_outer=2,
            trial_adam=AdamConfig(0.01),
            test_adam=AdamConfig(0.02),
            trial_network=NetworkConfig((3, 4), "sin"),
        )
        parsed = ExperimentConfig.loads(config.dumps())
        self.assertIsNone(parsed.alpha)
        self.assertEqual(parsed.output, "somewhere")
        self.assertEqual((parsed.outer_iters, parsed.inner_per_outer), (7, 2))
        self.assertEqual(parsed.trial_adam.learning_rate, 0.01)
        self.assertEqual(parsed.test_adam.learning_rate, 0.02)
        self.assertEqual(parsed.trial_network.widths, (3, 4))
        self.assertEqual(parsed.trial_network.activation, "sin")
        self.assertEqual(parsed.test_network.widths, (20, 20))
        self.assertEqual(parsed.plan, SamplingPlan.uniform(30))

    def test_sampling(self):
        """
        Reflected components are written with a flag.
        """
        text = Experiments.default_config("poisson_weak_alpha", "drm", 0.6).dumps()
        self.assertIn("axis_1 = 100:1.0:1.0 + 100:10000.0:1.0:reflect", text)

    def test_malformed(self):
        """
        Malformed documents are refused.
        """
        text = Experiments.default_config("poisson_weak_smooth", "drm").dumps()
        for old, new in (
            ("200:1.0:1.0", "200:1.0"),
            ("200:1.0:1.0", "200:1.0:1.0:mirrored"),
            ("200:1.0:1.0", "many:1.0:1.0"),
            ("method = drm", "method = galerkin"),
            ("outer_iters = 2000", "outer_iters = -1"),
            ("outer_iters = 2000", "outer_iters = lots"),
            ("[seeds]", "[seed]"),
            ("trial_rate = 0.001", "trial_rate = -0.001"),
            ("trial_rate = 0.001", "trial_rate = nan"),
        ):
            broken = text.replace(old, new)
            self.assertNotEqual(broken, text, old)
            with self.assertRaises(RitzValueError):
                ExperimentConfig.loads(broken)
        with self.assertRaises(RitzValueError):
            ExperimentConfig.loads("not a config")
        frozen = ExperimentConfig.loads(
            text.replace("trial_rate = 0.001", "trial_rate = 0.0")
        )
        self.assertEqual(frozen.trial_adam.learning_rate, 0.0)
