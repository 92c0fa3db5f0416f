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

""" Tests for variational problems and their losses. """

# isort: STDLIB
import math
import unittest

# isort: THIRDPARTY
import numpy as np

# isort: LOCAL
from doubleritz import (
    Adam,
    AdamConfig,
    AdamState,
    BoundaryMasks,
    Combination,
    DegenerateTestError,
    FormulationKinds,
    Functionals,
    LossTags,
    MaskedNetwork,
    Metrics,
    NetworkSpec,
    Norms,
    Problems,
    Quadrature,
    RitzUnsupportedError,
    RitzValueError,
    SamplingPlan,
    TrialTestPair,
    VariationalProblem,
)

_UNIFORM = Quadrature.sample_batch(SamplingPlan.uniform(10000), 0)


def _constant_test(height=1.0):
    """
    A test network whose raw output is ``height`` everywhere, so that the
    masked test function is height * x (1 - x).
    """
    spec = NetworkSpec(1, (1,), "linear")
    params = spec.zeros()
    params.block(1, "bias")[...] = [1.0]
    params.block(2, "weight")[...] = [[height]]
    return MaskedNetwork(spec, params, BoundaryMasks.INTERVAL)


def _pass_through(trial):
    spec = NetworkSpec(2, (1,), "linear")
    params = spec.zeros()
    params.block(1, "weight")[...] = [[0.0, 1.0]]
    params.block(2, "weight")[...] = [[1.0]]
    return TrialTestPair(trial, spec, params)


class NormalizedResidualTestCase(unittest.TestCase):
    """Tests for the normalized residual."""

    def setUp(self):
        self.instance = Problems.poisson_weak_smooth()
        spec = NetworkSpec(1, (20, 20))
        self.zero_trial = MaskedNetwork(spec, spec.zeros(), BoundaryMasks.INTERVAL)

    def test_value(self):
        """
        With u = 0 and v = x (1 - x) the residual is -l(v) / |v| = sqrt(1/3).
        """
        loss = Functionals.loss_wan(
            self.instance.problem, self.zero_trial, _constant_test(), _UNIFORM
        )
        self.assertEqual(loss.tag, LossTags.NORMALIZED_RESIDUAL)
        self.assertLess(abs(loss.value - math.sqrt(1.0 / 3.0)), 1e-4)

    def test_scale_invariant(self):
        """
        Scaling v does not change the normalized residual.
        """
        spec = NetworkSpec(1, (5,))
        trial = MaskedNetwork(spec, spec.initialize(0), BoundaryMasks.INTERVAL)
        problem = self.instance.problem
        first = Functionals.loss_wan(problem, trial, _constant_test(), _UNIFORM)
        second = Functionals.loss_wan(problem, trial, _constant_test(5.0), _UNIFORM)
        self.assertAlmostEqual(first.value, second.value, places=12)

    def test_degenerate(self):
        """
        A vanishing test function cannot normalize the residual.
        """
        with self.assertRaises(DegenerateTestError):
            Functionals.loss_wan(
                self.instance.problem, self.zero_trial, self.zero_trial, _UNIFORM
            )

    def test_exact_solution(self):
        """
        The residual of the exact solution vanishes for every test function.
        """
        spec = NetworkSpec(1, (6,))
        names = (
            "poisson_weak_smooth",
            "poisson_weak_delta",
            "convection_ultraweak",
            "poisson_strong",
        )
        instances = [Problems.lookup(name) for name in names]
        instances.append(Problems.poisson_weak_alpha(2.0))
        instances.append(Problems.poisson_ultraweak())
        for instance in instances:
            batch = Metrics.evaluation_batch(instance, 0)
            test = MaskedNetwork(spec, spec.initialize(5), instance.test_mask)
            loss = Functionals.loss_wan(
                instance.problem, instance.problem.exact_u, test, batch
            )
            self.assertLess(abs(loss.value), 1e-3, msg=instance.label)

    def test_exact_solution_plane(self):
        """
        The strong residual of the plane problem vanishes pointwise.
        """
        instance = Problems.convection2d_strong()
        spec = NetworkSpec(2, (6,))
        test = MaskedNetwork(spec, spec.initialize(5), instance.test_mask)
        batch = Quadrature.sample_batch(instance.plan, 0)
        loss = Functionals.loss_wan(instance.problem, instance.problem.exact_u, test, batch)
        self.assertLess(abs(loss.value), 1e-10)

    def test_exact_solution_many_tests(self):
        """
        b(u*, v) = l(v) for 50 random test networks of the convection problem.
        """
        instance = Problems.convection_ultraweak()
        problem = instance.problem
        batch = Metrics.evaluation_batch(instance, 0)
        spec = NetworkSpec(1, (6,))
        for seed in range(50):
            test = MaskedNetwork(spec, spec.initialize(seed), instance.test_mask)
            loss = Functionals.loss_wan(problem, problem.exact_u, test, batch)
            residual = loss.value * Metrics.norm(test, problem.test_norm, batch)
            self.assertLess(abs(residual), 5e-3, msg=f"seed {seed}")

    def test_flux_form(self):
        """
        Against its own flux the exact solution has residual zero up to
        rounding.
        """
        instance = Problems.poisson_weak_delta()
        spec = NetworkSpec(1, (6,))
        test = MaskedNetwork(spec, spec.initialize(5), instance.test_mask)
        problem = instance.problem.flux_form()
        loss = Functionals.loss_wan(problem, problem.exact_u, test, _UNIFORM)
        self.assertLess(abs(loss.value), 1e-12)


class RitzTestCase(unittest.TestCase):
    """Tests for the Ritz losses."""

    def test_smooth_optimum(self):
        """
        The Ritz loss of x (x - 1) is -1/6.
        """
        instance = Problems.poisson_weak_smooth()
        loss = Functionals.loss_ritz_T(instance.problem, instance.problem.exact_u, _UNIFORM)
        self.assertEqual(loss.tag, LossTags.RITZ_TRIAL_TO_TEST)
        self.assertLess(abs(loss.value + 1.0 / 6.0), 1e-3)
        self.assertAlmostEqual(instance.optimum, -1.0 / 6.0)

    def test_point_load_optimum(self):
        """
        The Ritz loss of the hat function is 2 - 4 u(1/2) = -2.
        """
        instance = Problems.poisson_weak_delta()
        loss = Functionals.loss_ritz_T(instance.problem, instance.problem.exact_u, _UNIFORM)
        self.assertAlmostEqual(loss.value, -2.0, places=10)

    def test_gradient(self):
        """
        The loss gradient has one entry per parameter and is nonzero.
        """
        instance = Problems.poisson_weak_smooth()
        spec = NetworkSpec(1, (5,))
        trial = MaskedNetwork(spec, spec.initialize(0), instance.trial_mask)
        loss = Functionals.loss_ritz_T(instance.problem, trial, _UNIFORM)
        gradient = loss.gradient(trial.params)
        self.assertEqual(gradient.shape, (spec.parameter_count(),))
        self.assertTrue(np.any(gradient != 0.0))

    def test_unsupported(self):
        """
        Ultraweak problems have no trial-to-test map; WeakSPD ones no adjoint.
        """
        convection = Problems.convection_ultraweak()
        smooth = Problems.poisson_weak_smooth()
        spec = NetworkSpec(1, (3,))
        net = MaskedNetwork(spec, spec.initialize(0))
        with self.assertRaises(RitzUnsupportedError):
            Functionals.loss_ritz_T(convection.problem, net, _UNIFORM)
        with self.assertRaises(RitzUnsupportedError):
            Functionals.loss_adjoint_ritz(smooth.problem, net, _UNIFORM)
        with self.assertRaises(RitzUnsupportedError):
            smooth.problem.apply_adjoint(net, np.array([0.5]))
        with self.assertRaises(RitzUnsupportedError):
            Functionals.ritz_gap_check(convection.problem, net, _UNIFORM)

    def test_adjoint_optimum(self):
        """
        The adjoint Ritz loss of Tu* is 1/4 - Tu*(1/2) = -1/4.
        """
        instance = Problems.convection_ultraweak()
        loss = Functionals.loss_adjoint_ritz(
            instance.problem, instance.problem.exact_Tu, _UNIFORM
        )
        self.assertEqual(loss.tag, LossTags.RITZ_ADJOINT)
        self.assertLess(abs(loss.value + 0.25), 1e-3)
        self.assertAlmostEqual(instance.optimum, -0.25)

    def test_apply_adjoint(self):
        """
        -(Tu*)' is the step u*.
        """
        instance = Problems.convection_ultraweak()
        points = np.array([0.1, 0.3, 0.7, 0.9])
        np.testing.assert_array_equal(
            instance.problem.apply_adjoint(instance.problem.exact_Tu, points),
            [0.0, 0.0, 1.0, 1.0],
        )

    def test_gap_identity(self):
        """
        F(u) - F(u*) = 1/2 |u - u*|^2 on a batch.
        """
        instance = Problems.poisson_weak_smooth()
        batch = Quadrature.sample_batch(SamplingPlan.uniform(50), 3)
        spec = NetworkSpec(1, (7,))
        for seed in range(5):
            trial = MaskedNetwork(spec, spec.initialize(seed), instance.trial_mask)
            left, right = Functionals.ritz_gap_check(instance.problem, trial, batch)
            self.assertLess(abs(left - right), 1e-10)
        zero = MaskedNetwork(spec, spec.zeros(), instance.trial_mask)
        left, right = Functionals.ritz_gap_check(instance.problem, zero, _UNIFORM)
        self.assertLess(abs(left - right), 1e-10)
        self.assertLess(abs(right - 1.0 / 6.0), 1e-3)


class NestedRitzTestCase(unittest.TestCase):
    """Tests for the composed Ritz loss and the inner fit."""

    def setUp(self):
        self.instance = Problems.poisson_weak_smooth()
        spec = NetworkSpec(1, (6,))
        self.trial = MaskedNetwork(spec, spec.initialize(1), BoundaryMasks.INTERVAL)
        self.batch = Quadrature.sample_batch(SamplingPlan.uniform(200), 2)

    def test_pass_through(self):
        """
        If tau(x, u) = u, the composed loss is the Ritz loss and the inner
        fit is -1/2 |u|^2.
        """
        problem = self.instance.problem
        pair = _pass_through(self.trial)
        composed = Functionals.loss_ritz_tau(problem, pair, self.batch)
        ritz = Functionals.loss_ritz_T(problem, self.trial, self.batch)
        self.assertAlmostEqual(composed.value, ritz.value, places=12)
        fit = Functionals.loss_inner(problem, pair, self.batch)
        norm = Metrics.norm(self.trial, Norms.H1, self.batch)
        self.assertAlmostEqual(fit.value, -0.5 * norm**2, places=12)

    def test_shared(self):
        """
        The losses computed together equal the losses computed apart.
        """
        problem = self.instance.problem
        spec = NetworkSpec(2, (5,))
        pair = TrialTestPair(
            self.trial, spec, spec.initialize(4), self.instance.test_mask
        )
        composed, fit = Functionals.d2rm_losses(problem, pair, self.batch)
        self.assertEqual((composed.tag, fit.tag), (LossTags.RITZ_COMPOSED, LossTags.INNER_FIT))
        self.assertAlmostEqual(
            composed.value, Functionals.loss_ritz_tau(problem, pair, self.batch).value, places=12
        )
        self.assertAlmostEqual(
            fit.value, Functionals.loss_inner(problem, pair, self.batch).value, places=12
        )
        self.assertIs(composed.tape, fit.tape)
        self.assertTrue(np.any(fit.gradient(pair.tau_params) != 0.0))
        self.assertTrue(np.any(composed.gradient(self.trial.params) != 0.0))


class InnerFitTestCase(unittest.TestCase):
    """Tests for the inner fit of the convection problem at u = u*."""

    def setUp(self):
        self.instance = Problems.convection_ultraweak()
        self.spec = NetworkSpec(2, (20,))

    def _pair(self, seed):
        return TrialTestPair(
            self.instance.problem.exact_u,
            self.spec,
            self.spec.initialize(seed),
            self.instance.test_mask,
        )

    def test_minimum(self):
        """
        The inner fit is bounded below by -1/2 |Tu*|^2, with gap
        1/2 |tau(u*) - Tu*|^2.
        """
        problem = self.instance.problem
        batch = Metrics.evaluation_batch(self.instance, 0)
        bound = -0.5 * Metrics.norm(problem.exact_Tu, problem.test_norm, batch) ** 2
        self.assertLess(abs(bound + 0.25), 1e-3)
        for seed in range(10):
            pair = self._pair(seed)
            fit = Functionals.loss_inner(problem, pair, batch).value
            distance = Metrics.norm(
                Combination([(1.0, pair), (-1.0, problem.exact_Tu)]),
                problem.test_norm,
                batch,
            )
            self.assertGreaterEqual(fit, bound - 1e-12)
            self.assertAlmostEqual(fit - bound, 0.5 * distance**2, places=10)

    def test_trained(self):
        """
        Descent on the inner fit alone brings tau(u*) within 10% of Tu*.
        """
        problem = self.instance.problem
        pair = self._pair(0)
        rng = np.random.default_rng(0)
        iteration = 0
        for rate, steps in ((1e-2, 2000), (1e-3, 1000)):
            state = AdamState(pair.tau_params.size, AdamConfig(rate))
            for _ in range(steps):
                iteration += 1
                batch = Quadrature.sample_batch(
                    self.instance.plan, rng, self.instance.singular_points
                )
                fit = Functionals.loss_inner(problem, pair, batch)
                Adam.step(state, pair.tau_params, fit.gradient(pair.tau_params))
        error = Metrics.test_error(
            self.instance, pair, Metrics.evaluation_batch(self.instance, 1)
        )
        self.assertLess(error, 10.0)


class ProblemTestCase(unittest.TestCase):
    """Tests for problem construction."""

    def test_exceptions(self):
        """
        Test exceptions.
        """
        with self.assertRaises(RitzValueError):
            VariationalProblem(
                FormulationKinds.ULTRAWEAK,
                1,
                lambda u, v, nodes: u.value * v.value,
                trial_order=0,
                test_order=0,
                trial_norm=Norms.L2,
                test_norm=Norms.L2,
            )
        with self.assertRaises(RitzValueError):
            VariationalProblem(
                "Weak",
                1,
                lambda u, v, nodes: u.value * v.value,
                trial_order=0,
                test_order=0,
                trial_norm=Norms.L2,
                test_norm=Norms.L2,
            )

    def test_orders(self):
        """
        The test order covers what the test norm reads.
        """
        problem = VariationalProblem(
            FormulationKinds.WEAK_SPD,
            1,
            lambda u, v, nodes: u.value * v.value,
            trial_order=0,
            test_order=0,
            trial_norm=Norms.H1,
            test_norm=Norms.H2,
        )
        self.assertEqual(problem.test_order, 2)
        self.assertIsNotNone(problem.trial_to_test)
