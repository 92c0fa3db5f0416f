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

"""
Relative errors, residual maximizers and the instability probe.
"""

# isort: STDLIB
import logging
import math
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._autodiff import Ops, Tape
from ._config import AdamConfig, RitzConfig
from ._constants import FormulationKinds
from ._errors import (
    DegenerateTestError,
    RitzUnsupportedError,
    RitzValueError,
    UndefinedMaximizerError,
)
from ._network import Combination, MaskedNetwork
from ._optim import Adam, AdamState
from ._problems import ClosedForm
from ._quadrature import Quadrature
from ._variational import AdjointField, Functionals, TrialToTestField

_LOGGER = logging.getLogger(__name__)

ProbeRow = namedtuple(
    "ProbeRow", ["epsilon", "trial_distance", "maximizer_distance", "ratio"]
)
TrainedProbeRow = namedtuple(
    "TrainedProbeRow",
    ["epsilon", "trial_distance", "maximizer_distance", "trained_distance"],
)


class ErrorReport:
    """
    Relative errors, in percent, of the trial and test approximations.
    """

    # pylint: disable=too-few-public-methods

    _FMT_STR = ", ".join(
        [
            "relative_u=%(relative_u)s",
            "relative_v=%(relative_v)s",
            "batch_size=%(batch_size)s",
            "seed=%(seed)s",
        ]
    )

    def __init__(self, relative_u=None, relative_v=None, *, batch_size=None, seed=None):
        """
        Initializer.

        :param relative_u: error of the trial side
        :type relative_u: float or NoneType
        :param relative_v: error of the test side
        :type relative_v: float or NoneType
        :param batch_size: nodes of the evaluation batch
        :type batch_size: int or NoneType
        :param seed: seed of the evaluation batch, if drawn from one
        :type seed: int or NoneType

        :raises RitzValueError: if an error is negative
        """
        for value, name in ((relative_u, "relative_u"), (relative_v, "relative_v")):
            if value is not None and value < 0:
                raise RitzValueError(value, name, "must be non-negative")
        self.relative_u = relative_u
        self.relative_v = relative_v
        self.batch_size = batch_size
        self.seed = seed

    def __str__(self):  # pragma: no cover
        values = {
            "relative_u": self.relative_u,
            "relative_v": self.relative_v,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }
        return f"ErrorReport({self._FMT_STR % values})"

    __repr__ = __str__


class Metrics:
    """
    Error measures, computed by quadrature on an evaluation batch.
    """

    @staticmethod
    def evaluation_batch(instance, seed):
        """
        The batch errors of ``instance`` are measured on.

        :param ProblemInstance instance: the problem
        :param seed: a seed or a generator
        :rtype: QuadBatch
        """
        return Quadrature.sample_batch(
            instance.metric_plan, seed, instance.singular_points
        )

    @staticmethod
    def norm(field, norm, batch):
        """
        The discrete norm of a field.

        :param field: anything with an ``evaluate`` method
        :param Norm norm: the norm
        :param QuadBatch batch: the batch
        :rtype: float
        """
        dual = field.evaluate(Tape(), batch.nodes, norm.order)
        squared = float(Ops.weighted_sum(norm(dual), batch.weights).value)
        return math.sqrt(max(squared, 0.0))

    @classmethod
    def relative_error(cls, field, exact, norm, batch, denominator=None):
        """
        100 ||field - exact|| / ||exact||.

        :param field: the approximation
        :param exact: the exact field
        :param Norm norm: the norm
        :param QuadBatch batch: the batch
        :param denominator: the closed form of ||exact||; computed if omitted
        :type denominator: float or NoneType
        :returns: the error in percent
        :rtype: float

        :raises RitzValueError: if the denominator vanishes
        """
        numerator = cls.norm(Combination([(1.0, field), (-1.0, exact)]), norm, batch)
        if denominator is None:
            denominator = cls.norm(exact, norm, batch)
        if not denominator > 0:
            raise RitzValueError(denominator, "denominator", "must be positive")
        return 100.0 * numerator / denominator

    @classmethod
    def trial_error(cls, instance, trial, batch):
        """
        Relative error of a trial field in the norm of U.

        :rtype: float
        """
        problem = instance.problem
        return cls.relative_error(
            trial, problem.exact_u, problem.trial_norm, batch, instance.exact_norms.u
        )

    @classmethod
    def test_error(cls, instance, test, batch):
        """
        Relative error of a test field against Tu* in the norm of V.

        :rtype: float
        """
        problem = instance.problem
        return cls.relative_error(
            test, problem.exact_Tu, problem.test_norm, batch, instance.exact_norms.Tu
        )

    @classmethod
    def trial_to_test_error(cls, instance, trial, batch):
        """
        Relative error of Tu against Tu* in the norm of V.

        :rtype: float
        """
        return cls.test_error(instance, TrialToTestField(instance.problem, trial), batch)

    @classmethod
    def adjoint_error(cls, instance, test, batch):
        """
        Relative error of A'v against u* in the norm of U.

        :rtype: float
        """
        return cls.trial_error(instance, AdjointField(instance.problem, test), batch)

    @classmethod
    def maximizer(cls, instance, trial, batch):
        """
        The normalized residual maximizer (u - u*) / ||u - u*||_V of a
        WeakSPD problem.

        :param ProblemInstance instance: the problem
        :param ClosedForm trial: u
        :param QuadBatch batch: the batch the norm is measured on
        :rtype: ClosedForm

        :raises UndefinedMaximizerError: if u is within
            RitzConfig.EPS_MAXIMIZER of u*
        """
        problem = instance.problem
        if problem.kind is not FormulationKinds.WEAK_SPD:
            raise RitzUnsupportedError("maximizer", f"a {problem.kind} problem")
        difference = trial - problem.exact_u
        distance = cls.norm(difference, problem.test_norm, batch)
        if not distance > RitzConfig.EPS_MAXIMIZER:
            raise UndefinedMaximizerError(distance)
        return difference * (1.0 / distance)

    @classmethod
    def maximizer_closed_form(cls, instance, trial, points, batch):
        """
        Values of the normalized residual maximizer at ``points``.

        :param ProblemInstance instance: the problem
        :param ClosedForm trial: u
        :param ndarray points: the points
        :param QuadBatch batch: the batch the norm is measured on
        :rtype: ndarray
        """
        return cls.maximizer(instance, trial, batch)(points)

    @staticmethod
    def unit_direction(seed=None):
        """
        A perturbation vanishing at 0 and 1 with unit H^1 seminorm.

        Without a seed this is sqrt(2) sin(pi x) / pi; with one, a random
        combination of sin(k pi x), k = 1..4.

        :param seed: the seed
        :type seed: int or NoneType
        :rtype: ClosedForm
        """
        if seed is None:
            coefficients = np.array([1.0])
        else:
            coefficients = np.random.default_rng(seed).standard_normal(4)
        freqs = math.pi * np.arange(1, coefficients.shape[0] + 1)
        coefficients = coefficients / math.sqrt(
            float(np.sum(coefficients**2 * freqs**2)) / 2.0
        )

        def series(trig, powers):
            def formula(x):
                x = np.asarray(x, dtype=float)
                terms = trig(np.multiply.outer(x, freqs)) * (coefficients * powers)
                return np.sum(terms, axis=-1)

            return formula

        return ClosedForm.on_interval(
            "sine direction",
            series(np.sin, 1.0),
            series(np.cos, freqs),
            series(np.sin, -(freqs**2)),
        )

    @staticmethod
    def _check_epsilons(epsilons):
        epsilons = [float(e) for e in epsilons]
        if not epsilons or any(not e > 0 for e in epsilons):
            raise RitzValueError(epsilons, "epsilons", "must be positive")
        if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
            raise RitzValueError(epsilons, "epsilons", "must be strictly decreasing")
        return epsilons

    @classmethod
    def instability_probe(cls, instance, direction, epsilons, batch):
        """
        For u1, u2 = u* +/- eps w, the distances ||u1 - u2||_U and
        ||J(u1) - J(u2)||_V between the trials and their residual
        maximizers.

        :param ProblemInstance instance: a WeakSPD problem
        :param ClosedForm direction: w, of unit V norm
        :param epsilons: strictly decreasing positive values
        :type epsilons: sequence of float
        :param QuadBatch batch: the batch norms are measured on
        :rtype: list of ProbeRow
        """
        problem = instance.problem
        rows = []
        for epsilon in cls._check_epsilons(epsilons):
            first = problem.exact_u + direction * epsilon
            second = problem.exact_u - direction * epsilon
            gap = cls.norm(
                cls.maximizer(instance, first, batch)
                - cls.maximizer(instance, second, batch),
                problem.test_norm,
                batch,
            )
            distance = cls.norm(first - second, problem.trial_norm, batch)
            rows.append(ProbeRow(epsilon, distance, gap, gap / distance))
            _LOGGER.debug("probe at %r: %r / %r", epsilon, gap, distance)
        return rows

    @staticmethod
    def trained_maximizer(instance, trial, test, steps, seed, config=AdamConfig()):
        """
        Maximize the normalized residual over ``test`` by Adam ascent.

        :param ProblemInstance instance: the problem
        :param trial: the fixed trial field
        :param MaskedNetwork test: v, updated in place
        :param int steps: ascent steps
        :param seed: seed of the batch stream
        :param AdamConfig config: optimizer
        :returns: ``test``
        :rtype: MaskedNetwork
        """
        rng = np.random.default_rng(seed)
        state = AdamState(test.params.size, config)
        for step in range(steps):
            batch = Quadrature.sample_batch(instance.plan, rng, instance.singular_points)
            try:
                loss = Functionals.loss_wan(instance.problem, trial, test, batch)
            except DegenerateTestError as err:
                _LOGGER.warning("ascent step %d skipped: %s", step, err)
                continue
            Adam.step(state, test.params, loss.gradient(test.params), Adam.ASCENT, step)
        return test

    @classmethod
    def instability_probe_trained(
        cls, instance, direction, epsilons, batch, spec, steps, seed=0
    ):
        """
        As instability_probe, adding the distance between normalized
        maximizers found by training a test network for each trial.

        :param ProblemInstance instance: a WeakSPD problem
        :param ClosedForm direction: w
        :param epsilons: strictly decreasing positive values
        :type epsilons: sequence of float
        :param QuadBatch batch: the batch norms are measured on
        :param NetworkSpec spec: the test network shape
        :param int steps: ascent steps per maximizer
        :param int seed: seed of initialization and batches
        :rtype: list of TrainedProbeRow

        :raises DegenerateTestError: if a trained maximizer has vanishing norm
        """
        problem = instance.problem
        rows = []
        for row in cls.instability_probe(instance, direction, epsilons, batch):
            tests = []
            for sign in (1.0, -1.0):
                trial = problem.exact_u + direction * (sign * row.epsilon)
                test = MaskedNetwork(spec, spec.initialize(seed), instance.test_mask)
                cls.trained_maximizer(instance, trial, test, steps, seed)
                norm = cls.norm(test, problem.test_norm, batch)
                if not norm**2 > RitzConfig.EPS_DIV:
                    raise DegenerateTestError(norm**2)
                tests.append((test, norm))
            (first, first_norm), (second, second_norm) = tests
            trained = cls.norm(
                Combination([(1.0 / first_norm, first), (-1.0 / second_norm, second)]),
                problem.test_norm,
                batch,
            )
            rows.append(
                TrainedProbeRow(
                    row.epsilon, row.trial_distance, row.maximizer_distance, trained
                )
            )
        return rows

    @staticmethod
    def loss_optimum_gap(record, optimum, tag):
        """
        Recorded values of one loss minus its continuous optimum.

        :param TrainRecord record: the record
        :param float optimum: the optimum
        :param str tag: the loss tag
        :returns: (iteration, gap) pairs
        :rtype: list of tuple
        """
        return [
            (row.iteration, row.values[tag] - optimum)
            for row in record.rows
            if tag in row.values
        ]
