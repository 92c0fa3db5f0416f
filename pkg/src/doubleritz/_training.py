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
Training loops.

Every iteration draws a fresh batch. Nested methods alternate an outer
descent step on the trial network with inner steps on the test side; the
two sides have independent optimizers and only the stepped side changes.
"""

# isort: STDLIB
import logging
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._config import AdamConfig, RitzConfig
from ._constants import FormulationKinds, Loops, Methods
from ._errors import (
    DegenerateTestError,
    RitzUnsupportedError,
    RitzValueError,
    TrainingAbortedError,
)
from ._metrics import ErrorReport, Metrics
from ._optim import Adam, AdamState
from ._quadrature import Quadrature
from ._variational import Functionals

_LOGGER = logging.getLogger(__name__)

LossRow = namedtuple("LossRow", ["iteration", "loop", "values"])
Checkpoint = namedtuple("Checkpoint", ["fraction", "outer", "relative_u", "relative_v"])


class LoopSchedule:
    """
    Iteration counts of a run, and where errors are recorded.
    """

    _FMT_STR = ", ".join(
        [
            "outer_iters=%(outer_iters)s",
            "inner_per_outer=%(inner_per_outer)s",
            "warmup_inner=%(warmup_inner)s",
        ]
    )

    def __init__(
        self,
        outer_iters,
        plan,
        inner_per_outer=4,
        warmup_inner=0,
        checkpoints=RitzConfig.CHECKPOINTS,
    ):
        """
        Initializer.

        :param int outer_iters: outer iterations
        :param SamplingPlan plan: the batch plan
        :param int inner_per_outer: inner iterations after each outer one
        :param int warmup_inner: inner iterations before the first outer one
        :param checkpoints: fractions of the outer iterations
        :type checkpoints: sequence of float

        :raises RitzValueError: on negative counts or fractions out of (0, 1]
        """
        for value, name in (
            (outer_iters, "outer_iters"),
            (inner_per_outer, "inner_per_outer"),
            (warmup_inner, "warmup_inner"),
        ):
            if value < 0:
                raise RitzValueError(value, name, "must be non-negative")
        if any(not 0 < f <= 1 for f in checkpoints):
            raise RitzValueError(checkpoints, "checkpoints", "must lie in (0, 1]")
        self.outer_iters = int(outer_iters)
        self.plan = plan
        self.inner_per_outer = int(inner_per_outer)
        self.warmup_inner = int(warmup_inner)
        self.checkpoints = tuple(checkpoints)

    def __str__(self):  # pragma: no cover
        values = {
            "outer_iters": self.outer_iters,
            "inner_per_outer": self.inner_per_outer,
            "warmup_inner": self.warmup_inner,
        }
        return f"LoopSchedule({self._FMT_STR % values})"

    __repr__ = __str__

    def total_iterations(self, nested=True):
        """
        Number of optimizer steps.

        :param bool nested: whether inner loops run
        :rtype: int
        """
        if not nested:
            return self.outer_iters
        return self.outer_iters * (1 + self.inner_per_outer) + self.warmup_inner

    def checkpoint_map(self):
        """
        Outer iteration numbers at which errors are recorded.

        :returns: outer iteration -> fraction
        :rtype: dict
        """
        result = {}
        if self.outer_iters == 0:
            return result
        for fraction in self.checkpoints:
            outer = min(self.outer_iters, max(1, round(fraction * self.outer_iters)))
            result.setdefault(outer, fraction)
        return result


class TrainRecord:
    """
    Loss values and error checkpoints of a run.
    """

    def __init__(self, method, label):
        """
        Initializer.

        :param str method: the method name
        :param str label: the problem label
        """
        self.method = method
        self.label = label
        self.rows = []
        self.checkpoints = []
        self.events = []

    def __repr__(self):
        return f"TrainRecord({self.method}, {self.label}, rows={len(self.rows)})"

    def record_loss(self, iteration, loop, *losses):
        """
        Record loss values.

        :param int iteration: the iteration number, from 1
        :param str loop: the loop
        :param losses: the losses
        :type losses: LossValue
        """
        self.rows.append(LossRow(iteration, loop, {loss.tag: loss.value for loss in losses}))

    def record_checkpoint(self, fraction, outer, report):
        """
        Record errors.

        :param float fraction: fraction of the outer iterations done
        :param int outer: outer iterations done
        :param ErrorReport report: the errors
        """
        self.checkpoints.append(
            Checkpoint(fraction, outer, report.relative_u, report.relative_v)
        )
        _LOGGER.debug(
            "%s on %s at %r: u %s, v %s on %s nodes",
            self.method,
            self.label,
            fraction,
            report.relative_u,
            report.relative_v,
            report.batch_size,
        )

    def record_event(self, iteration, message):
        """
        Record something unusual that did not stop the run.

        :param int iteration: the iteration
        :param str message: what happened
        """
        self.events.append((iteration, message))
        _LOGGER.warning("iteration %d: %s", iteration, message)

    def series(self, tag):
        """
        The values recorded under ``tag``.

        :param str tag: the loss tag
        :rtype: list of float
        """
        return [row.values[tag] for row in self.rows if tag in row.values]

    @property
    def final_checkpoint(self):
        """
        The last checkpoint, if any.

        :rtype: Checkpoint or NoneType
        """
        return self.checkpoints[-1] if self.checkpoints else None


def _finite(loss, iteration):
    if not np.isfinite(loss.value):
        raise TrainingAbortedError(iteration, loss.tag, f"loss is {loss.value!r}")
    return loss


class _Side:
    """
    One trained network side and its optimizer.
    """

    # pylint: disable=too-few-public-methods

    def __init__(self, params, config):
        self.params = params
        self.state = AdamState(params.size, config)

    def step(self, loss, sign, iteration):
        """
        Check the loss and take one step on its gradient.

        :param LossValue loss: the loss
        :param int sign: Adam.DESCENT or Adam.ASCENT
        :param int iteration: the iteration
        """
        _finite(loss, iteration)
        Adam.step(
            self.state,
            self.params,
            loss.gradient(self.params),
            sign,
            iteration=iteration,
            tag=loss.tag,
        )


class Trainers:
    """
    The training methods.

    Each takes a seed for its batch stream and, optionally, the batch errors
    are measured on; networks are trained in place.
    """

    @staticmethod
    def errors(method, instance, fields, batch):
        """
        The errors a method reports.

        :param method: the method
        :param ProblemInstance instance: the problem
        :param dict fields: the trained fields, by role
        :param QuadBatch batch: the evaluation batch
        :rtype: ErrorReport
        """
        if method is Methods.ADJOINT_DRM:
            relative_u = Metrics.adjoint_error(instance, fields["test"], batch)
            relative_v = Metrics.test_error(instance, fields["test"], batch)
        else:
            relative_u = Metrics.trial_error(instance, fields["trial"], batch)
            relative_v = None
            if method is Methods.D2RM:
                relative_v = Metrics.test_error(instance, fields["pair"], batch)
            elif method is Methods.GDRM:
                relative_v = Metrics.trial_to_test_error(instance, fields["trial"], batch)
        return ErrorReport(relative_u, relative_v, batch_size=len(batch), seed=batch.seed)

    @classmethod
    def _run(cls, method, instance, schedule, fields, metric_batch, outer, inner=None):
        """
        Drive the loops and record checkpoints.

        :param outer: iteration -> losses to record, after stepping
        :type outer: callable
        :param inner: iteration -> losses to record, after stepping
        :type inner: callable or NoneType
        :rtype: TrainRecord
        """
        # pylint: disable=too-many-arguments
        record = TrainRecord(method.name, instance.label)
        if metric_batch is None:
            metric_batch = Metrics.evaluation_batch(instance, RitzConfig.METRIC_SEED)
        checkpoints = schedule.checkpoint_map()
        _LOGGER.info(
            "training %s on %s: %d outer iterations, %d steps",
            method,
            instance.label,
            schedule.outer_iters,
            schedule.total_iterations(method.nested),
        )
        record.record_checkpoint(
            0.0, 0, cls.errors(method, instance, fields, metric_batch)
        )
        iteration = 0

        def advance(step, loop):
            nonlocal iteration
            iteration += 1
            losses = step(record, iteration)
            if losses:
                record.record_loss(iteration, loop, *losses)

        if inner is not None:
            for _ in range(schedule.warmup_inner):
                advance(inner, Loops.WARMUP)
        for count in range(1, schedule.outer_iters + 1):
            advance(outer, Loops.OUTER)
            if inner is not None:
                for _ in range(schedule.inner_per_outer):
                    advance(inner, Loops.INNER)
            if count in checkpoints:
                record.record_checkpoint(
                    checkpoints[count],
                    count,
                    cls.errors(method, instance, fields, metric_batch),
                )
        _LOGGER.info(
            "finished %s on %s after %d steps", method, instance.label, iteration
        )
        return record

    @staticmethod
    def _sampler(instance, schedule, seed):
        rng = np.random.default_rng(seed)
        return lambda: Quadrature.sample_batch(
            schedule.plan, rng, instance.singular_points
        )

    @classmethod
    def train_ritz(
        cls,
        instance,
        trial,
        schedule,
        seed,
        config=AdamConfig(),
        metric_batch=None,
        method=None,
    ):
        """
        Minimize 1/2 ||Tu||^2 - l(Tu) over the trial network.

        :param ProblemInstance instance: a WeakSPD or Strong problem
        :param MaskedNetwork trial: u
        :param LoopSchedule schedule: the schedule; inner counts are ignored
        :param seed: seed of the batch stream
        :param AdamConfig config: the optimizer
        :param metric_batch: the error batch; drawn from a fixed seed if omitted
        :type metric_batch: QuadBatch or NoneType
        :param method: DRM or GDRM; by default DRM for WeakSPD problems
        :rtype: TrainRecord

        :raises RitzUnsupportedError: if the problem has no trial-to-test map
        """
        # pylint: disable=too-many-arguments
        problem = instance.problem
        if problem.trial_to_test is None:
            raise RitzUnsupportedError("train_ritz", f"a {problem.kind} problem")
        if method is None:
            method = (
                Methods.DRM
                if problem.kind is FormulationKinds.WEAK_SPD
                else Methods.GDRM
            )
        sample = cls._sampler(instance, schedule, seed)
        side = _Side(trial.params, config)

        def outer(_record, iteration):
            loss = Functionals.loss_ritz_T(problem, trial, sample())
            side.step(loss, Adam.DESCENT, iteration)
            return (loss,)

        return cls._run(method, instance, schedule, {"trial": trial}, metric_batch, outer)

    @classmethod
    def train_adjoint_ritz(
        cls, instance, test, schedule, seed, config=AdamConfig(), metric_batch=None
    ):
        """
        Minimize 1/2 ||A'v||^2 - l(v) over the test network.

        :param ProblemInstance instance: an Ultraweak problem
        :param MaskedNetwork test: v
        :param LoopSchedule schedule: the schedule; inner counts are ignored
        :param seed: seed of the batch stream
        :param AdamConfig config: the optimizer
        :param metric_batch: the error batch
        :type metric_batch: QuadBatch or NoneType
        :rtype: TrainRecord
        """
        # pylint: disable=too-many-arguments
        problem = instance.problem
        if problem.adjoint is None:
            raise RitzUnsupportedError("train_adjoint_ritz", f"a {problem.kind} problem")
        sample = cls._sampler(instance, schedule, seed)
        side = _Side(test.params, config)

        def outer(_record, iteration):
            loss = Functionals.loss_adjoint_ritz(problem, test, sample())
            side.step(loss, Adam.DESCENT, iteration)
            return (loss,)

        return cls._run(
            Methods.ADJOINT_DRM, instance, schedule, {"test": test}, metric_batch, outer
        )

    @classmethod
    def train_wan(
        cls,
        instance,
        trial,
        test,
        schedule,
        seed,
        configs=(AdamConfig(), AdamConfig()),
        metric_batch=None,
    ):
        """
        Min over u, max over v of the normalized residual.

        A batch on which v has vanishing norm is skipped and recorded as an
        event.

        :param ProblemInstance instance: the problem
        :param MaskedNetwork trial: u
        :param MaskedNetwork test: v
        :param LoopSchedule schedule: the schedule
        :param seed: seed of the batch stream
        :param configs: trial and test optimizers
        :type configs: tuple of AdamConfig
        :param metric_batch: the error batch
        :type metric_batch: QuadBatch or NoneType
        :rtype: TrainRecord
        """
        # pylint: disable=too-many-arguments
        problem = instance.problem
        sample = cls._sampler(instance, schedule, seed)
        trial_side = _Side(trial.params, configs[0])
        test_side = _Side(test.params, configs[1])

        def step(side, sign):
            def run(record, iteration):
                try:
                    loss = Functionals.loss_wan(problem, trial, test, sample())
                except DegenerateTestError as err:
                    record.record_event(iteration, f"skipped: {err}")
                    return ()
                side.step(loss, sign, iteration)
                return (loss,)

            return run

        return cls._run(
            Methods.WAN,
            instance,
            schedule,
            {"trial": trial, "test": test},
            metric_batch,
            step(trial_side, Adam.DESCENT),
            step(test_side, Adam.ASCENT),
        )

    @classmethod
    def train_d2rm(
        cls,
        instance,
        pair,
        schedule,
        seed,
        configs=(AdamConfig(), AdamConfig()),
        metric_batch=None,
    ):
        """
        Alternate descent on the composed Ritz loss over u with descent on
        the inner fit over tau.

        Both losses are recorded at every iteration.

        :param ProblemInstance instance: the problem
        :param TrialTestPair pair: u and tau
        :param LoopSchedule schedule: the schedule
        :param seed: seed of the batch stream
        :param configs: trial and tau optimizers
        :type configs: tuple of AdamConfig
        :param metric_batch: the error batch
        :type metric_batch: QuadBatch or NoneType
        :rtype: TrainRecord
        """
        # pylint: disable=too-many-arguments
        problem = instance.problem
        sample = cls._sampler(instance, schedule, seed)
        trial_side = _Side(pair.trial.params, configs[0])
        tau_side = _Side(pair.tau_params, configs[1])

        def outer(_record, iteration):
            ritz, fit = Functionals.d2rm_losses(problem, pair, sample())
            _finite(fit, iteration)
            trial_side.step(ritz, Adam.DESCENT, iteration)
            return (ritz, fit)

        def inner(_record, iteration):
            ritz, fit = Functionals.d2rm_losses(problem, pair, sample())
            _finite(ritz, iteration)
            tau_side.step(fit, Adam.DESCENT, iteration)
            return (ritz, fit)

        return cls._run(
            Methods.D2RM,
            instance,
            schedule,
            {"trial": pair.trial, "pair": pair},
            metric_batch,
            outer,
            inner,
        )
