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
Experiment runs: training from a configuration, result files, the table
reproductions, the instability probe and the self test.
"""

# isort: STDLIB
import concurrent.futures
import csv
import logging
import os
import time
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._autodiff import Gradients
from ._config import ExperimentConfig, NetworkConfig, RitzConfig, SeedConfig
from ._constants import FormulationKinds, LossTags, Methods
from ._errors import RitzValueError
from ._metrics import Metrics
from ._network import MaskedNetwork, Networks, NetworkSpec, TrialTestPair
from ._problems import Problems, Schedule
from ._quadrature import Quadrature, SamplingPlan
from ._training import LoopSchedule, Trainers
from ._variational import AdjointField, Functionals, TrialToTestField

_LOGGER = logging.getLogger(__name__)

RunResult = namedtuple("RunResult", ["instance", "fields", "record", "paths"])
TableSpec = namedtuple(
    "TableSpec", ["problem", "cases", "methods", "schedule", "desk_divisor"]
)
CheckResult = namedtuple("CheckResult", ["name", "passed", "detail"])

_METHOD_TAGS = {
    "wan": (LossTags.NORMALIZED_RESIDUAL,),
    "drm": (LossTags.RITZ_TRIAL_TO_TEST,),
    "gdrm": (LossTags.RITZ_TRIAL_TO_TEST,),
    "adjoint_drm": (LossTags.RITZ_ADJOINT,),
    "d2rm": (LossTags.RITZ_COMPOSED, LossTags.INNER_FIT),
}

_COMPATIBLE = {
    "wan": FormulationKinds.KINDS(),
    "drm": [FormulationKinds.WEAK_SPD],
    "gdrm": [FormulationKinds.WEAK_SPD, FormulationKinds.STRONG],
    "adjoint_drm": [FormulationKinds.ULTRAWEAK],
    "d2rm": FormulationKinds.KINDS(),
}

TABLES = {
    2: TableSpec(
        "poisson_weak_alpha",
        (2.0, 5.0, 10.0),
        ("wan", "drm", "d2rm"),
        Schedule(5000, 4, 0),
        5,
    ),
    3: TableSpec(
        "poisson_weak_alpha",
        (0.6, 0.7, 0.8),
        ("drm", "d2rm"),
        Schedule(100000, 4, 0),
        5,
    ),
    4: TableSpec(
        "poisson_weak_delta", (None,), ("drm", "d2rm"), Schedule(20000, 4, 0), 1
    ),
    5: TableSpec(
        "convection_ultraweak", (None,), ("adjoint_drm",), Schedule(50000, 9, 0), 5
    ),
    6: TableSpec(
        "convection_ultraweak", (None,), ("d2rm",), Schedule(50000, 9, 0), 5
    ),
    7: TableSpec(
        "convection2d_strong", (None,), ("d2rm",), Schedule(200000, 9, 2000), 10
    ),
}


def _fmt(value):
    return "" if value is None else repr(float(value))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


class Experiments:
    """
    Experiment drivers.
    """

    @staticmethod
    def default_config(problem, method, alpha=None, output=None):
        """
        The configuration of a registered problem's default run.

        :param str problem: the problem name
        :param str method: the method name
        :param alpha: the problem parameter
        :type alpha: float or NoneType
        :param output: the output directory
        :type output: str or NoneType
        :rtype: ExperimentConfig
        """
        instance = Problems.lookup(problem, alpha)
        network = NetworkConfig(instance.widths)
        return ExperimentConfig(
            problem,
            method,
            instance.plan,
            alpha=alpha,
            output=output
            if output is not None
            else os.path.join("results", f"{instance.label}-{method}"),
            outer_iters=instance.schedule.outer_iters,
            inner_per_outer=instance.schedule.inner_per_outer,
            warmup_inner=instance.schedule.warmup_inner,
            trial_network=network,
            test_network=network,
            seeds=SeedConfig(),
        )

    @staticmethod
    def check_compatible(method, instance):
        """
        Check that ``method`` can train ``instance``.

        :raises RitzValueError: if it cannot
        """
        if instance.kind not in _COMPATIBLE[method.name]:
            raise RitzValueError(
                method.name, "method", f"cannot train a {instance.kind} problem"
            )

    @classmethod
    def train(cls, config):
        """
        Build the networks a configuration describes and train them.

        :param ExperimentConfig config: the configuration
        :returns: the problem, the trained fields by role, and the record
        :rtype: tuple
        """
        instance = Problems.lookup(config.problem, config.alpha)
        method = Methods.get(config.method)
        cls.check_compatible(method, instance)
        if config.plan.dim != instance.dim:
            raise RitzValueError(config.plan.dim, "sampling", f"expected {instance.dim} axes")
        trial_seed, test_seed = np.random.SeedSequence(config.seeds.params).spawn(2)
        schedule = LoopSchedule(
            config.outer_iters,
            config.plan,
            config.inner_per_outer,
            config.warmup_inner,
        )
        metric_batch = Metrics.evaluation_batch(instance, config.seeds.metrics)
        batches = config.seeds.batches
        configs = (config.trial_adam, config.test_adam)

        def network(shape, input_dim, seed, mask):
            spec = NetworkSpec(input_dim, shape.widths, shape.activation)
            return MaskedNetwork(spec, spec.initialize(seed), mask)

        if method is Methods.ADJOINT_DRM:
            test = network(config.test_network, instance.dim, test_seed, instance.test_mask)
            record = Trainers.train_adjoint_ritz(
                instance, test, schedule, batches, config.test_adam, metric_batch
            )
            return instance, {"test": test}, record

        trial = network(config.trial_network, instance.dim, trial_seed, instance.trial_mask)
        if method in (Methods.DRM, Methods.GDRM):
            record = Trainers.train_ritz(
                instance, trial, schedule, batches, config.trial_adam, metric_batch, method
            )
            return instance, {"trial": trial}, record
        if method is Methods.WAN:
            test = network(config.test_network, instance.dim, test_seed, instance.test_mask)
            record = Trainers.train_wan(
                instance, trial, test, schedule, batches, configs, metric_batch
            )
            return instance, {"trial": trial, "test": test}, record
        spec = NetworkSpec(
            instance.dim + 1, config.test_network.widths, config.test_network.activation
        )
        pair = TrialTestPair(trial, spec, spec.initialize(test_seed), instance.test_mask)
        record = Trainers.train_d2rm(
            instance, pair, schedule, batches, configs, metric_batch
        )
        return instance, {"trial": trial, "pair": pair}, record

    @staticmethod
    def profile_points(dim):
        """
        1001 points on [0, 1], or a 101 x 101 grid on the unit square.

        :param int dim: the dimension
        :rtype: ndarray
        """
        if dim == 1:
            return np.linspace(0.0, 1.0, 1001).reshape(-1, 1)
        axis = np.linspace(0.0, 1.0, 101)
        grids = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    @staticmethod
    def profile_fields(method, instance, fields):
        """
        (name, approximation, exact) triples of a run's profile.

        :rtype: list of tuple
        """
        problem = instance.problem
        if method is Methods.ADJOINT_DRM:
            test = fields["test"]
            return [
                ("v", test, problem.exact_Tu),
                ("adjoint_v", AdjointField(problem, test), problem.exact_u),
            ]
        result = [("u", fields["trial"], problem.exact_u)]
        if method is Methods.D2RM:
            result.append(("tau_u", fields["pair"], problem.exact_Tu))
        if method is Methods.GDRM:
            result.append(
                ("Tu", TrialToTestField(problem, fields["trial"]), problem.exact_Tu)
            )
        return result

    @classmethod
    def write_results(cls, config, instance, fields, record, wall_time):
        """
        Write losses.csv, errors.csv, profile.csv and summary.csv.

        :returns: the paths, by file name
        :rtype: dict
        """
        # pylint: disable=too-many-arguments,too-many-locals
        method = Methods.get(config.method)
        os.makedirs(config.output, exist_ok=True)
        paths = {}
        tags = _METHOD_TAGS[method.name]

        def path(name):
            paths[name] = os.path.join(config.output, name)
            return paths[name]

        _write_csv(
            path("losses.csv"),
            ["iteration", "loop"] + list(tags),
            (
                [row.iteration, row.loop] + [_fmt(row.values.get(t)) for t in tags]
                for row in record.rows
            ),
        )
        _write_csv(
            path("errors.csv"),
            ["fraction", "outer", "relative_u", "relative_v"],
            (
                [_fmt(c.fraction), c.outer, _fmt(c.relative_u), _fmt(c.relative_v)]
                for c in record.checkpoints
            ),
        )

        points = cls.profile_points(instance.dim)
        header = ["x"] if instance.dim == 1 else ["x", "y"]
        columns = [points[:, a] for a in range(instance.dim)]
        for name, field, exact in cls.profile_fields(method, instance, fields):
            approximation = Networks.values(field, points)
            truth = exact(points)
            header += [name, f"{name}_exact", f"{name}_error"]
            columns += [approximation, truth, approximation - truth]
        _write_csv(
            path("profile.csv"),
            header,
            ([_fmt(c[i]) for c in columns] for i in range(points.shape[0])),
        )

        final = record.final_checkpoint
        series = record.series(tags[0])
        optimum = 0.0 if method is Methods.WAN else instance.optimum
        final_loss = series[-1] if series else None
        _write_csv(
            path("summary.csv"),
            [
                "problem",
                "alpha",
                "method",
                "outer_iters",
                "steps",
                "final_relative_u",
                "final_relative_v",
                "final_loss",
                "optimum",
                "optimum_gap",
                "skipped",
                "wall_time",
            ],
            [
                [
                    instance.name,
                    _fmt(instance.alpha),
                    method.name,
                    config.outer_iters,
                    len(record.rows) + len(record.events),
                    _fmt(final.relative_u),
                    _fmt(final.relative_v),
                    _fmt(final_loss),
                    _fmt(optimum),
                    _fmt(None if final_loss is None else final_loss - optimum),
                    len(record.events),
                    f"{wall_time:.3f}",
                ]
            ],
        )
        return paths

    @classmethod
    def run(cls, config):
        """
        Train per ``config`` and write its result files.

        :param ExperimentConfig config: the configuration
        :rtype: RunResult
        """
        start = time.perf_counter()
        instance, fields, record = cls.train(config)
        wall_time = time.perf_counter() - start
        paths = cls.write_results(config, instance, fields, record, wall_time)
        _LOGGER.info("results of %s written to %s", instance.label, config.output)
        return RunResult(instance, fields, record, paths)

    @staticmethod
    def table_configs(table, scale, output):
        """
        The runs of a table.

        :param int table: the table id
        :param str scale: "desk" or "full"
        :param str output: the output directory
        :returns: (case label, config) pairs
        :rtype: list of tuple

        :raises RitzValueError: for an unknown table or scale
        """
        spec = TABLES.get(table)
        if spec is None:
            raise RitzValueError(table, "table", f"known: {sorted(TABLES)}")
        if scale not in ("desk", "full"):
            raise RitzValueError(scale, "scale", "must be desk or full")
        divisor = spec.desk_divisor if scale == "desk" else 1
        result = []
        for case in spec.cases:
            label = "-" if case is None else f"{case:g}"
            for method in spec.methods:
                config = Experiments.default_config(
                    spec.problem,
                    method,
                    case,
                    os.path.join(
                        output,
                        f"table{table}-{scale}",
                        method if case is None else f"{method}-{label}",
                    ),
                )
                config.outer_iters = spec.schedule.outer_iters // divisor
                config.inner_per_outer = spec.schedule.inner_per_outer
                config.warmup_inner = spec.schedule.warmup_inner
                result.append((label, config))
        return result

    @classmethod
    def reproduce(cls, table, scale, output, workers=1):
        """
        Run every cell of a table and write the consolidated CSV.

        :param int table: the table id
        :param str scale: "desk" or "full"
        :param str output: the output directory
        :param int workers: worker processes
        :returns: the path of the consolidated CSV
        :rtype: str
        """
        cells = cls.table_configs(table, scale, output)
        configs = [config for _, config in cells]
        if workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(_run_record, configs))
        else:
            records = [_run_record(config) for config in configs]
        rows = []
        for (label, config), checkpoints in zip(cells, records):
            for checkpoint in checkpoints:
                if checkpoint.fraction == 0.0:
                    continue
                rows.append(
                    [
                        table,
                        config.method,
                        label,
                        _fmt(checkpoint.fraction),
                        _fmt(checkpoint.relative_u),
                        _fmt(checkpoint.relative_v),
                    ]
                )
        os.makedirs(output, exist_ok=True)
        return _write_csv(
            os.path.join(output, f"table{table}-{scale}.csv"),
            ["table", "method", "case", "fraction", "relative_u", "relative_v"],
            rows,
        )

    @staticmethod
    def probe_instability(
        output, epsilons=(1e-1, 1e-2, 1e-3), direction_seed=None, trained_steps=0
    ):
        """
        Run the instability probe on poisson_weak_smooth and write probe.csv.

        :param str output: the output directory
        :param epsilons: strictly decreasing positive values
        :type epsilons: sequence of float
        :param direction_seed: seed of the perturbation direction
        :type direction_seed: int or NoneType
        :param int trained_steps: if positive, also train maximizers
        :returns: the path and the rows
        :rtype: tuple
        """
        instance = Problems.poisson_weak_smooth()
        direction = Metrics.unit_direction(direction_seed)
        batch = Metrics.evaluation_batch(instance, RitzConfig.METRIC_SEED)
        if trained_steps > 0:
            rows = Metrics.instability_probe_trained(
                instance,
                direction,
                epsilons,
                batch,
                NetworkSpec(1, instance.widths),
                trained_steps,
            )
            header = ["epsilon", "trial_distance", "maximizer_distance", "trained_distance"]
        else:
            rows = Metrics.instability_probe(instance, direction, epsilons, batch)
            header = ["epsilon", "trial_distance", "maximizer_distance", "ratio"]
        os.makedirs(output, exist_ok=True)
        path = _write_csv(
            os.path.join(output, "probe.csv"),
            header,
            ([_fmt(v) for v in row] for row in rows),
        )
        return path, rows

    @staticmethod
    def selftest():
        """
        Gradient, quadrature, energy identity and instability checks.

        :rtype: list of CheckResult
        """
        # pylint: disable=too-many-locals
        results = []
        smooth = Problems.poisson_weak_smooth()
        convection = Problems.convection_ultraweak()
        batch = Quadrature.sample_batch(SamplingPlan.uniform(50), 0)
        spec = NetworkSpec(1, (5,))
        trial = MaskedNetwork(spec, spec.initialize(1), smooth.trial_mask)
        test = MaskedNetwork(spec, spec.initialize(2), smooth.test_mask)
        tau = NetworkSpec(2, (5,))
        pair = TrialTestPair(trial, tau, tau.initialize(3), smooth.test_mask)
        adjoint_test = MaskedNetwork(spec, spec.initialize(4), convection.test_mask)

        def rebound(net, params):
            return MaskedNetwork(net.spec, params, net.mask)

        def rebound_tau(params):
            return TrialTestPair(trial, tau, params, smooth.test_mask)

        checks = [
            (
                "gradient J",
                test.params,
                lambda t, p: Functionals.loss_wan(
                    smooth.problem, trial, rebound(test, p), batch, t
                ).node,
            ),
            (
                "gradient F_T",
                trial.params,
                lambda t, p: Functionals.loss_ritz_T(
                    smooth.problem, rebound(trial, p), batch, t
                ).node,
            ),
            (
                "gradient F_tau",
                trial.params,
                lambda t, p: Functionals.loss_ritz_tau(
                    smooth.problem,
                    TrialTestPair(rebound(trial, p), tau, pair.tau_params, smooth.test_mask),
                    batch,
                    t,
                ).node,
            ),
            (
                "gradient L_u",
                pair.tau_params,
                lambda t, p: Functionals.loss_inner(
                    smooth.problem, rebound_tau(p), batch, t
                ).node,
            ),
            (
                "gradient F_adjoint",
                adjoint_test.params,
                lambda t, p: Functionals.loss_adjoint_ritz(
                    convection.problem, rebound(adjoint_test, p), batch, t
                ).node,
            ),
        ]
        for name, params, build in checks:
            deviation = Gradients.directional_check(params, build)
            results.append(CheckResult(name, deviation < 1e-5, f"deviation {deviation:.3e}"))

        sums = [
            Quadrature.sample_batch(SamplingPlan.uniform(100), seed).volume
            for seed in range(1000)
        ]
        worst = max(abs(s - 1.0) for s in sums)
        results.append(CheckResult("weights sum to one", worst < 1e-12, f"worst {worst:.3e}"))
        large = Quadrature.sample_batch(SamplingPlan.uniform(10000), 0)
        value = Quadrature.integrate(large, lambda x: (2.0 * x[:, 0] - 1.0) ** 2)
        results.append(
            CheckResult(
                "integral of (2x - 1)^2",
                abs(value - 1.0 / 3.0) < 1e-4,
                f"error {abs(value - 1.0 / 3.0):.3e}",
            )
        )

        gap = 0.0
        for seed in range(100):
            draw = MaskedNetwork(spec, spec.initialize(seed), smooth.trial_mask)
            left, right = Functionals.ritz_gap_check(smooth.problem, draw, batch)
            gap = max(gap, abs(left - right))
        results.append(CheckResult("energy identity", gap < 1e-10, f"worst {gap:.3e}"))

        rows = Metrics.instability_probe(
            smooth,
            Metrics.unit_direction(),
            (1e-1, 1e-2, 1e-3),
            Metrics.evaluation_batch(smooth, RitzConfig.METRIC_SEED),
        )
        spread = max(abs(r.maximizer_distance - 2.0) for r in rows)
        growth = rows[-1].ratio / rows[0].ratio
        results.append(
            CheckResult(
                "maximizer instability",
                spread < 0.05 and growth >= 90.0,
                f"distance spread {spread:.3e}, ratio growth {growth:.1f}",
            )
        )
        for result in results:
            _LOGGER.info(
                "%s: %s (%s)",
                result.name,
                "ok" if result.passed else "FAILED",
                result.detail,
            )
        return results


def _run_record(config):
    """
    Run one configuration and return its checkpoints.

    Module level so that worker processes can unpickle it.
    """
    return Experiments.run(config).record.checkpoints


def worker_count():
    """
    Worker processes for table reproduction, from the environment.

    :rtype: int
    :raises RitzValueError: if the variable is not a positive integer
    """
    text = os.environ.get(RitzConfig.WORKERS_ENV, "1")
    try:
        count = int(text)
    except ValueError as err:
        raise RitzValueError(text, RitzConfig.WORKERS_ENV, "not an integer") from err
    if count < 1:
        raise RitzValueError(count, RitzConfig.WORKERS_ENV, "must be positive")
    return count

