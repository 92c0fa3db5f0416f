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

""" Configuration of the doubleritz package. """

# isort: STDLIB
import configparser
import io
import math

from ._constants import Methods
from ._errors import RitzValueError
from ._quadrature import BetaSample, SamplingPlan


class AdamConfig:
    """
    Hyperparameters of one Adam optimizer.
    """

    # pylint: disable=too-few-public-methods

    _FMT_STR = ", ".join(
        [
            "learning_rate=%(learning_rate)s",
            "beta1=%(beta1)s",
            "beta2=%(beta2)s",
            "epsilon=%(epsilon)s",
        ]
    )

    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        """
        Initializer.

        :param float learning_rate: the step size; 0 freezes the parameters
        :param float beta1: decay of the first moment
        :param float beta2: decay of the second moment
        :param float epsilon: added to the root of the second moment

        :raises RitzValueError: if a value is out of range
        """
        if not (math.isfinite(learning_rate) and learning_rate >= 0):
            raise RitzValueError(
                learning_rate, "learning_rate", "must be finite and non-negative"
            )
        for value, name in ((beta1, "beta1"), (beta2, "beta2")):
            if not 0 <= value < 1:
                raise RitzValueError(value, name, "must be in [0, 1)")
        if not epsilon > 0:
            raise RitzValueError(epsilon, "epsilon", "must be positive")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)

    def __str__(self):  # pragma: no cover
        values = {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }
        return f"AdamConfig({self._FMT_STR % values})"

    __repr__ = __str__


class NetworkConfig:
    """
    Hidden layer widths and activation of one network.
    """

    # pylint: disable=too-few-public-methods

    _FMT_STR = ", ".join(["widths=%(widths)s", "activation=%(activation)s"])

    def __init__(self, widths=(20, 20), activation="tanh"):
        """
        Initializer.

        :param widths: hidden layer widths
        :type widths: sequence of int
        :param str activation: activation name
        """
        self.widths = tuple(int(w) for w in widths)
        self.activation = activation

    def __str__(self):  # pragma: no cover
        values = {"widths": self.widths, "activation": self.activation}
        return f"NetworkConfig({self._FMT_STR % values})"

    __repr__ = __str__


class SeedConfig:
    """
    Seeds of the three independent random streams of a run.
    """

    # pylint: disable=too-few-public-methods

    _FMT_STR = ", ".join(
        ["params=%(params)s", "batches=%(batches)s", "metrics=%(metrics)s"]
    )

    def __init__(self, params=1, batches=2, metrics=3):
        """
        Initializer.

        :param int params: seed for network initialization
        :param int batches: seed for training batches
        :param int metrics: seed for the error evaluation batch
        """
        self.params = int(params)
        self.batches = int(batches)
        self.metrics = int(metrics)

    def __str__(self):  # pragma: no cover
        values = {
            "params": self.params,
            "batches": self.batches,
            "metrics": self.metrics,
        }
        return f"SeedConfig({self._FMT_STR % values})"

    __repr__ = __str__


class RitzConfig:
    """
    Package wide numerical constants.
    """

    # pylint: disable=too-few-public-methods

    # smallest test norm squared a normalized residual divides by
    EPS_DIV = 1e-12

    # smallest distance at which a residual maximizer is defined
    EPS_MAXIMIZER = 1e-12

    # shift applied to quadrature nodes landing on a singular point
    NUDGE = 1e-12

    METRIC_NODES = 10000

    # seed of the error evaluation batch when none is given
    METRIC_SEED = 3

    CHECKPOINTS = (0.04, 0.2, 0.4, 0.6, 1.0)

    WORKERS_ENV = "DOUBLERITZ_WORKERS"


class PlanFormat:
    """
    Text form of sampling plans, as written in experiment files.

    A component is ``count:a:b`` with an optional trailing ``:reflect``;
    components of one axis are joined by ``+``.
    """

    REFLECT = "reflect"

    @classmethod
    def format_axis(cls, components):
        """
        Format the components of one axis.

        :param components: the components
        :type components: sequence of BetaSample
        :rtype: str
        """
        parts = []
        for component in components:
            text = f"{component.count}:{component.a!r}:{component.b!r}"
            if component.reflect:
                text += ":" + cls.REFLECT
            parts.append(text)
        return " + ".join(parts)

    @classmethod
    def parse_axis(cls, text):
        """
        Parse the components of one axis.

        :param str text: the text
        :rtype: tuple of BetaSample
        :raises RitzValueError: if the text is malformed
        """
        components = []
        for part in text.split("+"):
            fields = [f.strip() for f in part.strip().split(":")]
            if len(fields) not in (3, 4):
                raise RitzValueError(text, "sampling", "expected count:a:b[:reflect]")
            if len(fields) == 4 and fields[3] != cls.REFLECT:
                raise RitzValueError(fields[3], "sampling", "unknown flag")
            try:
                components.append(
                    BetaSample(
                        int(fields[0]),
                        float(fields[1]),
                        float(fields[2]),
                        len(fields) == 4,
                    )
                )
            except ValueError as err:
                raise RitzValueError(text, "sampling", str(err)) from err
        return tuple(components)


class ExperimentConfig:
    """
    A complete description of one training run.

    Serializes to and from an INI document; serializing a parsed document
    reproduces it exactly.
    """

    # pylint: disable=too-many-instance-attributes

    def __init__(
        self,
        problem,
        method,
        plan,
        *,
        alpha=None,
        output="results",
        outer_iters=200,
        inner_per_outer=4,
        warmup_inner=0,
        trial_adam=AdamConfig(),
        test_adam=AdamConfig(),
        trial_network=NetworkConfig(),
        test_network=NetworkConfig(),
        seeds=SeedConfig(),
    ):
        """
        Initializer.

        :param str problem: the registered problem name
        :param str method: the training method name
        :param SamplingPlan plan: the training batch plan
        :param alpha: the problem parameter, if any
        :type alpha: float or NoneType
        :param str output: the output directory
        :param int outer_iters: outer iterations
        :param int inner_per_outer: inner iterations per outer iteration
        :param int warmup_inner: inner iterations before the first outer one
        :param AdamConfig trial_adam: trial optimizer
        :param AdamConfig test_adam: test optimizer
        :param NetworkConfig trial_network: trial network shape
        :param NetworkConfig test_network: test network shape
        :param SeedConfig seeds: random streams

        :raises RitzValueError: for unknown methods or negative counts
        """
        if Methods.get(method) is None:
            raise RitzValueError(
                method, "method", f"known: {', '.join(str(m) for m in Methods.METHODS())}"
            )
        for value, name in (
            (outer_iters, "outer_iters"),
            (inner_per_outer, "inner_per_outer"),
            (warmup_inner, "warmup_inner"),
        ):
            if value < 0:
                raise RitzValueError(value, name, "must be non-negative")
        self.problem = problem
        self.method = method
        self.plan = plan
        self.alpha = None if alpha is None else float(alpha)
        self.output = output
        self.outer_iters = int(outer_iters)
        self.inner_per_outer = int(inner_per_outer)
        self.warmup_inner = int(warmup_inner)
        self.trial_adam = trial_adam
        self.test_adam = test_adam
        self.trial_network = trial_network
        self.test_network = test_network
        self.seeds = seeds

    def __str__(self):  # pragma: no cover
        return f"ExperimentConfig({self.problem}, {self.method}, alpha={self.alpha})"

    __repr__ = __str__

    def to_parser(self):
        """
        The configuration as a parser object.

        :rtype: configparser.ConfigParser
        """
        parser = configparser.ConfigParser(interpolation=None)
        parser["experiment"] = {
            "problem": self.problem,
            "alpha": "" if self.alpha is None else repr(self.alpha),
            "method": self.method,
            "output": self.output,
        }
        parser["schedule"] = {
            "outer_iters": str(self.outer_iters),
            "inner_per_outer": str(self.inner_per_outer),
            "warmup_inner": str(self.warmup_inner),
        }
        parser["optimizer"] = {
            "trial_rate": repr(self.trial_adam.learning_rate),
            "test_rate": repr(self.test_adam.learning_rate),
            "beta1": repr(self.trial_adam.beta1),
            "beta2": repr(self.trial_adam.beta2),
            "epsilon": repr(self.trial_adam.epsilon),
        }
        for section, network in (
            ("trial", self.trial_network),
            ("test", self.test_network),
        ):
            parser[section] = {
                "widths": ",".join(str(w) for w in network.widths),
                "activation": network.activation,
            }
        parser["sampling"] = {
            f"axis_{index + 1}": PlanFormat.format_axis(axis)
            for index, axis in enumerate(self.plan.axes)
        }
        parser["seeds"] = {
            "params": str(self.seeds.params),
            "batches": str(self.seeds.batches),
            "metrics": str(self.seeds.metrics),
        }
        return parser

    def dumps(self):
        """
        The configuration as INI text.

        :rtype: str
        """
        stream = io.StringIO()
        self.to_parser().write(stream)
        return stream.getvalue()

    @classmethod
    def loads(cls, text):
        """
        Parse INI text.

        :param str text: the document
        :rtype: ExperimentConfig
        :raises RitzValueError: if the document is incomplete or malformed
        """
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
            experiment = parser["experiment"]
            schedule = parser["schedule"]
            optimizer = parser["optimizer"]
            sampling = parser["sampling"]
            seeds = parser["seeds"]

            def network(section):
                return NetworkConfig(
                    tuple(
                        int(w)
                        for w in parser[section]["widths"].split(",")
                        if w.strip()
                    ),
                    parser[section]["activation"],
                )

            axes = [
                PlanFormat.parse_axis(sampling[f"axis_{index + 1}"])
                for index in range(len(sampling))
            ]
            alpha = experiment.get("alpha", "").strip()
            betas = {
                "beta1": optimizer.getfloat("beta1"),
                "beta2": optimizer.getfloat("beta2"),
                "epsilon": optimizer.getfloat("epsilon"),
            }
            return cls(
                experiment["problem"],
                experiment["method"],
                SamplingPlan(axes),
                alpha=float(alpha) if alpha else None,
                output=experiment["output"],
                outer_iters=schedule.getint("outer_iters"),
                inner_per_outer=schedule.getint("inner_per_outer"),
                warmup_inner=schedule.getint("warmup_inner"),
                trial_adam=AdamConfig(optimizer.getfloat("trial_rate"), **betas),
                test_adam=AdamConfig(optimizer.getfloat("test_rate"), **betas),
                trial_network=network("trial"),
                test_network=network("test"),
                seeds=SeedConfig(
                    seeds.getint("params"),
                    seeds.getint("batches"),
                    seeds.getint("metrics"),
                ),
            )
        except (configparser.Error, KeyError, ValueError) as err:
            raise RitzValueError("<document>", "config", str(err)) from err
