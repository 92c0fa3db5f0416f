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
Registered benchmark problems with their exact solutions.
"""

# isort: STDLIB
import math
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._autodiff import DualValue
from ._config import RitzConfig
from ._constants import FormulationKinds
from ._errors import RitzNotFoundError, RitzUnsupportedError, RitzValueError
from ._network import BoundaryMasks, Jet, as_points
from ._quadrature import BetaSample, SamplingPlan
from ._variational import Norms, PointLoad, VariationalProblem

ExactNorms = namedtuple("ExactNorms", ["u", "Tu"])
Schedule = namedtuple("Schedule", ["outer_iters", "inner_per_outer", "warmup_inner"])


class ClosedForm:
    """
    A field given by formulas for its value, gradient and pure second
    derivatives.

    Each formula maps (N, d) points to (N,) values, respectively (N, d)
    derivatives. Breakpoints are locations on the first axis where the
    field or its derivative jumps.
    """

    def __init__(self, name, dim, value, gradient=None, second=None, breakpoints=()):
        """
        Initializer.

        :param str name: the name
        :param int dim: the dimension
        :param callable value: the value formula
        :param gradient: the gradient formula
        :type gradient: callable or NoneType
        :param second: the second derivative formula
        :type second: callable or NoneType
        :param breakpoints: jump locations
        :type breakpoints: sequence of float
        """
        self.name = name
        self.dim = dim
        self.value = value
        self.gradient = gradient
        self.second = second
        self.breakpoints = tuple(sorted(breakpoints))

    def __repr__(self):
        return f"ClosedForm({self.name})"

    @classmethod
    def on_interval(cls, name, value, derivative=None, second=None, breakpoints=()):
        """
        A field on [0, 1] from formulas in the scalar coordinate.

        :param str name: the name
        :param callable value: x -> u(x), vectorized
        :param derivative: x -> u'(x)
        :type derivative: callable or NoneType
        :param second: x -> u''(x)
        :type second: callable or NoneType
        :param breakpoints: jump locations
        :type breakpoints: sequence of float
        :rtype: ClosedForm
        """

        def column(formula):
            if formula is None:
                return None
            return lambda p: np.reshape(_broadcast(formula(p[:, 0]), p), (-1, 1))

        return cls(
            name,
            1,
            lambda p: _broadcast(value(p[:, 0]), p),
            column(derivative),
            column(second),
            breakpoints,
        )

    def __call__(self, points):
        return self.value(as_points(points, self.dim))

    def jet(self, points, order=1):
        """
        Arrays of value and derivatives.

        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: Jet
        """
        points = as_points(points, self.dim)
        return Jet(
            self.value(points),
            self.gradient(points) if order >= 1 and self.gradient else None,
            self.second(points) if order >= 2 and self.second else None,
        )

    def evaluate(self, tape, points, order):
        """
        The field as a constant dual on ``tape``.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: DualValue
        :raises RitzUnsupportedError: if a needed formula is missing
        """
        jet = self.jet(points, order)
        return DualValue.from_arrays(tape, jet.value, jet.gradient, jet.second, order)

    def _combine(self, other, name, left, right):
        def merge(mine, theirs):
            if mine is None or theirs is None:
                return None
            return lambda p: left * mine(p) + right * theirs(p)

        return ClosedForm(
            name,
            self.dim,
            merge(self.value, other.value),
            merge(self.gradient, other.gradient),
            merge(self.second, other.second),
            set(self.breakpoints) | set(other.breakpoints),
        )

    def __add__(self, other):
        return self._combine(other, f"({self.name} + {other.name})", 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, f"({self.name} - {other.name})", 1.0, -1.0)

    def __mul__(self, scale):
        scale = float(scale)

        def scaled(formula):
            return None if formula is None else (lambda p: scale * formula(p))

        return ClosedForm(
            f"{scale!r} * {self.name}",
            self.dim,
            scaled(self.value),
            scaled(self.gradient),
            scaled(self.second),
            self.breakpoints,
        )

    __rmul__ = __mul__


def _broadcast(values, points):
    return np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],)).copy()


class ProblemInstance:
    """
    A registered problem with everything needed to train and evaluate it.
    """

    # pylint: disable=too-many-instance-attributes

    def __init__(
        self,
        name,
        problem,
        *,
        trial_mask,
        test_mask,
        plan,
        metric_plan,
        exact_norms,
        alpha=None,
        singular_points=(),
        widths=(20, 20),
        schedule=Schedule(2000, 4, 0),
    ):
        """
        Initializer.

        :param str name: the registry name
        :param VariationalProblem problem: the problem
        :param BoundaryMask trial_mask: mask of trial networks
        :param BoundaryMask test_mask: mask of test networks
        :param SamplingPlan plan: training batch plan
        :param SamplingPlan metric_plan: error evaluation plan
        :param ExactNorms exact_norms: ||u*||_U and ||Tu*||_V
        :param alpha: the problem parameter
        :type alpha: float or NoneType
        :param singular_points: points no quadrature node may equal
        :type singular_points: tuple of float
        :param widths: default hidden widths
        :type widths: tuple of int
        :param Schedule schedule: default iteration counts
        """
        self.name = name
        self.problem = problem
        self.trial_mask = trial_mask
        self.test_mask = test_mask
        self.plan = plan
        self.metric_plan = metric_plan
        self.exact_norms = exact_norms
        self.alpha = alpha
        self.singular_points = tuple(singular_points)
        self.widths = tuple(widths)
        self.schedule = schedule

    def __repr__(self):
        return f"ProblemInstance({self.label})"

    dim = property(lambda s: s.problem.dim, doc="spatial dimension")
    kind = property(lambda s: s.problem.kind, doc="formulation kind")

    @property
    def label(self):
        """
        The name, with the parameter if there is one.

        :rtype: str
        """
        return self.name if self.alpha is None else f"{self.name}[alpha={self.alpha:g}]"

    @property
    def optimum(self):
        """
        The continuous minimum of the trial Ritz loss, -1/2 ||Tu*||_V^2.

        :rtype: float
        """
        return -0.5 * self.exact_norms.Tu**2


def _weak_poisson(source=None, point_load=None, exact_u=None):
    return VariationalProblem(
        FormulationKinds.WEAK_SPD,
        1,
        lambda u, v, nodes: u.d_dx[0] * v.d_dx[0],
        trial_order=1,
        test_order=1,
        trial_norm=Norms.H1,
        test_norm=Norms.H1,
        load_density=None
        if source is None
        else (lambda v, nodes: v.value * source(nodes[:, 0])),
        point_load=point_load,
        exact_u=exact_u,
        exact_Tu=exact_u,
    )


_SMOOTH = ClosedForm.on_interval(
    "x(x - 1)", lambda x: x * (x - 1.0), lambda x: 2.0 * x - 1.0, lambda x: 2.0
)

_METRIC_UNIFORM = SamplingPlan.uniform(RitzConfig.METRIC_NODES)


class Problems:
    """
    The problem registry.
    """

    SINGULAR_PLAN = SamplingPlan(
        [[BetaSample(100, 1.0, 1.0), BetaSample(100, 1e4, 1.0, True)]]
    )
    TWO_SAMPLE_PLAN = SamplingPlan(
        [[BetaSample(100, 1.0, 1.0), BetaSample(100, 10.0, 10.0)]]
    )

    ALPHAS = (0.6, 0.7, 0.8, 2.0, 5.0, 10.0)

    @staticmethod
    def poisson_weak_smooth():
        """
        -u'' = -2 on (0, 1), u(0) = u(1) = 0; u* = x(x - 1).

        :rtype: ProblemInstance
        """
        norm = math.sqrt(1.0 / 3.0)
        return ProblemInstance(
            "poisson_weak_smooth",
            _weak_poisson(lambda x: np.full_like(x, -2.0), exact_u=_SMOOTH),
            trial_mask=BoundaryMasks.INTERVAL,
            test_mask=BoundaryMasks.INTERVAL,
            plan=SamplingPlan.uniform(200),
            metric_plan=_METRIC_UNIFORM,
            exact_norms=ExactNorms(norm, norm),
        )

    @classmethod
    def poisson_weak_alpha(cls, alpha):
        """
        -u'' = f with u* = x^alpha (x - 1), whose derivative is singular at
        0 when alpha < 1.

        :param float alpha: must exceed 1/2 for u* to be in H^1
        :rtype: ProblemInstance
        :raises RitzValueError: if alpha is absent or at most 1/2
        """
        if alpha is None or not alpha > 0.5:
            raise RitzValueError(alpha, "alpha", "must exceed 1/2")
        alpha = float(alpha)
        exact = ClosedForm.on_interval(
            f"x^{alpha:g} (x - 1)",
            lambda x: x ** (alpha + 1.0) - x**alpha,
            lambda x: (alpha + 1.0) * x**alpha - alpha * x ** (alpha - 1.0),
            lambda x: (alpha + 1.0) * alpha * x ** (alpha - 1.0)
            - alpha * (alpha - 1.0) * x ** (alpha - 2.0),
        )
        norm = math.sqrt(
            (alpha + 1.0) ** 2 / (2.0 * alpha + 1.0)
            - (alpha + 1.0)
            + alpha**2 / (2.0 * alpha - 1.0)
        )
        singular = alpha < 1.0
        return ProblemInstance(
            "poisson_weak_alpha",
            _weak_poisson(lambda x: -exact.second(x.reshape(-1, 1))[:, 0], exact_u=exact),
            trial_mask=BoundaryMasks.INTERVAL,
            test_mask=BoundaryMasks.INTERVAL,
            plan=cls.SINGULAR_PLAN if singular else SamplingPlan.uniform(200),
            metric_plan=(
                cls.SINGULAR_PLAN.scaled(RitzConfig.METRIC_NODES)
                if singular
                else _METRIC_UNIFORM
            ),
            exact_norms=ExactNorms(norm, norm),
            alpha=alpha,
            singular_points=(0.0,),
            schedule=Schedule(100000 if singular else 5000, 4, 0),
        )

    @classmethod
    def poisson_weak_delta(cls):
        """
        -u'' = 4 delta_{1/2}; u* = 2x on (0, 1/2), 2(1 - x) on (1/2, 1).

        :rtype: ProblemInstance
        """
        exact = ClosedForm.on_interval(
            "hat",
            lambda x: np.where(x < 0.5, 2.0 * x, 2.0 * (1.0 - x)),
            lambda x: np.where(x < 0.5, 2.0, -2.0),
            lambda x: 0.0,
            breakpoints=(0.5,),
        )
        return ProblemInstance(
            "poisson_weak_delta",
            _weak_poisson(point_load=PointLoad(4.0, 0.5), exact_u=exact),
            trial_mask=BoundaryMasks.INTERVAL,
            test_mask=BoundaryMasks.INTERVAL,
            plan=cls.TWO_SAMPLE_PLAN,
            metric_plan=cls.TWO_SAMPLE_PLAN.scaled(RitzConfig.METRIC_NODES),
            exact_norms=ExactNorms(2.0, 2.0),
            singular_points=(0.5,),
            schedule=Schedule(20000, 4, 0),
        )

    @staticmethod
    def convection_ultraweak():
        """
        u' = delta_{1/2} with u(0) = 0, in ultraweak form:
        -int u v' = v(1/2) for v with v(1) = 0.

        u* is the step at 1/2 and Tu* solves -(Tu*)' = u*, Tu*(1) = 0.

        :rtype: ProblemInstance
        """
        exact_u = ClosedForm.on_interval(
            "step",
            lambda x: np.where(x > 0.5, 1.0, 0.0),
            lambda x: 0.0,
            lambda x: 0.0,
            breakpoints=(0.5,),
        )
        exact_Tu = ClosedForm.on_interval(
            "ramp",
            lambda x: np.where(x < 0.5, 0.5, 1.0 - x),
            lambda x: np.where(x < 0.5, 0.0, -1.0),
            lambda x: 0.0,
            breakpoints=(0.5,),
        )
        half = math.sqrt(0.5)
        problem = VariationalProblem(
            FormulationKinds.ULTRAWEAK,
            1,
            lambda u, v, nodes: -(u.value * v.d_dx[0]),
            trial_order=0,
            test_order=1,
            trial_norm=Norms.L2,
            test_norm=Norms.H1,
            point_load=PointLoad(1.0, 0.5),
            adjoint=lambda v: DualValue(-v.d_dx[0]),
            exact_u=exact_u,
            exact_Tu=exact_Tu,
        )
        return ProblemInstance(
            "convection_ultraweak",
            problem,
            trial_mask=BoundaryMasks.FREE,
            test_mask=BoundaryMasks.OUTFLOW,
            plan=SamplingPlan.uniform(200),
            metric_plan=_METRIC_UNIFORM,
            exact_norms=ExactNorms(half, half),
            singular_points=(0.5,),
            schedule=Schedule(50000, 9, 0),
        )

    @staticmethod
    def convection2d_strong():
        """
        u_x + u_y = k pi sin(k pi (x + y)) on the unit square with u = 0 on
        the inflow edges; u* = sin(k pi x) sin(k pi y), k = 3/2.

        :rtype: ProblemInstance
        """
        freq = 1.5 * math.pi

        def value(p):
            return np.sin(freq * p[:, 0]) * np.sin(freq * p[:, 1])

        exact_u = ClosedForm(
            "sin sin",
            2,
            value,
            lambda p: freq
            * np.column_stack(
                [
                    np.cos(freq * p[:, 0]) * np.sin(freq * p[:, 1]),
                    np.sin(freq * p[:, 0]) * np.cos(freq * p[:, 1]),
                ]
            ),
            lambda p: -(freq**2) * np.column_stack([value(p), value(p)]),
        )
        exact_Tu = ClosedForm(
            "k pi sin(k pi (x + y))",
            2,
            lambda p: freq * np.sin(freq * (p[:, 0] + p[:, 1])),
            lambda p: freq**2
            * np.column_stack([np.cos(freq * (p[:, 0] + p[:, 1]))] * 2),
            lambda p: -(freq**3)
            * np.column_stack([np.sin(freq * (p[:, 0] + p[:, 1]))] * 2),
        )
        problem = VariationalProblem(
            FormulationKinds.STRONG,
            2,
            lambda u, v, nodes: (u.d_dx[0] + u.d_dx[1]) * v.value,
            trial_order=1,
            test_order=0,
            trial_norm=Norms.L2,
            test_norm=Norms.L2,
            load_density=lambda v, nodes: v.value
            * (freq * np.sin(freq * (nodes[:, 0] + nodes[:, 1]))),
            trial_to_test=lambda u: DualValue(u.d_dx[0] + u.d_dx[1]),
            exact_u=exact_u,
            exact_Tu=exact_Tu,
        )
        return ProblemInstance(
            "convection2d_strong",
            problem,
            trial_mask=BoundaryMasks.CORNER,
            test_mask=BoundaryMasks.FREE,
            plan=SamplingPlan.uniform(50, dim=2),
            metric_plan=SamplingPlan.uniform(100, dim=2),
            exact_norms=ExactNorms(0.5, math.sqrt(9.0 * math.pi**2 / 8.0 + 0.5)),
            widths=(50, 50, 50),
            schedule=Schedule(200000, 9, 2000),
        )

    @staticmethod
    def poisson_strong():
        """
        -u'' = -2 tested in L^2: b(u, v) = int -u'' v and Tu = -u''.

        :rtype: ProblemInstance
        """
        exact_Tu = ClosedForm.on_interval(
            "-2", lambda x: -2.0, lambda x: 0.0, lambda x: 0.0
        )
        problem = VariationalProblem(
            FormulationKinds.STRONG,
            1,
            lambda u, v, nodes: -(u.d2_dx2[0] * v.value),
            trial_order=2,
            test_order=0,
            trial_norm=Norms.H1,
            test_norm=Norms.L2,
            load_density=lambda v, nodes: v.value * -2.0,
            trial_to_test=lambda u: DualValue(-u.d2_dx2[0]),
            exact_u=_SMOOTH,
            exact_Tu=exact_Tu,
        )
        return ProblemInstance(
            "poisson_strong",
            problem,
            trial_mask=BoundaryMasks.INTERVAL,
            test_mask=BoundaryMasks.FREE,
            plan=SamplingPlan.uniform(200),
            metric_plan=_METRIC_UNIFORM,
            exact_norms=ExactNorms(math.sqrt(1.0 / 3.0), 2.0),
        )

    @staticmethod
    def poisson_ultraweak():
        """
        -u'' = -2 in ultraweak form: b(u, v) = int -u v'' with U = L^2 and
        the test space carrying the boundary conditions.

        Not registered for training.

        :rtype: ProblemInstance
        """
        exact_u = ClosedForm.on_interval(
            "x(x - 1)", lambda x: x * (x - 1.0), lambda x: 2.0 * x - 1.0, lambda x: 2.0
        )
        exact_Tu = ClosedForm.on_interval(
            "quartic",
            lambda x: -(x**4) / 12.0 + x**3 / 6.0 - x / 12.0,
            lambda x: -(x**3) / 3.0 + x**2 / 2.0 - 1.0 / 12.0,
            lambda x: -(x**2) + x,
        )
        norm = math.sqrt(1.0 / 30.0)
        problem = VariationalProblem(
            FormulationKinds.ULTRAWEAK,
            1,
            lambda u, v, nodes: -(u.value * v.d2_dx2[0]),
            trial_order=0,
            test_order=2,
            trial_norm=Norms.L2,
            test_norm=Norms.H2,
            load_density=lambda v, nodes: v.value * -2.0,
            adjoint=lambda v: DualValue(-v.d2_dx2[0]),
            exact_u=exact_u,
            exact_Tu=exact_Tu,
        )
        return ProblemInstance(
            "poisson_ultraweak",
            problem,
            trial_mask=BoundaryMasks.FREE,
            test_mask=BoundaryMasks.INTERVAL,
            plan=SamplingPlan.uniform(200),
            metric_plan=_METRIC_UNIFORM,
            exact_norms=ExactNorms(norm, norm),
        )

    _BUILDERS = (
        "convection2d_strong",
        "convection_ultraweak",
        "poisson_strong",
        "poisson_weak_delta",
        "poisson_weak_smooth",
    )

    @classmethod
    def NAMES(cls):  # pylint: disable=invalid-name
        """Names of registered problems."""
        return ["poisson_weak_alpha"] + list(cls._BUILDERS)

    @classmethod
    def lookup(cls, name, alpha=None):
        """
        Build a registered problem.

        :param str name: the name
        :param alpha: the parameter of poisson_weak_alpha
        :type alpha: float or NoneType
        :rtype: ProblemInstance

        :raises RitzNotFoundError: for an unknown name
        :raises RitzValueError: for a missing or invalid alpha
        """
        if name == "poisson_weak_alpha":
            return cls.poisson_weak_alpha(alpha)
        if name not in cls._BUILDERS:
            raise RitzNotFoundError(name, cls.NAMES())
        if alpha is not None:
            raise RitzValueError(alpha, "alpha", f"{name} takes no parameter")
        return getattr(cls, name)()

    @classmethod
    def registry(cls):
        """
        Every registered instance, with alpha over ALPHAS.

        :rtype: list of ProblemInstance
        """
        return [cls.poisson_weak_alpha(a) for a in cls.ALPHAS] + [
            cls.lookup(name) for name in cls._BUILDERS
        ]

    @staticmethod
    def exact_T_apply(name, trial, points, nodes=200):  # pylint: disable=invalid-name
        """
        Tu(x) = int_x^1 u(s) ds for the convection problem, by the composite
        midpoint rule with ``nodes`` cells per piece between breakpoints.

        :param str name: the problem name
        :param callable trial: u, vectorized over 1-D arrays
        :param points: the x values
        :type points: float or ndarray
        :param int nodes: cells per piece
        :rtype: ndarray

        :raises RitzUnsupportedError: for other problems
        """
        if name != "convection_ultraweak":
            raise RitzUnsupportedError("exact_T_apply", name)
        breakpoints = getattr(trial, "breakpoints", ())
        result = []
        for start in np.atleast_1d(np.asarray(points, dtype=float)):
            edges = [start] + [b for b in breakpoints if start < b < 1.0] + [1.0]
            total = 0.0
            for low, high in zip(edges[:-1], edges[1:]):
                width = (high - low) / nodes
                mids = low + width * (np.arange(nodes) + 0.5)
                total += width * float(np.sum(np.asarray(trial(mids), dtype=float)))
            result.append(total)
        return np.array(result)
