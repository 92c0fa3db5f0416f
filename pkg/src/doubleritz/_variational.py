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
Variational problems and the discrete losses trained on them.

Every loss is assembled on a tape from a quadrature batch, so its value
and its gradient with respect to any parameter store come from one
forward pass and one reverse sweep.
"""

# isort: STDLIB
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._autodiff import Ops, Tape
from ._config import RitzConfig
from ._constants import FormulationKinds, LossTags
from ._errors import (
    DegenerateTestError,
    RitzUnsupportedError,
    RitzValueError,
)
from ._network import as_points

PointLoad = namedtuple("PointLoad", ["coefficient", "location"])


class Norm:
    """
    A squared norm density, with the derivative order it needs.
    """

    def __init__(self, name, order, density):
        """
        Initializer.

        :param str name: the name
        :param int order: derivatives the density reads
        :param density: maps a dual to the (N,) density node
        :type density: callable
        """
        self.name = name
        self.order = order
        self.density = density

    def __repr__(self):
        return f"Norm({self.name})"

    def __call__(self, dual):
        return self.density(dual)


def _sum_of_squares(components):
    total = None
    for component in components:
        square = component * component
        total = square if total is None else total + square
    return total


class Norms:
    """Static class for accessing norms."""

    # pylint: disable=too-few-public-methods

    L2 = Norm("l2", 0, lambda d: d.value * d.value)
    H1 = Norm("h1", 1, lambda d: _sum_of_squares(d.d_dx))
    H2 = Norm("h2", 2, lambda d: _sum_of_squares(d.d2_dx2))

    _NORMS = [L2, H1, H2]

    @classmethod
    def NORMS(cls):  # pylint: disable=invalid-name
        """Norms of this class."""
        return cls._NORMS[:]


class VariationalProblem:
    """
    Find u with b(u, v) = l(v) for all v, where l is a load density
    integrated against v plus an optional point load c * v(x0).

    Integrand callables take duals evaluated on the batch and return (N,)
    nodes; ``bilinear`` also receives the (N, d) nodes.
    """

    # pylint: disable=too-many-instance-attributes

    def __init__(
        self,
        kind,
        dim,
        bilinear,
        *,
        trial_order,
        test_order,
        trial_norm,
        test_norm,
        load_density=None,
        point_load=None,
        adjoint=None,
        trial_to_test=None,
        exact_u=None,
        exact_Tu=None,
    ):
        """
        Initializer.

        :param kind: the formulation kind
        :param int dim: the spatial dimension
        :param bilinear: (u, v, nodes) -> b density
        :type bilinear: callable
        :param int trial_order: derivatives of u the losses need
        :param int test_order: derivatives of v the losses need
        :param Norm trial_norm: the norm of U
        :param Norm test_norm: the norm of V
        :param load_density: (v, nodes) -> l density
        :type load_density: callable or NoneType
        :param point_load: coefficient and location of a point load
        :type point_load: PointLoad or NoneType
        :param adjoint: v -> A'v, an order 0 dual; required for Ultraweak
        :type adjoint: callable or NoneType
        :param trial_to_test: u -> Tu; identity for WeakSPD
        :type trial_to_test: callable or NoneType
        :param exact_u: the exact solution, if known
        :param exact_Tu: its image under the trial-to-test map, if known

        :raises RitzValueError: if an Ultraweak problem has no adjoint
        """
        # pylint: disable=invalid-name
        if kind not in FormulationKinds.KINDS():
            raise RitzValueError(kind, "kind")
        if kind is FormulationKinds.ULTRAWEAK and adjoint is None:
            raise RitzValueError(None, "adjoint", "required for Ultraweak problems")
        if kind is FormulationKinds.WEAK_SPD and trial_to_test is None:
            trial_to_test = lambda u: u  # noqa: E731
        self.kind = kind
        self.dim = dim
        self.bilinear = bilinear
        self.trial_order = trial_order
        self.test_order = max(test_order, test_norm.order)
        self.trial_norm = trial_norm
        self.test_norm = test_norm
        self.load_density = load_density
        self.point_load = point_load
        self.adjoint = adjoint
        self.trial_to_test = trial_to_test
        self.exact_u = exact_u
        self.exact_Tu = exact_Tu

    def __repr__(self):
        return f"VariationalProblem({self.kind}, dim={self.dim})"

    def load(self, batch, test, test_at):
        """
        The discrete load l(v).

        :param QuadBatch batch: the batch
        :param DualValue test: v on the batch
        :param test_at: maps (M, d) points to v there, on the same tape
        :type test_at: callable
        :rtype: Var
        """
        total = test.tape.constant(0.0)
        if self.load_density is not None:
            total = total + Ops.weighted_sum(
                self.load_density(test, batch.nodes), batch.weights
            )
        if self.point_load is not None:
            location = np.full((1, self.dim), self.point_load.location, dtype=float)
            at_point = test_at(location).value
            total = total + self.point_load.coefficient * Ops.total(at_point)
        return total

    def flux_form(self):
        """
        The same problem with the load replaced by b(u*, .), assembled on
        the batch it is evaluated on.

        :rtype: VariationalProblem
        :raises RitzUnsupportedError: without an exact solution
        """
        if self.exact_u is None:
            raise RitzUnsupportedError("flux_form", "a problem without exact_u")

        def flux(test, nodes):
            exact = self.exact_u.evaluate(test.tape, nodes, self.trial_order)
            return self.bilinear(exact, test, nodes)

        return VariationalProblem(
            self.kind,
            self.dim,
            self.bilinear,
            trial_order=self.trial_order,
            test_order=self.test_order,
            trial_norm=self.trial_norm,
            test_norm=self.test_norm,
            load_density=flux,
            adjoint=self.adjoint,
            trial_to_test=self.trial_to_test,
            exact_u=self.exact_u,
            exact_Tu=self.exact_Tu,
        )

    def apply_adjoint(self, test, points):
        """
        A'v at ``points``.

        :param test: a field with an ``evaluate`` method
        :param ndarray points: the points
        :rtype: ndarray
        :raises RitzUnsupportedError: if the problem has no adjoint
        """
        if self.adjoint is None:
            raise RitzUnsupportedError("apply_adjoint", f"a {self.kind} problem")
        return AdjointField(self, test).jet_values(points)


class AdjointField:
    """
    The field A'v for a test field v.
    """

    def __init__(self, problem, test):
        if problem.adjoint is None:
            raise RitzUnsupportedError("adjoint field", f"a {problem.kind} problem")
        self.problem = problem
        self.test = test

    def evaluate(self, tape, points, order):
        """
        A'v at ``points``; only values are available.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: must be 0
        :rtype: DualValue
        """
        if order != 0:
            raise RitzUnsupportedError(f"order {order}", "an adjoint field")
        return self.problem.adjoint(
            self.test.evaluate(tape, points, self.problem.test_order)
        )

    def jet_values(self, points):
        """
        Values at ``points``.

        :param ndarray points: the points
        :rtype: ndarray
        """
        points = as_points(points, self.problem.dim)
        return np.array(self.evaluate(Tape(), points, 0).value.value)


class TrialToTestField:
    """
    The field Tu for a trial field u.
    """

    def __init__(self, problem, trial):
        if problem.trial_to_test is None:
            raise RitzUnsupportedError("trial-to-test field", f"a {problem.kind} problem")
        self.problem = problem
        self.trial = trial

    def evaluate(self, tape, points, order):
        """
        Tu at ``points``, carrying what the map provides up to ``order``.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: the order wanted
        :rtype: DualValue
        """
        image = self.problem.trial_to_test(
            self.trial.evaluate(tape, points, self.problem.trial_order)
        )
        if image.order < order:
            raise RitzUnsupportedError(f"order {order}", "this trial-to-test image")
        return image.truncated(order)


class LossValue:
    """
    A loss node and its value.
    """

    def __init__(self, node, tag):
        """
        Initializer.

        :param Var node: the scalar node
        :param str tag: what the loss is
        """
        self.node = node
        self.tag = tag
        self.value = float(node.value)

    def __repr__(self):
        return f"LossValue({self.tag}={self.value!r})"

    tape = property(lambda s: s.node.tape, doc="the tape of the node")

    def gradient(self, params):
        """
        The gradient with respect to ``params``.

        :param ParamStore params: the parameters
        :rtype: ndarray
        """
        return self.tape.gradient(self.node, params)


def _integral(density, batch):
    return Ops.weighted_sum(density, batch.weights)


class Functionals:
    """
    Discrete losses.

    Each takes an optional tape; several losses assembled on one tape
    share their forward evaluations.
    """

    @staticmethod
    def loss_wan(problem, trial, test, batch, tape=None):
        """
        Normalized residual (b(u, v) - l(v)) / ||v||_V.

        :param VariationalProblem problem: the problem
        :param MaskedNetwork trial: u
        :param MaskedNetwork test: v
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: LossValue

        :raises DegenerateTestError: if ||v||_V^2 is at most RitzConfig.EPS_DIV
        """
        tape = Tape() if tape is None else tape
        u = trial.evaluate(tape, batch.nodes, problem.trial_order)
        v = test.evaluate(tape, batch.nodes, problem.test_order)
        norm_sq = _integral(problem.test_norm(v), batch)
        if not float(norm_sq.value) > RitzConfig.EPS_DIV:
            raise DegenerateTestError(float(norm_sq.value))
        residual = _integral(problem.bilinear(u, v, batch.nodes), batch) - problem.load(
            batch, v, lambda p: test.evaluate(tape, p, problem.test_order)
        )
        return LossValue(residual / Ops.sqrt(norm_sq), LossTags.NORMALIZED_RESIDUAL)

    @staticmethod
    def loss_ritz_T(problem, trial, batch, tape=None):  # pylint: disable=invalid-name
        """
        1/2 ||Tu||_V^2 - l(Tu).

        For WeakSPD problems this is the classical Ritz energy.

        :param VariationalProblem problem: the problem
        :param MaskedNetwork trial: u
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: LossValue

        :raises RitzUnsupportedError: if T has no closed form
        """
        if problem.trial_to_test is None:
            raise RitzUnsupportedError("loss_ritz_T", f"a {problem.kind} problem")
        tape = Tape() if tape is None else tape
        field = TrialToTestField(problem, trial)
        image = problem.trial_to_test(trial.evaluate(tape, batch.nodes, problem.trial_order))
        energy = 0.5 * _integral(problem.test_norm(image), batch)
        load = problem.load(batch, image, lambda p: field.evaluate(tape, p, 0))
        return LossValue(energy - load, LossTags.RITZ_TRIAL_TO_TEST)

    @staticmethod
    def _composed_energy(problem, pair, batch, tape):
        v = pair.evaluate(tape, batch.nodes, problem.test_order)
        return v, 0.5 * _integral(problem.test_norm(v), batch)

    @classmethod
    def loss_ritz_tau(cls, problem, pair, batch, tape=None):
        """
        1/2 ||tau(u)||_V^2 - l(tau(u)).

        :param VariationalProblem problem: the problem
        :param TrialTestPair pair: u and tau
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: LossValue
        """
        tape = Tape() if tape is None else tape
        v, energy = cls._composed_energy(problem, pair, batch, tape)
        load = problem.load(batch, v, lambda p: pair.evaluate(tape, p, problem.test_order))
        return LossValue(energy - load, LossTags.RITZ_COMPOSED)

    @classmethod
    def loss_inner(cls, problem, pair, batch, tape=None):
        """
        1/2 ||tau(u)||_V^2 - b(u, tau(u)), minimized over tau for fixed u.

        :param VariationalProblem problem: the problem
        :param TrialTestPair pair: u and tau
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: LossValue
        """
        tape = Tape() if tape is None else tape
        v, energy = cls._composed_energy(problem, pair, batch, tape)
        u = pair.trial.evaluate(tape, batch.nodes, problem.trial_order)
        coupling = _integral(problem.bilinear(u, v, batch.nodes), batch)
        return LossValue(energy - coupling, LossTags.INNER_FIT)

    @staticmethod
    def d2rm_losses(problem, pair, batch, tape=None):
        """
        Both nested Ritz losses, sharing one forward evaluation.

        :param VariationalProblem problem: the problem
        :param TrialTestPair pair: u and tau
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :returns: the outer and the inner loss
        :rtype: tuple of LossValue
        """
        tape = Tape() if tape is None else tape
        v = pair.evaluate(tape, batch.nodes, problem.test_order)
        u = pair.trial.evaluate(tape, batch.nodes, problem.trial_order)
        energy = 0.5 * _integral(problem.test_norm(v), batch)
        load = problem.load(batch, v, lambda p: pair.evaluate(tape, p, problem.test_order))
        coupling = _integral(problem.bilinear(u, v, batch.nodes), batch)
        return (
            LossValue(energy - load, LossTags.RITZ_COMPOSED),
            LossValue(energy - coupling, LossTags.INNER_FIT),
        )

    @staticmethod
    def loss_adjoint_ritz(problem, test, batch, tape=None):
        """
        1/2 ||A'v||^2 - l(v).

        :param VariationalProblem problem: an Ultraweak problem
        :param MaskedNetwork test: v
        :param QuadBatch batch: the batch
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: LossValue

        :raises RitzUnsupportedError: if the problem has no adjoint
        """
        if problem.adjoint is None:
            raise RitzUnsupportedError("loss_adjoint_ritz", f"a {problem.kind} problem")
        tape = Tape() if tape is None else tape
        v = test.evaluate(tape, batch.nodes, problem.test_order)
        adjoint = problem.adjoint(v)
        energy = 0.5 * _integral(adjoint.value * adjoint.value, batch)
        load = problem.load(batch, v, lambda p: test.evaluate(tape, p, problem.test_order))
        return LossValue(energy - load, LossTags.RITZ_ADJOINT)

    @staticmethod
    def ritz_gap_check(problem, trial, batch):
        """
        Both sides of F(u) - F(u*) = 1/2 ||u - u*||^2 on a batch.

        The load used is the flux b(u*, .) on the same batch, which makes
        the identity hold up to rounding.

        :param VariationalProblem problem: a WeakSPD problem with exact_u
        :param MaskedNetwork trial: u
        :param QuadBatch batch: the batch
        :returns: left and right hand sides
        :rtype: tuple of float

        :raises RitzUnsupportedError: for other kinds, or without exact_u
        """
        if problem.kind is not FormulationKinds.WEAK_SPD or problem.exact_u is None:
            raise RitzUnsupportedError("ritz_gap_check", f"a {problem.kind} problem")
        tape = Tape()
        u = trial.evaluate(tape, batch.nodes, problem.trial_order)
        exact = problem.exact_u.evaluate(tape, batch.nodes, problem.trial_order)

        def energy(w):
            return 0.5 * _integral(problem.test_norm(w), batch) - _integral(
                problem.bilinear(exact, w, batch.nodes), batch
            )

        left = energy(u) - energy(exact)
        right = 0.5 * _integral(problem.test_norm(u - exact), batch)
        return float(left.value), float(right.value)

