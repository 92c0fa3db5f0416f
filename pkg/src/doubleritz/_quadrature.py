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
Randomized Monte Carlo quadrature on the unit interval and unit square.

Nodes are drawn from (mixtures of) Beta distributions; each node is
weighted by the length of the cell between the midpoints to its sorted
neighbours, so the weights of an axis always sum to one.
"""

# isort: STDLIB
import logging
import numbers
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from . import _config
from ._errors import RitzValueError

_LOGGER = logging.getLogger(__name__)

_LOW = np.nextafter(0.0, 1.0)
_HIGH = np.nextafter(1.0, 0.0)

BetaSample = namedtuple("BetaSample", ["count", "a", "b", "reflect"])
BetaSample.__new__.__defaults__ = (False,)


class SamplingPlan:
    """
    For each axis, the Beta components its nodes are drawn from.
    """

    _FMT_STR = "axes=%(axes)s"

    def __init__(self, axes):
        """
        Initializer.

        :param axes: per axis, a sequence of BetaSample-like tuples
        :type axes: sequence of sequence

        :raises RitzValueError: on a non-positive count or shape parameter
        """
        axes = tuple(tuple(BetaSample(*c) for c in axis) for axis in axes)
        if len(axes) not in (1, 2):
            raise RitzValueError(len(axes), "axes", "must be 1 or 2")
        for axis in axes:
            if not axis:
                raise RitzValueError(axis, "axis", "no components")
            for component in axis:
                if component.count < 1:
                    raise RitzValueError(component.count, "count", "must be positive")
                if not (component.a > 0 and component.b > 0):
                    raise RitzValueError(
                        (component.a, component.b), "beta", "must be positive"
                    )
            if sum(c.count for c in axis) < 2:
                raise RitzValueError(axis, "axis", "needs at least 2 nodes")
        self.axes = axes

    def __str__(self):  # pragma: no cover
        return f"SamplingPlan({self._FMT_STR % {'axes': self.axes}})"

    __repr__ = __str__

    def __eq__(self, other):
        return isinstance(other, SamplingPlan) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    dim = property(lambda s: len(s.axes), doc="number of axes")
    size = property(
        lambda s: int(np.prod([sum(c.count for c in axis) for axis in s.axes])),
        doc="number of nodes before de-duplication",
    )

    @classmethod
    def uniform(cls, count, dim=1):
        """
        ``count`` uniform nodes per axis.

        :param int count: nodes per axis
        :param int dim: number of axes
        :rtype: SamplingPlan
        """
        return cls([[BetaSample(count, 1.0, 1.0)] for _ in range(dim)])

    def union(self, other):
        """
        The plan drawing, on every axis, the nodes of both plans.

        :param SamplingPlan other: the other plan
        :rtype: SamplingPlan
        """
        if other.dim != self.dim:
            raise RitzValueError(other.dim, "dim", f"expected {self.dim}")
        return SamplingPlan([a + b for a, b in zip(self.axes, other.axes)])

    def scaled(self, count):
        """
        A plan with the same components and ``count`` nodes per axis, split
        in proportion.

        :param int count: nodes per axis
        :rtype: SamplingPlan
        """
        axes = []
        for axis in self.axes:
            total = sum(c.count for c in axis)
            axes.append(
                [c._replace(count=max(1, round(c.count * count / total))) for c in axis]
            )
        return SamplingPlan(axes)


class QuadBatch:
    """
    Nodes and weights of a tensor product quadrature rule.
    """

    def __init__(self, axis_nodes, axis_weights, seed=None):
        """
        Initializer.

        :param axis_nodes: sorted nodes of each axis
        :type axis_nodes: sequence of ndarray
        :param axis_weights: weights of each axis
        :type axis_weights: sequence of ndarray
        :param seed: the integer seed the batch was drawn from, if any
        :type seed: int or NoneType
        """
        self.seed = seed
        self.axis_nodes = tuple(np.asarray(n, dtype=float) for n in axis_nodes)
        self.axis_weights = tuple(np.asarray(w, dtype=float) for w in axis_weights)
        if len(self.axis_nodes) == 1:
            self.nodes = self.axis_nodes[0].reshape(-1, 1)
            self.weights = self.axis_weights[0]
        else:
            grids = np.meshgrid(*self.axis_nodes, indexing="ij")
            self.nodes = np.column_stack([g.ravel() for g in grids])
            self.weights = np.multiply.outer(*self.axis_weights).ravel()

    def __len__(self):
        return self.weights.shape[0]

    dim = property(lambda s: len(s.axis_nodes), doc="number of axes")
    volume = property(lambda s: float(np.sum(s.weights)), doc="sum of the weights")


class Quadrature:
    """
    Sampling of batches and integration over them.
    """

    @staticmethod
    def sample_beta(a, b, rng, size=None):
        """
        Beta(a, b) variates.

        :param float a: first shape parameter
        :param float b: second shape parameter
        :param rng: the generator
        :type rng: numpy.random.Generator
        :param size: number of variates
        :type size: int or NoneType
        :rtype: ndarray or float

        :raises RitzValueError: if a or b is not positive
        """
        if not (a > 0 and b > 0):
            raise RitzValueError((a, b), "beta", "shape parameters must be positive")
        return rng.beta(a, b, size)

    @staticmethod
    def composite_weights(nodes):
        """
        Cell lengths between neighbouring midpoints, with the end cells
        extended to 0 and 1.

        :param ndarray nodes: sorted distinct nodes in (0, 1)
        :rtype: ndarray

        Complexity: O(N)
        """
        edges = np.concatenate(([0.0], 0.5 * (nodes[:-1] + nodes[1:]), [1.0]))
        return np.diff(edges)

    @classmethod
    def sample_axis(cls, components, rng, avoid=()):
        """
        Sorted nodes and weights of one axis.

        A reflected component draws 1 - x, which is Beta(b, a).

        :param components: the components
        :type components: sequence of BetaSample
        :param rng: the generator
        :type rng: numpy.random.Generator
        :param avoid: points no node may equal
        :type avoid: sequence of float
        :returns: nodes and weights
        :rtype: tuple of ndarray
        """
        draws = []
        for component in components:
            a, b = (
                (component.b, component.a)
                if component.reflect
                else (component.a, component.b)
            )
            draws.append(cls.sample_beta(a, b, rng, component.count))
        nodes = np.clip(np.concatenate(draws), _LOW, _HIGH)
        for point in avoid:
            nodes = np.where(nodes == point, nodes + _config.RitzConfig.NUDGE, nodes)
        # sorts, and merges ties, whose combined weight is unchanged
        nodes = np.unique(nodes)
        return nodes, cls.composite_weights(nodes)

    @classmethod
    def sample_batch(cls, plan, seed, avoid=()):
        """
        Draw a batch.

        :param SamplingPlan plan: the plan
        :param seed: a seed or a generator, which is advanced
        :type seed: int or numpy.random.Generator or numpy.random.SeedSequence
        :param avoid: points no node may equal
        :type avoid: sequence of float
        :rtype: QuadBatch
        """
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        axes = [cls.sample_axis(axis, rng, avoid) for axis in plan.axes]
        return QuadBatch(
            [n for n, _ in axes],
            [w for _, w in axes],
            seed=seed if isinstance(seed, numbers.Integral) else None,
        )

    @staticmethod
    def integrate(batch, integrand):
        """
        Approximate the integral of ``integrand`` over the unit cube.

        :param QuadBatch batch: the batch
        :param integrand: maps (N, d) nodes to N values
        :type integrand: callable
        :returns: the pairwise weighted sum
        :rtype: float
        """
        values = np.asarray(integrand(batch.nodes), dtype=float)
        result = float(np.sum(batch.weights * values))
        if not np.isfinite(result):
            _LOGGER.warning(
                "integral is %r; %d of %d integrand values are not finite",
                result,
                int(np.sum(~np.isfinite(values))),
                values.size,
            )
        return result
