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
Fully connected networks, boundary masks and the composed test network.
"""

# isort: STDLIB
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._autodiff import ACTIVATIONS, Duals, DualValue, ParamStore, Tape
from ._errors import RitzUnsupportedError, RitzValueError

Jet = namedtuple("Jet", ["value", "gradient", "second"])


def as_points(points, dim):
    """
    Coerce to an (N, dim) float array.

    :param points: points; a 1-D array is read as N points when dim is 1
    :type points: ndarray or sequence
    :param int dim: the dimension
    :rtype: ndarray
    :raises RitzValueError: if the shape does not fit
    """
    points = np.asarray(points, dtype=float)
    if points.ndim <= 1 and dim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[1] != dim:
        raise RitzValueError(points.shape, "points", f"expected (N, {dim})")
    return points


def _check_order(order):
    if order not in (0, 1, 2):
        raise RitzUnsupportedError(f"order {order}", "forward evaluation")


class NetworkSpec:
    """
    Shape of a fully connected network: hidden layers with bias and
    activation, then a linear output layer without bias.
    """

    _FMT_STR = ", ".join(
        ["input_dim=%(input_dim)s", "widths=%(widths)s", "activation=%(activation)s"]
    )

    def __init__(self, input_dim, widths=(20, 20), activation="tanh"):
        """
        Initializer.

        :param int input_dim: number of inputs
        :param widths: hidden layer widths
        :type widths: sequence of int
        :param str activation: one of tanh, sigmoid, sin, linear

        :raises RitzValueError: on an empty or non-positive width list, or an
        unknown activation
        """
        widths = tuple(widths)
        if input_dim < 1:
            raise RitzValueError(input_dim, "input_dim", "must be positive")
        if not widths or any(w < 1 for w in widths):
            raise RitzValueError(widths, "widths", "need at least one positive width")
        if activation not in ACTIVATIONS:
            raise RitzValueError(
                activation, "activation", f"known: {', '.join(sorted(ACTIVATIONS))}"
            )
        self.input_dim = int(input_dim)
        self.widths = tuple(int(w) for w in widths)
        self.activation = activation

    def __str__(self):  # pragma: no cover
        values = {
            "input_dim": self.input_dim,
            "widths": self.widths,
            "activation": self.activation,
        }
        return f"NetworkSpec({self._FMT_STR % values})"

    __repr__ = __str__

    depth = property(lambda s: len(s.widths), doc="number of hidden layers")

    def layer_shapes(self):
        """
        (layer, name, shape) of every block, in storage order.

        :rtype: list of tuple
        """
        shapes = []
        previous = self.input_dim
        for layer, width in enumerate(self.widths, start=1):
            shapes.append((layer, "weight", (width, previous)))
            shapes.append((layer, "bias", (width,)))
            previous = width
        shapes.append((self.depth + 1, "weight", (1, previous)))
        return shapes

    def parameter_count(self):
        """
        Number of parameters.

        :rtype: int
        """
        return sum(int(np.prod(shape)) for _, _, shape in self.layer_shapes())

    def zeros(self):
        """
        A store of zero parameters.

        :rtype: ParamStore
        """
        return ParamStore.from_shapes(self.layer_shapes())

    def initialize(self, seed):
        """
        Glorot uniform weights and zero biases.

        :param seed: a seed or a generator
        :type seed: int or numpy.random.SeedSequence or numpy.random.Generator
        :rtype: ParamStore
        """
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        store = self.zeros()
        for layer, name, shape in self.layer_shapes():
            if name == "weight":
                fan_out, fan_in = shape
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                store.block(layer, name)[...] = rng.uniform(-limit, limit, shape)
        return store


class Networks:
    """
    Forward evaluation of networks.
    """

    @staticmethod
    def forward_core(spec, params, inputs):
        """
        Propagate an (N, input_dim) dual through the network.

        :param NetworkSpec spec: the shape
        :param ParamStore params: the parameters
        :param DualValue inputs: the inputs
        :returns: the (N,) output dual, of the order of ``inputs``
        :rtype: DualValue
        """
        count, width = inputs.value.shape
        if width != spec.input_dim:
            raise RitzValueError(width, "inputs", f"expected {spec.input_dim} columns")
        activation = ACTIVATIONS[spec.activation]
        views = params.views(inputs.tape)
        hidden = inputs
        for layer in range(1, spec.depth + 1):
            hidden = activation(
                Duals.affine(hidden, views[(layer, "weight")], views[(layer, "bias")])
            )
        output = Duals.affine(hidden, views[(spec.depth + 1, "weight")])
        return output.reshaped((count,))

    @classmethod
    def forward_eval(cls, spec, params, points, order, tape=None):
        """
        Network value and spatial derivatives at ``points``.

        :param NetworkSpec spec: the shape
        :param ParamStore params: the parameters
        :param ndarray points: (N, input_dim) points
        :param int order: 0, 1 or 2
        :param tape: the tape to record on; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: DualValue

        :raises RitzUnsupportedError: for order above 2
        """
        _check_order(order)
        tape = Tape() if tape is None else tape
        points = as_points(points, spec.input_dim)
        return cls.forward_core(spec, params, DualValue.inputs(tape, points, order))

    @staticmethod
    def eval_masked(net, points, order, tape=None):
        """
        A masked network at ``points``.

        :param MaskedNetwork net: the network
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: DualValue
        """
        return net.evaluate(Tape() if tape is None else tape, points, order)

    @staticmethod
    def eval_test_composition(pair, points, order, tape=None):
        """
        The composed test function x -> tau(x, u(x)) at ``points``.

        :param TrialTestPair pair: the pair
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :param tape: the tape; a new one if omitted
        :type tape: Tape or NoneType
        :rtype: DualValue
        """
        return pair.evaluate(Tape() if tape is None else tape, points, order)

    @staticmethod
    def jet(field, points, order=1):
        """
        Arrays of a field's value and derivatives.

        :param field: anything with an ``evaluate(tape, points, order)`` method
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: Jet
        """
        dual = field.evaluate(Tape(), points, order)
        gradient = None
        second = None
        if dual.d_dx:
            gradient = np.column_stack([d.value for d in dual.d_dx])
        if dual.d2_dx2 is not None:
            second = np.column_stack([d.value for d in dual.d2_dx2])
        return Jet(np.array(dual.value.value), gradient, second)

    @classmethod
    def values(cls, field, points):
        """
        A field's values at ``points``.

        :param field: anything with an ``evaluate(tape, points, order)`` method
        :param ndarray points: the points
        :rtype: ndarray
        """
        return cls.jet(field, points, 0).value


class BoundaryMask:
    """
    Enforces Dirichlet data: u = lift + cutoff * raw, with cutoff vanishing
    on the Dirichlet boundary and lift equal to the data there.
    """

    def __init__(self, name, cutoff=None, lift=None):
        """
        Initializer.

        :param str name: the name
        :param cutoff: maps coordinate duals to a dual; None means 1
        :type cutoff: callable or NoneType
        :param lift: maps coordinate duals to a dual; None means 0
        :type lift: callable or NoneType
        """
        self.name = name
        self.cutoff = cutoff
        self.lift = lift

    def __repr__(self):
        return f"BoundaryMask({self.name})"

    def apply(self, raw, points):
        """
        Mask a raw network output.

        :param DualValue raw: the raw output
        :param ndarray points: (N, d) points it was evaluated at
        :rtype: DualValue
        """
        if self.cutoff is None and self.lift is None:
            return raw
        coords = [
            DualValue.coordinate(raw.tape, points, axis, raw.order)
            for axis in range(points.shape[1])
        ]
        masked = raw if self.cutoff is None else self.cutoff(coords) * raw
        return masked if self.lift is None else self.lift(coords) + masked


class BoundaryMasks:
    """Static class for accessing boundary masks."""

    # pylint: disable=too-few-public-methods

    FREE = BoundaryMask("free")
    INTERVAL = BoundaryMask("interval", lambda c: c[0] * (1.0 - c[0]))
    OUTFLOW = BoundaryMask("outflow", lambda c: 1.0 - c[0])
    CORNER = BoundaryMask("corner", lambda c: c[0] * c[1])

    _MASKS = [FREE, INTERVAL, OUTFLOW, CORNER]

    @classmethod
    def MASKS(cls):  # pylint: disable=invalid-name
        """Masks of this class."""
        return cls._MASKS[:]


class MaskedNetwork:
    """
    A network together with its parameters and boundary mask.
    """

    def __init__(self, spec, params, mask=BoundaryMasks.FREE):
        """
        Initializer.

        :param NetworkSpec spec: the shape
        :param ParamStore params: the parameters, updated in place by training
        :param BoundaryMask mask: the mask
        """
        if params.size != spec.parameter_count():
            raise RitzValueError(
                params.size, "params", f"expected {spec.parameter_count()}"
            )
        self.spec = spec
        self.params = params
        self.mask = mask

    dim = property(lambda s: s.spec.input_dim, doc="spatial dimension")

    def evaluate(self, tape, points, order):
        """
        The masked network at ``points``.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: DualValue
        """
        _check_order(order)
        points = as_points(points, self.dim)
        raw = Networks.forward_core(
            self.spec, self.params, DualValue.inputs(tape, points, order)
        )
        return self.mask.apply(raw, points)


class TrialTestPair:
    """
    A trial network and a network tau, composed into the test function
    x -> mask(x) * tau(x, u(x)).
    """

    def __init__(self, trial, tau_spec, tau_params, tau_mask=BoundaryMasks.FREE):
        """
        Initializer.

        :param MaskedNetwork trial: the trial network
        :param NetworkSpec tau_spec: shape of tau; takes d + 1 inputs
        :param ParamStore tau_params: parameters of tau
        :param BoundaryMask tau_mask: mask applied to the composition
        """
        if tau_spec.input_dim != trial.dim + 1:
            raise RitzValueError(
                tau_spec.input_dim, "tau_spec.input_dim", f"expected {trial.dim + 1}"
            )
        self.trial = trial
        self.tau = MaskedNetwork(tau_spec, tau_params)
        self.tau_mask = tau_mask

    dim = property(lambda s: s.trial.dim, doc="spatial dimension")
    tau_params = property(lambda s: s.tau.params, doc="parameters of tau")

    def evaluate(self, tape, points, order):
        """
        The composed test function at ``points``.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: DualValue
        """
        _check_order(order)
        points = as_points(points, self.dim)
        count = points.shape[0]
        trial = self.trial.evaluate(tape, points, order)
        inputs = DualValue.hstack(
            [DualValue.inputs(tape, points, order), trial.reshaped((count, 1))]
        )
        raw = Networks.forward_core(self.tau.spec, self.tau.params, inputs)
        return self.tau_mask.apply(raw, points)


class Combination:
    """
    A linear combination of fields.
    """

    def __init__(self, terms):
        """
        Initializer.

        :param terms: (coefficient, field) pairs
        :type terms: sequence of tuple
        """
        self.terms = tuple(terms)

    def evaluate(self, tape, points, order):
        """
        The combination at ``points``.

        :param Tape tape: the tape
        :param ndarray points: the points
        :param int order: 0, 1 or 2
        :rtype: DualValue
        """
        total = None
        for coefficient, field in self.terms:
            term = field.evaluate(tape, points, order) * float(coefficient)
            total = term if total is None else total + term
        return total
