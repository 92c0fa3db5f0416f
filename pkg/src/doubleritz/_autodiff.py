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
Reverse-mode differentiation over array valued nodes, with forward mode
duals carrying first and pure second spatial derivatives.

Spatial derivatives are propagated forward through a network as ordinary
tape nodes, so a single reverse sweep differentiates any loss built from
them with respect to the network parameters.
"""

# isort: STDLIB
import numbers
from collections import namedtuple

# isort: THIRDPARTY
import numpy as np

from ._errors import RitzAssertError, RitzUnsupportedError, RitzValueError


def _unbroadcast(grad, shape):
    """
    Sum ``grad`` down to ``shape``, undoing numpy broadcasting.

    :param grad: the incoming adjoint
    :type grad: ndarray
    :param tuple shape: the shape of the operand
    :rtype: ndarray
    """
    while np.ndim(grad) > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Var:
    """
    A handle on one tape node.
    """

    __slots__ = ("tape", "index")

    # make numpy defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, tape, index):
        self.tape = tape
        self.index = index

    def __repr__(self):
        return f"Var({self.index}, shape={self.shape})"

    value = property(lambda s: s.tape.value(s.index), doc="the node's array")
    shape = property(lambda s: np.shape(s.value), doc="shape of the node's array")

    def _coerce(self, other):
        if isinstance(other, Var):
            if other.tape is not self.tape:
                raise RitzAssertError("operands are recorded on different tapes")
            return other
        if isinstance(other, (numbers.Real, np.ndarray)):
            return self.tape.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right = self.value, other.value
        shapes = (np.shape(left), np.shape(right))
        return self.tape.record(
            "add",
            left + right,
            (self, other),
            lambda g: (_unbroadcast(g, shapes[0]), _unbroadcast(g, shapes[1])),
        )

    def __radd__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right = self.value, other.value
        shapes = (np.shape(left), np.shape(right))
        return self.tape.record(
            "sub",
            left - right,
            (self, other),
            lambda g: (_unbroadcast(g, shapes[0]), _unbroadcast(-g, shapes[1])),
        )

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right = self.value, other.value
        shapes = (np.shape(left), np.shape(right))
        return self.tape.record(
            "mul",
            left * right,
            (self, other),
            lambda g: (
                _unbroadcast(g * right, shapes[0]),
                _unbroadcast(g * left, shapes[1]),
            ),
        )

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        left, right = self.value, other.value
        shapes = (np.shape(left), np.shape(right))
        return self.tape.record(
            "div",
            left / right,
            (self, other),
            lambda g: (
                _unbroadcast(g / right, shapes[0]),
                _unbroadcast(-g * left / (right * right), shapes[1]),
            ),
        )

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __neg__(self):
        return self.tape.record("neg", -self.value, (self,), lambda g: (-g,))

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Real):
            raise RitzUnsupportedError("pow", "a non-constant exponent")
        base = self.value
        return self.tape.record(
            "pow",
            base**exponent,
            (self,),
            lambda g: (g * exponent * base ** (exponent - 1),),
        )


class Tape:
    """
    An append-only record of operations.

    Nodes are numbered in creation order; every node's parents precede it.
    Constants are recorded but never receive adjoints.
    """

    def __init__(self):
        self._kinds = []
        self._values = []
        self._parents = []
        self._backwards = []
        self._live = []
        self._bound = {}

    def __len__(self):
        return len(self._values)

    def value(self, index):
        """
        The value of a node.

        :param int index: the node index
        :rtype: ndarray
        """
        return self._values[index]

    def kind(self, index):
        """
        The operation that produced a node.

        :param int index: the node index
        :rtype: str
        """
        return self._kinds[index]

    def parents(self, index):
        """
        The parent indices of a node.

        :param int index: the node index
        :rtype: tuple of int
        """
        return self._parents[index]

    def _append(self, kind, value, parents, backward, live):
        self._kinds.append(kind)
        self._values.append(value)
        self._parents.append(parents)
        self._backwards.append(backward)
        self._live.append(live)
        return Var(self, len(self._values) - 1)

    def record(self, kind, value, parents=(), backward=None):
        """
        Record an operation.

        :param str kind: the operation name
        :param ndarray value: the result
        :param parents: the operands
        :type parents: tuple of Var
        :param backward: maps the result's adjoint to the operands' adjoints
        :type backward: callable or NoneType
        :returns: the new node
        :rtype: Var
        """
        live = backward is not None and any(self._live[p.index] for p in parents)
        return self._append(
            kind,
            np.asarray(value, dtype=float),
            tuple(p.index for p in parents),
            backward if live else None,
            live,
        )

    def constant(self, value):
        """
        Record a constant.

        :param value: the value
        :type value: ndarray or float
        :rtype: Var
        """
        return self._append("constant", np.asarray(value, dtype=float), (), None, False)

    def bind(self, store):
        """
        The leaf node holding ``store``'s parameter vector on this tape.

        The leaf is created on first use and shared afterwards.

        :param ParamStore store: the parameters
        :rtype: Var
        """
        key = id(store)
        if key not in self._bound:
            leaf = self._append("leaf", store.values.copy(), (), None, True)
            self._bound[key] = (store, leaf)
        return self._bound[key][1]

    def _check(self, output):
        if not isinstance(output, Var) or output.tape is not self:
            raise RitzAssertError("output is not a node of this tape")
        if not 0 <= output.index < len(self._values):
            raise RitzAssertError(f"output index {output.index} is dangling")

    def sweep(self, output):
        """
        Propagate adjoints from ``output`` back to every node it depends on.

        The seed adjoint is all ones, so a non-scalar output is treated as
        the sum of its entries.

        :param Var output: the output node
        :returns: adjoints indexed by node, None where no path exists
        :rtype: list
        """
        self._check(output)
        adjoints = [None] * (output.index + 1)
        adjoints[output.index] = np.ones_like(self._values[output.index])
        for node in range(output.index, -1, -1):
            adjoint = adjoints[node]
            backward = self._backwards[node]
            if adjoint is None or backward is None:
                continue
            for parent, grad in zip(self._parents[node], backward(adjoint)):
                if not self._live[parent]:
                    continue
                if adjoints[parent] is None:
                    adjoints[parent] = grad
                else:
                    adjoints[parent] = adjoints[parent] + grad
        return adjoints

    def gradient(self, output, store):
        """
        The gradient of ``output`` with respect to ``store``.

        :param Var output: the output node
        :param ParamStore store: the parameters
        :returns: an array of the same length as the parameter vector
        :rtype: ndarray
        """
        self._check(output)
        entry = self._bound.get(id(store))
        if entry is None or entry[1].index > output.index:
            return np.zeros(store.size)
        adjoint = self.sweep(output)[entry[1].index]
        return np.zeros(store.size) if adjoint is None else np.array(adjoint)


class Ops:
    """
    Array operations recorded on a tape.
    """

    @staticmethod
    def tanh(x):
        """
        Hyperbolic tangent.

        :param Var x: the operand
        :rtype: Var
        """
        t = np.tanh(x.value)
        return x.tape.record("tanh", t, (x,), lambda g: (g * (1.0 - t * t),))

    @staticmethod
    def sigmoid(x):
        """
        Logistic function.

        :param Var x: the operand
        :rtype: Var
        """
        s = 0.5 * (1.0 + np.tanh(0.5 * x.value))
        return x.tape.record("sigmoid", s, (x,), lambda g: (g * s * (1.0 - s),))

    @staticmethod
    def sin(x):
        """
        Sine.

        :param Var x: the operand
        :rtype: Var
        """
        value = x.value
        return x.tape.record("sin", np.sin(value), (x,), lambda g: (g * np.cos(value),))

    @staticmethod
    def cos(x):
        """
        Cosine.

        :param Var x: the operand
        :rtype: Var
        """
        value = x.value
        return x.tape.record("cos", np.cos(value), (x,), lambda g: (-g * np.sin(value),))

    @staticmethod
    def exp(x):
        """
        Exponential.

        :param Var x: the operand
        :rtype: Var
        """
        e = np.exp(x.value)
        return x.tape.record("exp", e, (x,), lambda g: (g * e,))

    @staticmethod
    def sqrt(x):
        """
        Square root.

        :param Var x: the operand
        :rtype: Var
        """
        s = np.sqrt(x.value)
        return x.tape.record("sqrt", s, (x,), lambda g: (0.5 * g / s,))

    @staticmethod
    def matmul(a, b):
        """
        Matrix product of two 2-D nodes.

        :param Var a: left operand
        :param Var b: right operand
        :rtype: Var
        """
        left, right = a.value, b.value
        return a.tape.record(
            "matmul", left @ right, (a, b), lambda g: (g @ right.T, left.T @ g)
        )

    @staticmethod
    def transpose(a):
        """
        Transpose of a 2-D node.

        :param Var a: the operand
        :rtype: Var
        """
        return a.tape.record("transpose", a.value.T, (a,), lambda g: (g.T,))

    @staticmethod
    def reshape(a, shape):
        """
        Reshape a node.

        :param Var a: the operand
        :param tuple shape: the new shape
        :rtype: Var
        """
        original = np.shape(a.value)
        return a.tape.record(
            "reshape",
            np.reshape(a.value, shape),
            (a,),
            lambda g: (np.reshape(g, original),),
        )

    @staticmethod
    def hstack(columns):
        """
        Stack 2-D nodes with equal row counts side by side.

        :param columns: the blocks
        :type columns: sequence of Var
        :rtype: Var
        """
        columns = list(columns)
        splits = np.cumsum([np.shape(c.value)[1] for c in columns])[:-1]
        return columns[0].tape.record(
            "hstack",
            np.hstack([c.value for c in columns]),
            tuple(columns),
            lambda g: tuple(np.split(g, splits, axis=1)),
        )

    @staticmethod
    def take(flat, offset, shape):
        """
        A block of a flat vector, reshaped.

        :param Var flat: the vector
        :param int offset: start of the block
        :param tuple shape: shape of the block
        :rtype: Var
        """
        size = int(np.prod(shape))
        length = np.shape(flat.value)[0]

        def backward(g):
            full = np.zeros(length)
            full[offset : offset + size] = np.ravel(g)
            return (full,)

        return flat.tape.record(
            "take",
            flat.value[offset : offset + size].reshape(shape),
            (flat,),
            backward,
        )

    @staticmethod
    def total(a):
        """
        Sum of all entries.

        :param Var a: the operand
        :rtype: Var
        """
        shape = np.shape(a.value)
        return a.tape.record(
            "sum", np.sum(a.value), (a,), lambda g: (np.full(shape, g, dtype=float),)
        )

    @staticmethod
    def weighted_sum(a, weights):
        """
        Sum of ``weights * a``; summation is pairwise.

        :param Var a: the operand
        :param ndarray weights: constant weights, shaped like ``a``
        :rtype: Var
        """
        weights = np.asarray(weights, dtype=float)
        return a.tape.record(
            "weighted_sum",
            np.sum(weights * a.value),
            (a,),
            lambda g: (g * weights,),
        )


class DualValue:
    """
    A value together with its first and pure second spatial derivatives.

    Every component is a tape node of the same shape. ``d_dx`` holds one
    node per spatial axis and is empty at order 0; ``d2_dx2`` is present
    only at order 2.
    """

    __slots__ = ("value", "d_dx", "d2_dx2")

    def __init__(self, value, d_dx=(), d2_dx2=None):
        """
        Initializer.

        :param Var value: the value
        :param d_dx: first derivatives, one per axis
        :type d_dx: tuple of Var
        :param d2_dx2: pure second derivatives, one per axis
        :type d2_dx2: tuple of Var or NoneType
        """
        self.value = value
        self.d_dx = tuple(d_dx)
        self.d2_dx2 = None if d2_dx2 is None else tuple(d2_dx2)
        if self.d2_dx2 is not None and len(self.d2_dx2) != len(self.d_dx):
            raise RitzAssertError("second derivatives without matching first ones")

    def __repr__(self):
        return f"DualValue(order={self.order}, shape={self.value.shape})"

    order = property(
        lambda s: 0 if not s.d_dx else (1 if s.d2_dx2 is None else 2),
        doc="highest derivative order carried",
    )
    tape = property(lambda s: s.value.tape, doc="the tape of the components")

    @classmethod
    def from_arrays(cls, tape, value, gradient=None, second=None, order=0):
        """
        A constant dual from arrays.

        :param Tape tape: the tape
        :param ndarray value: values, shape (N,)
        :param gradient: first derivatives, shape (N, d)
        :type gradient: ndarray or NoneType
        :param second: pure second derivatives, shape (N, d)
        :type second: ndarray or NoneType
        :param int order: the order to carry

        :raises RitzUnsupportedError: if derivatives needed for order are absent
        """
        if order >= 1 and gradient is None:
            raise RitzUnsupportedError(f"order {order}", "a field without derivatives")
        if order >= 2 and second is None:
            raise RitzUnsupportedError(f"order {order}", "a field without second derivatives")
        d_dx = ()
        d2_dx2 = None
        if order >= 1:
            gradient = np.asarray(gradient, dtype=float)
            d_dx = tuple(tape.constant(gradient[:, a]) for a in range(gradient.shape[1]))
        if order >= 2:
            second = np.asarray(second, dtype=float)
            d2_dx2 = tuple(tape.constant(second[:, a]) for a in range(second.shape[1]))
        return cls(tape.constant(value), d_dx, d2_dx2)

    @classmethod
    def coordinate(cls, tape, points, axis, order):
        """
        The coordinate function ``x -> x[axis]`` at ``points``.

        :param Tape tape: the tape
        :param ndarray points: shape (N, d)
        :param int axis: the axis
        :param int order: the order to carry
        :rtype: DualValue
        """
        count, dim = points.shape
        gradient = np.zeros((count, dim))
        gradient[:, axis] = 1.0
        return cls.from_arrays(
            tape, points[:, axis], gradient, np.zeros((count, dim)), order
        )

    @classmethod
    def inputs(cls, tape, points, order):
        """
        The identity map at ``points``, as an (N, d) dual.

        :param Tape tape: the tape
        :param ndarray points: shape (N, d)
        :param int order: the order to carry
        :rtype: DualValue
        """
        count, dim = points.shape
        value = tape.constant(points)
        if order == 0:
            return cls(value)
        eye = np.eye(dim)
        d_dx = tuple(tape.constant(np.tile(eye[a], (count, 1))) for a in range(dim))
        d2_dx2 = None
        if order == 2:
            d2_dx2 = tuple(tape.constant(np.zeros((count, dim))) for _ in range(dim))
        return cls(value, d_dx, d2_dx2)

    @staticmethod
    def hstack(duals):
        """
        Stack (N, k) duals of equal order side by side.

        :param duals: the blocks
        :type duals: sequence of DualValue
        :rtype: DualValue
        """
        duals = list(duals)
        order = min(d.order for d in duals)
        duals = [d.truncated(order) for d in duals]
        value = Ops.hstack([d.value for d in duals])
        d_dx = tuple(
            Ops.hstack([d.d_dx[a] for d in duals]) for a in range(len(duals[0].d_dx))
        )
        d2_dx2 = None
        if order == 2:
            d2_dx2 = tuple(
                Ops.hstack([d.d2_dx2[a] for d in duals])
                for a in range(len(duals[0].d2_dx2))
            )
        return DualValue(value, d_dx, d2_dx2)

    def truncated(self, order):
        """
        This dual carrying at most ``order`` derivatives.

        :param int order: the order
        :rtype: DualValue
        """
        if order >= self.order:
            return self
        if order == 0:
            return DualValue(self.value)
        return DualValue(self.value, self.d_dx)

    def map(self, function):
        """
        Apply a linear node map to every component.

        :param function: maps a Var to a Var
        :type function: callable
        :rtype: DualValue
        """
        return DualValue(
            function(self.value),
            tuple(function(d) for d in self.d_dx),
            None if self.d2_dx2 is None else tuple(function(d) for d in self.d2_dx2),
        )

    def reshaped(self, shape):
        """
        Reshape every component.

        :param tuple shape: the new shape
        :rtype: DualValue
        """
        return self.map(lambda v: Ops.reshape(v, shape))

    def chain(self, f, df, d2f=None):
        """
        Compose with a scalar function, given its derivatives at the value.

        :param Var f: f(value)
        :param Var df: f'(value)
        :param d2f: f''(value); needed at order 2
        :type d2f: Var or NoneType
        :rtype: DualValue
        """
        d_dx = tuple(df * d for d in self.d_dx)
        d2_dx2 = None
        if self.d2_dx2 is not None:
            d2_dx2 = tuple(
                d2f * d1 * d1 + df * d2 for d1, d2 in zip(self.d_dx, self.d2_dx2)
            )
        return DualValue(f, d_dx, d2_dx2)

    def _pair(self, other):
        order = min(self.order, other.order)
        return self.truncated(order), other.truncated(order)

    def __add__(self, other):
        if not isinstance(other, DualValue):
            return DualValue(self.value + other, self.d_dx, self.d2_dx2)
        left, right = self._pair(other)
        return DualValue(
            left.value + right.value,
            tuple(a + b for a, b in zip(left.d_dx, right.d_dx)),
            None
            if left.d2_dx2 is None
            else tuple(a + b for a, b in zip(left.d2_dx2, right.d2_dx2)),
        )

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DualValue):
            return self.map(lambda v: v * other)
        left, right = self._pair(other)
        d_dx = tuple(
            da * right.value + left.value * db for da, db in zip(left.d_dx, right.d_dx)
        )
        d2_dx2 = None
        if left.d2_dx2 is not None:
            d2_dx2 = tuple(
                d2a * right.value + 2.0 * (da * db) + left.value * d2b
                for da, db, d2a, d2b in zip(
                    left.d_dx, right.d_dx, left.d2_dx2, right.d2_dx2
                )
            )
        return DualValue(left.value * right.value, d_dx, d2_dx2)

    __rmul__ = __mul__


class Duals:
    """
    Network building blocks acting on duals.
    """

    @staticmethod
    def tanh(u):
        """
        tanh, with tanh' = 1 - t^2 and tanh'' = -2 t (1 - t^2).

        :param DualValue u: the operand
        :rtype: DualValue
        """
        t = Ops.tanh(u.value)
        if u.order == 0:
            return DualValue(t)
        d1 = 1.0 - t * t
        return u.chain(t, d1, -2.0 * t * d1 if u.order == 2 else None)

    @staticmethod
    def sigmoid(u):
        """
        Logistic function, with s' = s (1 - s) and s'' = s' (1 - 2 s).

        :param DualValue u: the operand
        :rtype: DualValue
        """
        s = Ops.sigmoid(u.value)
        if u.order == 0:
            return DualValue(s)
        d1 = s * (1.0 - s)
        return u.chain(s, d1, d1 * (1.0 - 2.0 * s) if u.order == 2 else None)

    @staticmethod
    def sin(u):
        """
        Sine.

        :param DualValue u: the operand
        :rtype: DualValue
        """
        s = Ops.sin(u.value)
        if u.order == 0:
            return DualValue(s)
        return u.chain(s, Ops.cos(u.value), -s if u.order == 2 else None)

    @staticmethod
    def linear(u):
        """
        Identity.

        :param DualValue u: the operand
        :rtype: DualValue
        """
        return u

    @staticmethod
    def affine(x, weight, bias=None):
        """
        ``x W^T + b`` for a (N, m) dual ``x`` and a (n, m) weight node.

        :param DualValue x: the inputs
        :param Var weight: the weights
        :param bias: the bias, shape (n,)
        :type bias: Var or NoneType
        :rtype: DualValue
        """
        weight_t = Ops.transpose(weight)
        value = Ops.matmul(x.value, weight_t)
        if bias is not None:
            value = value + bias
        return DualValue(
            value,
            tuple(Ops.matmul(d, weight_t) for d in x.d_dx),
            None
            if x.d2_dx2 is None
            else tuple(Ops.matmul(d, weight_t) for d in x.d2_dx2),
        )


ACTIVATIONS = {
    "tanh": Duals.tanh,
    "sigmoid": Duals.sigmoid,
    "sin": Duals.sin,
    "linear": Duals.linear,
}


LayerSlot = namedtuple("LayerSlot", ["layer", "name", "shape", "offset"])


class ParamStore:
    """
    A flat parameter vector and the layout of the blocks within it.
    """

    def __init__(self, values, layout):
        """
        Initializer.

        :param ndarray values: the flat vector
        :param layout: the blocks, contiguous and covering the vector
        :type layout: sequence of LayerSlot

        :raises RitzValueError: if the layout does not tile the vector
        """
        values = np.array(values, dtype=float)
        layout = tuple(layout)
        offset = 0
        for slot in layout:
            if slot.offset != offset:
                raise RitzValueError(slot, "layout", "blocks must be contiguous")
            offset += int(np.prod(slot.shape))
        if values.ndim != 1 or offset != values.shape[0]:
            raise RitzValueError(
                values.shape, "values", f"layout covers {offset} parameters"
            )
        self.values = values
        self.layout = layout

    def __repr__(self):
        return f"ParamStore(size={self.size})"

    size = property(lambda s: s.values.shape[0], doc="number of parameters")

    @classmethod
    def from_shapes(cls, shapes, values=None):
        """
        A store with blocks of the given shapes, laid out in order.

        :param shapes: (layer, name, shape) triples
        :type shapes: sequence of tuple
        :param values: the flat vector; zeros if omitted
        :type values: ndarray or NoneType
        :rtype: ParamStore
        """
        layout = []
        offset = 0
        for layer, name, shape in shapes:
            layout.append(LayerSlot(layer, name, tuple(shape), offset))
            offset += int(np.prod(shape))
        return cls(np.zeros(offset) if values is None else values, layout)

    def copy(self):
        """
        An independent copy.

        :rtype: ParamStore
        """
        return ParamStore(self.values.copy(), self.layout)

    def shifted(self, delta):
        """
        A copy with ``delta`` added to the parameters.

        :param ndarray delta: the shift
        :rtype: ParamStore
        """
        return ParamStore(self.values + delta, self.layout)

    def slot(self, layer, name):
        """
        The slot of a block.

        :param int layer: the layer
        :param str name: the block name
        :rtype: LayerSlot
        :raises RitzValueError: if there is no such block
        """
        for slot in self.layout:
            if slot.layer == layer and slot.name == name:
                return slot
        raise RitzValueError((layer, name), "block", "no such block")

    def block(self, layer, name):
        """
        A writable view of a block.

        :param int layer: the layer
        :param str name: the block name
        :rtype: ndarray
        """
        slot = self.slot(layer, name)
        size = int(np.prod(slot.shape))
        return self.values[slot.offset : slot.offset + size].reshape(slot.shape)

    def views(self, tape):
        """
        Every block as a node of ``tape``, keyed by (layer, name).

        :param Tape tape: the tape
        :rtype: dict
        """
        leaf = tape.bind(self)
        return {
            (slot.layer, slot.name): Ops.take(leaf, slot.offset, slot.shape)
            for slot in self.layout
        }


class Gradients:
    """
    Parameter gradients and their finite difference check.
    """

    @staticmethod
    def param_gradient(tape, loss, params):
        """
        The gradient of a scalar loss node with respect to a parameter store.

        :param Tape tape: the tape
        :param Var loss: the loss
        :param ParamStore params: the parameters
        :rtype: ndarray
        """
        return tape.gradient(loss, params)

    @staticmethod
    def directional_check(params, build_loss, n_probes=5, h=1e-5, seed=0):
        """
        Compare the tape gradient with central differences along random
        unit directions.

        The deviation along d is |fd - g.d| / (|g.d| + eps), with fd the
        central difference and g the tape gradient.

        :param ParamStore params: the parameters
        :param build_loss: maps (tape, params) to a scalar loss node
        :type build_loss: callable
        :param int n_probes: number of directions
        :param float h: the step
        :param seed: seed for the directions
        :returns: the largest relative deviation
        :rtype: float

        Complexity: n_probes + 1 forward evaluations, one reverse sweep.
        """
        if not h > 0:
            raise RitzValueError(h, "h", "must be positive")
        tape = Tape()
        gradient = tape.gradient(build_loss(tape, params), params)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_probes):
            direction = rng.standard_normal(params.size)
            direction /= np.linalg.norm(direction)
            plus = float(build_loss(Tape(), params.shifted(h * direction)).value)
            minus = float(build_loss(Tape(), params.shifted(-h * direction)).value)
            estimate = (plus - minus) / (2.0 * h)
            exact = float(gradient @ direction)
            worst = max(
                worst, abs(estimate - exact) / (abs(exact) + np.finfo(float).eps)
            )
        return worst
