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
Constants required by the package.
"""


class _Constant:
    """Class to generate named enumerations."""

    # pylint: disable=too-few-public-methods

    def __init__(self, name, doc):
        """
        Initializer.

        :param str name: the name, as written in configuration and output
        :param str doc: explanation of the constant
        """
        self._name = name
        self._doc = doc

    def __str__(self):
        return self._name

    def __repr__(self):
        return f"{self.__class__.__name__}({self._name})"

    # pylint: disable=protected-access
    name = property(lambda s: s._name, doc="name of the constant")
    doc = property(lambda s: s._doc, doc="explanation of the constant")


class _FormulationKind(_Constant):
    """Kinds of variational formulation."""


class _Method(_Constant):
    """Training methods."""

    # pylint: disable=too-few-public-methods

    def __init__(self, name, doc, nested):
        """
        Initializer.

        :param str name: the name
        :param str doc: explanation of the method
        :param bool nested: True if the method alternates two loops
        """
        super().__init__(name, doc)
        self._nested = nested

    # pylint: disable=protected-access
    nested = property(lambda s: s._nested, doc="whether there is an inner loop")


class FormulationKinds:
    """Static class for accessing formulation kinds."""

    # pylint: disable=too-few-public-methods

    WEAK_SPD = _FormulationKind(
        "WeakSPD", "Symmetric positive-definite bilinear form, U = V."
    )
    STRONG = _FormulationKind("Strong", "b(u, v) = (Au, v) with V = L2.")
    ULTRAWEAK = _FormulationKind(
        "Ultraweak", "b(u, v) = (u, A'v) with U = L2 and the adjoint carrying the BCs."
    )

    _KINDS = [WEAK_SPD, STRONG, ULTRAWEAK]

    @classmethod
    def KINDS(cls):  # pylint: disable=invalid-name
        """Kinds of this class."""
        return cls._KINDS[:]


class Methods:
    """Static class for accessing training methods."""

    # pylint: disable=too-few-public-methods

    WAN = _Method("wan", "Min-max on the normalized residual.", True)
    DRM = _Method("drm", "Ritz minimization in the energy norm.", False)
    GDRM = _Method("gdrm", "Ritz minimization through the trial-to-test map.", False)
    ADJOINT_DRM = _Method(
        "adjoint_drm", "Ritz minimization of the adjoint energy over tests.", False
    )
    D2RM = _Method("d2rm", "Nested Ritz minimizations through a learned map.", True)

    _METHODS = [WAN, DRM, GDRM, ADJOINT_DRM, D2RM]

    @classmethod
    def METHODS(cls):  # pylint: disable=invalid-name
        """Methods of this class."""
        return cls._METHODS[:]

    @classmethod
    def get(cls, name):
        """
        Get the method with this name.

        :param str name: the method name
        :returns: the method or None
        :rtype: _Method or NoneType
        """
        return next((m for m in cls._METHODS if m.name == name), None)


class LossTags:
    """Tags under which loss values are recorded."""

    # pylint: disable=too-few-public-methods

    NORMALIZED_RESIDUAL = "J"
    RITZ_TRIAL_TO_TEST = "F_T"
    RITZ_COMPOSED = "F_tau"
    INNER_FIT = "L_u"
    RITZ_ADJOINT = "F_adjoint"


class Loops:
    """Names of the loops of a training run."""

    # pylint: disable=too-few-public-methods

    OUTER = "outer"
    INNER = "inner"
    WARMUP = "warmup"
