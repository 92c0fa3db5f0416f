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
Errors.
"""

# isort: STDLIB
import abc


class RitzError(Exception, metaclass=abc.ABCMeta):
    """
    Supertype of all errors for this package.
    """


class RitzValueError(RitzError):
    """
    Raised when a parameter has an unacceptable value.

    May also be raised when the parameter has an unacceptable type.
    """

    _FMT_STR = "value '%s' for parameter %s is unacceptable"

    def __init__(self, value, param, msg=None):
        """
        Initializer.

        :param object value: the value
        :param str param: the parameter
        :param str msg: an explanatory message
        """
        # pylint: disable=super-init-not-called
        self._value = value
        self._param = param
        self._msg = msg

    def __str__(self):
        if self._msg:
            fmt_str = self._FMT_STR + ": %s"
            return fmt_str % (self._value, self._param, self._msg)
        return self._FMT_STR % (self._value, self._param)


class RitzUnsupportedError(RitzError):
    """
    Raised when an operation is not defined for a formulation or field.
    """

    def __init__(self, operation, subject):
        """
        Initializer.

        :param str operation: the operation requested
        :param str subject: what it was requested of
        """
        # pylint: disable=super-init-not-called
        self._operation = operation
        self._subject = subject

    def __str__(self):
        return f"operation {self._operation} is not supported for {self._subject}"


class RitzNotFoundError(RitzError):
    """
    Raised when a registry lookup fails.
    """

    def __init__(self, name, known=()):
        # pylint: disable=super-init-not-called
        self._name = name
        self._known = tuple(known)

    def __str__(self):
        if self._known:
            return f"no entry named '{self._name}'; known: {', '.join(self._known)}"
        return f"no entry named '{self._name}'"


class DegenerateTestError(RitzError):
    """
    Raised when a test function has (numerically) vanishing norm, so that
    the normalized residual is undefined.
    """

    def __init__(self, norm_sq):
        # pylint: disable=super-init-not-called
        self.norm_sq = norm_sq

    def __str__(self):
        return f"test function norm squared {self.norm_sq!r} is too small to divide by"


class UndefinedMaximizerError(RitzError):
    """
    Raised when the maximizer of a residual is requested at the exact
    solution, where it is undefined.
    """

    def __init__(self, distance):
        # pylint: disable=super-init-not-called
        self.distance = distance

    def __str__(self):
        return f"maximizer undefined: distance {self.distance!r} to the exact solution is too small"


class TrainingAbortedError(RitzError):
    """
    Raised when a training loop encounters a non-finite loss or gradient.
    """

    def __init__(self, iteration, tag, reason):
        """
        Initializer.

        :param int iteration: the iteration at which training stopped
        :param str tag: the tag of the offending loss
        :param str reason: what went wrong
        """
        # pylint: disable=super-init-not-called
        self.iteration = iteration
        self.tag = tag
        self.reason = reason

    def __str__(self):
        return f"training aborted at iteration {self.iteration} ({self.tag}): {self.reason}"


class RitzAssertError(RitzError):
    """
    For assertion failures.
    """
