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
Adam with bias correction, stepping a parameter store in place.
"""

# isort: THIRDPARTY
import numpy as np

from ._config import AdamConfig
from ._errors import RitzValueError, TrainingAbortedError


class AdamState:
    """
    Moment estimates and step count of one optimizer.
    """

    def __init__(self, size, config=AdamConfig()):
        """
        Initializer.

        :param int size: number of parameters
        :param AdamConfig config: hyperparameters
        """
        self.config = config
        self.first = np.zeros(size)
        self.second = np.zeros(size)
        self.step = 0

    def __repr__(self):
        return f"AdamState(size={self.first.shape[0]}, step={self.step})"


class Adam:
    """
    Adam updates.
    """

    DESCENT = -1
    ASCENT = 1

    @classmethod
    def step(cls, state, params, grad, sign=DESCENT, iteration=None, tag=None):
        """
        One update of ``params``.

        Ascent is descent on the negated gradient.

        :param AdamState state: the optimizer state, updated
        :param ParamStore params: the parameters, updated
        :param ndarray grad: the loss gradient
        :param int sign: DESCENT or ASCENT
        :param iteration: reported on abort
        :type iteration: int or NoneType
        :param tag: reported on abort
        :type tag: str or NoneType

        :raises TrainingAbortedError: if the gradient is not finite
        :raises RitzValueError: on a shape mismatch or a bad sign
        """
        grad = np.asarray(grad, dtype=float)
        if grad.shape != params.values.shape:
            raise RitzValueError(grad.shape, "grad", f"expected {params.values.shape}")
        if sign not in (cls.DESCENT, cls.ASCENT):
            raise RitzValueError(sign, "sign", "must be -1 or 1")
        if not np.all(np.isfinite(grad)):
            raise TrainingAbortedError(iteration, tag, "non-finite gradient")
        config = state.config
        effective = -sign * grad
        state.step += 1
        state.first = config.beta1 * state.first + (1.0 - config.beta1) * effective
        state.second = config.beta2 * state.second + (1.0 - config.beta2) * effective**2
        first = state.first / (1.0 - config.beta1**state.step)
        second = state.second / (1.0 - config.beta2**state.step)
        params.values -= config.learning_rate * first / (np.sqrt(second) + config.epsilon)
