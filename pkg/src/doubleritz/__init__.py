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
The public interface of doubleritz.

Contents:

  * Tape, Var, Ops, DualValue, Duals, ParamStore, Gradients -- reverse mode
    differentiation over networks carrying spatial derivatives
  * NetworkSpec, Networks, MaskedNetwork, TrialTestPair, BoundaryMasks --
    fully connected networks, boundary masks and the composed test network
  * SamplingPlan, BetaSample, QuadBatch, Quadrature -- randomized quadrature
  * VariationalProblem, Norms, Functionals -- problems and their losses

    - normalized residual, Ritz, composed Ritz, inner fit, adjoint Ritz
  * Problems, ProblemInstance, ClosedForm -- the benchmark registry
  * Adam, AdamState, LoopSchedule, Trainers, TrainRecord -- training
  * Metrics -- relative errors and the instability probe
  * Experiments -- configured runs, result files and table reproduction
  * RitzError -- supertype of errors raised by package methods
"""

from ._autodiff import DualValue, Duals, Gradients, Ops, ParamStore, Tape, Var
from ._config import AdamConfig, ExperimentConfig, NetworkConfig, RitzConfig, SeedConfig
from ._constants import FormulationKinds, LossTags, Loops, Methods
from ._errors import (
    DegenerateTestError,
    RitzAssertError,
    RitzError,
    RitzNotFoundError,
    RitzUnsupportedError,
    RitzValueError,
    TrainingAbortedError,
    UndefinedMaximizerError,
)
from ._experiments import Experiments
from ._metrics import ErrorReport, Metrics
from ._network import (
    BoundaryMask,
    BoundaryMasks,
    Combination,
    Jet,
    MaskedNetwork,
    Networks,
    NetworkSpec,
    TrialTestPair,
)
from ._optim import Adam, AdamState
from ._problems import ClosedForm, ProblemInstance, Problems
from ._quadrature import BetaSample, QuadBatch, Quadrature, SamplingPlan
from ._training import LoopSchedule, Trainers, TrainRecord
from ._variational import (
    AdjointField,
    Functionals,
    LossValue,
    Norms,
    PointLoad,
    TrialToTestField,
    VariationalProblem,
)
from .version import __version__
