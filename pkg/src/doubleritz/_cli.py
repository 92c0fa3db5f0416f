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
Command line interface.
"""

# isort: STDLIB
import argparse
import logging
import sys

from ._config import ExperimentConfig
from ._constants import Methods
from ._errors import RitzError
from ._experiments import TABLES, Experiments, worker_count
from ._problems import Problems
from .version import __version__

_LOGGER = logging.getLogger(__name__)


def _run(args):
    try:
        with open(args.config, encoding="utf-8") as stream:
            text = stream.read()
    except OSError as err:
        print(f"doubleritz: cannot read {args.config}: {err.strerror}", file=sys.stderr)
        return 1
    result = Experiments.run(ExperimentConfig.loads(text))
    for path in result.paths.values():
        print(path)
    return 0


def _init_config(args):
    config = Experiments.default_config(args.problem, args.method, args.alpha, args.output)
    text = config.dumps()
    if args.file is None:
        sys.stdout.write(text)
    else:
        with open(args.file, "w", encoding="utf-8") as stream:
            stream.write(text)
    return 0


def _reproduce(args):
    print(Experiments.reproduce(args.table, args.scale, args.output, worker_count()))
    return 0


def _probe(args):
    path, rows = Experiments.probe_instability(
        args.output, args.eps, args.direction_seed, args.trained_steps
    )
    for row in rows:
        print(" ".join(f"{v:.6g}" for v in row))
    print(path)
    return 0


def _selftest(_args):
    results = Experiments.selftest()
    for result in results:
        print(f"{'ok' if result.passed else 'FAIL':4} {result.name}: {result.detail}")
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    """
    The argument parser.

    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="doubleritz",
        description="Train neural network solutions of variational problems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more log output"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="train per an experiment file")
    run.add_argument("config", help="path of the INI experiment file")
    run.set_defaults(func=_run)

    init = commands.add_parser("init-config", help="print a default experiment file")
    init.add_argument("problem", choices=Problems.NAMES())
    init.add_argument("method", choices=[m.name for m in Methods.METHODS()])
    init.add_argument("--alpha", type=float, default=None)
    init.add_argument("--output", default=None, help="results directory")
    init.add_argument("--file", default=None, help="write here instead of stdout")
    init.set_defaults(func=_init_config)

    reproduce = commands.add_parser("reproduce", help="rerun a table of experiments")
    reproduce.add_argument("--table", type=int, required=True, choices=sorted(TABLES))
    reproduce.add_argument("--scale", choices=["desk", "full"], default="desk")
    reproduce.add_argument("--output", default="results")
    reproduce.set_defaults(func=_reproduce)

    probe = commands.add_parser(
        "probe-instability", help="residual maximizer distances near the solution"
    )
    probe.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    probe.add_argument("--direction-seed", type=int, default=None)
    probe.add_argument(
        "--trained-steps",
        type=int,
        default=0,
        help="also train maximizers for this many ascent steps",
    )
    probe.add_argument("--output", default="results")
    probe.set_defaults(func=_probe)

    selftest = commands.add_parser("selftest", help="numerical self checks")
    selftest.set_defaults(func=_selftest)
    return parser


def main(argv=None):
    """
    Entry point.

    :param argv: the arguments; sys.argv if omitted
    :type argv: list of str or NoneType
    :returns: the exit status
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except RitzError as err:
        _LOGGER.debug("command %s failed", args.command, exc_info=True)
        print(f"doubleritz: {err}", file=sys.stderr)
        return 1
