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

""" Tests for experiment runs and their result files. """

# isort: STDLIB
import csv
import os
import tempfile
import unittest
from unittest import mock

# isort: LOCAL
from doubleritz import Experiments, NetworkConfig, RitzValueError, SamplingPlan
from doubleritz._experiments import TABLES, TableSpec, worker_count
from doubleritz._problems import Schedule


def _config(problem, method, output, outer=2, inner=1):
    config = Experiments.default_config(problem, method, output=output)
    config.outer_iters = outer
    config.inner_per_outer = inner
    config.warmup_inner = 0
    config.trial_network = NetworkConfig((4,))
    config.test_network = NetworkConfig((4,))
    return config


def _rows(path):
    with open(path, newline="", encoding="utf-8") as stream:
        return list(csv.reader(stream))


def _bytes(path):
    with open(path, "rb") as stream:
        return stream.read()


class RunTestCase(unittest.TestCase):
    """Tests for single runs."""

    def setUp(self):
        directory = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.addCleanup(directory.cleanup)
        self.root = directory.name

    def test_no_iterations(self):
        """
        A run without iterations writes the initial errors and the profile.
        """
        output = os.path.join(self.root, "run")
        result = Experiments.run(_config("poisson_weak_smooth", "drm", output, 0))
        self.assertEqual(
            sorted(result.paths), ["errors.csv", "losses.csv", "profile.csv", "summary.csv"]
        )
        self.assertEqual(_rows(result.paths["losses.csv"]), [["iteration", "loop", "F_T"]])
        errors = _rows(result.paths["errors.csv"])
        self.assertEqual(len(errors), 2)
        self.assertEqual(errors[1][:2], ["0.0", "0"])
        profile = _rows(result.paths["profile.csv"])
        self.assertEqual(profile[0], ["x", "u", "u_exact", "u_error"])
        self.assertEqual(len(profile), 1002)
        summary = _rows(result.paths["summary.csv"])
        self.assertEqual(summary[1][0], "poisson_weak_smooth")
        self.assertEqual(summary[1][10], "0")

    def test_methods(self):
        """
        Each method writes its losses and its profile columns.
        """
        for problem, method, tags, profile in (
            ("poisson_weak_smooth", "wan", ["J"], ["u"]),
            ("poisson_weak_smooth", "d2rm", ["F_tau", "L_u"], ["u", "tau_u"]),
            ("poisson_strong", "gdrm", ["F_T"], ["u", "Tu"]),
            ("convection_ultraweak", "adjoint_drm", ["F_adjoint"], ["v", "adjoint_v"]),
            ("convection_ultraweak", "d2rm", ["F_tau", "L_u"], ["u", "tau_u"]),
        ):
            output = os.path.join(self.root, f"{problem}-{method}")
            result = Experiments.run(_config(problem, method, output))
            losses = _rows(result.paths["losses.csv"])
            self.assertEqual(losses[0], ["iteration", "loop"] + tags, method)
            expected = 4 if method in ("wan", "d2rm") else 2
            self.assertEqual(len(losses), expected + 1, method)
            header = _rows(result.paths["profile.csv"])[0]
            self.assertEqual(header[1::3], profile, method)

    def test_plane(self):
        """
        Plane problems are profiled on a grid.
        """
        output = os.path.join(self.root, "plane")
        result = Experiments.run(_config("convection2d_strong", "d2rm", output, 1, 0))
        profile = _rows(result.paths["profile.csv"])
        self.assertEqual(profile[0][:3], ["x", "y", "u"])
        self.assertEqual(len(profile), 101 * 101 + 1)

    def test_reproducible(self):
        """
        Equal configurations write equal loss, error and profile files.
        """
        first = Experiments.run(
            _config("poisson_weak_smooth", "d2rm", os.path.join(self.root, "a"))
        )
        second = Experiments.run(
            _config("poisson_weak_smooth", "d2rm", os.path.join(self.root, "b"))
        )
        for name in ("losses.csv", "errors.csv", "profile.csv"):
            self.assertEqual(_bytes(first.paths[name]), _bytes(second.paths[name]), name)

    def test_exceptions(self):
        """
        Test exceptions.
        """
        with self.assertRaises(RitzValueError):
            Experiments.train(_config("poisson_weak_smooth", "adjoint_drm", self.root))
        with self.assertRaises(RitzValueError):
            Experiments.train(_config("convection_ultraweak", "drm", self.root))
        config = _config("poisson_weak_smooth", "drm", self.root)
        config.plan = SamplingPlan.uniform(10, dim=2)
        with self.assertRaises(RitzValueError):
            Experiments.train(config)


class TableTestCase(unittest.TestCase):
    """Tests for table reproduction."""

    def test_configs(self):
        """
        Desk runs divide the iteration counts.
        """
        configs = Experiments.table_configs(2, "desk", "out")
        self.assertEqual(len(configs), 9)
        self.assertEqual({c.outer_iters for _, c in configs}, {1000})
        self.assertEqual({label for label, _ in configs}, {"2", "5", "10"})
        (_, delta), _ = Experiments.table_configs(4, "desk", "out")
        self.assertEqual(delta.outer_iters, 20000)
        ((_, plane),) = Experiments.table_configs(7, "desk", "out")
        self.assertEqual(
            (plane.outer_iters, plane.inner_per_outer, plane.warmup_inner), (20000, 9, 2000)
        )
        ((_, full),) = Experiments.table_configs(7, "full", "out")
        self.assertEqual((full.outer_iters, full.warmup_inner), (200000, 2000))
        self.assertEqual(
            full.output, os.path.join("out", "table7-full", "d2rm")
        )

    def test_exceptions(self):
        """
        Test exceptions.
        """
        with self.assertRaises(RitzValueError):
            Experiments.table_configs(1, "desk", "out")
        with self.assertRaises(RitzValueError):
            Experiments.table_configs(2, "huge", "out")

    def test_reproduce(self):
        """
        The consolidated table lists every checkpoint of every run.
        """
        table = TableSpec("poisson_weak_smooth", (None,), ("drm",), Schedule(10, 4, 0), 5)
        with tempfile.TemporaryDirectory() as root, mock.patch.dict(TABLES, {99: table}):
            path = Experiments.reproduce(99, "desk", root)
            rows = _rows(path)
            self.assertEqual(
                rows[0], ["table", "method", "case", "fraction", "relative_u", "relative_v"]
            )
            self.assertEqual([r[3] for r in rows[1:]], ["0.04", "1.0"])
            self.assertTrue(all(r[:3] == ["99", "drm", "-"] for r in rows[1:]))
            first = _bytes(path)
            self.assertEqual(_bytes(Experiments.reproduce(99, "desk", root)), first)

    def test_workers(self):
        """
        The worker count comes from the environment.
        """
        with mock.patch.dict(os.environ, {"DOUBLERITZ_WORKERS": "3"}):
            self.assertEqual(worker_count(), 3)
        for text in ("0", "many"):
            with mock.patch.dict(os.environ, {"DOUBLERITZ_WORKERS": text}):
                with self.assertRaises(RitzValueError):
                    worker_count()
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(worker_count(), 1)


class ProbeTestCase(unittest.TestCase):
    """Tests for the probe and the self test."""

    def test_probe(self):
        """
        The probe writes one row per step.
        """
        with tempfile.TemporaryDirectory() as root:
            path, rows = Experiments.probe_instability(root)
            written = _rows(path)
        self.assertEqual(len(rows), 3)
        self.assertEqual(written[0][-1], "ratio")
        self.assertEqual(len(written), 4)

    def test_selftest(self):
        """
        Every self check passes.
        """
        results = Experiments.selftest()
        self.assertEqual(len(results), 9)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")
