import io
import json
import os
import tempfile

import ddt

from unittest import TestCase
from unittest.mock import Mock, patch

from qbpp import shell
from qbpp.commands import (
    bench,
    export,
    generate,
    oracle,
    pricing,
    solve,
    validate,
)
from qbpp.common import (
    EXIT_INPUT,
    EXIT_LIMIT,
    EXIT_OK,
    MIXED,
    NODE_LIMIT,
    OPTIMAL,
)
from qbpp.core import Instance, read_instance, write_instance
from qbpp.generator import instance_filename
from qbpp.milp_export import TAGS
from qbpp.pricing import PricingProblem, write_pricing_problem


def triangle_text():
    dissim = [[0, 2, 2],
              [2, 0, 2],
              [2, 2, 0]]
    return write_instance(Instance([1, 1, 1], 2, 10, dissim))


class CommandTestCase(TestCase):
    module = None

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)
        self.instance = self.path("tri.qbpp")
        with open(self.instance, "w") as f:
            f.write(triangle_text())

        self.app = Mock()
        self.app.stdout = io.StringIO()

        patchers = {
            "environ": patch.dict("os.environ", {}, clear=True),
            "log": patch("qbpp.commands.logger"),
        }
        self.mocks = {}
        for name, patcher in patchers.items():
            self.mocks[name] = patcher.start()
            self.addCleanup(patcher.stop)

    def path(self, *names):
        return os.path.join(self.tmpdir.name, *names)

    def call(self, *args):
        cmd = self.module.Command(self.app, None)
        parser = cmd.get_parser("qbpp test")
        return cmd.run(parser.parse_args(list(args)))

    def output(self):
        return self.app.stdout.getvalue().splitlines()


class TestGenerate(CommandTestCase):
    module = generate

    def test_single_instance(self):
        ret = self.call("--n", "6", "--seed", "3", "--out", self.path("out"))

        expected = self.path("out", instance_filename(6, 1.0, 0.5, MIXED, 0))
        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), [expected])
        with open(expected) as f:
            inst = read_instance(f.read())
        self.assertEqual(inst.n, 6)
        self.assertEqual(inst.meta["seed"], 3)

    def test_group(self):
        ret = self.call("--n", "6", "--mus", "0.6,2", "--out",
                        self.path("out"))

        self.assertEqual(ret, EXIT_OK)
        paths = self.output()
        self.assertEqual(paths, [
            self.path("out", instance_filename(6, 0.6, 0.5, MIXED, 0)),
            self.path("out", instance_filename(6, 2.0, 0.5, MIXED, 0)),
        ])
        group = []
        for path in paths:
            with open(path) as f:
                group.append(read_instance(f.read()))
        self.assertEqual(group[0].weights, group[1].weights)
        self.assertEqual(group[0].meta["group"], group[1].meta["group"])

    def test_bad_mus(self):
        ret = self.call("--n", "6", "--mus", "1,x", "--out", self.path())

        self.assertEqual(ret, EXIT_INPUT)

    def test_missing_size(self):
        ret = self.call("--out", self.path("out"))

        self.assertEqual(ret, EXIT_INPUT)
        self.mocks["log"].error.assert_called_once_with(
            "Either --full or --n is required")

    def test_bad_delta(self):
        ret = self.call("--n", "4", "--delta", "1.5", "--out", self.path())

        self.assertEqual(ret, EXIT_INPUT)

    @patch("qbpp.commands.generate.generate_benchmark")
    def test_full(self, mock_generate):
        mock_generate.return_value = [{}, {}, {}]

        ret = self.call("--full", "--seed", "7", "--out", self.path())

        self.assertEqual(ret, EXIT_OK)
        mock_generate.assert_called_once_with(self.path(), master_seed=7)
        self.assertIn("Wrote 3 instances", self.output()[0])


class TestSolve(CommandTestCase):
    module = solve

    def test_optimal(self):
        ret = self.call(self.instance, "--h", "1", "--max-cols", "1")

        self.assertEqual(ret, EXIT_OK)
        with open(self.path("tri.json")) as f:
            document = json.load(f)
        self.assertEqual(document["solver"], "bnp-1-1")
        self.assertEqual(document["status"], OPTIMAL)
        self.assertEqual(document["upper_bound"], 22)
        self.assertEqual(document["gap_percent"], 0.0)
        self.assertIn("nodes", document["stats"])
        self.assertTrue(os.path.exists(self.path("tri.sol")))
        self.assertIn("optimal, objective 22", self.output()[0])

    def test_default_configuration(self):
        stats = self.path("stats.json")
        trace = self.path("trace.json")

        ret = self.call(self.instance, "--stats", stats, "--trace", trace,
                        "--out", self.path("best.sol"), "--seed", "9")

        self.assertEqual(ret, EXIT_OK)
        with open(stats) as f:
            document = json.load(f)
        self.assertEqual(document["solver"], "bnp-5-10")
        self.assertEqual(document["seed"], 9)
        with open(trace) as f:
            self.assertIsInstance(json.load(f), list)

    def test_node_limit(self):
        ret = self.call(self.instance, "--node-limit", "1")

        self.assertEqual(ret, EXIT_LIMIT)
        with open(self.path("tri.json")) as f:
            document = json.load(f)
        self.assertEqual(document["status"], NODE_LIMIT)
        self.assertEqual(document["upper_bound"], 22)

    def test_missing_instance(self):
        ret = self.call(self.path("missing.qbpp"))

        self.assertEqual(ret, EXIT_INPUT)

    def test_bad_h(self):
        ret = self.call(self.instance, "--h", "0")

        self.assertEqual(ret, EXIT_INPUT)


@ddt.ddt
class TestExport(CommandTestCase):
    module = export

    def test_all(self):
        ret = self.call(self.instance, "--all")

        self.assertEqual(ret, EXIT_OK)
        expected = [self.path("tri.%s.lp" % tag) for tag in TAGS]
        self.assertEqual(self.output(), expected)
        for path in expected:
            self.assertTrue(os.path.exists(path))

    @ddt.data("efgw", "EFGW")
    def test_tag(self, tag):
        ret = self.call(self.instance, "--tag", tag, "--out",
                        self.path("models"))

        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), [self.path("models", "tri.EFGW.lp")])

    def test_no_tag(self):
        self.assertEqual(self.call(self.instance), EXIT_INPUT)

    def test_unknown_tag(self):
        self.assertEqual(self.call(self.instance, "--tag", "xyz"),
                         EXIT_INPUT)


class TestBench(CommandTestCase):
    module = bench

    @patch("qbpp.jobs.BenchJob.log")
    def test_directory(self, mock_log):
        out = self.path("bench.csv")

        ret = self.call(self.tmpdir.name, "--config", "bnp-1-1",
                        "--out", out)

        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), ["Wrote 1 runs to %s" % out])
        with open(out) as f:
            rows = f.read().splitlines()
        self.assertTrue(rows[0].startswith("schema=1,instance,"))
        self.assertTrue(rows[1].startswith("run,tri.qbpp,3,"))

    def test_not_a_directory(self):
        self.assertEqual(self.call(self.instance), EXIT_INPUT)


class TestValidate(CommandTestCase):
    module = validate

    def write_solution(self, text):
        path = self.path("tri.sol")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_valid(self):
        solution = self.write_solution("# objective 22\n1 2\n3\n")

        ret = self.call(self.instance, solution)

        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), ["valid: 2 bins, objective 22"])

    def test_violations(self):
        solution = self.write_solution("# objective 5\n1 2 3\n")

        ret = self.call(self.instance, solution)

        self.assertEqual(ret, EXIT_INPUT)
        lines = self.output()
        self.assertGreaterEqual(len(lines), 2)
        self.assertTrue(all(line.startswith("violation: ")
                            for line in lines))


class TestOracle(CommandTestCase):
    module = oracle

    def test_objective(self):
        out = self.path("exact.sol")

        ret = self.call(self.instance, "--out", out)

        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), ["objective 22"])
        self.assertTrue(os.path.exists(out))

    def test_item_limit(self):
        self.assertEqual(self.call(self.instance, "--max-items", "2"),
                         EXIT_INPUT)


class TestPricing(CommandTestCase):
    module = pricing

    def setUp(self):
        super(TestPricing, self).setUp()
        quad = [[0.0, 1.5, -1.0],
                [1.5, 0.0, 0.5],
                [-1.0, 0.5, 0.0]]
        pp = PricingProblem([3, 4, 5], 8, [2.0, 3.0, 1.0], quad)
        self.problem = self.path("pp.gqkp")
        with open(self.problem, "w") as f:
            f.write(write_pricing_problem(pp))

    def test_exact(self):
        ret = self.call(self.problem)

        self.assertEqual(ret, EXIT_OK)
        lines = self.output()
        self.assertTrue(lines[0].startswith("nodes "))
        self.assertEqual(lines[1:], ["value 6.5", "pattern 1 2"])

    def test_enumerate(self):
        ret = self.call(self.problem, "--enumerate")

        self.assertEqual(ret, EXIT_OK)
        self.assertEqual(self.output(), ["value 6.5", "pattern 1 2"])

    def test_bad_h(self):
        self.assertEqual(self.call(self.problem, "--mch", "--h", "0"),
                         EXIT_INPUT)


class TestShell(CommandTestCase):

    @patch("sys.stdout", new_callable=io.StringIO)
    def test_validate(self, mock_stdout):
        solution = self.path("tri.sol")
        with open(solution, "w") as f:
            f.write("# objective 22\n1 2\n3\n")

        ret = shell.main(["-q", "validate", self.instance, solution])

        self.assertEqual(ret, EXIT_OK)
        self.assertIn("valid: 2 bins, objective 22",
                      mock_stdout.getvalue())

        with open(solution, "w") as f:
            f.write("1 2 3\n")
        ret = shell.main(["-q", "validate", self.instance, solution])

        self.assertEqual(ret, EXIT_INPUT)
