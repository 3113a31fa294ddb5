import itertools
import os
import random
import unittest

import ddt
import numpy as np

from unittest import TestCase
from unittest.mock import patch

from qbpp import bnp
from qbpp.common import (
    MINUS,
    MIXED,
    NODE_LIMIT,
    OPTIMAL,
    PLUS,
    TIME_LIMIT,
    BranchingError,
    InputError,
)
from qbpp.core import Instance, Pattern, pattern_cost, validate_solution
from qbpp.generator import (
    BENCHMARK_COPIES,
    BENCHMARK_DELTAS,
    BENCHMARK_MUS,
    BENCHMARK_SIGMAS,
    GeneratorConfig,
    config_seed,
    generate_group,
    generate_instance,
)
from qbpp.lp import LPResult
from qbpp.oracle import PartitionEnumerator, solve_exact
from qbpp.pricing import pattern_value


SLOW_TESTS = os.environ.get("QBPP_SLOW_TESTS") == "1"


def triangle_instance():
    """Three unit items, two per bin: the master LP is fractional."""
    dissim = [[0, 2, 2],
              [2, 0, 2],
              [2, 2, 0]]
    return Instance([1, 1, 1], 2, 10, dissim)


def fractional_root():
    inst = triangle_instance()
    node = bnp.root_node(inst)
    node.master.add_columns(Pattern.from_items(inst, pair)
                            for pair in itertools.combinations(range(3), 2))
    node.result = node.master.solve()
    return node


class TestBounds(TestCase):

    def test_trivial_lower_bound(self):
        dissim = [[0, -4, 3],
                  [-4, 0, -1],
                  [3, -1, 0]]
        inst = Instance([5, 5, 5], 10, 7, dissim)

        self.assertEqual(bnp.trivial_lower_bound(inst), 2 * 7 - 5)

    def test_initial_incumbent_is_feasible(self):
        for seed in range(30):
            config = GeneratorConfig(12, 1.0, 0.5, MIXED, seed)
            inst = generate_instance(config)
            solution = bnp.initial_incumbent(inst)

            self.assertTrue(validate_solution(inst, solution).valid)
            ffd = bnp.first_fit_decreasing(inst)
            self.assertLessEqual(
                solution.objective,
                sum(pattern_cost(inst, b) for b in ffd))

    def test_first_fit_decreasing(self):
        inst = Instance([4, 7, 3, 6], 10, 1, np.zeros((4, 4)))

        self.assertEqual(bnp.first_fit_decreasing(inst), [[1, 2], [3, 0]])


class TestPricingConstruction(TestCase):

    def test_root_prices_reduced_costs(self):
        rng = random.Random(4)
        inst = generate_instance(GeneratorConfig(8, 1.0, 0.75, MIXED, 8))
        node = bnp.root_node(inst)
        duals = np.array([rng.uniform(-50, 50) for _ in range(inst.n)])

        pp, alpha = bnp.build_pricing(node, duals)

        self.assertEqual(alpha, inst.bin_cost)
        for pattern in itertools.combinations(pp.items, 3):
            if sum(pp.weights[k] for k in pattern) > pp.capacity:
                continue
            expected = (sum(duals[i] for i in pattern) -
                        pattern_cost(inst, pattern) + alpha)
            self.assertAlmostEqual(pattern_value(pp, pattern), expected)

    def test_super_items(self):
        node = bnp.apply_branch(fractional_root(), (0, 2), bnp.ONE, 1)
        node = bnp.apply_branch(node, (1, 2), bnp.ZERO, 2)
        duals = np.array([1.0, 2.0, 4.0])

        pp, _ = bnp.build_pricing(node, duals)

        self.assertEqual(node.partition, ((0, 2), (1,)))
        self.assertEqual(pp.weights, (2, 1))
        self.assertEqual(list(pp.linear), [5.0 - 2, 2.0])
        self.assertEqual(pp.quad[0, 1], -4)
        self.assertEqual(pp.conflicts, frozenset([(0, 1)]))
        self.assertEqual(bnp.expand_pattern(node, (0,)).items, (0, 2))


class TestBranching(TestCase):

    def test_fractional_root(self):
        node = fractional_root()

        self.assertAlmostEqual(node.result.objective, 18.0)
        self.assertFalse(node.is_integral())
        self.assertIn(bnp.select_branch_pair(node), [(0, 1), (0, 2), (1, 2)])

    def test_pair_closest_to_half(self):
        node = fractional_root()
        # Columns: {1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}.
        primal = np.array([0.5, 0.25, 0.35, 0.3, 0.2, 0.45])
        node.result = LPResult(0.0, primal, np.zeros(3), None)

        self.assertEqual(bnp.select_branch_pair(node), (1, 2))

    def test_ties_go_to_the_first_pair(self):
        node = fractional_root()
        primal = np.array([0.0, 0.0, 0.0, 0.5, 0.5, 0.5])
        node.result = LPResult(18.0, primal, np.zeros(3), None)

        self.assertEqual(bnp.select_branch_pair(node), (0, 1))

    def test_zero_branch(self):
        child = bnp.apply_branch(fractional_root(), (1, 0), bnp.ZERO, 1)

        self.assertEqual(child.conflicts, frozenset([(0, 1)]))
        self.assertEqual(child.depth, 1)
        self.assertEqual(child.id, 1)
        self.assertIsNone(child.master.index_of([0, 1]))
        self.assertIsNotNone(child.master.index_of([0, 2]))

    def test_one_branch(self):
        child = bnp.apply_branch(fractional_root(), (0, 1), bnp.ONE, 2)

        self.assertEqual(child.partition, ((0, 1), (2,)))
        self.assertEqual(sorted(sorted(s) for s in child.master.supports),
                         [[0, 1], [2]])
        self.assertEqual(child.super_item_of(1), 0)
        self.assertEqual(child.lower_bound, fractional_root().lower_bound)

    def test_decided_pair(self):
        child = bnp.apply_branch(fractional_root(), (0, 1), bnp.ONE, 1)

        with self.assertRaises(BranchingError):
            bnp.apply_branch(child, (0, 1), bnp.ZERO, 2)

    def test_unknown_side(self):
        with self.assertRaises(InputError):
            bnp.apply_branch(fractional_root(), (0, 1), 2)

    def test_unsolved_node(self):
        with self.assertRaises(BranchingError):
            bnp.select_branch_pair(bnp.root_node(triangle_instance()))

    def test_integral_solution(self):
        child = bnp.apply_branch(fractional_root(), (0, 1), bnp.ONE, 1)
        child.result = child.master.solve()

        self.assertTrue(child.is_integral())
        solution = child.integral_solution()
        self.assertEqual(sorted(b.items for b in solution.bins),
                         [(0, 1), (2,)])
        self.assertEqual(solution.objective, 22)


class TestColumnGeneration(TestCase):

    @patch("qbpp.bnp.mch_solve")
    def test_duplicate_heuristic_columns(self, mock_mch):
        mock_mch.return_value = [((0,), 100.0)]
        node = bnp.root_node(triangle_instance())
        stats = {}

        bound = bnp.column_generation(node, {}, stats=stats)

        self.assertAlmostEqual(node.result.objective, 18.0)
        self.assertAlmostEqual(bound, 20.0)
        self.assertGreaterEqual(stats["exact_calls"], 1)
        self.assertEqual(len(node.master.supports), 6)

    def test_singletons_are_optimal(self):
        dissim = [[0, 10, 10],
                  [10, 0, 10],
                  [10, 10, 0]]
        inst = Instance([1, 1, 1], 3, 2, dissim)
        node = bnp.root_node(inst)
        stats = {}

        bound = bnp.column_generation(node, {}, stats=stats)

        self.assertEqual(stats["columns"], 0)
        self.assertAlmostEqual(bound, 6.0)
        self.assertEqual(len(node.master.supports), 3)
        self.assertTrue(node.is_integral())


class TestSolve(TestCase):

    def test_triangle(self):
        result = bnp.solve(triangle_instance(), {"trace": True})

        self.assertEqual(result.status, OPTIMAL)
        self.assertEqual(result.upper_bound, 22)
        self.assertEqual(result.lower_bound, 22)
        self.assertEqual(result.gap_percent, 0.0)
        self.assertAlmostEqual(result.stats["root_lower_bound"], 20.0)
        self.assertTrue(result.trace)
        for record in result.trace:
            self.assertEqual(set(record), {"iteration", "node",
                                           "lower_bound", "columns",
                                           "pricer"})

    def test_node_limit(self):
        result = bnp.solve(triangle_instance(), {"node_limit": 1})

        self.assertEqual(result.status, NODE_LIMIT)
        self.assertEqual(result.upper_bound, 22)
        self.assertEqual(result.lower_bound, 20)
        self.assertAlmostEqual(result.gap_percent, 100.0 * 2 / 22)

    def test_time_limit(self):
        result = bnp.solve(triangle_instance(), {"time_limit": 1e-9})

        self.assertEqual(result.status, TIME_LIMIT)
        self.assertEqual(result.upper_bound, 22)
        self.assertEqual(result.lower_bound, 20)
        self.assertTrue(validate_solution(triangle_instance(),
                                          result.best_solution).valid)

    def test_zero_time_limit(self):
        result = bnp.solve(triangle_instance(), {"time_limit": 0})

        self.assertEqual(result.status, TIME_LIMIT)
        self.assertEqual(result.stats["nodes"], 0)
        self.assertEqual(result.upper_bound, 22)
        self.assertEqual(result.lower_bound, 20)

    def test_as_dict(self):
        document = bnp.solve(triangle_instance()).as_dict()

        self.assertEqual(document["status"], OPTIMAL)
        self.assertEqual(document["objective"], 22)
        self.assertEqual(sorted(len(b) for b in document["bins"]), [1, 2])
        self.assertIn("nodes", document["stats"])

    def test_single_item(self):
        inst = Instance([3], 3, 4, [[0]])

        result = bnp.solve(inst)

        self.assertEqual(result.status, OPTIMAL)
        self.assertEqual(result.upper_bound, 4)


@ddt.ddt
class TestOracleEquivalence(TestCase):

    @ddt.data(
        {"h": 1, "max_cols_per_iter": 1},
        {"h": 5, "max_cols_per_iter": 10},
    )
    def test_matches_oracle(self, settings):
        regimes = list(itertools.product((MINUS, PLUS, MIXED),
                                         (0.6, 1.0, 2.0),
                                         (0.25, 0.5, 0.75)))
        for k in range(200):
            sigma, mu, delta = regimes[k % len(regimes)]
            n = 4 + k % 6
            config = GeneratorConfig(n, mu, delta, sigma, 1000 + k)
            inst = generate_instance(config, k % 5)

            result = bnp.solve(inst, settings)
            _, optimum = solve_exact(inst)

            self.assertEqual(result.status, OPTIMAL)
            self.assertEqual(result.upper_bound, optimum)
            self.assertEqual(result.lower_bound, optimum)
            self.assertTrue(validate_solution(inst,
                                              result.best_solution).valid)
            self.assertLessEqual(result.stats["root_lower_bound"],
                                 optimum + 1e-6)


def feasible_partitions(node):
    merged = [block for block in node.partition if len(block) > 1]
    return {rgs for rgs, _ in
            PartitionEnumerator(node.inst, node.conflicts, merged)}


class TestNodeInvariants(TestCase):
    """
    Branching keeps every node a relaxation of its own restricted problem.

    """
    def check_bound(self, node):
        merged = [block for block in node.partition if len(block) > 1]
        _, optimum = solve_exact(node.inst, (node.conflicts, merged))

        self.assertIsNotNone(optimum)
        self.assertLessEqual(node.result.objective, optimum + 1e-6)
        self.assertLessEqual(node.lower_bound, optimum + 1e-6)

    def walk(self, node, depth, counter):
        bnp.column_generation(node, {})
        self.check_bound(node)
        if depth == 0 or node.is_integral():
            return 0

        pair = bnp.select_branch_pair(node)
        children = [bnp.apply_branch(node, pair, side, next(counter))
                    for side in bnp.SIDES]

        parent = feasible_partitions(node)
        zero, one = [feasible_partitions(child) for child in children]
        self.assertEqual(zero | one, parent)
        self.assertFalse(zero & one)

        branched = 1
        for child in children:
            branched += self.walk(child, depth - 1, counter)
            self.assertGreaterEqual(child.result.objective,
                                    node.result.objective - 1e-6)
        return branched

    def test_branching_tree(self):
        instances = [triangle_instance()]
        regimes = list(itertools.product((MINUS, PLUS, MIXED),
                                         (0.6, 1.0, 2.0)))
        for k in range(40):
            sigma, mu = regimes[k % len(regimes)]
            config = GeneratorConfig(5 + k % 3, mu, 0.75, sigma, 500 + k)
            instances.append(generate_instance(config))

        branched = 0
        for inst in instances:
            root = bnp.root_node(inst)
            branched += self.walk(root, 3, itertools.count(1))

        self.assertGreater(branched, 0)


def benchmark_instances(n):
    """
    The benchmark cross at size n, grouped like the generated files.

    """
    for delta in BENCHMARK_DELTAS:
        for sigma in BENCHMARK_SIGMAS:
            seed = config_seed(42, n, delta, sigma)
            base = GeneratorConfig(n, 1.0, delta, sigma, seed)
            for copy in range(BENCHMARK_COPIES):
                for inst in generate_group(base, BENCHMARK_MUS, copy=copy):
                    yield inst


@unittest.skipUnless(SLOW_TESTS, "set QBPP_SLOW_TESTS=1 to run")
class TestLargerInstances(TestCase):

    def test_configurations_agree(self):
        for seed, sigma in enumerate((MINUS, PLUS, MIXED)):
            config = GeneratorConfig(15, 1.0, 0.5, sigma, seed)
            inst = generate_instance(config)

            baseline = bnp.solve(inst, {"h": 1, "max_cols_per_iter": 1})
            tuned = bnp.solve(inst, {"h": 5, "max_cols_per_iter": 10})

            self.assertEqual(baseline.status, OPTIMAL)
            self.assertEqual(tuned.status, OPTIMAL)
            self.assertEqual(baseline.upper_bound, tuned.upper_bound)
            self.assertAlmostEqual(baseline.stats["root_lower_bound"],
                                   tuned.stats["root_lower_bound"],
                                   delta=1e-6)

    def test_fifteen_item_suite(self):
        instances = list(benchmark_instances(15))
        self.assertEqual(len(instances), 135)

        solved = 0
        for inst in instances:
            tuned = bnp.solve(inst, {"h": 5, "max_cols_per_iter": 10,
                                     "time_limit": 60})
            root = bnp.solve(inst, {"h": 1, "max_cols_per_iter": 1,
                                    "time_limit": 60, "node_limit": 1})

            self.assertIsNotNone(tuned.stats["root_lower_bound"])
            self.assertIsNotNone(root.stats["root_lower_bound"])
            self.assertAlmostEqual(tuned.stats["root_lower_bound"],
                                   root.stats["root_lower_bound"],
                                   delta=1e-6)
            self.assertLessEqual(tuned.lower_bound, tuned.upper_bound)
            if tuned.status == OPTIMAL:
                solved += 1

        self.assertGreaterEqual(solved, 0.9 * len(instances))
