import ddt
import numpy as np

from unittest import TestCase

from qbpp.common import InputError, ParseError
from qbpp.core import (
    Instance,
    Pattern,
    Solution,
    pattern_cost,
    read_instance,
    read_solution,
    solution_cost,
    validate_solution,
    write_instance,
    write_solution,
)


INSTANCE_TEXT = (
    "QBPP 1\n"
    "3 8 10\n"
    "3 4 5\n"
    "3\n"
    "1 2 5\n"
    "1 3 -3\n"
    "2 3 7\n"
)


def make_instance(meta=None):
    dissim = [[0, 5, -3],
              [5, 0, 7],
              [-3, 7, 0]]
    return Instance([3, 4, 5], 8, 10, dissim, meta)


@ddt.ddt
class TestInstance(TestCase):

    def test_attributes(self):
        inst = make_instance()

        self.assertEqual(inst.n, 3)
        self.assertEqual(inst.total_weight, 12)
        self.assertEqual(inst.nonzero_pairs(),
                         [(0, 1, 5), (0, 2, -3), (1, 2, 7)])
        self.assertFalse(inst.dissim.flags.writeable)

    @ddt.data(
        ([], 5, 1, np.zeros((0, 0))),
        ([0, 2], 5, 1, np.zeros((2, 2))),
        ([1, 2], 5, -1, np.zeros((2, 2))),
        ([1, 6], 5, 1, np.zeros((2, 2))),
        ([1, 2], 5, 1, [[0, 1], [2, 0]]),
        ([1, 2], 5, 1, [[1, 0], [0, 0]]),
        ([1, 2], 5, 1, np.zeros((3, 3))),
    )
    @ddt.unpack
    def test_invalid(self, weights, capacity, bin_cost, dissim):
        with self.assertRaises(InputError):
            Instance(weights, capacity, bin_cost, dissim)

    def test_equality(self):
        self.assertEqual(make_instance(), make_instance())
        self.assertNotEqual(make_instance(), make_instance({"mu": 1.0}))


@ddt.ddt
class TestCosts(TestCase):

    def setUp(self):
        self.inst = make_instance()

    @ddt.data(
        ([0], 10),
        ([0, 1], 15),
        ([0, 2], 7),
        ([2, 1, 0], 19),
    )
    @ddt.unpack
    def test_pattern_cost(self, items, expected):
        self.assertEqual(pattern_cost(self.inst, items), expected)

    def test_pattern_cost_invalid(self):
        with self.assertRaises(InputError):
            pattern_cost(self.inst, [])
        with self.assertRaises(InputError):
            pattern_cost(self.inst, [0, 3])

    def test_pattern(self):
        pattern = Pattern.from_items(self.inst, [1, 0])

        self.assertEqual(pattern.items, (0, 1))
        self.assertEqual(pattern.weight, 7)
        self.assertEqual(pattern.cost, 15)
        self.assertTrue(pattern.fits(self.inst))
        self.assertFalse(
            Pattern.from_items(self.inst, [0, 1, 2]).fits(self.inst))

    def test_solution_cost(self):
        sol = Solution.from_bins(self.inst, [[0, 1], [2]])

        self.assertEqual(sol.objective, 25)
        self.assertEqual(solution_cost(self.inst, sol), 25)
        self.assertEqual(sol.assignment(), {0: 0, 1: 0, 2: 1})

    def test_solution_cost_rejects_overweight(self):
        sol = Solution.from_bins(self.inst, [[0, 1, 2]])

        with self.assertRaises(InputError):
            solution_cost(self.inst, sol)


@ddt.ddt
class TestInstanceFormat(TestCase):

    def test_write(self):
        self.assertEqual(write_instance(make_instance()), INSTANCE_TEXT)

    def test_read(self):
        self.assertEqual(read_instance(INSTANCE_TEXT), make_instance())

    def test_meta_round_trip(self):
        inst = make_instance({"mu": 0.6, "sigma": "mixed", "copy": 2})
        text = write_instance(inst)

        self.assertIn("# mu 0.6\n", text)
        self.assertEqual(read_instance(text), inst)

    def test_comments_and_blank_lines(self):
        text = "# made by hand\n\n" + INSTANCE_TEXT.replace("\n3\n", "\n\n3\n")

        self.assertEqual(read_instance(text).nonzero_pairs(),
                         make_instance().nonzero_pairs())

    @ddt.data(
        ("", 1),
        ("QBPP 2\n3 8 10\n3 4 5\n0\n", 1),
        ("QBBP 1\n3 8 10\n3 4 5\n0\n", 1),
        ("QBPP 1\n3 8 10\n3 4\n0\n", 3),
        ("QBPP 1\n3 8 10\n3 4 5\n2\n1 2 5\n", 4),
        ("QBPP 1\n3 8 10\n3 4 5\n1\n2 1 5\n", 5),
        ("QBPP 1\n3 8 10\n3 4 5\n1\n1 1 5\n", 5),
        ("QBPP 1\n3 8 10\n3 4 5\n1\n1 4 5\n", 5),
        ("QBPP 1\n3 8 10\n3 4 5\n1\n1 2 0\n", 5),
        ("QBPP 1\n3 8 10\n3 4 5\n2\n1 2 5\n1 2 6\n", 6),
        ("QBPP 1\n3 8 10\n3 4 x\n0\n", 3),
        ("QBPP 1\n3 4 10\n3 4 5\n0\n", 2),
    )
    @ddt.unpack
    def test_read_errors(self, text, lineno):
        with self.assertRaises(ParseError) as cm:
            read_instance(text)

        self.assertEqual(cm.exception.lineno, lineno)


class TestSolutions(TestCase):

    def setUp(self):
        self.inst = make_instance()

    def test_write_solution(self):
        sol = Solution.from_bins(self.inst, [[0, 1], [2]])

        self.assertEqual(write_solution(sol), "# objective 25\n1 2\n3\n")

    def test_valid(self):
        sol = read_solution(self.inst, "# objective 25\n1 2\n3\n")
        report = validate_solution(self.inst, sol)

        self.assertTrue(report.valid)
        self.assertEqual(report.messages(), [])
        self.assertEqual(report.recomputed_objective, 25)

    def test_objective_mismatch(self):
        sol = read_solution(self.inst, "# objective 99\n1 2\n3\n")
        report = validate_solution(self.inst, sol)

        self.assertFalse(report.valid)
        self.assertEqual(report.messages(),
                         ["stored objective differs from recomputed 25"])

    def test_capacity_violation(self):
        sol = read_solution(self.inst, "1 2 3\n")
        report = validate_solution(self.inst, sol)

        self.assertFalse(report.valid)
        self.assertEqual(report.messages(), ["bin 1 weighs 12 > 8"])

    def test_missing_and_duplicated(self):
        sol = read_solution(self.inst, "1 2\n2\n")
        report = validate_solution(self.inst, sol)

        self.assertFalse(report.valid)
        self.assertIn("item 3 is not packed", report.messages())
        self.assertIn("item 2 is packed more than once", report.messages())

    def test_out_of_range(self):
        sol = read_solution(self.inst, "1 2\n3 4\n")
        report = validate_solution(self.inst, sol)

        self.assertEqual(report.out_of_range, [3])
        self.assertIn("item 4 does not exist", report.messages())

    def test_bad_objective_line(self):
        with self.assertRaises(ParseError):
            read_solution(self.inst, "# objective many\n1 2 3\n")
