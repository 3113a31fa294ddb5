"""
Problem data model, cost evaluation and the `.qbpp` instance format.

Items are 0-indexed inside the package and 1-indexed in every file format.

"""
import logging

import numpy as np

from .common import InputError, ParseError


logger = logging.getLogger(__name__)

FORMAT_MAGIC = "QBPP"
FORMAT_VERSION = 1

META_FIELDS = {
    "mu": float,
    "delta": float,
    "sigma": str,
    "seed": int,
    "copy": int,
    "group": str,
    "clamped": int,
}


class Instance(object):
    """
    A QBPP instance: item weights, bin capacity, bin cost and a symmetric
    integer dissimilarity matrix with zero diagonal.

    """
    def __init__(self, weights, capacity, bin_cost, dissim, meta=None):
        self.weights = tuple(int(w) for w in weights)
        self.n = len(self.weights)
        self.capacity = int(capacity)
        self.bin_cost = int(bin_cost)

        matrix = np.array(dissim, dtype=np.int64)
        if self.n == 0:
            matrix = matrix.reshape((0, 0))
        matrix.flags.writeable = False
        self.dissim = matrix
        self.meta = dict(meta or {})

        self.validate()

    def validate(self):
        if self.n < 1:
            raise InputError("An instance needs at least one item")
        if min(self.weights) < 1:
            raise InputError("Item weights must be positive")
        if self.bin_cost < 0:
            raise InputError("Bin cost must be non-negative")
        if self.capacity < max(self.weights):
            raise InputError(
                "Capacity %d is smaller than the heaviest item (%d)" %
                (self.capacity, max(self.weights)))
        if self.dissim.shape != (self.n, self.n):
            raise InputError("Dissimilarity matrix must be %dx%d" %
                             (self.n, self.n))
        if np.any(np.diag(self.dissim) != 0):
            raise InputError("Dissimilarity diagonal must be zero")
        if not np.array_equal(self.dissim, self.dissim.T):
            raise InputError("Dissimilarity matrix must be symmetric")

    @property
    def total_weight(self):
        return sum(self.weights)

    def nonzero_pairs(self):
        """Nonzero (i, j, d) entries with i < j, row-major."""
        rows, cols = np.nonzero(np.triu(self.dissim, k=1))
        return [(int(i), int(j), int(self.dissim[i, j]))
                for i, j in zip(rows, cols)]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.weights == other.weights and
                self.capacity == other.capacity and
                self.bin_cost == other.bin_cost and
                np.array_equal(self.dissim, other.dissim) and
                self.meta == other.meta)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __repr__(self):
        return "Instance(n=%d, W=%d, alpha=%d)" % (
            self.n, self.capacity, self.bin_cost)


class Pattern(object):
    """
    A set of items with its cached weight and cost.

    """
    def __init__(self, items, weight, cost):
        self.items = tuple(sorted(items))
        self.weight = weight
        self.cost = cost

    @classmethod
    def from_items(cls, inst, items):
        items = tuple(sorted(set(items)))
        if not items:
            raise InputError("A pattern needs at least one item")
        cost = pattern_cost(inst, items)
        weight = sum(inst.weights[i] for i in items)
        return cls(items, weight, cost)

    def fits(self, inst):
        return self.weight <= inst.capacity

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return (self.items, self.weight, self.cost) == (
            other.items, other.weight, other.cost)

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):
        return "Pattern(%s, w=%d, c=%d)" % (
            [i + 1 for i in self.items], self.weight, self.cost)


class Solution(object):
    """
    A list of bins (patterns) and the objective claimed for them.

    """
    def __init__(self, bins, objective=None):
        self.bins = tuple(bins)
        if objective is None:
            objective = sum(b.cost for b in self.bins)
        self.objective = objective

    @classmethod
    def from_bins(cls, inst, bins, objective=None):
        return cls([Pattern.from_items(inst, b) for b in bins], objective)

    def assignment(self):
        """Map item -> bin position."""
        return {i: k for k, b in enumerate(self.bins) for i in b.items}


class ValidationReport(object):

    def __init__(self):
        self.missing = []
        self.duplicated = []
        self.out_of_range = []
        self.capacity_violations = []
        self.recomputed_objective = 0
        self.objective_matches = True

    @property
    def valid(self):
        return not (self.missing or self.duplicated or self.out_of_range or
                    self.capacity_violations or not self.objective_matches)

    def messages(self):
        msgs = []
        for i in self.missing:
            msgs.append("item %d is not packed" % (i + 1))
        for i in self.duplicated:
            msgs.append("item %d is packed more than once" % (i + 1))
        for i in self.out_of_range:
            msgs.append("item %d does not exist" % (i + 1))
        for k, weight, capacity in self.capacity_violations:
            msgs.append("bin %d weighs %d > %d" % (k + 1, weight, capacity))
        if not self.objective_matches:
            msgs.append("stored objective differs from recomputed %d" %
                        self.recomputed_objective)
        return msgs


def _check_items(inst, items):
    for i in items:
        if not 0 <= i < inst.n:
            raise InputError("Item index %d out of range 1..%d" %
                             (i + 1, inst.n))


def pattern_cost(inst, items):
    """
    Return alpha plus the sum of d_ij over all pairs in `items`.

    Capacity is not checked.

    """
    items = sorted(set(items))
    if not items:
        raise InputError("A pattern needs at least one item")
    _check_items(inst, items)

    idx = np.asarray(items)
    block = inst.dissim[np.ix_(idx, idx)]
    return inst.bin_cost + int(block.sum()) // 2


def validate_solution(inst, sol):
    report = ValidationReport()
    seen = {}
    recomputed = 0
    for k, b in enumerate(sol.bins):
        valid_items = []
        for i in b.items:
            if not 0 <= i < inst.n:
                report.out_of_range.append(i)
                continue
            if i in seen and i not in report.duplicated:
                report.duplicated.append(i)
            seen[i] = k
            valid_items.append(i)
        if not valid_items:
            continue
        weight = sum(inst.weights[i] for i in valid_items)
        if weight > inst.capacity:
            report.capacity_violations.append((k, weight, inst.capacity))
        recomputed += pattern_cost(inst, valid_items)

    report.missing = [i for i in range(inst.n) if i not in seen]
    report.duplicated.sort()
    report.recomputed_objective = recomputed
    report.objective_matches = (sol.objective == recomputed)

    return report


def solution_cost(inst, sol):
    report = validate_solution(inst, sol)
    structural = (report.missing or report.duplicated or
                  report.out_of_range or report.capacity_violations)
    if structural:
        raise InputError("Invalid solution: %s" %
                         "; ".join(report.messages()))

    return sum(pattern_cost(inst, b.items) for b in sol.bins)


def write_instance(inst):
    lines = [
        "%s %d" % (FORMAT_MAGIC, FORMAT_VERSION),
        "%d %d %d" % (inst.n, inst.capacity, inst.bin_cost),
        " ".join(str(w) for w in inst.weights),
    ]
    pairs = inst.nonzero_pairs()
    lines.append(str(len(pairs)))
    for i, j, d in pairs:
        lines.append("%d %d %d" % (i + 1, j + 1, d))
    for key in sorted(inst.meta):
        value = inst.meta[key]
        if isinstance(value, float):
            value = repr(value)
        lines.append("# %s %s" % (key, value))

    return "\n".join(lines) + "\n"


def _ints(lineno, line, count=None):
    try:
        values = [int(v) for v in line.split()]
    except ValueError:
        raise ParseError(lineno, "expected integers, got [%s]" % line)
    if count is not None and len(values) != count:
        raise ParseError(lineno, "expected %d values, got %d" %
                         (count, len(values)))
    return values


def read_instance(text):
    lines = text.splitlines()
    body = []
    meta = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) == 2:
                key, value = parts[0], parts[1].strip()
                cast = META_FIELDS.get(key, str)
                try:
                    meta[key] = cast(value)
                except ValueError:
                    raise ParseError(lineno, "bad meta value for [%s]" % key)
            continue
        if not line:
            continue
        body.append((lineno, line))

    if not body:
        raise ParseError(1, "empty instance file")

    lineno, header = body[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != FORMAT_MAGIC:
        raise ParseError(lineno, "expected header [%s %d]" %
                         (FORMAT_MAGIC, FORMAT_VERSION))
    if parts[1] != str(FORMAT_VERSION):
        raise ParseError(lineno, "unsupported format version [%s]" %
                         parts[1])

    if len(body) < 4:
        raise ParseError(body[-1][0] + 1, "truncated instance file")

    lineno, line = body[1]
    n, capacity, bin_cost = _ints(lineno, line, 3)
    if n < 1:
        raise ParseError(lineno, "item count must be positive")

    lineno, line = body[2]
    weights = _ints(lineno, line, n)

    lineno, line = body[3]
    m = _ints(lineno, line, 1)[0]
    if len(body) - 4 != m:
        raise ParseError(lineno, "declared %d dissimilarity entries, "
                                 "found %d" % (m, len(body) - 4))

    dissim = np.zeros((n, n), dtype=np.int64)
    for lineno, line in body[4:]:
        i, j, d = _ints(lineno, line, 3)
        if not 1 <= i <= n or not 1 <= j <= n:
            raise ParseError(lineno, "item index out of range")
        if i == j:
            raise ParseError(lineno, "nonzero diagonal entry")
        if i > j:
            raise ParseError(lineno, "entry must satisfy i < j "
                                     "(asymmetric entry)")
        if d == 0:
            raise ParseError(lineno, "zero entries must be omitted")
        if dissim[i - 1, j - 1] != 0:
            raise ParseError(lineno, "duplicate entry for pair (%d, %d)" %
                             (i, j))
        dissim[i - 1, j - 1] = d
        dissim[j - 1, i - 1] = d

    try:
        return Instance(weights, capacity, bin_cost, dissim, meta)
    except InputError as e:
        raise ParseError(body[1][0], str(e))


def write_solution(sol):
    lines = ["# objective %d" % sol.objective]
    for b in sol.bins:
        lines.append(" ".join(str(i + 1) for i in b.items))
    return "\n".join(lines) + "\n"


def read_solution(inst, text):
    """
    Parse a solution file against `inst`.

    Patterns are built without capacity checks so that a broken file can
    still be reported on by `validate_solution`.

    """
    bins = []
    objective = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "objective":
                try:
                    objective = int(parts[1])
                except ValueError:
                    raise ParseError(lineno, "bad objective value")
            continue
        items = [i - 1 for i in _ints(lineno, line)]
        if not items:
            continue
        in_range = [i for i in items if 0 <= i < inst.n]
        weight = sum(inst.weights[i] for i in in_range)
        cost = pattern_cost(inst, in_range) if in_range else 0
        bins.append(Pattern(items, weight, cost))

    return Solution(bins, objective)
