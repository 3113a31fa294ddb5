"""
Brute-force exact QBPP solver by set-partition enumeration.

"""
import logging

from .common import DEFAULT_SETTINGS, InputError, LimitError
from .core import Solution


logger = logging.getLogger(__name__)

ORACLE_MAX_ITEMS = DEFAULT_SETTINGS["oracle_max_items"]


class PartitionEnumerator(object):
    """
    Walks the restricted-growth strings of {0..n-1} in lexicographic order,
    yielding `(rgs, cost)` for every partition that respects capacity,
    conflict pairs and merged groups.

    A restricted-growth string maps item i to block a[i] with a[0] = 0 and
    a[i] <= max(a[:i]) + 1, so each set partition appears once.

    """
    def __init__(self, inst, conflicts=(), merged=(), capacity_filter=True):
        self.inst = inst
        self.capacity_filter = capacity_filter

        n = inst.n
        self.conflicts = [set() for _ in range(n)]
        for i, j in conflicts:
            self._check(i)
            self._check(j)
            self.conflicts[i].add(j)
            self.conflicts[j].add(i)

        # Item -> first member of its merged group.
        self.anchor = list(range(n))
        for group in merged:
            group = sorted(group)
            for i in group:
                self._check(i)
            for i in group[1:]:
                self.anchor[i] = group[0]

    def _check(self, i):
        if not 0 <= i < self.inst.n:
            raise InputError("Item %d out of range" % (i + 1))

    def __iter__(self):
        inst = self.inst
        n = inst.n
        W = inst.capacity
        alpha = inst.bin_cost
        weights = inst.weights
        d = inst.dissim.tolist()

        assignment = [0] * n
        loads = []
        members = []

        def extend(i, cost):
            if i == n:
                yield tuple(assignment), cost
                return

            anchor = self.anchor[i]
            if anchor != i:
                choices = [assignment[anchor]]
            else:
                choices = range(len(loads) + 1)

            for k in choices:
                opening = k == len(loads)
                if opening:
                    loads.append(0)
                    members.append([])
                if not (self.capacity_filter and
                        loads[k] + weights[i] > W) and \
                        self.conflicts[i].isdisjoint(members[k]):
                    row = d[i]
                    delta = sum(row[j] for j in members[k])
                    if opening:
                        delta += alpha
                    assignment[i] = k
                    loads[k] += weights[i]
                    members[k].append(i)
                    for found in extend(i + 1, cost + delta):
                        yield found
                    members[k].pop()
                    loads[k] -= weights[i]
                if opening:
                    loads.pop()
                    members.pop()

        return extend(0, 0)


def partition_bins(rgs):
    bins = {}
    for i, k in enumerate(rgs):
        bins.setdefault(k, []).append(i)
    return [bins[k] for k in sorted(bins)]


def solve_exact(inst, constraints=None, max_items=ORACLE_MAX_ITEMS):
    """
    Minimum-cost capacity-feasible partition of the items.

    `constraints` is an optional `(conflict_pairs, merged_groups)` pair.
    Ties go to the lexicographically smallest restricted-growth string.
    Returns `(solution, objective)`, or `(None, None)` when the constraints
    leave no feasible partition.

    """
    if inst.n > max_items:
        raise LimitError("Oracle refused for n=%d > %d" %
                         (inst.n, max_items))

    conflicts, merged = constraints or ((), ())
    best_rgs = None
    best_cost = None
    count = 0
    for rgs, cost in PartitionEnumerator(inst, conflicts, merged):
        count += 1
        if best_cost is None or cost < best_cost:
            best_rgs, best_cost = rgs, cost

    logger.debug("Oracle scanned %d feasible partitions for n=%d" %
                 (count, inst.n))
    if best_rgs is None:
        return None, None

    solution = Solution.from_bins(inst, partition_bins(best_rgs))
    return solution, best_cost
