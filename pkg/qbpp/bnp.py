"""
Branch-and-Price for the QBPP.

Each node owns a set-partitioning master over the original items, the
conflict pairs accumulated by 0-branches and the partition of the items
into super-items accumulated by 1-branches. Pricing runs over super-items:
a pattern of super-items S prices to

    v(S) = sum_{K in S} (pi_K - D_K) - sum_{K<L in S} d(K, L)

where pi_K sums the duals of K, D_K is the internal dissimilarity of K and
d(K, L) the cross dissimilarity. The expanded column has reduced cost
alpha - v(S), so a column improves the master iff v(S) > alpha.

"""
import itertools
import logging
import math
import time

import numpy as np

from .common import (
    DEFAULT_SETTINGS,
    NODE_LIMIT,
    OPTIMAL,
    TIME_LIMIT,
    BranchingError,
    InputError,
    gap_percent,
)
from .core import Pattern, Solution
from .lp import MasterLP
from .pricing import PricingProblem, bb_solve, mch_solve


logger = logging.getLogger(__name__)

SIDES = (
    ZERO,
    ONE
) = (
    0,
    1
)

PRICERS = (
    MCH,
    EXACT
) = (
    'mch',
    'exact'
)


def _setting(settings, key):
    value = settings.get(key)
    if value is None:
        value = DEFAULT_SETTINGS[key]
    return value


class BnPNode(object):

    def __init__(self, inst, master, conflicts, partition, depth=0,
                 lower_bound=None, node_id=0):
        self.id = node_id
        self.inst = inst
        self.master = master
        self.conflicts = frozenset(
            (min(i, j), max(i, j)) for i, j in conflicts)
        self.partition = tuple(tuple(sorted(k)) for k in partition)
        self.depth = depth
        self.lower_bound = lower_bound
        self.solved = False
        self.result = None

    def super_item_of(self, item):
        for k, block in enumerate(self.partition):
            if item in block:
                return k
        raise InputError("Item %d is not in the partition" % (item + 1))

    def is_integral(self, tol=DEFAULT_SETTINGS["integrality_tol"]):
        if self.result is None:
            return False
        primal = self.result.primal
        return bool(np.all(np.abs(primal - np.round(primal)) <= tol))

    def integral_solution(self, tol=DEFAULT_SETTINGS["integrality_tol"]):
        bins = [self.master.supports[j]
                for j, value in enumerate(self.result.primal)
                if value > 1 - tol]
        return Solution.from_bins(self.inst, bins)

    def __repr__(self):
        return "BnPNode(id=%d, depth=%d, lb=%s, supers=%d, conflicts=%d)" % (
            self.id, self.depth, self.lower_bound, len(self.partition),
            len(self.conflicts))


class SolveResult(object):

    def __init__(self, status, best_solution, lower_bound, upper_bound,
                 stats, trace=None):
        self.status = status
        self.best_solution = best_solution
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound
        self.gap_percent = gap_percent(upper_bound, lower_bound)
        self.stats = stats
        self.trace = trace or []

    def as_dict(self):
        return {
            "status": self.status,
            "objective": self.upper_bound,
            "lower_bound": self.lower_bound,
            "gap_percent": self.gap_percent,
            "bins": [[i + 1 for i in b.items]
                     for b in self.best_solution.bins]
            if self.best_solution else None,
            "stats": dict(self.stats),
        }


def trivial_lower_bound(inst):
    """
    Minimum bin count times alpha plus every negative dissimilarity.

    """
    bins = -(-inst.total_weight // inst.capacity)
    negative = int(np.triu(np.minimum(inst.dissim, 0), k=1).sum())
    return bins * inst.bin_cost + negative


def root_node(inst, settings=None):
    partition = [(i,) for i in range(inst.n)]
    master = MasterLP(inst.n, partition, settings)
    master.add_columns(Pattern.from_items(inst, b) for b in partition)
    return BnPNode(inst, master, (), partition,
                   lower_bound=trivial_lower_bound(inst))


def build_pricing(node, duals):
    """
    GQKP over the super-items of `node` with the dual values `duals` of the
    original rows. Returns the problem and the acceptance threshold alpha.

    """
    inst = node.inst
    d = inst.dissim
    blocks = node.partition
    size = len(blocks)

    weights = []
    linear = np.zeros(size)
    for k, block in enumerate(blocks):
        weight = sum(inst.weights[i] for i in block)
        assert weight <= inst.capacity, "super-item exceeds the capacity"
        weights.append(weight)
        internal = int(d[np.ix_(block, block)].sum()) // 2
        linear[k] = sum(duals[i] for i in block) - internal

    quad = np.zeros((size, size))
    for k, l in itertools.combinations(range(size), 2):
        cross = int(d[np.ix_(blocks[k], blocks[l])].sum())
        quad[k, l] = quad[l, k] = -cross

    owner = {i: k for k, block in enumerate(blocks) for i in block}
    conflicts = set()
    for i, j in node.conflicts:
        a, b = owner[i], owner[j]
        if a != b:
            conflicts.add((min(a, b), max(a, b)))

    alpha = float(inst.bin_cost)
    pp = PricingProblem(weights, inst.capacity, linear, quad,
                        sorted(conflicts), threshold=alpha)
    return pp, alpha


def expand_pattern(node, pattern):
    items = [i for k in pattern for i in node.partition[k]]
    return Pattern.from_items(node.inst, items)


def column_generation(node, settings, deadline=None, stats=None, trace=None):
    """
    Solve the node master to optimality over all block-consistent columns.

    Returns the node lower bound, or None when the deadline interrupts the
    loop before the exact pricer proves convergence. In that case the node
    keeps its inherited bound.

    """
    h = _setting(settings, "h")
    max_cols = _setting(settings, "max_cols_per_iter")
    epsilon = _setting(settings, "column_epsilon")
    prune_epsilon = _setting(settings, "prune_epsilon")
    stats = stats if stats is not None else {}
    for key in ("cg_iterations", "columns", "exact_calls", "mch_calls"):
        stats.setdefault(key, 0)

    def exact_candidates(pp, alpha, incumbent):
        stats["exact_calls"] += 1
        limits = {"deadline": deadline}
        outcome = bb_solve(pp, incumbent, limits, use_threshold=True,
                           epsilon=prune_epsilon)
        found = [(p, v) for p, v in outcome.solutions
                 if v > alpha + epsilon]
        return found, outcome.proven

    def add(candidates):
        columns = [expand_pattern(node, p)
                   for p, _ in candidates[:max_cols]]
        added = node.master.add_columns(columns)
        stats["columns"] += added
        return added

    while True:
        if deadline is not None and time.monotonic() >= deadline:
            return None

        result = node.master.solve()
        stats["cg_iterations"] += 1
        pp, alpha = build_pricing(node, result.duals)

        ranked = mch_solve(pp, h)
        stats["mch_calls"] += 1
        pricer = MCH
        candidates = [(p, v) for p, v in ranked if v > alpha + epsilon]
        added = add(candidates) if candidates else 0

        # only the exact pricer may declare convergence
        if not added:
            pricer = EXACT
            incumbent = ranked[0] if ranked else ((), 0.0)
            candidates, proven = exact_candidates(pp, alpha, incumbent)
            if not candidates and not proven:
                return None
            if candidates:
                added = add(candidates)
                if not added:
                    logger.warning("Pricing found improving patterns at "
                                   "node %d but all were already in the "
                                   "master" % node.id)

        record = {
            "iteration": stats["cg_iterations"],
            "node": node.id,
            "lower_bound": result.objective,
            "columns": added,
            "pricer": pricer,
        }
        logger.debug("CG %(iteration)d node %(node)d: master %(lower_bound)"
                     ".6f, %(columns)d columns from %(pricer)s" % record)
        if trace is not None:
            trace.append(record)

        if not added:
            node.result = result
            node.solved = True
            bound = result.objective
            if node.lower_bound is not None:
                bound = max(bound, node.lower_bound)
            node.lower_bound = bound
            return bound


def select_branch_pair(node, tol=DEFAULT_SETTINGS["integrality_tol"]):
    """
    The original pair (i, j) whose co-assignment value is closest to 0.5.

    """
    if node.result is None:
        raise BranchingError("Node %d has no master solution" % node.id)

    n = node.inst.n
    zeta = np.zeros((n, n))
    for value, support in zip(node.result.primal, node.master.supports):
        if value <= tol:
            continue
        idx = sorted(support)
        zeta[np.ix_(idx, idx)] += value

    rows, cols = np.triu_indices(n, k=1)
    values = zeta[rows, cols]
    fractional = (values > tol) & (values < 1 - tol)
    if not np.any(fractional):
        raise BranchingError("No fractional pair in a fractional master "
                             "at node %d" % node.id)

    distance = np.abs(values - 0.5)
    distance[~fractional] = np.inf
    # argmin returns the first minimum: row-major order is lexicographic.
    best = int(np.argmin(distance))
    return int(rows[best]), int(cols[best])


def apply_branch(node, pair, side, node_id=0):
    """
    Child of `node` that forbids (ZERO) or enforces (ONE) items i and j
    sharing a bin.

    """
    i, j = min(pair), max(pair)
    inst = node.inst
    ki, kj = node.super_item_of(i), node.super_item_of(j)
    if ki == kj or (i, j) in node.conflicts:
        raise BranchingError("Pair (%d, %d) is already decided" %
                             (i + 1, j + 1))

    if side == ZERO:
        conflicts = node.conflicts | {(i, j)}
        partition = node.partition

        def keep(support):
            return not (i in support and j in support)
    elif side == ONE:
        conflicts = node.conflicts
        merged = tuple(sorted(node.partition[ki] + node.partition[kj]))
        assert sum(inst.weights[t] for t in merged) <= inst.capacity, \
            "merged super-item exceeds the capacity"
        partition = [b for k, b in enumerate(node.partition)
                     if k not in (ki, kj)] + [merged]
        partition.sort()

        def keep(support):
            return (i in support) == (j in support)
    else:
        raise InputError("Unknown branch side [%s]" % side)

    singletons = [Pattern.from_items(inst, b) for b in partition]
    master = node.master.filtered(keep, partition, singletons)
    return BnPNode(inst, master, conflicts, partition, node.depth + 1,
                   node.lower_bound, node_id)


def first_fit_decreasing(inst):
    order = sorted(range(inst.n), key=lambda i: (-inst.weights[i], i))
    bins = []
    loads = []
    for i in order:
        for k, load in enumerate(loads):
            if load + inst.weights[i] <= inst.capacity:
                bins[k].append(i)
                loads[k] += inst.weights[i]
                break
        else:
            bins.append([i])
            loads.append(inst.weights[i])
    return bins


def initial_incumbent(inst):
    """
    First-fit decreasing, then one pass of best-improvement relocation of
    each item under the full quadratic objective.

    """
    d = inst.dissim.tolist()
    alpha = inst.bin_cost
    bins = [set(b) for b in first_fit_decreasing(inst)]
    loads = [sum(inst.weights[i] for i in b) for b in bins]
    where = {i: k for k, b in enumerate(bins) for i in b}

    for i in range(inst.n):
        source = where[i]
        row = d[i]
        removal = -sum(row[j] for j in bins[source] if j != i)
        if len(bins[source]) == 1:
            removal -= alpha

        best_delta = 0
        best_target = None
        for k, b in enumerate(bins):
            if k == source or not b:
                continue
            if loads[k] + inst.weights[i] > inst.capacity:
                continue
            delta = removal + sum(row[j] for j in b)
            if delta < best_delta:
                best_delta, best_target = delta, k
        if len(bins[source]) > 1 and removal + alpha < best_delta:
            best_delta, best_target = removal + alpha, len(bins)

        if best_target is None:
            continue
        if best_target == len(bins):
            bins.append(set())
            loads.append(0)
        bins[source].discard(i)
        loads[source] -= inst.weights[i]
        bins[best_target].add(i)
        loads[best_target] += inst.weights[i]
        where[i] = best_target

    return Solution.from_bins(inst, [sorted(b) for b in bins if b])


def solve(inst, settings=None):
    """
    Best-first Branch-and-Price.

    """
    settings = settings or {}
    started = time.monotonic()
    time_limit = _setting(settings, "time_limit")
    deadline = started + time_limit if time_limit is not None else None
    node_limit = settings.get("node_limit")
    epsilon = _setting(settings, "bnp_epsilon")
    tol = _setting(settings, "integrality_tol")
    trace = [] if settings.get("trace") else None

    stats = {"nodes": 0, "cg_iterations": 0, "columns": 0,
             "exact_calls": 0, "mch_calls": 0, "max_depth": 0,
             "root_lower_bound": None, "seconds": 0.0}

    incumbent = initial_incumbent(inst)
    upper = incumbent.objective
    logger.info("Initial incumbent %d with %d bins" %
                (upper, len(incumbent.bins)))

    def prunable(node):
        return math.ceil(node.lower_bound - epsilon) >= upper

    counter = itertools.count(1)
    active = [root_node(inst, settings)]
    global_lb = active[0].lower_bound
    status = OPTIMAL

    while True:
        interrupted = False
        for node in sorted((n for n in active if not n.solved),
                           key=lambda n: n.id):
            bound = column_generation(node, settings, deadline, stats, trace)
            if bound is None:
                interrupted = True
                break
            stats["nodes"] += 1
            stats["max_depth"] = max(stats["max_depth"], node.depth)
            if node.id == 0:
                stats["root_lower_bound"] = bound

            if node.is_integral(tol):
                solution = node.integral_solution(tol)
                if solution.objective < upper:
                    incumbent, upper = solution, solution.objective
                    logger.info("New incumbent %d at node %d" %
                                (upper, node.id))
                active.remove(node)

        active = [n for n in active if not prunable(n)]
        if active:
            global_lb = max(global_lb, min(n.lower_bound for n in active))

        if interrupted:
            status = TIME_LIMIT
            break
        if not active:
            break

        node = min(active, key=lambda n: (n.lower_bound, n.id))
        if node_limit is not None and stats["nodes"] >= node_limit:
            status = NODE_LIMIT
            break

        pair = select_branch_pair(node, tol)
        logger.debug("Branching %r on (%d, %d)" %
                     (node, pair[0] + 1, pair[1] + 1))
        active.remove(node)
        for side in SIDES:
            active.append(apply_branch(node, pair, side, next(counter)))

    if status == OPTIMAL:
        lower = upper
    else:
        lower = min(global_lb, upper)
    stats["seconds"] = time.monotonic() - started

    logger.info("Finished with status %s: UB %d, LB %s, %d nodes" %
                (status, upper, lower, stats["nodes"]))
    return SolveResult(status, incumbent, lower, upper, stats, trace)
