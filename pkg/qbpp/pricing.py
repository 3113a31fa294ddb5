"""
Solvers for the Generalized Quadratic Knapsack Problem (GQKP):

    max  sum_i linear_i z_i + sum_{i<j} quad_ij z_i z_j
    s.t. sum_i w_i z_i <= W,  z binary,  no conflicting pair packed

Linear and quadratic profits may have any sign.

"""
import heapq
import itertools
import logging
import time

import numpy as np

from .common import InputError, LimitError, ParseError


logger = logging.getLogger(__name__)

PRUNE_EPSILON = 1e-9
ENUMERATE_MAX_ITEMS = 20

PRICING_MAGIC = "GQKP"
PRICING_VERSION = 1


class PricingProblem(object):
    """
    One GQKP instance.

    Items heavier than the capacity are dropped at construction; they stay
    addressable by index but never enter a pattern.

    """
    def __init__(self, weights, capacity, linear, quad, conflicts=(),
                 threshold=0.0):
        self.weights = tuple(int(w) for w in weights)
        self.n = len(self.weights)
        self.capacity = int(capacity)
        self.linear = np.array(linear, dtype=float).reshape(self.n)
        quad = np.array(quad, dtype=float).reshape((self.n, self.n))
        if not np.allclose(quad, quad.T, rtol=0, atol=1e-12):
            raise InputError("Quadratic profits must be symmetric")
        if np.any(np.diag(quad) != 0):
            raise InputError("Quadratic profit diagonal must be zero")
        quad.flags.writeable = False
        self.linear.flags.writeable = False
        self.quad = quad
        self.threshold = float(threshold)

        self.conflict = np.zeros((self.n, self.n), dtype=bool)
        pairs = set()
        for i, j in conflicts:
            i, j = int(i), int(j)
            if i == j:
                raise InputError("A conflict needs two distinct items")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InputError("Conflict item out of range")
            pairs.add((min(i, j), max(i, j)))
            self.conflict[i, j] = self.conflict[j, i] = True
        self.conflicts = frozenset(pairs)
        self.conflict.flags.writeable = False

        self.dropped = frozenset(
            i for i, w in enumerate(self.weights) if w > self.capacity)
        self.items = tuple(i for i in range(self.n) if i not in self.dropped)

        # Plain-list copies for the scalar inner loops.
        self._rows = self.quad.tolist()
        self._lin = self.linear.tolist()
        self._conf = [set(np.nonzero(row)[0].tolist())
                      for row in self.conflict]

    def check_pattern(self, pattern):
        pattern = tuple(sorted(pattern))
        if len(set(pattern)) != len(pattern):
            raise InputError("Pattern repeats an item")
        for i in pattern:
            if not 0 <= i < self.n or i in self.dropped:
                raise InputError("Item %d cannot be packed" % (i + 1))
        if sum(self.weights[i] for i in pattern) > self.capacity:
            raise InputError("Pattern exceeds the capacity")
        for a, b in itertools.combinations(pattern, 2):
            if self.conflict[a, b]:
                raise InputError("Pattern packs conflicting items %d and %d"
                                 % (a + 1, b + 1))
        return pattern


class BBNode(object):
    """
    A partial knapsack filling (I, O, U) of the exact branch-and-bound.

    """
    def __init__(self, inside, outside, undecided, inside_weight,
                 inside_value, ub=None):
        self.inside = frozenset(inside)
        self.outside = frozenset(outside)
        self.undecided = frozenset(undecided)
        self.inside_weight = inside_weight
        self.inside_value = inside_value
        self.ub = ub

    def __repr__(self):
        return "BBNode(I=%s, |O|=%d, |U|=%d, ub=%s)" % (
            sorted(self.inside), len(self.outside), len(self.undecided),
            self.ub)


class BBResult(object):

    def __init__(self, pattern, value, proven, solutions, stats):
        self.pattern = pattern
        self.value = value
        self.proven = proven
        self.solutions = solutions
        self.stats = stats


def pattern_value(pp, pattern):
    pattern = pp.check_pattern(pattern)
    value = 0.0
    for k, i in enumerate(pattern):
        value += pp._lin[i]
        row = pp._rows[i]
        for j in pattern[k + 1:]:
            value += row[j]
    return value


def _unchecked_value(pp, pattern):
    value = 0.0
    for k, i in enumerate(pattern):
        value += pp._lin[i]
        row = pp._rows[i]
        for j in pattern[k + 1:]:
            value += row[j]
    return value


def mch_order(pp):
    """
    Live items by non-increasing (linear_i + sum_j quad_ij) / w_i, ties by
    index.

    """
    live = list(pp.items)
    if not live:
        return []
    sums = pp.quad[np.ix_(live, live)].sum(axis=1)
    keys = {i: (pp._lin[i] + float(s)) / pp.weights[i]
            for i, s in zip(live, sums)}
    return sorted(live, key=lambda i: (-keys[i], i))


def mch_solve(pp, h):
    """
    Multiple constructive heuristic: knapsack DP over (stage, exact weight)
    keeping the h best patterns per state, with marginal quadratic gains.

    Returns distinct non-empty patterns, best first, as (pattern, value).

    """
    if h < 1:
        raise InputError("h must be at least 1")

    W = pp.capacity
    states = [[] for _ in range(W + 1)]
    states[0] = [(0.0, ())]

    for i in mch_order(pp):
        wi = pp.weights[i]
        lin = pp._lin[i]
        row = pp._rows[i]
        conf = pp._conf[i]
        for w in range(W, wi - 1, -1):
            previous = states[w - wi]
            if not previous:
                continue
            candidates = []
            for value, pattern in previous:
                if conf and not conf.isdisjoint(pattern):
                    continue
                gain = lin
                for j in pattern:
                    gain += row[j]
                candidates.append((value + gain, pattern + (i,)))
            if not candidates:
                continue
            merged = states[w] + candidates
            # Stable: on equal values existing entries stay ahead.
            merged.sort(key=lambda entry: -entry[0])
            states[w] = merged[:h]

    found = {}
    for entries in states:
        for _, pattern in entries:
            if not pattern:
                continue
            key = tuple(sorted(pattern))
            if key not in found:
                found[key] = _unchecked_value(pp, key)

    ranked = sorted(found.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:h * (W + 1)]


def _fits(pp, item, node_weight, inside):
    if pp.weights[item] > pp.capacity - node_weight:
        return False
    conf = pp._conf[item]
    return not conf or conf.isdisjoint(inside)


def make_node(pp, inside, outside, undecided):
    """
    Build a node, moving undecided items that no longer fit (capacity or
    conflict with I) to O.

    """
    inside = tuple(sorted(inside))
    weight = sum(pp.weights[i] for i in inside)
    value = _unchecked_value(pp, inside)
    keep = []
    moved = []
    for i in undecided:
        if _fits(pp, i, weight, inside):
            keep.append(i)
        else:
            moved.append(i)
    return BBNode(inside, set(outside) | set(moved), keep, weight, value)


def _child(pp, node, item, include):
    if include:
        inside = node.inside | {item}
        weight = node.inside_weight + pp.weights[item]
        row = pp._rows[item]
        value = node.inside_value + pp._lin[item] + sum(
            row[j] for j in node.inside)
        keep = []
        moved = []
        residual = pp.capacity - weight
        conf = pp._conf[item]
        for j in node.undecided:
            if j == item:
                continue
            if pp.weights[j] > residual or j in conf:
                moved.append(j)
            else:
                keep.append(j)
        return BBNode(inside, node.outside | set(moved), keep, weight, value)

    return BBNode(node.inside, node.outside | {item},
                  node.undecided - {item}, node.inside_weight,
                  node.inside_value)


def greedy_lower_bound(pp, node):
    """
    Complete I greedily by the largest positive gain-to-weight ratio.

    """
    current = set(node.inside)
    residual = pp.capacity - node.inside_weight
    value = node.inside_value
    gains = {}
    for i in node.undecided:
        row = pp._rows[i]
        gains[i] = pp._lin[i] + sum(row[j] for j in current)

    while gains:
        best = None
        best_ratio = 0.0
        for i in sorted(gains):
            g = gains[i]
            if g <= 0 or pp.weights[i] > residual:
                continue
            conf = pp._conf[i]
            if conf and not conf.isdisjoint(current):
                continue
            ratio = g / pp.weights[i]
            if best is None or ratio > best_ratio:
                best, best_ratio = i, ratio
        if best is None:
            break
        value += gains.pop(best)
        current.add(best)
        residual -= pp.weights[best]
        row = pp._rows[best]
        for j in gains:
            gains[j] += row[j]

    return tuple(sorted(current)), value


def precompute_ratio_orders(pp):
    """
    For each item i, the other live items sorted by max(0, quad_ij) / w_j
    non-increasing, ties by index.

    """
    orders = {}
    for i in pp.items:
        row = pp._rows[i]
        others = [j for j in pp.items if j != i]
        orders[i] = sorted(
            others, key=lambda j: (-max(0.0, row[j]) / pp.weights[j], j))
    return orders


def item_bounds(pp, node, orders):
    """
    Per undecided item, the bound p_bar_i = linear_i + sum_{j in I} quad_ij
    + 1/2 * fractional KP over U \\ {i} with profits max(0, quad_ij).

    """
    bounds = {}
    residual = pp.capacity - node.inside_weight
    undecided = node.undecided
    for i in undecided:
        wi = pp.weights[i]
        if wi > residual:
            continue
        row = pp._rows[i]
        cap = residual - wi
        frac = 0.0
        for j in orders[i]:
            if cap <= 0:
                break
            profit = row[j]
            if profit <= 0:
                break
            if j not in undecided:
                continue
            wj = pp.weights[j]
            if wj <= cap:
                frac += profit
                cap -= wj
            else:
                frac += profit * cap / wj
                cap = 0
        base = pp._lin[i]
        for j in node.inside:
            base += row[j]
        bounds[i] = base + 0.5 * frac
    return bounds


def _knapsack(weights, profits, capacity):
    dp = np.zeros(capacity + 1)
    for w, p in zip(weights, profits):
        if w > capacity:
            continue
        shifted = dp[:capacity + 1 - w] + p
        dp[w:] = np.maximum(dp[w:], shifted)
    return float(dp[capacity])


def node_upper_bound(pp, node, orders):
    if not node.undecided:
        return node.inside_value
    bounds = item_bounds(pp, node, orders)
    chosen = [i for i in sorted(bounds) if bounds[i] > 0]
    if not chosen:
        return node.inside_value
    residual = pp.capacity - node.inside_weight
    extra = _knapsack([pp.weights[i] for i in chosen],
                      [bounds[i] for i in chosen], residual)
    return node.inside_value + extra


def bb_solve(pp, initial_incumbent=None, limits=None, use_threshold=False,
             node_callback=None, epsilon=PRUNE_EPSILON):
    """
    Exact best-first branch-and-bound for the GQKP.

    `limits` may carry `node_limit` and `deadline` (a `time.monotonic()`
    value). With `use_threshold`, nodes are pruned against
    max(incumbent, pp.threshold): the search then only proves whether some
    pattern beats the threshold. `solutions` lists every incumbent found,
    best first.

    """
    limits = limits or {}
    node_limit = limits.get("node_limit")
    deadline = limits.get("deadline")

    if initial_incumbent is None:
        initial_incumbent = ((), 0.0)
    pattern, _ = initial_incumbent
    pattern = pp.check_pattern(pattern)
    best_pattern = pattern
    best_value = pattern_value(pp, pattern)
    solutions = {}
    if pattern:
        solutions[pattern] = best_value

    stats = {"nodes": 0, "expanded": 0, "pruned": 0}
    orders = precompute_ratio_orders(pp)

    def cutoff():
        if use_threshold:
            return max(best_value, pp.threshold) + epsilon
        return best_value + epsilon

    def offer(candidate, value):
        nonlocal best_pattern, best_value
        if value > best_value + epsilon:
            best_pattern, best_value = candidate, value
            solutions[candidate] = value

    def evaluate(node):
        stats["nodes"] += 1
        if not node.undecided:
            node.ub = node.inside_value
        else:
            node.ub = node_upper_bound(pp, node, orders)
        if node_callback is not None:
            node_callback(node)
        return node

    root = evaluate(make_node(pp, (), (), pp.items))
    offer(root.inside, root.inside_value)

    heap = []
    counter = itertools.count()
    if root.undecided and root.ub > cutoff():
        heapq.heappush(heap, (-root.ub, next(counter), root))

    proven = True
    while heap:
        if node_limit is not None and stats["expanded"] >= node_limit:
            proven = False
            break
        if deadline is not None and time.monotonic() >= deadline:
            proven = False
            break

        _, _, node = heapq.heappop(heap)
        if node.ub <= cutoff():
            # Best-first: nothing left can beat the incumbent.
            stats["pruned"] += 1 + len(heap)
            heap = []
            break
        stats["expanded"] += 1

        lb_pattern, lb_value = greedy_lower_bound(pp, node)
        offer(lb_pattern, lb_value)
        if node.ub <= cutoff():
            stats["pruned"] += 1
            continue

        best_item = None
        best_key = None
        best_children = None
        for j in sorted(node.undecided):
            child_in = evaluate(_child(pp, node, j, True))
            child_out = evaluate(_child(pp, node, j, False))
            high = max(child_in.ub, child_out.ub)
            low = min(child_in.ub, child_out.ub)
            key = (high, low, j)
            if best_key is None or key < best_key:
                best_item, best_key = j, key
                best_children = (child_in, child_out)

        logger.debug("Branching on item %d at %r" % (best_item, node))
        for child in best_children:
            if not child.undecided:
                offer(child.inside, child.inside_value)
                continue
            if child.ub > cutoff():
                heapq.heappush(heap, (-child.ub, next(counter), child))
            else:
                stats["pruned"] += 1

    ranked = sorted(solutions.items(), key=lambda kv: (-kv[1], kv[0]))
    return BBResult(best_pattern, best_value, proven, ranked, stats)


def enumerate_solve(pp, node=None, max_items=ENUMERATE_MAX_ITEMS):
    """
    Exhaustive subset scan; with `node`, only supersets of I avoiding O.

    """
    if pp.n > max_items:
        raise LimitError("Enumeration refused for n=%d > %d" %
                         (pp.n, max_items))

    if node is None:
        inside = ()
        candidates = list(pp.items)
    else:
        inside = tuple(sorted(node.inside))
        candidates = sorted(i for i in pp.items
                            if i not in node.inside and
                            i not in node.outside)
    pp.check_pattern(inside)

    start_value = _unchecked_value(pp, inside)
    start_weight = sum(pp.weights[i] for i in inside)
    gains = [pp._lin[i] + sum(pp._rows[i][j] for j in inside)
             for i in range(pp.n)]

    best = [inside, start_value]
    current = list(inside)

    def search(k, weight, value):
        if value > best[1] + 1e-12:
            best[0] = tuple(sorted(current))
            best[1] = value
        for idx in range(k, len(candidates)):
            i = candidates[idx]
            if weight + pp.weights[i] > pp.capacity:
                continue
            conf = pp._conf[i]
            if conf and not conf.isdisjoint(current):
                continue
            gain = gains[i]
            current.append(i)
            row = pp._rows[i]
            for j in candidates[idx + 1:]:
                gains[j] += row[j]
            search(idx + 1, weight + pp.weights[i], value + gain)
            for j in candidates[idx + 1:]:
                gains[j] -= row[j]
            current.pop()

    search(0, start_weight, start_value)
    return best[0], best[1]


def write_pricing_problem(pp):
    lines = [
        "%s %d" % (PRICING_MAGIC, PRICING_VERSION),
        "%d %d %s" % (pp.n, pp.capacity, repr(pp.threshold)),
        " ".join(str(w) for w in pp.weights),
        " ".join(repr(float(v)) for v in pp.linear),
    ]
    triples = [(i, j, float(pp.quad[i, j]))
               for i in range(pp.n) for j in range(i + 1, pp.n)
               if pp.quad[i, j] != 0]
    lines.append(str(len(triples)))
    lines.extend("%d %d %s" % (i + 1, j + 1, repr(p)) for i, j, p in triples)
    lines.append(str(len(pp.conflicts)))
    lines.extend("%d %d" % (i + 1, j + 1) for i, j in sorted(pp.conflicts))
    return "\n".join(lines) + "\n"


def read_pricing_problem(text):
    body = [(k, line.strip()) for k, line in
            enumerate(text.splitlines(), start=1)
            if line.strip() and not line.strip().startswith("#")]
    if not body:
        raise ParseError(1, "empty pricing file")

    def floats(lineno, line, count=None):
        try:
            values = [float(v) for v in line.split()]
        except ValueError:
            raise ParseError(lineno, "expected numbers, got [%s]" % line)
        if count is not None and len(values) != count:
            raise ParseError(lineno, "expected %d values, got %d" %
                             (count, len(values)))
        return values

    lineno, line = body[0]
    if line.split() != [PRICING_MAGIC, str(PRICING_VERSION)]:
        raise ParseError(lineno, "expected header [%s %d]" %
                         (PRICING_MAGIC, PRICING_VERSION))
    if len(body) < 5:
        raise ParseError(body[-1][0] + 1, "truncated pricing file")

    lineno, line = body[1]
    header = floats(lineno, line, 3)
    n, capacity, threshold = int(header[0]), int(header[1]), header[2]
    weights = [int(w) for w in floats(*body[2], count=n)]
    linear = floats(*body[3], count=n)

    lineno, line = body[4]
    m = int(floats(lineno, line, 1)[0])
    quad = np.zeros((n, n))
    pos = 5
    for lineno, line in body[pos:pos + m]:
        i, j, p = floats(lineno, line, 3)
        i, j = int(i) - 1, int(j) - 1
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ParseError(lineno, "bad item pair")
        quad[i, j] = quad[j, i] = p
    pos += m
    if len(body) < pos:
        raise ParseError(body[-1][0], "missing quadratic entries")

    conflicts = []
    if len(body) > pos:
        lineno, line = body[pos]
        c = int(floats(lineno, line, 1)[0])
        rest = body[pos + 1:]
        if len(rest) != c:
            raise ParseError(lineno, "declared %d conflicts, found %d" %
                             (c, len(rest)))
        for lineno, line in rest:
            i, j = floats(lineno, line, 2)
            conflicts.append((int(i) - 1, int(j) - 1))

    try:
        return PricingProblem(weights, capacity, linear, quad, conflicts,
                              threshold)
    except InputError as e:
        raise ParseError(body[1][0], str(e))
