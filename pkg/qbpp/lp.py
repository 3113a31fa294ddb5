"""
Restricted master LP of the set-partitioning model:

    min  sum_P c_P lambda_P
    s.t. sum_{P containing i} lambda_P = 1   for every item i
         lambda >= 0

solved by a dense revised primal simplex with an explicit basis inverse.

Rows of items fused into a block (a super-item) all carry the same
coverage for block-consistent columns. The second and later members of each
block therefore get a zero-cost linking slack; those slacks are always zero
in a feasible solution and keep the basis square.

"""
import logging

import numpy as np
from tenacity import (
    before_sleep_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
)

from .common import DEFAULT_SETTINGS, InputError, LPError


logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-9
SINGULAR_CONDITION = 1e12

RULES = (
    DANTZIG,
    BLAND
) = (
    'dantzig',
    'bland'
)


class SingularBasisError(LPError):
    pass


def reset_basis_on_retry(retry_state):
    """Fall back to the crash basis before the next attempt."""
    master = retry_state.args[0]
    logger.info("Resetting master basis after a singular factorization")
    master.basis = None


class LPResult(object):
    """
    Snapshot of an optimal master solution.

    `primal` holds one value per structural column, in insertion order.

    """
    def __init__(self, objective, primal, duals, basis, pivots=0):
        self.objective = objective
        self.primal = primal
        self.duals = duals
        self.basis = basis
        self.pivots = pivots


class MasterLP(object):

    def __init__(self, n, blocks=None, settings=None):
        settings = settings or {}
        self.n = int(n)
        if blocks is None:
            blocks = [(i,) for i in range(self.n)]
        self.blocks = tuple(tuple(sorted(b)) for b in blocks)
        members = sorted(i for b in self.blocks for i in b)
        if members != list(range(self.n)):
            raise InputError("Blocks must partition the %d rows" % self.n)

        # Row of every linking slack; slack t is combined column t.
        self.slack_rows = tuple(i for b in self.blocks for i in b[1:])

        self.costs = []
        self.supports = []
        self._index = {}
        self.basis = None

        self.feasibility_tol = settings.get(
            "lp_feasibility_tol", DEFAULT_SETTINGS["lp_feasibility_tol"])
        self.optimality_tol = settings.get(
            "lp_optimality_tol", DEFAULT_SETTINGS["lp_optimality_tol"])
        self.refactor_interval = settings.get(
            "lp_refactor_interval", DEFAULT_SETTINGS["lp_refactor_interval"])
        self.retry_attempts = settings.get(
            "lp_retry_attempts", DEFAULT_SETTINGS["lp_retry_attempts"])
        self.settings = settings

    @property
    def num_columns(self):
        return len(self.costs)

    def columns(self):
        return list(zip(self.costs, self.supports))

    def index_of(self, support):
        return self._index.get(frozenset(support))

    def add_columns(self, columns):
        """
        Insert (cost, support) pairs or patterns, skipping supports already
        present unless the new cost is strictly lower.

        Returns the number of columns added or improved. The current basis
        stays valid.

        """
        added = 0
        for column in columns:
            if hasattr(column, "items"):
                cost, support = column.cost, column.items
            else:
                cost, support = column
            support = frozenset(int(i) for i in support)
            if not support:
                raise InputError("A master column needs a non-empty support")
            if min(support) < 0 or max(support) >= self.n:
                raise InputError("Column support out of range")

            existing = self._index.get(support)
            if existing is not None:
                if cost < self.costs[existing]:
                    self.costs[existing] = float(cost)
                    added += 1
                continue

            self._index[support] = len(self.costs)
            self.costs.append(float(cost))
            self.supports.append(support)
            added += 1

        return added

    def filtered(self, predicate, blocks, extra_columns=()):
        """
        A new master over `blocks` with the columns whose support satisfies
        `predicate`, plus `extra_columns`.

        """
        child = MasterLP(self.n, blocks, self.settings)
        child.add_columns((c, s) for c, s in self.columns() if predicate(s))
        child.add_columns(extra_columns)
        return child

    def _matrix(self):
        m = len(self.slack_rows)
        A = np.zeros((self.n, m + self.num_columns))
        for t, row in enumerate(self.slack_rows):
            A[row, t] = 1.0
        for j, support in enumerate(self.supports):
            A[list(support), m + j] = 1.0
        c = np.concatenate([np.zeros(m), np.array(self.costs, dtype=float)])
        return A, c

    def crash_basis(self):
        """
        One block column per block plus every linking slack.

        """
        m = len(self.slack_rows)
        basis = list(range(m))
        for b in self.blocks:
            j = self._index.get(frozenset(b))
            if j is None:
                raise LPError("Missing singleton column for block %s" %
                              [i + 1 for i in b])
            basis.append(m + j)
        return basis

    def solve(self):
        solver = self._solve.retry_with(
            stop=stop_after_attempt(max(1, self.retry_attempts)))
        return solver(self)

    def _factor(self, A, basis):
        B = A[:, basis]
        try:
            if np.linalg.cond(B) > SINGULAR_CONDITION:
                raise SingularBasisError("Ill-conditioned basis")
            return np.linalg.inv(B)
        except np.linalg.LinAlgError as e:
            raise SingularBasisError(str(e))

    # If the basis is singular, reset it to the crash basis and try again.
    # Log the attempt and reraise on the last one.
    @retry(retry=retry_if_exception_type(SingularBasisError),
           stop=stop_after_attempt(DEFAULT_SETTINGS["lp_retry_attempts"]),
           after=reset_basis_on_retry,
           before_sleep=before_sleep_log(logger, logging.WARNING),
           reraise=True)
    def _solve(self):
        A, c = self._matrix()
        rows, ncols = A.shape
        m = len(self.slack_rows)
        rhs = np.ones(rows)

        basis = list(self.basis) if self.basis else self.crash_basis()
        Binv = self._factor(A, basis)
        x_B = Binv @ rhs
        if np.any(x_B < -self.feasibility_tol):
            logger.debug("Warm basis infeasible, using the crash basis")
            basis = self.crash_basis()
            Binv = self._factor(A, basis)
            x_B = Binv @ rhs

        rule = DANTZIG
        degenerate = 0
        degenerate_limit = 5 * (rows + ncols)
        since_refactor = 0
        pivots = 0

        while True:
            if since_refactor >= self.refactor_interval:
                Binv = self._factor(A, basis)
                x_B = Binv @ rhs
                since_refactor = 0

            duals = c[basis] @ Binv
            reduced = c - duals @ A
            reduced[basis] = 0.0
            candidates = np.nonzero(reduced < -self.optimality_tol)[0]

            if not len(candidates):
                if since_refactor:
                    # Confirm optimality on a fresh factorization.
                    Binv = self._factor(A, basis)
                    x_B = Binv @ rhs
                    since_refactor = 0
                    continue
                break

            if rule == BLAND:
                q = int(candidates[0])
            else:
                q = int(candidates[np.argmin(reduced[candidates])])

            u = Binv @ A[:, q]
            eligible = np.nonzero(u > PIVOT_TOLERANCE)[0]
            if not len(eligible):
                raise LPError("Master LP is unbounded")
            ratios = np.maximum(x_B[eligible], 0.0) / u[eligible]
            theta = ratios.min()
            ties = eligible[ratios <= theta + 1e-12]
            r = int(min(ties, key=lambda k: basis[k]))

            if theta <= self.feasibility_tol:
                degenerate += 1
                if rule == DANTZIG and degenerate > degenerate_limit:
                    logger.info("Switching to Bland's rule after %d "
                                "degenerate pivots" % degenerate)
                    rule = BLAND

            pivot = u[r]
            if abs(pivot) < PIVOT_TOLERANCE:
                raise SingularBasisError("Vanishing pivot element")
            row = Binv[r] / pivot
            Binv -= np.outer(u, row)
            Binv[r] = row
            step = x_B[r] / pivot
            x_B -= step * u
            x_B[r] = step
            basis[r] = q

            since_refactor += 1
            pivots += 1

        self.basis = tuple(basis)

        x = np.zeros(ncols)
        x[basis] = np.maximum(x_B, 0.0)
        primal = x[m:]
        objective = float(c @ x)
        logger.debug("Master solved: %d rows, %d columns, %d pivots, "
                     "objective %.6f" % (rows, self.num_columns, pivots,
                                         objective))
        return LPResult(objective, primal, np.array(duals), self.basis,
                        pivots)


def reduced_cost(master, duals, column):
    """
    c_P minus the duals of the rows covered by P. `column` is a structural
    column index or a (cost, support) pair.

    """
    if isinstance(column, int):
        cost, support = master.costs[column], master.supports[column]
    else:
        cost, support = column
    return float(cost) - float(sum(duals[i] for i in support))


def solve(master):
    return master.solve()


def add_columns(master, columns):
    return master.add_columns(columns)


def dump_master(master):
    """
    The master in LP text format, for inspection.

    """
    from .milp_export import ModelIR, write_lp_file

    model = ModelIR("MASTER")
    for j, (cost, support) in enumerate(master.columns()):
        name = "lambda_%d" % (j + 1)
        model.add_variable(name, "continuous", 0, None)
        model.objective[name] = cost
    for t, row in enumerate(master.slack_rows):
        name = "link_%d" % (row + 1)
        model.add_variable(name, "continuous", 0, None)
    for i in range(master.n):
        terms = {"lambda_%d" % (j + 1): 1
                 for j, support in enumerate(master.supports)
                 if i in support}
        if i in master.slack_rows:
            terms["link_%d" % (i + 1)] = 1
        model.add_constraint("item_%d" % (i + 1), "partition", terms, "=", 1)
    return write_lp_file(model)
