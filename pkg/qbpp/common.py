import copy
import logging
import os

import yaml


logger = logging.getLogger(__name__)

SIGMAS = (
    MINUS,
    PLUS,
    MIXED
) = (
    'minus',
    'plus',
    'mixed'
)

SIGMA_ALIASES = {
    '-': MINUS,
    '+': PLUS,
    '+-': MIXED,
    '±': MIXED,
    'pm': MIXED,
}

STATUSES = (
    OPTIMAL,
    TIME_LIMIT,
    NODE_LIMIT,
    ERROR
) = (
    'optimal',
    'time-limit',
    'node-limit',
    'error'
)

EXIT_CODES = (
    EXIT_OK,
    EXIT_LIMIT,
    EXIT_INPUT
) = (
    0,
    1,
    2
)

SETTINGS_KEY = 'qbpp'
SETTINGS_ENV = 'QBPP_SETTINGS'
THREADS_ENV = 'QBPP_THREADS'

DEFAULT_SETTINGS = {
    "h": 5,
    "max_cols_per_iter": 10,
    "time_limit": 3600,
    "node_limit": None,
    "bnp_epsilon": 1e-6,
    "column_epsilon": 1e-8,
    "prune_epsilon": 1e-9,
    "integrality_tol": 1e-6,
    "lp_feasibility_tol": 1e-7,
    "lp_optimality_tol": 1e-10,
    "lp_refactor_interval": 50,
    "lp_retry_attempts": 2,
    "threads": 1,
    "master_seed": 42,
    "copies": 5,
    "oracle_max_items": 12,
    "enumerate_max_items": 20,
    "trace": False,
}


class QbppError(Exception):
    pass


class InputError(QbppError):
    pass


class ParseError(InputError):
    lineno = None

    def __init__(self, lineno, error_msg):
        super(ParseError, self).__init__(
            "line %s: %s" % (lineno, error_msg))
        self.lineno = lineno
        self.error_msg = error_msg


class LimitError(QbppError):
    pass


class LPError(QbppError):
    pass


class BranchingError(QbppError):
    pass


def normalize_sigma(sigma):
    value = str(sigma).strip().lower()
    value = SIGMA_ALIASES.get(value, value)
    if value not in SIGMAS:
        raise InputError("Unknown sign regime [%s]" % sigma)

    return value


def get_settings(path=None):
    """
    Return the solver settings.

    Values come from `DEFAULT_SETTINGS`, overlaid with the `qbpp` block of
    the YAML file at `path` (or at `$QBPP_SETTINGS`), and finally with
    `$QBPP_THREADS`.

    """
    settings = copy.deepcopy(DEFAULT_SETTINGS)

    path = path or os.environ.get(SETTINGS_ENV)
    if path:
        try:
            with open(path) as f:
                document = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise InputError("Cannot read settings file [%s]: %s" %
                             (path, e))
        if not isinstance(document, dict):
            raise InputError("Settings file [%s] is not a mapping" % path)
        settings.update(document.get(SETTINGS_KEY, {}) or {})

    threads = os.environ.get(THREADS_ENV)
    if threads:
        try:
            settings["threads"] = max(1, int(threads))
        except ValueError:
            logger.warning("Ignoring invalid %s value [%s]" %
                           (THREADS_ENV, threads))

    return settings


def gap_percent(ub, lb):
    """
    Percentage gap 100 * (UB - LB) / |UB|.

    Undefined at UB = 0: reported as 0 when LB = UB = 0, else infinite.

    """
    if ub is None or lb is None:
        return float("inf")
    if ub == 0:
        return 0.0 if lb == 0 else float("inf")

    return 100.0 * (ub - lb) / abs(ub)
