import csv
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bnp
from .common import ERROR, OPTIMAL, InputError, QbppError, gap_percent
from .core import read_instance


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_FIELD = "schema=%d" % SCHEMA_VERSION

ROW_KINDS = (
    RUN,
    AGGREGATE
) = (
    'run',
    'aggregate'
)

BENCH_FIELDS = (
    SCHEMA_FIELD,
    "instance",
    "n",
    "mu",
    "delta",
    "sigma",
    "solver",
    "status",
    "seconds",
    "upper_bound",
    "lower_bound",
    "gap_percent",
    "nodes",
    "cg_iterations",
    "columns",
    "solved",
    "count",
)

DEFAULT_CONFIGS = ("bnp-1-1", "bnp-5-10")

CONFIG_PATTERN = re.compile(r"^bnp-(\d+)-(\d+)$")


def parse_config(name):
    """
    Solver settings of a `bnp-<h>-<maxcols>` configuration name.

    """
    match = CONFIG_PATTERN.match(name)
    if not match:
        raise InputError("Unknown solver configuration [%s]" % name)
    h, max_cols = int(match.group(1)), int(match.group(2))
    if h < 1 or max_cols < 1:
        raise InputError("Configuration [%s] needs h and maxcols >= 1" %
                         name)
    return {"h": h, "max_cols_per_iter": max_cols}


def _format(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class BenchRecord(object):

    def __init__(self, instance, n, mu, delta, sigma, solver, status,
                 seconds=0.0, upper_bound=None, lower_bound=None,
                 nodes=0, cg_iterations=0, columns=0):
        self.instance = instance
        self.n = n
        self.mu = mu
        self.delta = delta
        self.sigma = sigma
        self.solver = solver
        self.status = status
        self.seconds = seconds
        self.upper_bound = upper_bound
        self.lower_bound = lower_bound
        self.nodes = nodes
        self.cg_iterations = cg_iterations
        self.columns = columns

    @property
    def gap_percent(self):
        if self.status == ERROR:
            return None
        return gap_percent(self.upper_bound, self.lower_bound)

    def as_dict(self):
        return {
            "instance": self.instance,
            "n": self.n,
            "mu": self.mu,
            "delta": self.delta,
            "sigma": self.sigma,
            "solver": self.solver,
            "status": self.status,
            "seconds": self.seconds,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "gap_percent": self.gap_percent,
            "nodes": self.nodes,
            "cg_iterations": self.cg_iterations,
            "columns": self.columns,
        }

    def as_row(self):
        row = {key: _format(value) for key, value in self.as_dict().items()}
        row[SCHEMA_FIELD] = RUN
        row["solved"] = ""
        row["count"] = ""
        return row


def run_one(path, config, settings):
    """
    Solve one instance under one configuration. Failures become records
    with status `error`.

    """
    name = os.path.basename(path)
    try:
        with open(path) as f:
            inst = read_instance(f.read())
    except (OSError, QbppError) as e:
        logger.warning("Cannot read %s: %s" % (path, e))
        return BenchRecord(name, None, None, None, None, config, ERROR)

    meta = inst.meta
    record = BenchRecord(name, inst.n, meta.get("mu"), meta.get("delta"),
                         meta.get("sigma"), config, ERROR)
    try:
        run_settings = dict(settings)
        run_settings.update(parse_config(config))
        run_settings["trace"] = False
        result = bnp.solve(inst, run_settings)
    except Exception as e:
        logger.exception("Solving %s with %s failed: %s" %
                         (name, config, e))
        return record

    record.status = result.status
    record.seconds = result.stats["seconds"]
    record.upper_bound = result.upper_bound
    record.lower_bound = result.lower_bound
    record.nodes = result.stats["nodes"]
    record.cg_iterations = result.stats["cg_iterations"]
    record.columns = result.stats["columns"]
    return record


def aggregate(records):
    """
    One row per (solver, n, sigma, mu): optimal count, mean seconds and
    mean gap over the runs that finished.

    """
    groups = {}
    for record in records:
        if record.status == ERROR:
            continue
        key = (record.solver, record.n, record.sigma or "", record.mu)
        groups.setdefault(key, []).append(record)

    rows = []
    for key in sorted(groups, key=lambda k: tuple(
            "" if v is None else str(v) for v in k)):
        solver, n, sigma, mu = key
        members = groups[key]
        gaps = [r.gap_percent for r in members]
        row = {field: "" for field in BENCH_FIELDS}
        row.update({
            SCHEMA_FIELD: AGGREGATE,
            "n": _format(n),
            "mu": _format(mu),
            "sigma": sigma,
            "solver": solver,
            "seconds": _format(
                sum(r.seconds for r in members) / len(members)),
            "gap_percent": _format(sum(gaps) / len(gaps)),
            "solved": str(sum(1 for r in members if r.status == OPTIMAL)),
            "count": str(len(members)),
        })
        rows.append(row)
    return rows


class AbstractJob(object):
    """
    Parent job class.

    """
    settings = {}

    def __init__(self, settings):
        self.settings = settings

    def log(self, msg):
        """
        Log message to stderr.

        """
        print(msg, file=sys.stderr)


class BenchJob(AbstractJob):
    """
    Solves every instance under every solver configuration and writes one
    CSV with run rows followed by aggregate rows.

    """
    def run(self, paths, configs=DEFAULT_CONFIGS, out_path=None):
        configs = list(configs)
        for config in configs:
            parse_config(config)
        tasks = [(path, config) for path in sorted(paths)
                 for config in configs]
        threads = max(1, int(self.settings.get("threads", 1)))
        self.log("Running %d solves on %d worker(s)" % (len(tasks), threads))

        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(run_one, path, config, self.settings)
                           for path, config in tasks]
                records = [future.result() for future in futures]
        else:
            records = [run_one(path, config, self.settings)
                       for path, config in tasks]

        for record in records:
            if record.status == ERROR:
                self.log("%s with %s failed" % (record.instance,
                                                record.solver))

        if out_path:
            self.write(out_path, records)
        return records

    def write(self, out_path, records):
        """
        Append rows to `out_path`, writing the header only for a new file.

        """
        exists = os.path.exists(out_path) and os.path.getsize(out_path) > 0
        if exists:
            with open(out_path, newline="") as f:
                header = next(csv.reader(f), [])
            if tuple(header) != BENCH_FIELDS:
                raise InputError("Existing file [%s] has a different bench "
                                 "schema" % out_path)

        with open(out_path, "a", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=BENCH_FIELDS)
            if not exists:
                writer.writeheader()
            for record in records:
                writer.writerow(record.as_row())
            for row in aggregate(records):
                writer.writerow(row)


def instance_paths(directory):
    return sorted(os.path.join(directory, name)
                  for name in os.listdir(directory)
                  if name.endswith(".qbpp"))
