import json
import logging
import math
import os

from . import QbppCommand, load_instance, write_text
from .. import bnp
from ..common import EXIT_LIMIT, EXIT_OK, OPTIMAL, InputError, get_settings
from ..core import write_solution
from ..jobs import BenchRecord


logger = logging.getLogger(__name__)


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _base(path):
    base, ext = os.path.splitext(path)
    return base if ext == ".qbpp" else path


class Command(QbppCommand):
    """
    Solve one instance to optimality with Branch-and-Price.

    Writes the best solution found and a JSON run record. Exits with 0 when
    optimality was proven and 1 when a time or node limit stopped the
    search.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("instance", help="path to a .qbpp file")
        parser.add_argument("--h", type=int,
                            help="patterns kept per DP state in the "
                                 "pricing heuristic")
        parser.add_argument("--max-cols", type=int, dest="max_cols",
                            help="columns added per pricing round")
        parser.add_argument("--time-limit", type=float, dest="time_limit",
                            help="wall-clock limit in seconds")
        parser.add_argument("--node-limit", type=int, dest="node_limit")
        parser.add_argument("--seed", type=int,
                            help="recorded in the run record; the solver "
                                 "itself is deterministic")
        parser.add_argument("--trace", metavar="PATH",
                            help="write per-iteration bounds as JSON")
        parser.add_argument("--settings", metavar="PATH",
                            help="YAML settings file")
        parser.add_argument("--out", metavar="PATH",
                            help="solution file (default: <instance>.sol)")
        parser.add_argument("--stats", metavar="PATH",
                            help="run record (default: <instance>.json)")
        return parser

    def settings(self, parsed_args):
        settings = get_settings(parsed_args.settings)
        overrides = {
            "h": parsed_args.h,
            "max_cols_per_iter": parsed_args.max_cols,
            "time_limit": parsed_args.time_limit,
            "node_limit": parsed_args.node_limit,
        }
        for key, value in overrides.items():
            if value is not None:
                settings[key] = value
        if settings["h"] < 1 or settings["max_cols_per_iter"] < 1:
            raise InputError("--h and --max-cols must be at least 1")
        settings["trace"] = bool(parsed_args.trace)
        return settings

    def take_action(self, parsed_args):
        settings = self.settings(parsed_args)
        inst = load_instance(parsed_args.instance)

        result = bnp.solve(inst, settings)

        solver = "bnp-%d-%d" % (settings["h"],
                                settings["max_cols_per_iter"])
        meta = inst.meta
        record = BenchRecord(os.path.basename(parsed_args.instance), inst.n,
                             meta.get("mu"), meta.get("delta"),
                             meta.get("sigma"), solver, result.status,
                             result.stats["seconds"], result.upper_bound,
                             result.lower_bound, result.stats["nodes"],
                             result.stats["cg_iterations"],
                             result.stats["columns"])
        document = {key: _finite(value)
                    for key, value in record.as_dict().items()}
        document["seed"] = parsed_args.seed
        document["stats"] = result.stats

        base = _base(parsed_args.instance)
        out = parsed_args.out or base + ".sol"
        stats_path = parsed_args.stats or base + ".json"
        write_text(out, write_solution(result.best_solution))
        write_text(stats_path, json.dumps(document, indent=2,
                                          sort_keys=True) + "\n")
        if parsed_args.trace:
            write_text(parsed_args.trace,
                       json.dumps(result.trace, indent=2) + "\n")

        self.emit("%s: %s, objective %d, lower bound %s, gap %.4f%%" % (
            record.instance, result.status, result.upper_bound,
            result.lower_bound, result.gap_percent))
        return EXIT_OK if result.status == OPTIMAL else EXIT_LIMIT
