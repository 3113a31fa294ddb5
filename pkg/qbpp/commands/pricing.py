from . import QbppCommand, read_text
from ..common import DEFAULT_SETTINGS, InputError
from ..pricing import bb_solve, enumerate_solve, mch_solve
from ..pricing import read_pricing_problem


METHODS = (
    EXACT,
    ENUMERATE,
    MCH
) = (
    'exact',
    'enumerate',
    'mch'
)


class Command(QbppCommand):
    """
    Solve a standalone pricing problem (a knapsack with quadratic profits
    and conflict pairs) read from a GQKP file.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("problem", help="path to a GQKP file")
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--exact", action="store_const", dest="method",
                           const=EXACT, help="branch-and-bound (default)")
        group.add_argument("--enumerate", action="store_const",
                           dest="method", const=ENUMERATE,
                           help="exhaustive subset scan")
        group.add_argument("--mch", action="store_const", dest="method",
                           const=MCH, help="constructive heuristic")
        parser.add_argument("--h", type=int, default=DEFAULT_SETTINGS["h"])
        parser.add_argument("--max-items", type=int, dest="max_items",
                            default=DEFAULT_SETTINGS["enumerate_max_items"])
        return parser

    def take_action(self, parsed_args):
        pp = read_pricing_problem(read_text(parsed_args.problem))
        method = parsed_args.method or EXACT

        if method == EXACT:
            result = bb_solve(pp)
            pattern, value = result.pattern, result.value
            self.emit("nodes %d" % result.stats["nodes"])
        elif method == ENUMERATE:
            pattern, value = enumerate_solve(
                pp, max_items=parsed_args.max_items)
        else:
            if parsed_args.h < 1:
                raise InputError("--h must be at least 1")
            ranked = mch_solve(pp, parsed_args.h)
            pattern, value = ranked[0] if ranked else ((), 0.0)

        self.emit("value %r" % value)
        self.emit("pattern %s" % " ".join(str(i + 1) for i in pattern))
        return 0
