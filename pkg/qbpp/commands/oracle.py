from . import QbppCommand, load_instance, write_text
from ..common import DEFAULT_SETTINGS, InputError
from ..core import write_solution
from ..oracle import solve_exact


class Command(QbppCommand):
    """
    Solve a small instance by enumerating every set partition.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("instance")
        parser.add_argument("--max-items", type=int, dest="max_items",
                            default=DEFAULT_SETTINGS["oracle_max_items"])
        parser.add_argument("--out", metavar="PATH",
                            help="write the optimal solution here")
        return parser

    def take_action(self, parsed_args):
        inst = load_instance(parsed_args.instance)
        solution, objective = solve_exact(inst,
                                          max_items=parsed_args.max_items)
        if solution is None:
            raise InputError("Instance has no feasible packing")
        if parsed_args.out:
            write_text(parsed_args.out, write_solution(solution))
        self.emit("objective %d" % objective)
        return 0
