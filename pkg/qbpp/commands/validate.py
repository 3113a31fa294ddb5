from . import QbppCommand, load_instance, read_text
from ..common import EXIT_INPUT
from ..core import read_solution, validate_solution


class Command(QbppCommand):
    """
    Check a solution file against its instance.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("instance")
        parser.add_argument("solution")
        return parser

    def take_action(self, parsed_args):
        inst = load_instance(parsed_args.instance)
        sol = read_solution(inst, read_text(parsed_args.solution))
        report = validate_solution(inst, sol)
        if report.valid:
            self.emit("valid: %d bins, objective %d" %
                      (len(sol.bins), report.recomputed_objective))
            return 0

        for msg in report.messages():
            self.emit("violation: %s" % msg)
        return EXIT_INPUT
