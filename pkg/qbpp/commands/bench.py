import os

from . import QbppCommand
from ..common import InputError, get_settings
from ..jobs import DEFAULT_CONFIGS, BenchJob, instance_paths


class Command(QbppCommand):
    """
    Solve a directory of instances under one or more solver configurations
    and append the results to a CSV file.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("directory", help="directory of .qbpp files")
        parser.add_argument("--config", action="append", dest="configs",
                            help="solver configuration bnp-<h>-<maxcols>; "
                                 "repeatable (default: %s)" %
                                 ", ".join(DEFAULT_CONFIGS))
        parser.add_argument("--threads", type=int,
                            help="worker processes")
        parser.add_argument("--time-limit", type=float, dest="time_limit")
        parser.add_argument("--node-limit", type=int, dest="node_limit")
        parser.add_argument("--settings", metavar="PATH")
        parser.add_argument("--out", default="bench.csv", metavar="PATH")
        return parser

    def take_action(self, parsed_args):
        if not os.path.isdir(parsed_args.directory):
            raise InputError("Not a directory: [%s]" %
                             parsed_args.directory)

        settings = get_settings(parsed_args.settings)
        for key in ("threads", "time_limit", "node_limit"):
            value = getattr(parsed_args, key)
            if value is not None:
                settings[key] = value

        job = BenchJob(settings)
        records = job.run(instance_paths(parsed_args.directory),
                          parsed_args.configs or DEFAULT_CONFIGS,
                          parsed_args.out)
        self.emit("Wrote %d runs to %s" % (len(records), parsed_args.out))
        return 0
