import os

from . import QbppCommand, write_text
from ..common import DEFAULT_SETTINGS, InputError, MIXED, SIGMAS
from ..core import write_instance
from ..generator import (
    GeneratorConfig,
    MANIFEST_NAME,
    generate_benchmark,
    generate_group,
    generate_instance,
    instance_filename,
)


class Command(QbppCommand):
    """
    Generate a single benchmark instance, a group of instances sharing
    their items across several mu values (--mus), or with --full the whole
    (n, mu, delta, sigma) cross plus its manifest.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("--full", action="store_true",
                            help="generate the complete benchmark set")
        parser.add_argument("--seed", type=int,
                            default=DEFAULT_SETTINGS["master_seed"],
                            help="random seed (master seed with --full)")
        parser.add_argument("--out", default=".",
                            help="output directory")
        parser.add_argument("--n", type=int,
                            help="number of items")
        parser.add_argument("--mu", type=float, default=1.0)
        parser.add_argument("--mus", metavar="MU[,MU...]",
                            help="one instance per mu, all sharing the "
                                 "same items")
        parser.add_argument("--delta", type=float, default=0.5)
        parser.add_argument("--sigma", default=MIXED,
                            help="one of %s" % ", ".join(SIGMAS))
        parser.add_argument("--copy", type=int, default=0)
        return parser

    def take_action(self, parsed_args):
        out = parsed_args.out
        if parsed_args.full:
            rows = generate_benchmark(out, master_seed=parsed_args.seed)
            self.emit("Wrote %d instances and %s to %s" %
                      (len(rows), MANIFEST_NAME, out))
            return 0

        if parsed_args.n is None:
            raise InputError("Either --full or --n is required")
        if parsed_args.copy < 0:
            raise InputError("--copy must be non-negative")
        config = GeneratorConfig(parsed_args.n, parsed_args.mu,
                                 parsed_args.delta, parsed_args.sigma,
                                 parsed_args.seed)
        if parsed_args.mus:
            mus = self.parse_mus(parsed_args.mus)
            instances = generate_group(config, mus, copy=parsed_args.copy)
        else:
            mus = [config.mu]
            instances = [generate_instance(config, parsed_args.copy)]

        os.makedirs(out, exist_ok=True)
        for mu, inst in zip(mus, instances):
            path = os.path.join(out, instance_filename(
                config.n, mu, config.delta, config.sigma, parsed_args.copy))
            write_text(path, write_instance(inst))
            self.emit(path)
        return 0

    def parse_mus(self, value):
        try:
            mus = [float(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise InputError("--mus takes a comma separated list of numbers")
        if not mus or any(mu <= 0 for mu in mus):
            raise InputError("--mus needs positive values")
        return mus
