import os

from . import QbppCommand, load_instance, write_text
from ..common import InputError
from ..milp_export import TAGS, build_model, export_filename, normalize_tag
from ..milp_export import write_lp_file


class Command(QbppCommand):
    """
    Write compact MILP formulations of an instance as LP files.

    """
    def get_parser(self, prog_name):
        parser = super(Command, self).get_parser(prog_name)
        parser.add_argument("instance", help="path to a .qbpp file")
        parser.add_argument("--tag", action="append", default=[],
                            help="formulation tag, one of %s; repeatable" %
                                 ", ".join(TAGS))
        parser.add_argument("--all", action="store_true",
                            help="export every formulation")
        parser.add_argument("--out", metavar="DIR",
                            help="output directory (default: next to the "
                                 "instance)")
        return parser

    def take_action(self, parsed_args):
        if parsed_args.all:
            tags = list(TAGS)
        else:
            tags = [normalize_tag(t) for t in parsed_args.tag]
        if not tags:
            raise InputError("Give --tag or --all")

        inst = load_instance(parsed_args.instance)
        base = parsed_args.instance
        if parsed_args.out:
            os.makedirs(parsed_args.out, exist_ok=True)
            base = os.path.join(parsed_args.out, os.path.basename(base))

        for tag in tags:
            path = export_filename(base, tag)
            write_text(path, write_lp_file(build_model(inst, tag)))
            self.emit(path)
        return 0
