import logging

from cliff.command import Command

from ..common import EXIT_INPUT, InputError, LimitError
from ..core import read_instance


logger = logging.getLogger(__name__)


def read_text(path):
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise InputError("Cannot read [%s]: %s" % (path, e.strerror))


def load_instance(path):
    return read_instance(read_text(path))


def write_text(path, text):
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise InputError("Cannot write [%s]: %s" % (path, e.strerror))


class QbppCommand(Command):
    """
    Base class of all `qbpp` subcommands.

    Input errors and refused limits are reported on the log and end the
    command with exit code 2.

    """
    def run(self, parsed_args):
        try:
            return super(QbppCommand, self).run(parsed_args)
        except (InputError, LimitError) as e:
            logger.error(str(e))
            return EXIT_INPUT

    def emit(self, line):
        self.app.stdout.write(line + "\n")
