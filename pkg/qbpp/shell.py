"""
The `qbpp` command line application.

"""
import sys

from cliff.app import App
from cliff.commandmanager import CommandManager

from . import __version__
from .commands import bench, export, generate, oracle, pricing, solve
from .commands import validate


COMMANDS = (
    ("generate", generate.Command),
    ("solve", solve.Command),
    ("export", export.Command),
    ("bench", bench.Command),
    ("validate", validate.Command),
    ("oracle", oracle.Command),
    ("pricing", pricing.Command),
)


class QbppApp(App):

    def __init__(self):
        super(QbppApp, self).__init__(
            description="Exact solver toolkit for the quadratic bin "
                        "packing problem",
            version=__version__,
            command_manager=CommandManager("qbpp.cli"),
            deferred_help=True,
        )
        for name, command in COMMANDS:
            self.command_manager.add_command(name, command)


def main(argv=sys.argv[1:]):
    # No interactive mode.
    if not argv:
        argv = ["help"]
    return QbppApp().run(argv)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
