#!/usr/bin/env python
"""
Run the qbpp unit tests under coverage.

Arguments are test paths or dotted test names; without any, everything
under tests/unit is discovered.
"""

import logging
import sys
import unittest
from coverage import coverage


if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING)

    args = sys.argv[1:]
    paths = [arg for arg in args if arg[0] != '-']
    verbosity = 2 if '-v' in args else 1

    c = coverage(source=['qbpp'],
                 omit=['*tests*', '*requirements'],
                 auto_data=True)
    c.start()
    loader = unittest.TestLoader()
    if paths:
        names = [p[:-3].replace('/', '.') if p.endswith('.py') else p
                 for p in paths]
        suite = loader.loadTestsFromNames(names)
    else:
        suite = loader.discover('tests/unit', top_level_dir='.')
    result = unittest.TextTestRunner(verbosity=verbosity).run(suite)
    c.stop()
    c.report(show_missing=True)
    sys.exit(0 if result.wasSuccessful() else 1)
