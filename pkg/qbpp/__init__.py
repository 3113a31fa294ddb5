import pkg_resources
# Single-source package version, see
# https://packaging.python.org/guides/single-sourcing-package-version/
try:
    __version__ = pkg_resources.get_distribution('qbpp').version
except pkg_resources.DistributionNotFound:
    __version__ = '0.0.0'
