#!/usr/bin/env python
"""Setup for the qbpp toolkit."""

from setuptools import setup


setup(
    name='qbpp',
    use_scm_version=True,
    description='qbpp: '
                'Exact Branch-and-Price solver, instance generator and '
                'MILP exporter for the quadratic bin packing problem',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    license='AGPL-3.0',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Affero General Public License v3',
        'Operating System :: POSIX :: Linux',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    packages=[
        'qbpp',
        'qbpp.commands',
    ],
    install_requires=[
        'cliff<3.4.0',
        'numpy',
        'PyYAML',
        'tenacity<8',
    ],
    entry_points={
        'console_scripts': [
            'qbpp = qbpp.shell:main',
        ]
    },
    setup_requires=['setuptools-scm<6'],
)
