#/usr/bin/env python

from __future__ import print_function

import os, os.path
import setuptools


# synprune version
VERSION = open('VERSION').read().strip()
# Create the version.py file
open('synprune/version.py', 'w').write('__version__ = "%s"\n' % VERSION)


setuptools.setup(
    name = 'synprune',
    version = VERSION,
    description = ('Dynamic synthesis and pruning of sparse feedforward '
                   'networks, with the experiment harness to compare them.'),
    license = 'Creative Commons',
    packages = [
        'synprune',
        'synprune.scripts',
        'synprune.tests',
        ],
    package_data = {'synprune': ['defaults.yml']},
    install_requires = [
        'numpy', 'scipy', 'pandas', 'xarray', 'pyyaml', 'matplotlib'],
    zip_safe=False,
    entry_points={
        'console_scripts': [
            'synprune = synprune.scripts.cli:main',
        ]
    },
)
