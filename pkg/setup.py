#!/usr/bin/env python
import os
from setuptools import setup
from textwrap import dedent

from datetime import datetime

# Use a date-stamp format for versioning
now = datetime.now()
VERSION = now.strftime("%Y-%m-%d")

NAME = 'irsjam'
LICENSE = 'BSD 3-Clause'
CLASSIFIERS = [
    'Programming Language :: Python',
    'Programming Language :: Python :: 3',
    'Topic :: Scientific/Engineering',
]

DESCRIPTION = "Monte Carlo simulator for passive IRS jamming of MU-MISO links"
LONG_DESCRIPTION = """
**irsjam** simulates a multi-antenna access point serving several users
with zero-forcing beamforming while an illegitimate intelligent reflecting
surface degrades the link, either by randomly changing its phases between
channel estimation and data transmission or by optimizing them with full
channel knowledge.
"""


def _write_version_file():

    fn = os.path.join(os.path.dirname(__file__), 'irsjam', 'version.py')

    version_str = dedent("""
        version = "{}"
        """)

    # Write version file
    with open(fn, 'w') as version_file:
        version_file.write(version_str.format(VERSION))

# Write version and install
_write_version_file()

setup(name=NAME,
      version=VERSION.replace("-", "."),
      license=LICENSE,
      classifiers=CLASSIFIERS,
      description=DESCRIPTION,
      long_description=LONG_DESCRIPTION,
      packages=['irsjam', 'irsjam.test'],
      install_requires=['numpy', 'scipy', 'pandas>=1.5', 'xarray', 'dask',
                        'netCDF4'],
      scripts=['scripts/irsjam', ],
)
