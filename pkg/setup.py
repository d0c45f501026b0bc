#!/usr/bin/env python
# -*- coding: utf-8 -*-

from __future__ import print_function

import sys
import os

try:
    import numpy
    print("Using numpy %s for numerical work" % numpy.__version__)
except ImportError as e:
    sys.stderr.write(str(e) + "\n")
    sys.stderr.write("numpy will be installed as a dependency.\n")

from setuptools import setup

import IMWA.PkgInfo

if sys.version_info < (3, 6):
    sys.stderr.write("Your Python version %d.%d.%d is not supported.\n" % sys.version_info[:3])
    sys.stderr.write("imwa requires Python 3.6 or newer.\n")
    sys.exit(1)

## Remove 'MANIFEST' file to force
## distutils to recreate it.
## Only in "sdist" stage. Otherwise
## it makes life difficult to packagers.
if len(sys.argv) > 1 and sys.argv[1] == "sdist":
    try:
        os.unlink("MANIFEST")
    except OSError as e:
        pass

## Don't install docs when $IMWA_PACKAGING is set
if not os.getenv("IMWA_PACKAGING"):
    doc_path = os.getenv("IMWA_INSTPATH_DOC") or "share/doc/packages"
    data_files = [
        (doc_path+"/imwa", ["README.md", "INSTALL.md", "DESIGN.md"]),
    ]
else:
    data_files = None

## Main distutils info
setup(
    ## Content description
    name=IMWA.PkgInfo.package,
    version=IMWA.PkgInfo.version,
    packages=['IMWA'],
    scripts=['imwa'],
    data_files=data_files,
    test_suite='tests',

    ## Packaging details
    license=IMWA.PkgInfo.license,
    description=IMWA.PkgInfo.short_description,
    long_description=IMWA.PkgInfo.long_description,

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License v2 or later (GPLv2+)',
        'Natural Language :: English',
        'Operating System :: POSIX',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],

    python_requires=">=3.6",
    install_requires=["numpy", "python-dateutil", "python-magic"]
)

# vim:et:ts=4:sts=4:ai
