# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Iterative Model Weight Averaging toolkit
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import os
import sys
import datetime
from logging import debug

from .ExitCodes import EX_OSFILE

try:
    import numpy as np
except ImportError:
    sys.stderr.write(u"""
!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!
ImportError trying to import numpy.
Please install the numpy module:
$ pip install numpy
!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!
""")
    sys.stderr.flush()
    sys.exit(EX_OSFILE)

try:
    import dateutil.parser
    import dateutil.tz
except ImportError:
    sys.stderr.write(u"""
!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!
ImportError trying to import dateutil.parser and dateutil.tz.
Please install the python dateutil module:
$ sudo apt-get install python-dateutil
  or
$ pip install python-dateutil
!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!
""")
    sys.stderr.flush()
    sys.exit(EX_OSFILE)


__all__ = []

# Stream identifiers for derive_seed(); keep stable, they are part of
# the reproducibility contract of saved results.
STREAM_DATASET = 1
STREAM_INIT = 2
STREAM_LOADER = 3


def split_evenly(total, parts):
    """
    split_evenly(10, 3) -> [4, 3, 3]

    The first (total mod parts) chunks get one extra element.
    """
    if parts < 1:
        raise ValueError("Cannot split into %d parts" % parts)
    base, extra = divmod(total, parts)
    return [base + 1 if idx < extra else base for idx in range(parts)]
__all__.append("split_evenly")


def derive_seed(seed, *stream):
    """
    Derive a child seed from a replication seed and a stream path
    (e.g. derive_seed(3, STREAM_LOADER, 1) for the loader of model 1).
    """
    seq = np.random.SeedSequence([int(seed)] + [int(s) for s in stream])
    return int(seq.generate_state(1, dtype=np.uint32)[0])
__all__.append("derive_seed")


def mkdir_with_parents(dir_name):
    """
    mkdir_with_parents(dst_dir)

    Create directory 'dir_name' with all parent directories

    Returns True on success, False otherwise.
    """
    pathmembers = dir_name.split(os.sep)
    tmp_stack = []
    while pathmembers and not os.path.isdir(os.sep.join(pathmembers)):
        tmp_stack.append(pathmembers.pop())
    while tmp_stack:
        pathmembers.append(tmp_stack.pop())
        cur_dir = os.sep.join(pathmembers)
        if not cur_dir:
            continue
        try:
            debug("mkdir(%s)" % cur_dir)
            os.mkdir(cur_dir)
        except (OSError, IOError) as e:
            debug("Can not make directory '%s' (Reason: %s)" % (cur_dir, e.strerror))
            return False
    return True
__all__.append("mkdir_with_parents")


def utc_now():
    return datetime.datetime.now(dateutil.tz.tzutc())
__all__.append("utc_now")


def format_timestamp(when):
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")
__all__.append("format_timestamp")


def parse_timestamp(text):
    """
    Convert a string formatted like '2024-06-27T15:56:34Z' into a python datetime
    """
    return dateutil.parser.parse(text)
__all__.append("parse_timestamp")


def format_duration(seconds):
    if seconds < 60:
        return "%.2fs" % seconds
    minutes, seconds = divmod(seconds, 60)
    if minutes < 60:
        return "%dm%02ds" % (minutes, seconds)
    hours, minutes = divmod(minutes, 60)
    return "%dh%02dm" % (hours, minutes)
__all__.append("format_duration")

# vim:et:ts=4:sts=4:ai
