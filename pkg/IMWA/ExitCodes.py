# -*- coding: utf-8 -*-

# patterned on /usr/include/sysexits.h

EX_OK                = 0
EX_GENERAL           = 1
EX_PARTIAL           = 2    # some runs of a plan succeeded, while others failed
EX_NUMERIC           = 16   # training diverged (non-finite gradient or weights)
EX_USAGE             = 64   # The command was used incorrectly (e.g. bad command line syntax)
EX_DATAERR           = 65   # Malformed dataset, CSV or checkpoint file
EX_SOFTWARE          = 70   # internal software error
EX_OSERR             = 71   # system error (e.g. out of memory)
EX_OSFILE            = 72   # OS error (e.g. missing numpy)
EX_IOERR             = 74   # An error occurred while doing I/O on some file.
EX_CONFIG            = 78   # Configuration file error
_EX_SIGNAL           = 128
_EX_SIGINT           = 2
EX_BREAK             = _EX_SIGNAL + _EX_SIGINT # Control-C (KeyboardInterrupt raised)

class ExitScoreboard(object):
    """Helper to return best return code"""
    def __init__(self):
        self._success = 0
        self._failed = 0
        self._last_failure = EX_GENERAL

    def success(self):
        self._success += 1

    def failed(self, code=EX_GENERAL):
        self._failed += 1
        self._last_failure = code

    def rc(self):
        if self._success:
            if not self._failed:
                return EX_OK
            return EX_PARTIAL
        if self._failed:
            return self._last_failure
        return EX_GENERAL
