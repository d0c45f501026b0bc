# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Exceptions library
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import

from logging import debug
from . import ExitCodes


class ImwaException(Exception):
    exit_code = ExitCodes.EX_SOFTWARE

    def __init__(self, message=""):
        super(ImwaException, self).__init__(message)
        self.message = u"%s" % message

    def __str__(self):
        return self.__unicode__()

    def __unicode__(self):
        return self.message

    def get_error_code(self):
        return self.exit_code


class ParameterError(ImwaException):
    exit_code = ExitCodes.EX_USAGE


class ConfigError(ImwaException):
    """Constraint violation or unknown key in a run configuration.

    'field' is the dotted path of the offending option (e.g.
    'schedule.num_models') and 'bound' the violated constraint.
    """
    exit_code = ExitCodes.EX_CONFIG

    def __init__(self, message, field=None, bound=None):
        self.field = field
        self.bound = bound
        if field:
            message = u"%s: %s" % (field, message)
        if bound:
            message = u"%s (requires %s)" % (message, bound)
        super(ConfigError, self).__init__(message)


class DatasetError(ImwaException):
    exit_code = ExitCodes.EX_DATAERR

    def __init__(self, message, filename=None, line=None):
        self.filename = filename
        self.line = line
        if filename and line is not None:
            message = u"%s, line %d: %s" % (filename, line, message)
        elif filename:
            message = u"%s: %s" % (filename, message)
        super(DatasetError, self).__init__(message)


class NumericError(ImwaException):
    exit_code = ExitCodes.EX_NUMERIC

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = u"%s (at iteration %d)" % (message, iteration)
        debug("NumericError: %s" % message)
        super(NumericError, self).__init__(message)


class CheckpointFormatError(ImwaException):
    exit_code = ExitCodes.EX_DATAERR

    def __init__(self, filename, message):
        self.filename = filename
        super(CheckpointFormatError, self).__init__(
            u"%s: not a valid checkpoint (%s)" % (filename, message))

# vim:et:ts=4:sts=4:ai
