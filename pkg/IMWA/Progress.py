# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Training progress meter
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import sys
import datetime
import time

from .Utils import format_duration

__all__ = ["Progress", "ProgressCR"]


class Progress(object):
    _stdout = sys.stdout
    _last_display = 0

    def __init__(self, labels, total_iterations, stream=None):
        self._stdout = stream if stream is not None else sys.stdout
        self.new_run(labels, total_iterations)

    def new_run(self, labels, total_iterations):
        self.labels = labels
        self.total_iterations = max(1, total_iterations)
        self.current_position = 0
        self.time_start = datetime.datetime.now()
        self.time_current = self.time_start
        self.display(new_run = True)

    def update(self, current_position = -1, delta_position = -1):
        self.time_current = datetime.datetime.now()
        if current_position > -1:
            self.current_position = current_position
        elif delta_position > -1:
            self.current_position += delta_position
        self.display()

    def done(self, message):
        self.display(done_message = message)

    def output_labels(self):
        self._stdout.write(u"%(action)s: arm '%(arm)s' seed %(seed)s  %(extra)s\n" % self.labels)
        self._stdout.flush()

    def _display_needed(self):
        # We only need to update the display every so often.
        if time.time() - self._last_display > 1:
            self._last_display = time.time()
            return True
        return False

    def _elapsed(self):
        timedelta = self.time_current - self.time_start
        return timedelta.days * 86400 + timedelta.seconds + float(timedelta.microseconds) / 1000000.0

    def display(self, new_run = False, done_message = None):
        """
        display(new_run = False[/True], done_message = None)

        Override this method to provide a nicer output.
        """
        if new_run:
            self.output_labels()
            self.last_milestone = 0
            return

        if done_message is not None:
            self._stdout.write("100%%  %d it in %s  %s\n" %
                (self.current_position, format_duration(self._elapsed()), done_message or ""))
            self._stdout.flush()
            return

        rel_position = (self.current_position * 100) // self.total_iterations
        if self.last_milestone + 10 <= rel_position < 100:
            self.last_milestone = (rel_position // 10) * 10
            self._stdout.write("%d%% " % self.last_milestone)
            self._stdout.flush()


class ProgressCR(Progress):
    ## Uses CR char (Carriage Return) just like other progress bars do.
    CR_char = chr(13)

    def display(self, new_run = False, done_message = None):
        if new_run:
            self.output_labels()
            return

        elapsed = self._elapsed()
        rate = elapsed and self.current_position / elapsed or 0.0
        output = u" %3d%%  %d of %d it  %s  %.1f it/s" % (
            (self.current_position * 100) // self.total_iterations,
            self.current_position, self.total_iterations,
            format_duration(elapsed), rate)

        if done_message is not None:
            self._stdout.write(self.CR_char + output + u"  %s\n" % done_message)
            self._stdout.flush()
            return

        if self._display_needed():
            self._stdout.write(self.CR_char + output)
            self._stdout.flush()

# vim:et:ts=4:sts=4:ai
